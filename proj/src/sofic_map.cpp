#include "sofic/sofic_map.hpp"

#include <algorithm>

#include "sofic/errors.hpp"
#include "sofic/rng.hpp"

namespace sofic {

namespace {

Permutation invert(const Permutation& p) {
  Permutation inv(p.size(), static_cast<Vertex>(p.size()));
  for (std::size_t v = 0; v < p.size(); ++v) {
    if (p[v] >= p.size() || inv[p[v]] != p.size())
      throw ValidationError("generator map is not a permutation");
    inv[p[v]] = static_cast<Vertex>(v);
  }
  return inv;
}

}  // namespace

SoficMap::SoficMap(GroupSpec group, std::vector<Permutation> generator_perms,
                   std::optional<std::vector<std::uint8_t>> partition)
    : group_(std::move(group)), perms_(std::move(generator_perms)), partition_(std::move(partition)) {
  if (static_cast<int>(perms_.size()) != group_.generator_count())
    throw StructuralError("one permutation per generator required");
  n_ = perms_.empty() ? 0 : perms_.front().size();
  if (perms_.empty()) throw StructuralError("sofic map needs at least one generator");
  if (n_ == 0) throw ValidationError("vertex set must be nonempty");
  for (const auto& p : perms_) {
    if (p.size() != n_) throw StructuralError("permutations must share one vertex set");
    inverses_.push_back(invert(p));
  }
  if (partition_) {
    if (partition_->size() != n_) throw StructuralError("partition labels must cover V");
    for (auto l : *partition_)
      if (l > 1) throw ValidationError("partition labels must be 0 or 1");
  }
}

SoficMap SoficMap::product(const SoficMap& sigma, const SoficMap& tau) {
  const std::size_t nv = sigma.size(), nw = tau.size();
  std::vector<Permutation> perms;
  for (int s = 0; s < sigma.group().generator_count(); ++s) {
    Permutation p(nv * nw);
    for (std::size_t v = 0; v < nv; ++v)
      for (std::size_t w = 0; w < nw; ++w) p[v * nw + w] = static_cast<Vertex>(sigma.permutation(s)[v] * nw + w);
    perms.push_back(std::move(p));
  }
  for (int t = 0; t < tau.group().generator_count(); ++t) {
    Permutation p(nv * nw);
    for (std::size_t v = 0; v < nv; ++v)
      for (std::size_t w = 0; w < nw; ++w) p[v * nw + w] = static_cast<Vertex>(v * nw + tau.permutation(t)[w]);
    perms.push_back(std::move(p));
  }
  SoficMap out(GroupSpec::direct_product(sigma.group(), tau.group()), std::move(perms));
  out.factors_ = std::make_shared<const std::pair<SoficMap, SoficMap>>(sigma, tau);
  return out;
}

const Permutation& SoficMap::permutation(int generator) const {
  if (generator < 0 || generator >= static_cast<int>(perms_.size()))
    throw StructuralError("generator index out of range");
  return perms_[static_cast<std::size_t>(generator)];
}

const Permutation& SoficMap::inverse_permutation(int generator) const {
  if (generator < 0 || generator >= static_cast<int>(perms_.size()))
    throw StructuralError("generator index out of range");
  return inverses_[static_cast<std::size_t>(generator)];
}

Vertex SoficMap::apply_letter(Letter l, Vertex v) const {
  const auto gen = static_cast<std::size_t>(generator_of(l));
  return is_inverse_letter(l) ? inverses_[gen][v] : perms_[gen][v];
}

const SoficMap& SoficMap::left_factor() const {
  if (!factors_) throw StructuralError("sofic map does not carry a product structure");
  return factors_->first;
}

const SoficMap& SoficMap::right_factor() const {
  if (!factors_) throw StructuralError("sofic map does not carry a product structure");
  return factors_->second;
}

Vertex SoficMap::pair_vertex(Vertex v, Vertex w) const {
  return static_cast<Vertex>(v * right_factor().size() + w);
}

std::pair<Vertex, Vertex> SoficMap::split_vertex(Vertex vw) const {
  const auto nw = static_cast<Vertex>(right_factor().size());
  return {vw / nw, vw % nw};
}

namespace {

// Letters whose composition (rightmost first) realizes g.
Word letters_for(const GroupSpec& group, const GroupElement& g) {
  if (group.kind() != GroupKind::kDirectProduct) return group.word_for(g);
  Word out = letters_for(group.left(), g.left());
  const Letter shift = 2 * group.left().generator_count();
  for (Letter l : letters_for(group.right(), g.right())) out.push_back(l + shift);
  return out;
}

}  // namespace

Vertex SoficMap::evaluate(const GroupElement& g, Vertex v) const {
  if (v >= n_) throw StructuralError("vertex out of range");
  if (factors_) {
    if (!group_.contains(g)) throw StructuralError("element not in the map's group");
    const auto [a, b] = split_vertex(v);
    return pair_vertex(factors_->first.evaluate(g.left(), a), factors_->second.evaluate(g.right(), b));
  }
  const Word w = letters_for(group_, g);
  for (auto it = w.rbegin(); it != w.rend(); ++it) v = apply_letter(*it, v);
  return v;
}

Permutation SoficMap::image(const GroupElement& g) const {
  Permutation out(n_);
  if (factors_) {
    for (std::size_t v = 0; v < n_; ++v) out[v] = evaluate(g, static_cast<Vertex>(v));
    return out;
  }
  const Word w = letters_for(group_, g);
  for (std::size_t v = 0; v < n_; ++v) {
    auto x = static_cast<Vertex>(v);
    for (auto it = w.rbegin(); it != w.rend(); ++it) x = apply_letter(*it, x);
    out[v] = x;
  }
  return out;
}

SoficMap random_uniform(const GroupSpec& group, std::size_t n, std::uint64_t seed) {
  if (!group.is_word_kind())
    throw StructuralError("random_uniform requires a free or free-product group");
  if (n == 0) throw ValidationError("vertex count must be positive");
  const CounterRng root(seed);
  std::vector<Permutation> perms;
  for (int s = 0; s < group.generator_count(); ++s)
    perms.push_back(random_permutation(n, root.split(static_cast<std::uint64_t>(s))));
  return SoficMap(group, std::move(perms));
}

GroupSpec partitioned_group() { return GroupSpec::free_product({{"a", "b"}, {"a'", "b'"}}); }

SoficMap partitioned_random(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ValidationError("n must be positive");
  const std::size_t nu = 3 * n, nv = 4 * n;
  const CounterRng root(seed);
  std::vector<Permutation> perms;
  for (int s = 0; s < 2; ++s) {
    const CounterRng stream = root.split(static_cast<std::uint64_t>(s));
    const auto on_u = random_permutation(nu, stream.split(0));
    const auto on_w = random_permutation(n, stream.split(1));
    Permutation p(nv);
    for (std::size_t i = 0; i < nu; ++i) p[i] = on_u[i];
    for (std::size_t i = 0; i < n; ++i) p[nu + i] = static_cast<Vertex>(nu + on_w[i]);
    perms.push_back(std::move(p));
  }
  for (int s = 2; s < 4; ++s)
    perms.push_back(random_permutation(nv, root.split(static_cast<std::uint64_t>(s))));
  std::vector<std::uint8_t> labels(nv, 0);
  std::fill(labels.begin() + static_cast<std::ptrdiff_t>(nu), labels.end(), 1);
  return SoficMap(partitioned_group(), std::move(perms), std::move(labels));
}

SoficMap quotient_map(const GroupSpec& group, std::size_t n) {
  switch (group.kind()) {
    case GroupKind::kFree: {
      if (group.generator_count() != 1)
        throw StructuralError("quotient_map: only Z among free groups");
      if (n == 0) throw ValidationError("n must be positive");
      Permutation p(n);
      for (std::size_t v = 0; v < n; ++v) p[v] = static_cast<Vertex>((v + 1) % n);
      return SoficMap(group, {p});
    }
    case GroupKind::kFiniteTable: {
      const std::size_t order = group.order();
      std::vector<Permutation> perms;
      for (int s = 0; s < group.generator_count(); ++s) {
        const GroupElement gen = group.generator(s);
        Permutation p(order);
        for (std::size_t v = 0; v < order; ++v)
          p[v] = static_cast<Vertex>(group.multiply(gen, GroupElement::from_index(v)).index());
        perms.push_back(std::move(p));
      }
      return SoficMap(group, std::move(perms));
    }
    case GroupKind::kDirectProduct:
      return SoficMap::product(quotient_map(group.left(), n), quotient_map(group.right(), n));
    case GroupKind::kFreeProduct:
      break;
  }
  throw StructuralError("quotient_map: unsupported group kind");
}

DefectReport defect(const SoficMap& sigma,
                    const std::vector<std::pair<GroupElement, GroupElement>>& pairs,
                    const std::vector<GroupElement>& elements) {
  const GroupSpec& group = sigma.group();
  const double n = static_cast<double>(sigma.size());
  DefectReport report;
  for (const auto& [g, h] : pairs) {
    const Permutation pg = sigma.image(g), ph = sigma.image(h);
    const Permutation pgh = sigma.image(group.multiply(g, h));
    std::size_t bad = 0;
    for (std::size_t v = 0; v < sigma.size(); ++v) bad += pg[ph[v]] != pgh[v];
    report.multiplicativity.push_back({g, h, static_cast<double>(bad) / n});
  }
  for (const auto& g : elements) {
    const Permutation pg = sigma.image(g);
    std::size_t fixed = 0;
    for (std::size_t v = 0; v < sigma.size(); ++v) fixed += pg[v] == v;
    report.fixed_points.push_back({g, static_cast<double>(fixed) / n});
  }
  return report;
}

}  // namespace sofic
