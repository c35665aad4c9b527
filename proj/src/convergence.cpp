#include "sofic/convergence.hpp"

#include <cmath>
#include <functional>
#include <numeric>

#include "sofic/errors.hpp"
#include "sofic/parallel.hpp"

namespace sofic {

namespace {

constexpr std::size_t kVertexBlock = 64;
constexpr std::size_t kAtomBlock = 64;

// Probability vector accumulated on the patterns actually hit.
class SparseLaw {
 public:
  explicit SparseLaw(std::size_t size) : mass_(size, 0.0) {}

  void add(std::size_t idx, double w) {
    if (mass_[idx] == 0.0) touched_.push_back(idx);
    mass_[idx] += w;
  }

  /// TV to `target` (whose entries sum to target_mass); resets the law.
  double distance_and_clear(const Eigen::VectorXd& target, double target_mass) {
    double l1 = target_mass;
    for (auto idx : touched_) {
      const double p = target[static_cast<Eigen::Index>(idx)];
      l1 += std::abs(mass_[idx] - p) - p;
      mass_[idx] = 0.0;
    }
    touched_.clear();
    return 0.5 * l1;
  }

 private:
  std::vector<double> mass_;
  std::vector<std::size_t> touched_;
};

bool bad(double distance, double epsilon) { return !(distance < epsilon - kProbabilityTolerance); }

// Configurations standing in for nu, with weights: the atoms of an explicit
// measure, otherwise independent draws.
struct WeightedPoints {
  std::vector<Configuration> points;
  std::vector<double> weights;
  bool exact = false;
};

WeightedPoints points_of(const ModelMeasure& nu, std::size_t samples, std::uint64_t seed, std::size_t exact_limit) {
  WeightedPoints out;
  if (nu.is_explicit() && nu.support().size() <= exact_limit) {
    out.points = nu.support();
    out.weights.assign(nu.weights().data(), nu.weights().data() + nu.weights().size());
    out.exact = true;
    return out;
  }
  if (samples == 0) throw ValidationError("need at least one sample");
  out.points.resize(samples);
  const CounterRng root(seed);
  for_each_block(samples, kAtomBlock, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      CounterRng rng = root.split(i);
      out.points[i] = nu.sample(rng);
    }
  });
  out.weights.assign(samples, 1.0 / static_cast<double>(samples));
  return out;
}

void check_sizes(const SoficMap& sigma, const ModelMeasure& nu, std::size_t q) {
  if (nu.vertex_count() != sigma.size()) throw StructuralError("model measure lives on a different vertex set");
  if (nu.alphabet_size() != q) throw StructuralError("model measure alphabet differs from the process alphabet");
}

// Exact law of Pi_v x|_F for x ~ p^{x V}: coordinates are independent
// except where two window elements land on the same vertex.
void iid_local_law(const WindowImages& images, const Eigen::VectorXd& p, Vertex v, SparseLaw& law) {
  const std::size_t m = images.window_size();
  const auto q = static_cast<std::size_t>(p.size());
  std::vector<Vertex> distinct;
  std::vector<std::size_t> slot(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Vertex u = images(i, v);
    auto it = std::find(distinct.begin(), distinct.end(), u);
    slot[i] = static_cast<std::size_t>(it - distinct.begin());
    if (it == distinct.end()) distinct.push_back(u);
  }
  const std::size_t assignments = pattern_count(q, distinct.size());
  for (std::size_t a = 0; a < assignments; ++a) {
    const auto symbols = decode_pattern(a, q, distinct.size());
    double w = 1.0;
    for (auto s : symbols) w *= p[s];
    if (w == 0.0) continue;
    std::size_t idx = 0;
    for (std::size_t i = 0; i < m; ++i) idx = idx * q + symbols[slot[i]];
    law.add(idx, w);
  }
}

DefectEstimate sampled_defect(GoodModelTest prototype, std::size_t samples, std::uint64_t seed,
                              const std::function<Configuration(CounterRng&)>& draw) {
  if (samples == 0) throw ValidationError("need at least one sample");
  const CounterRng root(seed);
  std::vector<std::size_t> bad_count(block_count(samples, kAtomBlock), 0);
  for_each_block(samples, kAtomBlock, [&](std::size_t b, std::size_t begin, std::size_t end) {
    GoodModelTest test = prototype;
    for (std::size_t i = begin; i < end; ++i) {
      CounterRng rng = root.split(i);
      if (!test.good(draw(rng))) ++bad_count[b];
    }
  });
  const double n = static_cast<double>(samples);
  const double p = static_cast<double>(std::accumulate(bad_count.begin(), bad_count.end(), std::size_t{0})) / n;
  return {p, std::sqrt(p * (1.0 - p) / n), samples, false};
}

Eigen::VectorXd kron(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a[i] * b;
  return out;
}

}  // namespace

double lw_defect(const SoficMap& sigma, const ModelMeasure& nu, const MarginalOracle& mu, const Window& window,
                 double epsilon, std::size_t samples, std::uint64_t seed) {
  if (!(epsilon > 0)) throw ValidationError("epsilon must be positive");
  const std::size_t q = mu.alphabet().size();
  check_sizes(sigma, nu, q);
  const WindowImages images(sigma, window);
  const Eigen::VectorXd target = mu.marginal(window).probabilities;
  const double target_mass = target.sum();
  const bool iid = nu.kind() == ModelMeasure::Kind::kIid;
  WeightedPoints atoms;
  if (!iid) atoms = points_of(nu, samples, seed, kExactAtomLimit);

  const std::size_t n = sigma.size();
  std::vector<std::size_t> bad_count(block_count(n, kVertexBlock), 0);
  for_each_block(n, kVertexBlock, [&](std::size_t b, std::size_t begin, std::size_t end) {
    SparseLaw law(static_cast<std::size_t>(target.size()));
    for (std::size_t v = begin; v < end; ++v) {
      if (iid) {
        iid_local_law(images, nu.letter_weights(), static_cast<Vertex>(v), law);
      } else {
        for (std::size_t a = 0; a < atoms.points.size(); ++a)
          law.add(images.pattern_index(atoms.points[a], static_cast<Vertex>(v)), atoms.weights[a]);
      }
      if (bad(law.distance_and_clear(target, target_mass), epsilon)) ++bad_count[b];
    }
  });
  return static_cast<double>(std::accumulate(bad_count.begin(), bad_count.end(), std::size_t{0})) /
         static_cast<double>(n);
}

DefectEstimate quenched_defect(const SoficMap& sigma, const ModelMeasure& nu, const MarginalOracle& mu,
                               const Window& window, double epsilon, std::size_t samples, std::uint64_t seed) {
  check_sizes(sigma, nu, mu.alphabet().size());
  const GoodModelTest prototype(sigma, mu, window, epsilon);
  if (nu.is_explicit() && nu.support().size() <= kExactAtomLimit) {
    const auto& atoms = nu.support();
    const auto& w = nu.weights();
    std::vector<double> bad_mass(block_count(atoms.size(), kAtomBlock), 0.0);
    for_each_block(atoms.size(), kAtomBlock, [&](std::size_t b, std::size_t begin, std::size_t end) {
      GoodModelTest test = prototype;
      for (std::size_t i = begin; i < end; ++i)
        if (!test.good(atoms[i])) bad_mass[b] += w[static_cast<Eigen::Index>(i)];
    });
    return {std::accumulate(bad_mass.begin(), bad_mass.end(), 0.0), 0.0, 0, true};
  }
  return sampled_defect(prototype, samples, seed, [&](CounterRng& rng) { return nu.sample(rng); });
}

DefectEstimate dq_defect(const SoficMap& sigma, const ModelMeasure& nu, const MarginalOracle& mu,
                         const Window& window, double epsilon, std::size_t samples, std::uint64_t seed) {
  const std::size_t q = mu.alphabet().size();
  check_sizes(sigma, nu, q);
  const Eigen::VectorXd single = mu.marginal(window).probabilities;
  const PatternDistribution mu_f{window, q, single};
  const GoodModelTest prototype(WindowImages(sigma, window), tensor(mu_f, mu_f).probabilities, q * q, epsilon);

  if (nu.is_explicit()) {
    const auto& atoms = nu.support();
    const auto& w = nu.weights();
    const std::size_t k = atoms.size();
    if (k * k <= kMaxSquaredAtoms) {
      std::vector<double> bad_mass(k, 0.0);
      for_each_block(k, 1, [&](std::size_t, std::size_t begin, std::size_t end) {
        GoodModelTest test = prototype;
        for (std::size_t i = begin; i < end; ++i)
          for (std::size_t j = 0; j < k; ++j)
            if (!test.good(pair_configuration(atoms[i], atoms[j])))
              bad_mass[i] += w[static_cast<Eigen::Index>(i)] * w[static_cast<Eigen::Index>(j)];
      });
      return {std::accumulate(bad_mass.begin(), bad_mass.end(), 0.0), 0.0, 0, true};
    }
    return sampled_defect(prototype, samples, seed, [&](CounterRng& rng) {
      const std::size_t i = draw_index(rng, w), j = draw_index(rng, w);
      return pair_configuration(atoms[i], atoms[j]);
    });
  }
  const ModelMeasure squared = nu.square();
  return sampled_defect(prototype, samples, seed, [&](CounterRng& rng) { return squared.sample(rng); });
}

Dispersion dispersion(const SoficMap& sigma, const ModelMeasure& nu, const Window& window, std::size_t samples,
                      std::uint64_t seed, const MarginalOracle* mu, double threshold) {
  if (samples < 2 && !nu.is_explicit()) throw ValidationError("dispersion needs at least two samples");
  if (nu.vertex_count() != sigma.size()) throw StructuralError("model measure lives on a different vertex set");
  const WeightedPoints pts = points_of(nu, samples, seed, samples);
  const std::size_t n = pts.points.size();
  std::vector<Eigen::VectorXd> marginals(n);
  for_each_block(n, 16, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) marginals[i] = empirical_distribution(sigma, pts.points[i], window).frequencies();
  });

  // Union-find over pairs within the threshold.
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (find(i) != find(j) && total_variation(marginals[i], marginals[j]) <= threshold)
        parent[std::max(find(i), find(j))] = std::min(find(i), find(j));

  Dispersion out;
  out.points = n;
  out.exact = pts.exact;
  Eigen::VectorXd target;
  if (mu) target = mu->marginal(window).probabilities;
  std::vector<std::size_t> cluster_of(n, n);
  out.barycentre = Eigen::VectorXd::Zero(marginals.front().size());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = find(i);
    if (cluster_of[root] == n) {
      cluster_of[root] = out.clusters.size();
      out.clusters.push_back({0.0, 0, Eigen::VectorXd::Zero(marginals[i].size()), 0.0});
    }
    Cluster& c = out.clusters[cluster_of[root]];
    c.mass += pts.weights[i];
    c.members += 1;
    c.centroid += pts.weights[i] * marginals[i];
    out.barycentre += pts.weights[i] * marginals[i];
  }
  for (auto& c : out.clusters) {
    c.centroid /= c.mass;
    if (mu) c.target_distance = total_variation(c.centroid, target);
  }
  for (std::size_t a = 0; a < out.clusters.size(); ++a)
    for (std::size_t b = a + 1; b < out.clusters.size(); ++b)
      out.max_centroid_distance =
          std::max(out.max_centroid_distance, total_variation(out.clusters[a].centroid, out.clusters[b].centroid));
  if (mu) out.barycentre_distance = total_variation(out.barycentre, target);
  return out;
}

double pair_vertex_stat(const SoficMap& sigma, const ModelMeasure& nu, const MarginalOracle& mu,
                        const Window& window, double epsilon, std::size_t vertex_pairs, std::size_t samples,
                        std::uint64_t seed) {
  if (vertex_pairs == 0) throw ValidationError("need at least one vertex pair");
  const std::size_t q = mu.alphabet().size();
  check_sizes(sigma, nu, q);
  const WindowImages images(sigma, window);
  const Eigen::VectorXd single = mu.marginal(window).probabilities;
  const auto patterns = static_cast<std::size_t>(single.size());
  if (patterns * patterns > kMaxPatternEntries)
    throw BudgetExceeded("joint pattern space exceeds 2^24 entries", static_cast<double>(patterns * patterns),
                         static_cast<double>(kMaxPatternEntries));
  const Eigen::VectorXd target = kron(single, single);
  const double target_mass = target.sum();
  const CounterRng root(seed);
  const WeightedPoints atoms = points_of(nu, samples, root.split(1).key(), kExactAtomLimit);

  CounterRng vertex_rng = root.split(0);
  std::vector<std::pair<Vertex, Vertex>> pairs(vertex_pairs);
  for (auto& p : pairs) {
    p.first = static_cast<Vertex>(vertex_rng.below(sigma.size()));
    p.second = static_cast<Vertex>(vertex_rng.below(sigma.size()));
  }
  std::vector<std::size_t> bad_count(block_count(vertex_pairs, 16), 0);
  for_each_block(vertex_pairs, 16, [&](std::size_t b, std::size_t begin, std::size_t end) {
    SparseLaw law(patterns * patterns);
    for (std::size_t k = begin; k < end; ++k) {
      const auto [v, w] = pairs[k];
      for (std::size_t a = 0; a < atoms.points.size(); ++a)
        law.add(images.pattern_index(atoms.points[a], v) * patterns + images.pattern_index(atoms.points[a], w),
                atoms.weights[a]);
      if (bad(law.distance_and_clear(target, target_mass), epsilon)) ++bad_count[b];
    }
  });
  return static_cast<double>(std::accumulate(bad_count.begin(), bad_count.end(), std::size_t{0})) /
         static_cast<double>(vertex_pairs);
}

ModelMeasure models_to_measure(const std::vector<Configuration>& configs) {
  if (configs.empty()) throw ValidationError("models_to_measure needs at least one configuration");
  return ModelMeasure::uniform(configs);
}

ModelMeasure h_average(const SoficMap& product, const ModelMeasure& theta, const std::vector<GroupElement>& shifts) {
  theta.require_explicit("h_average");
  if (shifts.empty()) throw ValidationError("h_average needs a nonempty set of shifts");
  std::vector<Configuration> atoms;
  std::vector<double> weights;
  const double share = 1.0 / static_cast<double>(shifts.size());
  for (std::size_t i = 0; i < theta.support().size(); ++i)
    for (const auto& h : shifts) {
      atoms.push_back(adjoint_shift(product, h, theta.support()[i]));
      weights.push_back(theta.weights()[static_cast<Eigen::Index>(i)] * share);
    }
  return ModelMeasure::explicit_support(atoms, weights);
}

ConvergenceReport convergence_report(const SoficMap& sigma, const ModelMeasure& nu, const MarginalOracle& mu,
                                     const Window& window, double epsilon, std::size_t samples, std::uint64_t seed) {
  const CounterRng root(seed);
  ConvergenceReport r;
  r.window = window.describe();
  r.epsilon = epsilon;
  r.lw = lw_defect(sigma, nu, mu, window, epsilon, samples, root.split(0).key());
  r.quenched = quenched_defect(sigma, nu, mu, window, epsilon, samples, root.split(1).key());
  r.doubly_quenched = dq_defect(sigma, nu, mu, window, epsilon, samples, root.split(2).key());
  r.spread = dispersion(sigma, nu, window, std::max<std::size_t>(samples, 2), root.split(3).key(), &mu);
  return r;
}

}  // namespace sofic
