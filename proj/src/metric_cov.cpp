#include "sofic/metric_cov.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <cmath>
#include <limits>
#include <numeric>

#include "sofic/errors.hpp"
#include "sofic/parallel.hpp"

namespace sofic {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kMassTolerance = 1e-12;
constexpr std::uint64_t kSearchNodeBudget = 50'000'000;

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

// Fixed-width bitset over n points.
struct Bits {
  std::vector<std::uint64_t> w;

  explicit Bits(std::size_t n = 0) : w((n + 63) / 64, 0) {}
  void set(std::size_t i) { w[i >> 6] |= std::uint64_t{1} << (i & 63); }
  bool test(std::size_t i) const { return (w[i >> 6] >> (i & 63)) & 1; }
  std::size_t count() const {
    std::size_t c = 0;
    for (auto x : w) c += static_cast<std::size_t>(std::popcount(x));
    return c;
  }
  bool none() const {
    return std::all_of(w.begin(), w.end(), [](std::uint64_t x) { return x == 0; });
  }
  std::size_t count_and(const Bits& o) const {
    std::size_t c = 0;
    for (std::size_t i = 0; i < w.size(); ++i) c += static_cast<std::size_t>(std::popcount(w[i] & o.w[i]));
    return c;
  }
  Bits minus(const Bits& o) const {
    Bits r = *this;
    for (std::size_t i = 0; i < w.size(); ++i) r.w[i] &= ~o.w[i];
    return r;
  }
};

// A centre always covers its own location, so delta = 0 degenerates to
// counting distinct points instead of failing.
bool covers(double distance, double delta) { return distance == 0.0 || within(distance, delta); }

void require_square(const Eigen::MatrixXd& d) {
  if (d.rows() != d.cols()) throw StructuralError("distance matrix must be square");
}

// ---------------------------------------------------------------------------
// Set cover

class SetCoverSearch {
 public:
  SetCoverSearch(const Eigen::MatrixXd& d, double delta) : n_(static_cast<std::size_t>(d.rows())) {
    cover_.assign(n_, Bits(n_));
    covers_of_.assign(n_, {});
    for (std::size_t c = 0; c < n_; ++c)
      for (std::size_t p = 0; p < n_; ++p)
        if (covers(d(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(p)), delta)) {
          cover_[c].set(p);
          covers_of_[p].push_back(c);
        }
  }

  std::size_t greedy() const {
    Bits uncovered(n_);
    for (std::size_t p = 0; p < n_; ++p) uncovered.set(p);
    std::size_t used = 0;
    while (!uncovered.none()) {
      std::size_t best = 0, gain = 0;
      for (std::size_t c = 0; c < n_; ++c) {
        const std::size_t g = cover_[c].count_and(uncovered);
        if (g > gain) {
          gain = g;
          best = c;
        }
      }
      uncovered = uncovered.minus(cover_[best]);
      ++used;
    }
    return used;
  }

  std::size_t exact(std::size_t upper) {
    best_ = upper;
    Bits all(n_);
    for (std::size_t p = 0; p < n_; ++p) all.set(p);
    search(all, 0);
    return best_;
  }

 private:
  void search(const Bits& uncovered, std::size_t chosen) {
    if (++nodes_ > kSearchNodeBudget)
      throw BudgetExceeded("exact set cover search exceeded its node budget", static_cast<double>(nodes_),
                           static_cast<double>(kSearchNodeBudget));
    const std::size_t left = uncovered.count();
    if (left == 0) {
      best_ = std::min(best_, chosen);
      return;
    }
    if (chosen + 1 >= best_) return;
    std::size_t max_gain = 0, pivot = 0, fewest = std::numeric_limits<std::size_t>::max();
    for (std::size_t c = 0; c < n_; ++c) max_gain = std::max(max_gain, cover_[c].count_and(uncovered));
    if (chosen + (left + max_gain - 1) / max_gain >= best_) return;
    for (std::size_t p = 0; p < n_; ++p)
      if (uncovered.test(p) && covers_of_[p].size() < fewest) {
        fewest = covers_of_[p].size();
        pivot = p;
      }
    std::vector<std::pair<std::size_t, std::size_t>> options;  // (gain, centre)
    for (auto c : covers_of_[pivot]) options.emplace_back(cover_[c].count_and(uncovered), c);
    std::stable_sort(options.begin(), options.end(), [](auto& a, auto& b) { return a.first > b.first; });
    for (const auto& [gain, c] : options) search(uncovered.minus(cover_[c]), chosen + 1);
  }

  std::size_t n_;
  std::vector<Bits> cover_;
  std::vector<std::vector<std::size_t>> covers_of_;
  std::size_t best_ = 0;
  std::uint64_t nodes_ = 0;
};

// ---------------------------------------------------------------------------
// Maximum clique in the "separated" graph, with a greedy colouring bound.

class MaxClique {
 public:
  MaxClique(const Eigen::MatrixXd& d, double delta) : n_(static_cast<std::size_t>(d.rows())), adj_(n_, Bits(n_)) {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        if (i != j && !within(d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), delta)) adj_[i].set(j);
  }

  std::size_t solve(std::size_t lower) {
    best_ = lower;
    std::vector<std::size_t> all(n_);
    std::iota(all.begin(), all.end(), 0);
    // Degree-descending initial order tightens the colouring bound.
    std::stable_sort(all.begin(), all.end(), [&](auto a, auto b) { return adj_[a].count() > adj_[b].count(); });
    expand(0, all);
    return best_;
  }

 private:
  void expand(std::size_t size, std::vector<std::size_t> candidates) {
    if (++nodes_ > kSearchNodeBudget)
      throw BudgetExceeded("exact packing search exceeded its node budget", static_cast<double>(nodes_),
                           static_cast<double>(kSearchNodeBudget));
    std::vector<std::size_t> order, colour;
    colour_sort(candidates, order, colour);
    for (std::size_t i = order.size(); i-- > 0;) {
      if (size + colour[i] <= best_) return;
      const std::size_t v = order[i];
      std::vector<std::size_t> next;
      for (std::size_t j = 0; j < i; ++j)
        if (adj_[v].test(order[j])) next.push_back(order[j]);
      if (next.empty()) {
        best_ = std::max(best_, size + 1);
      } else {
        expand(size + 1, next);
      }
    }
  }

  void colour_sort(const std::vector<std::size_t>& p, std::vector<std::size_t>& order,
                   std::vector<std::size_t>& colour) const {
    std::vector<std::vector<std::size_t>> classes;
    for (auto v : p) {
      std::size_t k = 0;
      for (; k < classes.size(); ++k) {
        bool clash = false;
        for (auto u : classes[k])
          if (adj_[v].test(u)) {
            clash = true;
            break;
          }
        if (!clash) break;
      }
      if (k == classes.size()) classes.emplace_back();
      classes[k].push_back(v);
    }
    for (std::size_t k = 0; k < classes.size(); ++k)
      for (auto v : classes[k]) {
        order.push_back(v);
        colour.push_back(k + 1);
      }
  }

  std::size_t n_;
  std::vector<Bits> adj_;
  std::size_t best_ = 0;
  std::uint64_t nodes_ = 0;
};

template <typename DistanceFn>
Eigen::MatrixXd build_matrix(std::size_t n, DistanceFn&& dist) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for_each_block(n, 16, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = dist(i, j);
  });
  return d;
}

double atom_mass(std::uint32_t mask, const Eigen::VectorXd& w) {
  double m = 0;
  for (std::uint32_t r = mask; r; r &= r - 1) m += w[std::countr_zero(r)];
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// Distances

double hamming_distance(const Configuration& x, const Configuration& y) {
  if (x.size() != y.size()) throw StructuralError("hamming_distance: lengths differ");
  if (x.size() == 0) return 0.0;
  std::size_t diff = 0;
  for (std::size_t v = 0; v < x.size(); ++v) diff += x.values[v] != y.values[v];
  return static_cast<double>(diff) / static_cast<double>(x.size());
}

double pair_hamming_distance(const Configuration& z, const Configuration& w, std::size_t right_alphabet) {
  if (z.size() != w.size()) throw StructuralError("pair_hamming_distance: lengths differ");
  if (z.size() == 0) return 0.0;
  std::size_t diff = 0;
  for (std::size_t v = 0; v < z.size(); ++v) {
    diff += z.values[v] / right_alphabet != w.values[v] / right_alphabet;
    diff += z.values[v] % right_alphabet != w.values[v] % right_alphabet;
  }
  return static_cast<double>(diff) / (2.0 * static_cast<double>(z.size()));
}

Eigen::MatrixXd distance_matrix(const std::vector<Configuration>& points) {
  return build_matrix(points.size(), [&](std::size_t i, std::size_t j) { return hamming_distance(points[i], points[j]); });
}

Eigen::MatrixXd pair_distance_matrix(const std::vector<Configuration>& points, std::size_t right_alphabet) {
  return build_matrix(points.size(), [&](std::size_t i, std::size_t j) {
    return pair_hamming_distance(points[i], points[j], right_alphabet);
  });
}

Eigen::MatrixXd cross_distance_matrix(const std::vector<Configuration>& centres,
                                      const std::vector<Configuration>& points) {
  Eigen::MatrixXd d(static_cast<Eigen::Index>(centres.size()), static_cast<Eigen::Index>(points.size()));
  for (std::size_t c = 0; c < centres.size(); ++c)
    for (std::size_t p = 0; p < points.size(); ++p)
      d(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(p)) = hamming_distance(centres[c], points[p]);
  return d;
}

// ---------------------------------------------------------------------------
// cov_delta / pack_delta

Bounds cov_delta(const Eigen::MatrixXd& distances, double delta) {
  require_square(distances);
  if (!(delta >= 0)) throw ValidationError("delta must be nonnegative");
  if (distances.rows() == 0) return {0, 0};
  SetCoverSearch search(distances, delta);
  Bounds out;
  out.greedy = search.greedy();
  if (static_cast<std::size_t>(distances.rows()) <= kExactCoverLimit) out.exact = search.exact(out.greedy);
  return out;
}

Bounds cov_delta(const std::vector<Configuration>& points, double delta) {
  return cov_delta(distance_matrix(points), delta);
}

Bounds pack_delta(const Eigen::MatrixXd& distances, double delta) {
  require_square(distances);
  if (!(delta > 0)) throw ValidationError("delta must be positive");
  const auto n = static_cast<std::size_t>(distances.rows());
  if (n == 0) return {0, 0};
  Bounds out;
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < n; ++i) {
    bool separated = true;
    for (auto k : kept)
      if (within(distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)), delta)) {
        separated = false;
        break;
      }
    if (separated) kept.push_back(i);
  }
  out.greedy = kept.size();
  if (n <= kExactPackLimit) out.exact = MaxClique(distances, delta).solve(out.greedy);
  return out;
}

Bounds pack_delta(const std::vector<Configuration>& points, double delta) {
  return pack_delta(distance_matrix(points), delta);
}

// ---------------------------------------------------------------------------
// Measures

Bounds cov_eps_delta(const Eigen::MatrixXd& centre_distances, const Eigen::VectorXd& weights, double epsilon,
                     double delta) {
  if (!(epsilon > 0)) throw ValidationError("epsilon must be positive");
  if (!(delta >= 0)) throw ValidationError("delta must be nonnegative");
  if (centre_distances.cols() != weights.size()) throw StructuralError("distance columns must match atoms");
  const auto m = static_cast<std::size_t>(centre_distances.rows());
  const auto atoms = static_cast<std::size_t>(weights.size());
  const double need = 1.0 - epsilon + kMassTolerance;  // covered mass must exceed this
  Bounds out;
  if (need < 0) {
    // Any single centre will do, even one covering nothing.
    out.greedy = 1;
    out.exact = 1;
    return out;
  }

  auto covered_by = [&](std::size_t c, std::size_t a) {
    return covers(centre_distances(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(a)), delta);
  };
  std::vector<bool> covered(atoms, false);
  double mass = 0;
  std::vector<bool> used(m, false);
  while (mass <= need) {
    std::size_t best = m;
    double gain = 0;
    for (std::size_t c = 0; c < m; ++c) {
      if (used[c]) continue;
      double g = 0;
      for (std::size_t a = 0; a < atoms; ++a)
        if (!covered[a] && covered_by(c, a)) g += weights[static_cast<Eigen::Index>(a)];
      if (g > gain) {
        gain = g;
        best = c;
      }
    }
    if (best == m) throw ValidationError("candidate centres cannot cover mass above 1 - epsilon");
    used[best] = true;
    for (std::size_t a = 0; a < atoms; ++a)
      if (covered_by(best, a) && !covered[a]) {
        covered[a] = true;
        mass += weights[static_cast<Eigen::Index>(a)];
      }
    ++out.greedy;
  }

  if (atoms > kExactPartialCoverAtoms) return out;
  // Distinct, non-dominated coverage masks.
  std::vector<std::uint32_t> masks;
  for (std::size_t c = 0; c < m; ++c) {
    std::uint32_t mask = 0;
    for (std::size_t a = 0; a < atoms; ++a)
      if (covered_by(c, a)) mask |= std::uint32_t{1} << a;
    masks.push_back(mask);
  }
  std::sort(masks.begin(), masks.end(), [](auto a, auto b) {
    return std::popcount(a) != std::popcount(b) ? std::popcount(a) > std::popcount(b) : a < b;
  });
  masks.erase(std::unique(masks.begin(), masks.end()), masks.end());
  std::vector<std::uint32_t> kept;
  for (auto mask : masks) {
    bool dominated = false;
    for (auto k : kept)
      if ((mask & ~k) == 0) {
        dominated = true;
        break;
      }
    if (!dominated) kept.push_back(mask);
  }
  std::vector<double> mask_mass;
  for (auto k : kept) mask_mass.push_back(atom_mass(k, weights));
  const double heaviest = mask_mass.empty() ? 0.0 : *std::max_element(mask_mass.begin(), mask_mass.end());

  std::uint64_t nodes = 0;
  std::function<bool(std::size_t, std::size_t, std::uint32_t)> choose = [&](std::size_t start, std::size_t left,
                                                                          std::uint32_t acc) {
    if (++nodes > kSearchNodeBudget)
      throw BudgetExceeded("exact partial cover search exceeded its node budget", static_cast<double>(nodes),
                           static_cast<double>(kSearchNodeBudget));
    const double have = atom_mass(acc, weights);
    if (have > need) return true;
    if (left == 0 || have + static_cast<double>(left) * heaviest <= need) return false;
    for (std::size_t i = start; i < kept.size(); ++i)
      if (choose(i + 1, left - 1, acc | kept[i])) return true;
    return false;
  };
  std::size_t exact = out.greedy;
  for (std::size_t s = 1; s < out.greedy; ++s)
    if (choose(0, s, 0)) {
      exact = s;
      break;
    }
  out.exact = exact;
  return out;
}

Bounds cov_eps_delta(const ModelMeasure& nu, double epsilon, double delta) {
  nu.require_explicit("cov_eps_delta");
  return cov_eps_delta(distance_matrix(nu.support()), nu.weights(), epsilon, delta);
}

std::size_t pack_eps_delta_exact(const Eigen::MatrixXd& distances, const Eigen::VectorXd& weights, double epsilon,
                                 double delta) {
  require_square(distances);
  if (!(epsilon > 0)) throw ValidationError("epsilon must be positive");
  if (!(delta > 0)) throw ValidationError("delta must be positive");
  const auto n = static_cast<std::size_t>(weights.size());
  if (n > kExactMeasurePackAtoms)
    throw BudgetExceeded("exact pack_{eps,delta} is limited to 16 atoms", static_cast<double>(n),
                         static_cast<double>(kExactMeasurePackAtoms));
  std::vector<std::uint32_t> close(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && within(distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), delta))
        close[i] |= std::uint32_t{1} << j;
  // mis[S] = largest separated subset of S, by the lowest element of S.
  const std::uint32_t full = n == 32 ? ~0u : ((std::uint32_t{1} << n) - 1);
  std::vector<std::uint8_t> mis(std::size_t{full} + 1, 0);
  std::size_t best = n + 1;
  const double need = 1.0 - epsilon + kMassTolerance;
  for (std::uint32_t s = 1; s <= full; ++s) {
    const int v = std::countr_zero(s);
    const std::uint32_t rest = s & (s - 1);
    mis[s] = std::max<std::uint8_t>(mis[rest], static_cast<std::uint8_t>(1 + mis[rest & ~close[v]]));
    if (mis[s] < best && atom_mass(s, weights) > need) best = mis[s];
    if (s == full) break;
  }
  // No subset needed beyond the empty one (epsilon >= 1).
  if (need < 0) best = 0;
  return best;
}

std::size_t pack_eps_delta_exact(const ModelMeasure& nu, double epsilon, double delta) {
  nu.require_explicit("pack_eps_delta");
  return pack_eps_delta_exact(distance_matrix(nu.support()), nu.weights(), epsilon, delta);
}

// ---------------------------------------------------------------------------
// cov_epsilon

namespace {

struct TypeClass {
  double log_prob;   // of one configuration in the class
  double log_size;   // log of the number of configurations
};

void collect_types(const Eigen::VectorXd& p, std::size_t n, std::size_t symbol, std::size_t remaining,
                   double log_prob, double log_size, std::vector<TypeClass>& out) {
  const auto q = static_cast<std::size_t>(p.size());
  if (symbol + 1 == q) {
    if (remaining > 0 && p[static_cast<Eigen::Index>(symbol)] == 0.0) return;
    const double lp = log_prob + (remaining ? static_cast<double>(remaining) * std::log(p[static_cast<Eigen::Index>(symbol)]) : 0.0);
    out.push_back({lp, log_size - std::lgamma(static_cast<double>(remaining) + 1.0)});
    if (out.size() > kDefaultEnumerationBudget)
      throw BudgetExceeded("type-class enumeration exceeds its budget", static_cast<double>(out.size()),
                           static_cast<double>(kDefaultEnumerationBudget));
    return;
  }
  const double ps = p[static_cast<Eigen::Index>(symbol)];
  for (std::size_t c = 0; c <= remaining; ++c) {
    if (c > 0 && ps == 0.0) break;
    collect_types(p, n, symbol + 1, remaining - c, log_prob + (c ? static_cast<double>(c) * std::log(ps) : 0.0),
                  log_size - std::lgamma(static_cast<double>(c) + 1.0), out);
  }
}

}  // namespace

CovEps cov_eps(const ModelMeasure& nu, double epsilon) {
  if (!(epsilon > 0)) throw ValidationError("epsilon must be positive");
  const double need = 1.0 - epsilon + kMassTolerance;
  CovEps out;
  if (need < 0) {
    out.value = 1;
    return out;
  }
  if (nu.kind() == ModelMeasure::Kind::kExplicit) {
    std::vector<double> w(nu.weights().data(), nu.weights().data() + nu.weights().size());
    std::stable_sort(w.begin(), w.end(), std::greater<>());
    double mass = 0;
    std::uint64_t k = 0;
    for (double x : w) {
      mass += x;
      ++k;
      if (mass > need) break;
    }
    out.value = k;
    out.log_value = std::log(static_cast<double>(k));
    return out;
  }
  if (nu.kind() != ModelMeasure::Kind::kIid) throw RefusedOperation("cov_eps needs an explicit or i.i.d. measure, got " + nu.describe());

  const Eigen::VectorXd& p = nu.letter_weights();
  const std::size_t n = nu.vertex_count();
  std::vector<TypeClass> types;
  collect_types(p, n, 0, n, 0.0, std::lgamma(static_cast<double>(n) + 1.0), types);
  std::stable_sort(types.begin(), types.end(), [](const TypeClass& a, const TypeClass& b) { return a.log_prob > b.log_prob; });
  double mass = 0, log_count = kNegInf;
  for (const auto& t : types) {
    const double class_mass = std::exp(t.log_size + t.log_prob);
    if (mass + class_mass > need) {
      // Part of this class: floor((need - mass) / prob) + 1 atoms.
      const double log_partial_real = std::log(std::max(need - mass, 0.0)) - t.log_prob;
      double log_partial;
      if (log_partial_real < 50.0) {
        const double atoms = std::floor(std::exp(log_partial_real)) + 1.0;
        log_partial = std::log(atoms);
      } else {
        log_partial = log_partial_real;
      }
      log_count = log_add(log_count, log_partial);
      break;
    }
    mass += class_mass;
    log_count = log_add(log_count, t.log_size);
  }
  out.log_value = log_count;
  if (log_count < 43.0) out.value = static_cast<std::uint64_t>(std::llround(std::exp(log_count)));
  return out;
}

// ---------------------------------------------------------------------------
// Hamming balls

double hamming_ball_log_volume(std::size_t vertices, double delta, std::size_t alphabet_size) {
  if (delta < 0 || delta > 1) throw ValidationError("delta must lie in [0, 1]");
  if (alphabet_size == 0) throw ValidationError("alphabet must be nonempty");
  const auto j_max = static_cast<std::size_t>(std::floor(delta * static_cast<double>(vertices) + 1e-9));
  const double log_rest = alphabet_size > 1 ? std::log(static_cast<double>(alphabet_size - 1)) : kNegInf;
  const double log_n_fact = std::lgamma(static_cast<double>(vertices) + 1.0);
  double total = 0.0;  // j = 0 term
  for (std::size_t j = 1; j <= std::min(j_max, vertices); ++j) {
    if (alphabet_size == 1) break;
    const double term = log_n_fact - std::lgamma(static_cast<double>(j) + 1.0) -
                        std::lgamma(static_cast<double>(vertices - j) + 1.0) + static_cast<double>(j) * log_rest;
    total = log_add(total, term);
  }
  return total;
}

double largest_radius_for_growth(double eta, const std::vector<std::size_t>& sizes, std::size_t alphabet_size) {
  auto ok = [&](double delta) {
    for (auto n : sizes)
      if (hamming_ball_log_volume(n, delta, alphabet_size) > eta * static_cast<double>(n)) return false;
    return true;
  };
  if (ok(1.0)) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace sofic
