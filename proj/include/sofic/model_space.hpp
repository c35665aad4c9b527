#pragma once

// Finite configurations x in X^V read through a sofic map: pullback names,
// empirical window distributions, good models and their counts, local block
// maps and the column shifts of product approximations.

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sofic/process.hpp"
#include "sofic/rng.hpp"
#include "sofic/sofic_map.hpp"

namespace sofic {

inline constexpr std::uint64_t kDefaultEnumerationBudget = std::uint64_t{1} << 26;

struct Configuration {
  std::size_t alphabet_size = 2;
  std::vector<Symbol> values;

  Configuration() = default;
  Configuration(std::size_t q, std::vector<Symbol> symbols);
  /// Constant configuration.
  static Configuration constant(std::size_t q, std::size_t n, Symbol s = 0);
  /// Digits of a string such as "0011"; symbols must be single characters.
  static Configuration parse(std::string_view text, const Alphabet& alphabet);

  std::size_t size() const { return values.size(); }
  Symbol operator[](std::size_t v) const { return values[v]; }
  std::string to_string(const Alphabet& alphabet) const;

  bool operator==(const Configuration&) const = default;
  auto operator<=>(const Configuration& o) const { return values <=> o.values; }
};

/// (x, y) read as one configuration over X x Y, symbol x_v |Y| + y_v.
Configuration pair_configuration(const Configuration& x, const Configuration& y);
/// Inverse of pair_configuration.
std::pair<Configuration, Configuration> split_pair(const Configuration& z, std::size_t right_alphabet);

/// sigma^g for every g in F, tabulated over V: images[i][v] = sigma^{F_i}(v).
class WindowImages {
 public:
  WindowImages(const SoficMap& sigma, const std::vector<GroupElement>& elements);
  WindowImages(const SoficMap& sigma, const Window& window)
      : WindowImages(sigma, window.elements()) {}

  std::size_t window_size() const { return images_.size(); }
  std::size_t vertex_count() const { return n_; }
  Vertex operator()(std::size_t i, Vertex v) const { return images_[i][v]; }

  /// Pattern index of Pi_v(x) restricted to the window.
  std::size_t pattern_index(const Configuration& x, Vertex v) const {
    std::size_t idx = 0;
    for (const auto& img : images_) idx = idx * x.alphabet_size + x.values[img[v]];
    return idx;
  }

 private:
  std::size_t n_;
  std::vector<Permutation> images_;
};

/// Pi_v(x)|_F = (x_{sigma^g(v)})_{g in F}.
std::vector<Symbol> pullback_name(const SoficMap& sigma, const Configuration& x, Vertex v,
                                  const Window& window);

/// Pattern counts of the pullback names over all vertices.
struct EmpiricalDistribution {
  Window window;
  std::size_t alphabet_size;
  std::size_t vertex_count;
  std::vector<std::uint64_t> counts;

  Eigen::VectorXd frequencies() const;
};

EmpiricalDistribution empirical_distribution(const SoficMap& sigma, const Configuration& x,
                                             const Window& window);
/// Empirical law of (x_{sigma^g(v)})_{g in elements}; elements need not form
/// a window (used for shifted windows F g).
Eigen::VectorXd empirical_of(const SoficMap& sigma, const Configuration& x,
                             const std::vector<GroupElement>& elements);

/// TV distance between empirical F-distributions of configurations and a
/// fixed target mu_F, reusing one count buffer. Not thread-safe; make one
/// per worker.
class GoodModelTest {
 public:
  GoodModelTest(const SoficMap& sigma, const MarginalOracle& mu, const Window& window, double epsilon);
  GoodModelTest(WindowImages images, Eigen::VectorXd target, std::size_t alphabet_size, double epsilon);

  double distance(const Configuration& x);
  /// TV < epsilon, with a 1e-12 guard so that exact ties are excluded.
  bool good(const Configuration& x) { return distance(x) < epsilon_ - kProbabilityTolerance; }
  double epsilon() const { return epsilon_; }
  const Eigen::VectorXd& target() const { return target_; }
  const WindowImages& images() const { return images_; }

 private:
  WindowImages images_;
  Eigen::VectorXd target_;
  std::size_t q_;
  double epsilon_;
  double target_mass_;
  std::vector<std::uint32_t> counts_;
  std::vector<std::size_t> touched_;
};

bool is_good_model(const SoficMap& sigma, const Configuration& x, const MarginalOracle& mu,
                   const Window& window, double epsilon);

/// Configuration with lexicographic rank `index` in X^V (x_0 most significant).
Configuration configuration_at(std::uint64_t index, std::size_t q, std::size_t n);

/// All (F, epsilon)-good models in lexicographic order. Refuses with
/// BudgetExceeded when |X|^|V| exceeds the budget.
std::vector<Configuration> enumerate_good_models(const SoficMap& sigma, const MarginalOracle& mu,
                                                 const Window& window, double epsilon,
                                                 std::uint64_t budget = kDefaultEnumerationBudget);
std::uint64_t count_good_models(const SoficMap& sigma, const MarginalOracle& mu, const Window& window,
                                double epsilon, std::uint64_t budget = kDefaultEnumerationBudget);

/// Importance-sampling estimate of |Omega|. Values are kept in log space
/// because |Omega| routinely exceeds the double range.
struct CountEstimate {
  double log_estimate = 0;  // -inf when no sample was good
  double log_standard_error = 0;
  double estimate = 0;  // exp(log_estimate), may overflow to inf
  double standard_error = 0;
  std::size_t samples = 0;
  std::size_t hits = 0;
};

CountEstimate count_good_models_mc(const SoficMap& sigma, const MarginalOracle& mu, const Window& window,
                                   double epsilon, const Eigen::VectorXd& proposal, std::size_t samples,
                                   std::uint64_t seed);

/// Exact count of good models for F = {e}: sum of multinomial coefficients
/// over letter types within TV epsilon of the letter marginal.
struct LetterCount {
  double log_count = 0;                 // -inf for an empty set
  std::optional<std::uint64_t> count;   // when it fits in 64 bits
  std::uint64_t types = 0;              // number of admissible types
};

LetterCount letter_frequency_count(const Eigen::VectorXd& letter_marginal, std::size_t vertices,
                                   double epsilon, std::uint64_t type_budget = kDefaultEnumerationBudget);

/// A D-local map X^D -> Y given by a full table in pattern order.
struct BlockMap {
  Window domain;
  std::size_t input_alphabet;
  std::size_t output_alphabet;
  std::vector<Symbol> table;

  template <typename Fn>
  static BlockMap from_function(Window domain, std::size_t q_in, std::size_t q_out, Fn&& fn) {
    const std::size_t total = pattern_count(q_in, domain.size());
    std::vector<Symbol> table(total);
    for (std::size_t i = 0; i < total; ++i) table[i] = static_cast<Symbol>(fn(decode_pattern(i, q_in, domain.size())));
    return BlockMap(std::move(domain), q_in, q_out, std::move(table));
  }

  BlockMap(Window domain, std::size_t q_in, std::size_t q_out, std::vector<Symbol> table);
};

/// psi^sigma(x)_v = psi(Pi_v(x)|_D).
Configuration apply_block_map(const BlockMap& psi, const SoficMap& sigma, const Configuration& x);

/// Fraction of v with Pi_v(psi^sigma(x))|_F != psi^F(Pi_v(x)|_{DF}).
double block_compatibility_mismatch(const BlockMap& psi, const SoficMap& sigma, const Configuration& x,
                                    const Window& window);

/// TV((P_x)_F, (S^g_* P_x)_F), where the shifted law reads x at sigma^{fg}(v).
double shifted_empirical_distance(const SoficMap& sigma, const Configuration& x, const Window& window,
                                  const GroupElement& g);
/// Fraction of v with sigma^f(sigma^g(v)) != sigma^{fg}(v) for some f in F.
double shift_mismatch_fraction(const SoficMap& sigma, const Window& window, const GroupElement& g);

/// rho^h(x)_{(v,w)} = x_{(v, tau^{h^{-1}}(w))} on a product approximation.
Configuration adjoint_shift(const SoficMap& product, const GroupElement& h, const Configuration& x);

}  // namespace sofic
