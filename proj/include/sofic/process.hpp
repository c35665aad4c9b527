#pragma once

// Shift-invariant processes on X^G over a finite alphabet, represented by
// exact finite-window marginals. Patterns over a window F are indexed
// big-endian in window order: index = ((x_{F0} q + x_{F1}) q + ...) so that
// numeric order is lexicographic order of pattern strings.

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "sofic/group.hpp"

namespace sofic {

using Symbol = std::uint8_t;

inline constexpr std::size_t kMaxAlphabet = 256;
inline constexpr std::size_t kMaxPatternEntries = std::size_t{1} << 24;
inline constexpr double kProbabilityTolerance = 1e-12;

class Alphabet {
 public:
  /// Symbols labelled "0", "1", ..., "q-1".
  explicit Alphabet(std::size_t size);
  explicit Alphabet(std::vector<std::string> labels);

  std::size_t size() const { return labels_.size(); }
  const std::string& label(std::size_t i) const { return labels_[i]; }
  const std::vector<std::string>& labels() const { return labels_; }
  /// Symbols of X x Y in row-major order: (x, y) -> x |Y| + y.
  static Alphabet product(const Alphabet& x, const Alphabet& y);

  bool operator==(const Alphabet&) const = default;

 private:
  std::vector<std::string> labels_;
};

/// Number of patterns q^m, or BudgetExceeded past kMaxPatternEntries.
std::size_t pattern_count(std::size_t alphabet_size, std::size_t window_size);

std::vector<Symbol> decode_pattern(std::size_t index, std::size_t alphabet_size,
                                   std::size_t window_size);
std::size_t encode_pattern(const std::vector<Symbol>& symbols, std::size_t alphabet_size);

/// Probability vector over X^F.
struct PatternDistribution {
  Window window;
  std::size_t alphabet_size;
  Eigen::VectorXd probabilities;

  std::string pattern_string(std::size_t index, const Alphabet& alphabet) const;
};

/// Total variation distance, half the l1 distance.
template <typename DerivedA, typename DerivedB>
double total_variation(const Eigen::MatrixBase<DerivedA>& p, const Eigen::MatrixBase<DerivedB>& q) {
  return 0.5 * (p - q).cwiseAbs().sum();
}

/// Marginal on a sub-window (every element of `sub` must lie in the source
/// window), by summing out the other coordinates.
PatternDistribution project(const PatternDistribution& source, const Window& sub);

/// Tensor product of marginals over the same window, alphabet X x Y.
PatternDistribution tensor(const PatternDistribution& p, const PatternDistribution& q);

class MarginalOracle {
 public:
  virtual ~MarginalOracle() = default;

  const Alphabet& alphabet() const { return alphabet_; }
  const GroupSpec& group() const { return group_; }

  /// mu_F for a window F of this process's group.
  PatternDistribution marginal(const Window& window) const;
  /// Marginal on an arbitrary finite set of distinct elements, listed in the
  /// given order; computed through the anchored window by shift invariance.
  Eigen::VectorXd marginal_of(const std::vector<GroupElement>& elements) const;
  /// One-dimensional marginal mu_{e}.
  Eigen::VectorXd letter_marginal() const;

  virtual std::string describe() const = 0;

 protected:
  MarginalOracle(Alphabet alphabet, GroupSpec group)
      : alphabet_(std::move(alphabet)), group_(std::move(group)) {}
  virtual Eigen::VectorXd compute(const Window& window) const = 0;

 private:
  Alphabet alphabet_;
  GroupSpec group_;
};

using Process = std::shared_ptr<const MarginalOracle>;

/// nu^{x G}: every marginal is a product of copies of `weights`.
Process bernoulli(const Eigen::VectorXd& weights, const GroupSpec& group);

/// Tree-indexed Markov chain on the Cayley tree of a free group: the
/// identity has law `initial` and every edge g ~ s g carries `transition`.
/// Requires a stochastic matrix with `initial` stationary and in detailed
/// balance (tolerance 1e-10).
Process tree_markov(const Eigen::MatrixXd& transition, const Eigen::VectorXd& initial,
                    const GroupSpec& group);

/// mu^{x H} on X^{G x H}: independent H-fibres, each distributed as `base`.
Process coinduced(const Process& base, const GroupSpec& h_group);

/// The process constant on right cosets Hg of free factor `factor` of a
/// free-product group, i.i.d. mu0 across distinct cosets.
Process coset_iid(const Eigen::VectorXd& mu0, const GroupSpec& group, int factor);

/// Uniform measure on the shift orbit of the periodic point with the given
/// period word over Z; the word must have exact least period equal to its
/// length.
Process periodic_orbit(const std::vector<Symbol>& period, std::size_t alphabet_size,
                       const GroupSpec& integers);

/// Independent joining mu x nu on (X x Y)^G.
Process product_process(const Process& mu, const Process& nu);

/// k-fold independent self-joining, |X|^k <= 256.
Process power_process(const Process& mu, int k);

/// The diagonal self-coupling of mu: (x, x) with x ~ mu.
Process diagonal_process(const Process& mu);

/// Largest deviation of sum-to-one and projection consistency between a
/// window and one of its sub-windows.
double consistency_error(const MarginalOracle& mu, const Window& window, const Window& sub);

/// TV distance between mu_F and the marginal on F g relabelled by F.
double translation_error(const MarginalOracle& mu, const Window& window, const GroupElement& g);

}  // namespace sofic
