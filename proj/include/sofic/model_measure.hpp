#pragma once

// Probability measures on X^V: finitely supported, i.i.d. product, or given
// only by a seeded sampler.

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sofic/model_space.hpp"
#include "sofic/rng.hpp"

namespace sofic {

inline constexpr std::size_t kMaxSquaredAtoms = std::size_t{1} << 16;

class ModelMeasure {
 public:
  enum class Kind { kExplicit, kIid, kSampler };
  using Sampler = std::function<Configuration(CounterRng&)>;

  /// Duplicate configurations are merged (first occurrence keeps its
  /// position) and zero-weight atoms dropped.
  static ModelMeasure explicit_support(const std::vector<Configuration>& support, const std::vector<double>& weights);
  static ModelMeasure point_mass(Configuration x);
  static ModelMeasure uniform(const std::vector<Configuration>& support);
  /// letter_weights^{x V}.
  static ModelMeasure iid(const Eigen::VectorXd& letter_weights, std::size_t vertices);
  static ModelMeasure sampler(std::size_t vertices, std::size_t alphabet_size, Sampler draw,
                              std::string description = "sampler");

  Kind kind() const { return kind_; }
  bool is_explicit() const { return kind_ == Kind::kExplicit; }
  std::size_t vertex_count() const { return vertices_; }
  std::size_t alphabet_size() const { return q_; }
  std::string describe() const;

  /// Atoms and weights; RefusedOperation unless explicit.
  const std::vector<Configuration>& support() const;
  const Eigen::VectorXd& weights() const;
  /// Per-vertex law of an i.i.d. measure; RefusedOperation otherwise.
  const Eigen::VectorXd& letter_weights() const;

  Configuration sample(CounterRng& rng) const;

  /// The measure of independent pairs (x, y) on (X x X)^V. Explicit measures
  /// list all ordered pairs of atoms (refused above 2^16 pairs).
  ModelMeasure square() const;

  void require_explicit(const std::string& operation) const;

 private:
  ModelMeasure() = default;

  Kind kind_ = Kind::kExplicit;
  std::size_t vertices_ = 0;
  std::size_t q_ = 0;
  std::vector<Configuration> support_;
  Eigen::VectorXd weights_;
  Eigen::VectorXd letter_weights_;
  std::shared_ptr<const Sampler> sampler_;
  std::string description_;
};

}  // namespace sofic
