#pragma once

// Finite-n diagnostics for local weak*, quenched and doubly-quenched
// convergence of model measures, and the statistics of the empirical
// distribution of window marginals under a model measure.
//
// A vertex or a configuration counts as bad when its TV distance to the
// target is not below epsilon (same 1e-12 guard as good models).

#include <Eigen/Core>
#include <string>
#include <vector>

#include "sofic/model_measure.hpp"
#include "sofic/process.hpp"
#include "sofic/sofic_map.hpp"

namespace sofic {

/// Explicit measures with at most this many atoms are treated exactly.
inline constexpr std::size_t kExactAtomLimit = 100000;

struct DefectEstimate {
  double value = 0;
  double standard_error = 0;  // 0 when exact
  std::size_t samples = 0;    // 0 when exact
  bool exact = false;
};

/// Fraction of vertices v whose local law (Pi_v)_* nu restricted to F is at
/// TV >= epsilon from mu_F. Exact for explicit and i.i.d. measures; sampler
/// measures use `samples` shared draws.
double lw_defect(const SoficMap& sigma, const ModelMeasure& nu, const MarginalOracle& mu, const Window& window,
                 double epsilon, std::size_t samples, std::uint64_t seed);

/// 1 - nu(Omega_mu(F, epsilon, sigma)).
DefectEstimate quenched_defect(const SoficMap& sigma, const ModelMeasure& nu, const MarginalOracle& mu,
                               const Window& window, double epsilon, std::size_t samples, std::uint64_t seed);

/// quenched_defect of nu x nu against mu x mu. Explicit measures are exact
/// up to 2^16 ordered atom pairs and sampled beyond.
DefectEstimate dq_defect(const SoficMap& sigma, const ModelMeasure& nu, const MarginalOracle& mu,
                         const Window& window, double epsilon, std::size_t samples, std::uint64_t seed);

struct Cluster {
  double mass = 0;
  std::size_t members = 0;
  Eigen::VectorXd centroid;   // mass-weighted mean of member marginals
  double target_distance = 0;  // TV(centroid, mu_F) when a target is given
};

struct Dispersion {
  std::vector<Cluster> clusters;  // ordered by first member
  Eigen::VectorXd barycentre;
  double barycentre_distance = 0;  // TV(barycentre, mu_F) when a target is given
  double max_centroid_distance = 0;  // largest TV between two centroids
  std::size_t points = 0;
  bool exact = false;  // atoms used directly instead of samples
};

/// Single-linkage clusters (TV <= threshold) of the empirical F-marginals of
/// x ~ nu. Explicit measures with at most `samples` atoms use their atoms.
Dispersion dispersion(const SoficMap& sigma, const ModelMeasure& nu, const Window& window, std::size_t samples,
                      std::uint64_t seed, const MarginalOracle* mu = nullptr, double threshold = 0.05);

/// Fraction of M uniform vertex pairs (v, v') whose joint law of
/// (Pi_v x|_F, Pi_v' x|_F) is at TV >= epsilon from mu_F (x) mu_F.
double pair_vertex_stat(const SoficMap& sigma, const ModelMeasure& nu, const MarginalOracle& mu,
                        const Window& window, double epsilon, std::size_t vertex_pairs, std::size_t samples,
                        std::uint64_t seed);

/// (1/k) sum_i delta_{x_i}, duplicates merged.
ModelMeasure models_to_measure(const std::vector<Configuration>& configs);

/// (1/|E|) sum_{h in E} (rho^h)_* theta on a product approximation.
ModelMeasure h_average(const SoficMap& product, const ModelMeasure& theta, const std::vector<GroupElement>& shifts);

struct ConvergenceReport {
  std::string window;
  double epsilon = 0;
  double lw = 0;
  DefectEstimate quenched;
  DefectEstimate doubly_quenched;
  Dispersion spread;
};

ConvergenceReport convergence_report(const SoficMap& sigma, const ModelMeasure& nu, const MarginalOracle& mu,
                                     const Window& window, double epsilon, std::size_t samples, std::uint64_t seed);

}  // namespace sofic
