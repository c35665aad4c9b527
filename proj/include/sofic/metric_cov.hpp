#pragma once

// Normalized Hamming metrics and covering / packing numbers.
//
// Balls are open: y lies in B_delta(c) iff d(c, y) < delta. A set is
// delta-separated iff distinct points are at distance >= delta. With these
// two conventions "covered" and "separated" are exact complements, which is
// what makes cov_{delta/2} >= pack_delta >= cov_delta hold at every finite
// scale. Comparisons use a 1e-12 guard so that distances that are exact
// fractions k/|V| land on the intended side.
//
// The ambient space of an explicit measure is its support: covering
// centres are atoms unless a candidate centre set is passed explicitly.

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "sofic/model_measure.hpp"

namespace sofic {

inline constexpr double kDistanceTolerance = 1e-12;
inline constexpr std::size_t kExactCoverLimit = 4096;
inline constexpr std::size_t kExactPackLimit = 512;
inline constexpr std::size_t kExactPartialCoverAtoms = 24;
inline constexpr std::size_t kExactMeasurePackAtoms = 16;

double hamming_distance(const Configuration& x, const Configuration& y);
/// Hamming average on pairs: d((x,y),(x',y')) = d(x,x')/2 + d(y,y')/2, for
/// pair configurations whose right alphabet has `right_alphabet` symbols.
double pair_hamming_distance(const Configuration& z, const Configuration& w, std::size_t right_alphabet);

/// Symmetric matrix of hamming_distance, rows computed in parallel blocks.
Eigen::MatrixXd distance_matrix(const std::vector<Configuration>& points);
Eigen::MatrixXd pair_distance_matrix(const std::vector<Configuration>& points, std::size_t right_alphabet);
/// distances(c, a) between candidate centres and points.
Eigen::MatrixXd cross_distance_matrix(const std::vector<Configuration>& centres,
                                      const std::vector<Configuration>& points);

inline bool within(double distance, double delta) { return distance < delta - kDistanceTolerance; }

struct Bounds {
  std::size_t greedy = 0;
  std::optional<std::size_t> exact;  // when the instance is small enough

  std::size_t best() const { return exact ? *exact : greedy; }
};

/// Covering number of a finite metric space with centres in the space.
/// Greedy picks the ball covering most uncovered points (lowest index on
/// ties); exact uses branch and bound for at most 4096 points.
Bounds cov_delta(const Eigen::MatrixXd& distances, double delta);
Bounds cov_delta(const std::vector<Configuration>& points, double delta);

/// Largest delta-separated subset. Greedy keeps points in scan order;
/// exact is a maximum clique search for at most 512 points.
Bounds pack_delta(const Eigen::MatrixXd& distances, double delta);
Bounds pack_delta(const std::vector<Configuration>& points, double delta);

/// min{|C| : nu(B_delta(C)) > 1 - epsilon} with centres C drawn from the
/// rows of `centre_distances` (centres x atoms). Exact for at most 24 atoms.
Bounds cov_eps_delta(const Eigen::MatrixXd& centre_distances, const Eigen::VectorXd& weights, double epsilon,
                     double delta);
Bounds cov_eps_delta(const ModelMeasure& nu, double epsilon, double delta);

/// min over atom subsets S with nu(S) > 1 - epsilon of pack_delta(S);
/// exhaustive, at most 16 atoms.
std::size_t pack_eps_delta_exact(const Eigen::MatrixXd& distances, const Eigen::VectorXd& weights, double epsilon,
                                 double delta);
std::size_t pack_eps_delta_exact(const ModelMeasure& nu, double epsilon, double delta);

/// cov_epsilon for the discrete metric: fewest atoms of mass > 1 - epsilon.
struct CovEps {
  double log_value = 0;                // natural log
  std::optional<std::uint64_t> value;  // when it fits in 64 bits
};

/// Explicit measures sort atoms by weight; i.i.d. measures walk letter
/// type classes in order of decreasing atom probability. Sampler-backed
/// measures are refused.
CovEps cov_eps(const ModelMeasure& nu, double epsilon);

/// log |B_delta(x)| = log sum_{j <= delta |V|} C(|V|, j) (|X| - 1)^j, a
/// closed ball.
double hamming_ball_log_volume(std::size_t vertices, double delta, std::size_t alphabet_size);

/// Largest delta (bisection) with log-volume <= eta |V| for every size.
double largest_radius_for_growth(double eta, const std::vector<std::size_t>& sizes, std::size_t alphabet_size);

}  // namespace sofic
