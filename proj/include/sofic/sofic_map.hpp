#pragma once

// Maps sigma: G -> Sym(V) given by one permutation per generator. The image
// of a word s_1 ... s_k is the composition pi_{s_1} o ... o pi_{s_k}, so
// sigma^{gh} = sigma^g o sigma^h on the nose for free groups and up to the
// multiplicativity defect otherwise.

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sofic/group.hpp"

namespace sofic {

using Vertex = std::uint32_t;
using Permutation = std::vector<Vertex>;

class SoficMap {
 public:
  /// Validates that every permutation is a bijection on {0..n-1}.
  SoficMap(GroupSpec group, std::vector<Permutation> generator_perms,
           std::optional<std::vector<std::uint8_t>> partition = std::nullopt);

  /// (sigma x tau)^{(g,h)} = sigma^g x tau^h on V x W, row-major vertices.
  static SoficMap product(const SoficMap& sigma, const SoficMap& tau);

  const GroupSpec& group() const { return group_; }
  std::size_t size() const { return n_; }

  const Permutation& permutation(int generator) const;
  const Permutation& inverse_permutation(int generator) const;

  Vertex apply_letter(Letter l, Vertex v) const;
  /// sigma^g(v). Out-of-range vertices raise StructuralError.
  Vertex evaluate(const GroupElement& g, Vertex v) const;
  /// sigma^g as a table over all vertices.
  Permutation image(const GroupElement& g) const;

  /// Partition labels carried by partitioned constructions (0 = U, 1 = W).
  const std::optional<std::vector<std::uint8_t>>& partition() const { return partition_; }

  bool is_product() const { return static_cast<bool>(factors_); }
  const SoficMap& left_factor() const;
  const SoficMap& right_factor() const;
  Vertex pair_vertex(Vertex v, Vertex w) const;
  std::pair<Vertex, Vertex> split_vertex(Vertex vw) const;

 private:
  GroupSpec group_;
  std::size_t n_;
  std::vector<Permutation> perms_;
  std::vector<Permutation> inverses_;
  std::optional<std::vector<std::uint8_t>> partition_;
  std::shared_ptr<const std::pair<SoficMap, SoficMap>> factors_;
};

/// Independent uniform permutations per generator (free or free-product
/// groups), drawn by Fisher-Yates from stream split(generator) of the seed.
SoficMap random_uniform(const GroupSpec& group, std::size_t n, std::uint64_t seed);

/// The free group <a, b, a', b'> = <a, b> * <a', b'> on V = U u W with
/// |U| = 3n, |W| = n; a and b preserve the partition, a' and b' do not.
SoficMap partitioned_random(std::size_t n, std::uint64_t seed);
GroupSpec partitioned_group();

/// Exact homomorphisms: Z acting on Z/nZ by rotation, a finite table group
/// acting on itself by left multiplication (n is ignored), and direct
/// products of these.
SoficMap quotient_map(const GroupSpec& group, std::size_t n);

struct MultiplicativityDefect {
  GroupElement g, h;
  double fraction;  // of v with sigma^g(sigma^h(v)) != sigma^{gh}(v)
};

struct FixedPointDefect {
  GroupElement g;
  double fraction;  // of v with sigma^g(v) == v
};

struct DefectReport {
  std::vector<MultiplicativityDefect> multiplicativity;
  std::vector<FixedPointDefect> fixed_points;
};

/// Exact defect fractions by a full scan of V.
DefectReport defect(const SoficMap& sigma,
                    const std::vector<std::pair<GroupElement, GroupElement>>& pairs,
                    const std::vector<GroupElement>& elements);

struct SpectralEstimate {
  double lambda2 = 0;           // second-largest eigenvalue of normalized adjacency
  double expansion_bound = 0;   // Cheeger lower bound (1 - lambda2) / 2 on conductance
  double residual = 0;          // ||A x - lambda2 x|| at exit
  long iterations = 0;
  bool converged = false;
  std::size_t vertex_count = 0;
};

struct SpectralOptions {
  double tolerance = 1e-9;
  long max_iterations = 100000;
  std::uint64_t seed = 0x5eed;
};

/// Second-largest eigenvalue of D^{-1/2} A D^{-1/2} for the Schreier
/// multigraph with edges v ~ pi_s(v), s in `generators`, optionally restricted
/// to the induced subgraph on `subset`. Power iteration on (I + A)/2 with the
/// top eigenvector deflated.
SpectralEstimate schreier_spectral_gap(const SoficMap& sigma, const std::vector<int>& generators,
                                       const std::optional<std::vector<Vertex>>& subset = {},
                                       const SpectralOptions& options = {});

/// Dense normalized adjacency of the same graph; used to cross-check the
/// iterative estimate on small instances.
Eigen::MatrixXd schreier_normalized_adjacency(const SoficMap& sigma,
                                              const std::vector<int>& generators,
                                              const std::optional<std::vector<Vertex>>& subset = {});

}  // namespace sofic
