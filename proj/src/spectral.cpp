#include <cmath>

#include "sofic/errors.hpp"
#include "sofic/rng.hpp"
#include "sofic/sofic_map.hpp"

namespace sofic {

namespace {

// Induced Schreier multigraph in compressed adjacency form.
struct Graph {
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> targets;
  Eigen::VectorXd degree;
};

Graph build_graph(const SoficMap& sigma, const std::vector<int>& generators,
                  const std::optional<std::vector<Vertex>>& subset) {
  if (generators.empty()) throw ValidationError("schreier graph needs at least one generator");
  const std::size_t n = sigma.size();
  std::vector<std::size_t> local(n, n);
  std::vector<Vertex> vertices;
  if (subset) {
    vertices = *subset;
  } else {
    vertices.resize(n);
    for (std::size_t v = 0; v < n; ++v) vertices[v] = static_cast<Vertex>(v);
  }
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (vertices[i] >= n) throw StructuralError("subset vertex out of range");
    local[vertices[i]] = i;
  }
  Graph g;
  g.offsets.push_back(0);
  g.degree = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(vertices.size()));
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    for (int s : generators) {
      for (Vertex w : {sigma.permutation(s)[vertices[i]], sigma.inverse_permutation(s)[vertices[i]]}) {
        if (local[w] == n) continue;
        g.targets.push_back(local[w]);
        g.degree[static_cast<Eigen::Index>(i)] += 1.0;
      }
    }
    g.offsets.push_back(g.targets.size());
  }
  return g;
}

// y = D^{-1/2} A D^{-1/2} x
void normalized_apply(const Graph& g, const Eigen::VectorXd& x, Eigen::VectorXd& y) {
  const auto n = x.size();
  y.setZero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double di = g.degree[i];
    if (di == 0) continue;
    double acc = 0;
    for (std::size_t k = g.offsets[static_cast<std::size_t>(i)]; k < g.offsets[static_cast<std::size_t>(i) + 1]; ++k) {
      const auto j = static_cast<Eigen::Index>(g.targets[k]);
      acc += x[j] / std::sqrt(g.degree[j]);
    }
    y[i] = acc / std::sqrt(di);
  }
}

}  // namespace

Eigen::MatrixXd schreier_normalized_adjacency(const SoficMap& sigma, const std::vector<int>& generators,
                                              const std::optional<std::vector<Vertex>>& subset) {
  const Graph g = build_graph(sigma, generators, subset);
  const auto n = g.degree.size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (std::size_t k = g.offsets[static_cast<std::size_t>(i)]; k < g.offsets[static_cast<std::size_t>(i) + 1]; ++k) {
      const auto j = static_cast<Eigen::Index>(g.targets[k]);
      m(i, j) += 1.0 / std::sqrt(g.degree[i] * g.degree[j]);
    }
  return m;
}

SpectralEstimate schreier_spectral_gap(const SoficMap& sigma, const std::vector<int>& generators,
                                       const std::optional<std::vector<Vertex>>& subset,
                                       const SpectralOptions& options) {
  const Graph g = build_graph(sigma, generators, subset);
  const auto n = g.degree.size();
  SpectralEstimate out;
  out.vertex_count = static_cast<std::size_t>(n);
  if (n < 2) {
    out.converged = true;
    return out;
  }
  const Eigen::VectorXd top = g.degree.cwiseSqrt().normalized();

  CounterRng rng(options.seed);
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = rng.uniform() - 0.5;
  x -= top.dot(x) * top;
  x.normalize();

  Eigen::VectorXd ax(n), y(n);
  double lambda = 2.0;
  for (out.iterations = 1; out.iterations <= options.max_iterations; ++out.iterations) {
    normalized_apply(g, x, ax);
    y = 0.5 * (x + ax);  // spectrum shifted into [0, 1], order preserved
    y -= top.dot(y) * top;
    const double next = 2.0 * x.dot(y) - 1.0;
    const double norm = y.norm();
    if (norm == 0) {
      lambda = -1.0;
      out.converged = true;
      break;
    }
    x = y / norm;
    if (std::abs(next - lambda) < options.tolerance) {
      lambda = next;
      out.converged = true;
      break;
    }
    lambda = next;
  }
  if (out.iterations > options.max_iterations) out.iterations = options.max_iterations;
  normalized_apply(g, x, ax);
  lambda = x.dot(ax);
  out.lambda2 = lambda;
  out.residual = (ax - lambda * x).norm();
  out.expansion_bound = 0.5 * (1.0 - lambda);
  return out;
}

}  // namespace sofic
