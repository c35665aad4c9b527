#pragma once

// Per-n entropy rows: normalized log counts of good models, normalized log
// covering numbers of model measures, and their power-stabilized versions.
// All values in nats; an empty set of good models gives -inf.

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sofic/model_measure.hpp"
#include "sofic/model_space.hpp"

namespace sofic {

enum class CountMethod { kExhaustive, kMonteCarlo, kLetterExact };

CountMethod parse_count_method(std::string_view name);
std::string to_string(CountMethod method);

struct EntropyRow {
  std::size_t n = 0;
  std::size_t vertices = 0;
  std::string window;
  double epsilon = 0;
  int k = 1;                  // power for h^ps rows
  double log_value = 0;       // log |Omega| or log cov
  double normalized = 0;      // log_value / (k |V|)
  std::string method;
  double standard_error = 0;  // of `normalized`, Monte Carlo only
};

struct EntropyCurve {
  std::vector<EntropyRow> rows;
};

using ApproxFamily = std::function<SoficMap(std::size_t n)>;
using MeasureFamily = std::function<ModelMeasure(std::size_t n, const SoficMap& sigma)>;

struct CountOptions {
  std::uint64_t budget = kDefaultEnumerationBudget;
  std::size_t mc_samples = 20000;
  std::uint64_t seed = 1;
  std::optional<Eigen::VectorXd> proposal;  // uniform when unset
};

/// One row per n with (1/|V_n|) log |Omega_mu(F, epsilon, sigma_n)|.
/// kLetterExact requires F = {e}.
EntropyCurve entropy_curve(const ApproxFamily& family, const MarginalOracle& mu, const Window& window,
                           double epsilon, const std::vector<std::size_t>& sizes, CountMethod method,
                           const CountOptions& options = {});

/// -sum p log p with 0 log 0 = 0.
double shannon_entropy(const Eigen::VectorXd& weights);

/// One row per n with (1/|V_n|) log cov_epsilon(mu_n).
EntropyCurve hq_lower_curve(const ApproxFamily& family, const MeasureFamily& measures,
                            const std::vector<std::size_t>& sizes, double epsilon);

/// Rows for k = 1..k_max of (1/k) (1/|V_n|) log |Omega_{mu^k}(F, epsilon)|.
EntropyCurve hps_curve(const ApproxFamily& family, const Process& mu, const Window& window, double epsilon,
                       int k_max, const std::vector<std::size_t>& sizes, CountMethod method,
                       const CountOptions& options = {});

}  // namespace sofic
