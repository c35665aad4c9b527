#include "sofic/entropy.hpp"

#include <cmath>
#include <limits>

#include "sofic/errors.hpp"
#include "sofic/metric_cov.hpp"

namespace sofic {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

CountMethod parse_count_method(std::string_view name) {
  if (name == "exhaustive") return CountMethod::kExhaustive;
  if (name == "mc") return CountMethod::kMonteCarlo;
  if (name == "letter-exact") return CountMethod::kLetterExact;
  throw ValidationError("unknown counting method '" + std::string(name) + "'");
}

std::string to_string(CountMethod method) {
  switch (method) {
    case CountMethod::kExhaustive:
      return "exhaustive";
    case CountMethod::kMonteCarlo:
      return "mc";
    case CountMethod::kLetterExact:
      return "letter-exact";
  }
  return "?";
}

namespace {

EntropyRow count_row(const SoficMap& sigma, const MarginalOracle& mu, const Window& window, double epsilon,
                     CountMethod method, const CountOptions& options) {
  EntropyRow row;
  row.vertices = sigma.size();
  row.window = window.describe();
  row.epsilon = epsilon;
  row.method = to_string(method);
  switch (method) {
    case CountMethod::kExhaustive: {
      const std::uint64_t c = count_good_models(sigma, mu, window, epsilon, options.budget);
      row.log_value = c ? std::log(static_cast<double>(c)) : kNegInf;
      break;
    }
    case CountMethod::kMonteCarlo: {
      const std::size_t q = mu.alphabet().size();
      const Eigen::VectorXd proposal =
          options.proposal ? *options.proposal : Eigen::VectorXd::Constant(static_cast<Eigen::Index>(q), 1.0 / static_cast<double>(q));
      const CountEstimate est = count_good_models_mc(sigma, mu, window, epsilon, proposal, options.mc_samples, options.seed);
      row.log_value = est.log_estimate;
      if (est.hits > 0 && est.log_standard_error != kNegInf)
        row.standard_error = std::exp(est.log_standard_error - est.log_estimate) / static_cast<double>(sigma.size());
      break;
    }
    case CountMethod::kLetterExact: {
      if (window.size() != 1) throw ValidationError("letter-exact counting requires F = {e}");
      row.log_value = letter_frequency_count(mu.letter_marginal(), sigma.size(), epsilon, options.budget).log_count;
      break;
    }
  }
  row.normalized = row.log_value == kNegInf ? kNegInf : row.log_value / static_cast<double>(sigma.size());
  return row;
}

}  // namespace

EntropyCurve entropy_curve(const ApproxFamily& family, const MarginalOracle& mu, const Window& window,
                           double epsilon, const std::vector<std::size_t>& sizes, CountMethod method,
                           const CountOptions& options) {
  EntropyCurve curve;
  for (auto n : sizes) {
    const SoficMap sigma = family(n);
    EntropyRow row = count_row(sigma, mu, window, epsilon, method, options);
    row.n = n;
    curve.rows.push_back(std::move(row));
  }
  return curve;
}

double shannon_entropy(const Eigen::VectorXd& weights) {
  if ((weights.array() < 0).any() || std::abs(weights.sum() - 1.0) > 1e-9)
    throw ValidationError("shannon_entropy needs a probability vector");
  double h = 0;
  for (Eigen::Index i = 0; i < weights.size(); ++i)
    if (weights[i] > 0) h -= weights[i] * std::log(weights[i]);
  return h;
}

EntropyCurve hq_lower_curve(const ApproxFamily& family, const MeasureFamily& measures,
                            const std::vector<std::size_t>& sizes, double epsilon) {
  EntropyCurve curve;
  for (auto n : sizes) {
    const SoficMap sigma = family(n);
    const ModelMeasure mu_n = measures(n, sigma);
    if (mu_n.vertex_count() != sigma.size()) throw StructuralError("model measure lives on a different vertex set");
    EntropyRow row;
    row.n = n;
    row.vertices = sigma.size();
    row.window = "-";
    row.epsilon = epsilon;
    row.method = "cov_eps";
    row.log_value = cov_eps(mu_n, epsilon).log_value;
    row.normalized = row.log_value / static_cast<double>(sigma.size());
    curve.rows.push_back(std::move(row));
  }
  return curve;
}

EntropyCurve hps_curve(const ApproxFamily& family, const Process& mu, const Window& window, double epsilon,
                       int k_max, const std::vector<std::size_t>& sizes, CountMethod method,
                       const CountOptions& options) {
  if (k_max < 1) throw ValidationError("k_max must be positive");
  EntropyCurve curve;
  for (int k = 1; k <= k_max; ++k) {
    const Process power = power_process(mu, k);
    for (auto n : sizes) {
      const SoficMap sigma = family(n);
      EntropyRow row = count_row(sigma, *power, window, epsilon, method, options);
      row.n = n;
      row.k = k;
      if (row.normalized != kNegInf) row.normalized /= k;
      row.standard_error /= k;
      curve.rows.push_back(std::move(row));
    }
  }
  return curve;
}

}  // namespace sofic
