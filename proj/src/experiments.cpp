#include "sofic/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "sofic/convergence.hpp"
#include "sofic/entropy.hpp"
#include "sofic/errors.hpp"
#include "sofic/metric_cov.hpp"

namespace sofic {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::uint64_t replicate_seed(std::uint64_t seed, std::size_t r) { return CounterRng(seed).split(r).key(); }

Eigen::VectorXd vector_of(const Json& j) {
  const auto xs = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

void add_check(ExperimentResult& r, std::string name, bool passed, double value, double threshold,
               std::string detail = {}) {
  r.checks.push_back({std::move(name), passed, value, threshold, std::move(detail)});
}

SoficMap make_approximation(const Json& approx, const GroupSpec& group, std::size_t n, std::uint64_t seed) {
  const std::string family = approx.value("family", std::string("random_uniform"));
  if (family == "random_uniform") return random_uniform(group, n, seed);
  if (family == "quotient") return quotient_map(group, n);
  if (family == "partitioned") return partitioned_random(n, seed);
  throw ValidationError("unknown approximation family '" + family + "'");
}

std::uint64_t budget_of(const Json& cfg) { return cfg.value("budget", kDefaultEnumerationBudget); }

double max_of(const std::vector<double>& xs) { return xs.empty() ? 0.0 : *std::max_element(xs.begin(), xs.end()); }

std::string join(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ";" : "") + format_double(xs[i]);
  return out;
}

// P(TV >= epsilon) for the letter frequencies of an i.i.d. binary sample,
// the exact binomial tail.
double binary_tail(double p, std::size_t n, double epsilon) {
  double total = 0;
  const double nn = static_cast<double>(n);
  for (std::size_t k = 0; k <= n; ++k) {
    const double tv = std::abs(static_cast<double>(k) / nn - p);
    if (tv < epsilon - kProbabilityTolerance) continue;
    double lp = std::lgamma(nn + 1) - std::lgamma(static_cast<double>(k) + 1) - std::lgamma(nn - static_cast<double>(k) + 1);
    lp += (k ? static_cast<double>(k) * std::log(p) : 0.0) + (k < n ? (nn - static_cast<double>(k)) * std::log1p(-p) : 0.0);
    total += std::exp(lp);
  }
  return total;
}

// ---------------------------------------------------------------------------
// E1: letter-exact (or enumerated) entropy of Bernoulli processes

ExperimentResult run_e1(const Json& cfg, const RunOptions& opts) {
  ExperimentResult r;
  const GroupSpec group = group_from_json(cfg.at("group"));
  const Window window = window_from_json(cfg.value("window", Json{{"radius", 0}}), group);
  const double eps = cfg.at("epsilon").get<double>();
  const auto sizes = cfg.at("sizes").get<std::vector<std::size_t>>();
  const CountMethod method = parse_count_method(cfg.value("method", std::string("letter-exact")));
  const std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
  const double max_gap = cfg.at("thresholds").at("max_gap").get<double>();
  const Json approx = cfg.value("approximation", Json::object());
  CountOptions count;
  count.budget = budget_of(cfg);
  count.seed = seed;
  count.mc_samples = cfg.value("samples", std::size_t{20000});
  const ApproxFamily family = [&](std::size_t n) { return make_approximation(approx, group, n, seed); };

  CsvTable table({"process", "weights", "n", "vertices", "window", "epsilon", "method", "log_count", "normalized",
                  "standard_error", "shannon", "gap"});
  r.metrics["final"] = Json::array();
  std::vector<PlotSeries> series;
  for (std::size_t p = 0; p < cfg.at("processes").size(); ++p) {
    const Json& pj = cfg.at("processes")[p];
    const Process mu = process_from_json(pj, group);
    const double shannon = shannon_entropy(mu->letter_marginal());
    const EntropyCurve curve = entropy_curve(family, *mu, window, eps, sizes, method, count);
    PlotSeries s{"process " + std::to_string(p), {}, {}};
    std::string weights = pj.contains("weights") ? pj.at("weights").dump() : "";
    for (const auto& row : curve.rows) {
      const double gap = std::abs(row.normalized - shannon);
      table.add_row({cell(p), weights, cell(row.n), cell(row.vertices), row.window, cell(row.epsilon), row.method,
                     cell(row.log_value), cell(row.normalized), cell(row.standard_error), cell(shannon), cell(gap)});
      s.x.push_back(static_cast<double>(row.vertices));
      s.y.push_back(row.normalized);
    }
    const auto& last = curve.rows.back();
    const double gap = std::abs(last.normalized - shannon);
    r.metrics["final"].push_back({{"process", p}, {"vertices", last.vertices}, {"normalized", json_number(last.normalized)},
                                  {"shannon", shannon}, {"gap", json_number(gap)}});
    add_check(r, "process " + std::to_string(p) + " normalized count within tolerance of Shannon entropy", gap < max_gap,
              gap, max_gap);
    series.push_back(std::move(s));
    series.push_back({"Shannon " + std::to_string(p), {static_cast<double>(sizes.front()), static_cast<double>(sizes.back())}, {shannon, shannon}});
  }
  r.tables.emplace_back("entropy", std::move(table));
  if (opts.plot) r.plots.emplace_back("entropy", svg_line_plot("Normalized log-count of good models", "|V|", "nats per vertex", series, true));
  return r;
}

// ---------------------------------------------------------------------------
// E2: covering and packing inequalities

std::vector<Configuration> random_point_set(CounterRng& rng, std::size_t n, std::size_t max_size) {
  std::vector<std::uint64_t> pool(std::size_t{1} << n);
  std::iota(pool.begin(), pool.end(), 0);
  const std::size_t size = 1 + rng.below(std::min(max_size, pool.size()));
  std::vector<Configuration> out;
  for (std::size_t i = 0; i < size; ++i) {
    const auto j = i + rng.below(pool.size() - i);
    std::swap(pool[i], pool[j]);
    out.push_back(configuration_at(pool[i], 2, n));
  }
  return out;
}

std::vector<double> random_weights(CounterRng& rng, std::size_t k) {
  std::vector<double> w(k);
  double total = 0;
  for (auto& x : w) total += (x = 0.05 + rng.uniform());
  for (auto& x : w) x /= total;
  return w;
}

Eigen::VectorXd as_vector(const std::vector<double>& w) {
  return Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
}

// A radius in (0, 1]: either a multiple of 1/n (boundary ties) or halfway
// between two.
double random_scale(CounterRng& rng, std::size_t n) {
  const double k = 1.0 + static_cast<double>(rng.below(n));
  return (rng.below(2) ? k : k - 0.5) / static_cast<double>(n);
}

ExperimentResult run_e2(const Json& cfg, const RunOptions&) {
  ExperimentResult r;
  const std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
  const std::size_t instances = cfg.at("instances").get<std::size_t>();
  const std::size_t max_v = cfg.value("max_vertices", std::size_t{8});
  const std::size_t max_set = cfg.value("max_set_size", std::size_t{40});
  const std::size_t max_atoms = cfg.value("max_atoms", std::size_t{12});
  const std::size_t coupling_v = cfg.value("coupling_max_vertices", std::size_t{4});
  if (max_v < 2 || max_v > 12) throw ValidationError("max_vertices must lie in [2, 12]");
  if (max_atoms > kExactPartialCoverAtoms || max_atoms > kExactMeasurePackAtoms)
    throw ValidationError("max_atoms exceeds the exact solver limits");

  CsvTable table({"instance", "kind", "vertices", "size", "epsilon", "delta", "upper", "middle", "lower", "greedy_cover",
                  "greedy_pack", "holds"});
  std::map<std::string, std::pair<std::size_t, std::size_t>> tally;  // kind -> (instances, violations)
  auto record = [&](const std::string& kind, bool holds) {
    auto& t = tally[kind];
    ++t.first;
    if (!holds) ++t.second;
  };
  const CounterRng root(seed);
  for (std::size_t i = 0; i < instances; ++i) {
    CounterRng rng = root.split(i);
    {  // cov_{delta/2}(S) >= pack_delta(S) >= cov_delta(S)
      const std::size_t n = 2 + rng.below(max_v - 1);
      const auto s = random_point_set(rng, n, max_set);
      const double delta = random_scale(rng, n);
      const auto d = distance_matrix(s);
      const Bounds half = cov_delta(d, delta / 2), pack = pack_delta(d, delta), cov = cov_delta(d, delta);
      const bool holds = half.exact && pack.exact && cov.exact && *half.exact >= *pack.exact && *pack.exact >= *cov.exact &&
                         cov.greedy >= *cov.exact && pack.greedy <= *pack.exact && pack.greedy >= *cov.exact;
      table.add_row({cell(i), "set_chain", cell(n), cell(s.size()), "", cell(delta), cell(half.best()), cell(pack.best()),
                     cell(cov.best()), cell(cov.greedy), cell(pack.greedy), cell(holds)});
      record("set_chain", holds);
    }
    {  // cov_{eps,delta/2}(nu) >= pack_{eps,delta}(nu) >= cov_{eps,delta}(nu)
      const std::size_t n = 2 + rng.below(std::min<std::size_t>(max_v, 6) - 1);
      const auto atoms = random_point_set(rng, n, max_atoms);
      const auto nu = ModelMeasure::explicit_support(atoms, random_weights(rng, atoms.size()));
      const double eps = 0.02 + 0.38 * rng.uniform();
      const double delta = random_scale(rng, n);
      const Bounds half = cov_eps_delta(nu, eps, delta / 2), cov = cov_eps_delta(nu, eps, delta);
      const std::size_t pack = pack_eps_delta_exact(nu, eps, delta);
      const bool holds = half.exact && cov.exact && *half.exact >= pack && pack >= *cov.exact && cov.greedy >= *cov.exact;
      table.add_row({cell(i), "measure_chain", cell(n), cell(atoms.size()), cell(eps), cell(delta), cell(half.best()),
                     cell(pack), cell(cov.best()), cell(cov.greedy), "", cell(holds)});
      record("measure_chain", holds);
    }
    {  // coupling: cov_{eps,delta}(lambda) <= cov_{eps/2,delta}(mu) cov_{eps/2,delta}(nu)
      const std::size_t n = 2 + rng.below(coupling_v - 1);
      const auto xs = random_point_set(rng, n, 4), ys = random_point_set(rng, n, 4);
      std::vector<Configuration> pairs, centres;
      std::vector<double> joint;
      std::vector<double> mu_w(xs.size(), 0.0), nu_w(ys.size(), 0.0);
      std::vector<std::pair<std::size_t, std::size_t>> cells;
      for (std::size_t a = 0; a < xs.size(); ++a)
        for (std::size_t b = 0; b < ys.size(); ++b) {
          centres.push_back(pair_configuration(xs[a], ys[b]));
          if (rng.below(3) == 0) continue;
          pairs.push_back(centres.back());
          cells.emplace_back(a, b);
        }
      if (pairs.empty()) {
        pairs.push_back(centres.front());
        cells.emplace_back(0, 0);
      }
      joint = random_weights(rng, pairs.size());
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        mu_w[cells[k].first] += joint[k];
        nu_w[cells[k].second] += joint[k];
      }
      Eigen::MatrixXd d(static_cast<Eigen::Index>(centres.size()), static_cast<Eigen::Index>(pairs.size()));
      for (std::size_t c = 0; c < centres.size(); ++c)
        for (std::size_t k = 0; k < pairs.size(); ++k)
          d(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k)) = pair_hamming_distance(centres[c], pairs[k], 2);
      const double eps = 0.1 + 0.5 * rng.uniform();
      const double delta = random_scale(rng, n);
      const Bounds lam = cov_eps_delta(d, as_vector(joint), eps, delta);
      const Bounds a = cov_eps_delta(distance_matrix(xs), as_vector(mu_w), eps / 2, delta);
      const Bounds b = cov_eps_delta(distance_matrix(ys), as_vector(nu_w), eps / 2, delta);
      const std::size_t bound = a.best() * b.best();
      const bool holds = lam.exact && a.exact && b.exact && *lam.exact <= bound;
      table.add_row({cell(i), "coupling", cell(n), cell(pairs.size()), cell(eps), cell(delta), cell(bound), "",
                     cell(lam.best()), cell(lam.greedy), "", cell(holds)});
      record("coupling", holds);
    }
    {  // product: cov_{eps,delta/4}(mu x nu) >= cov_{sqrt eps,delta}(mu) cov_{sqrt eps,delta}(nu)
      const std::size_t n = 2 + rng.below(coupling_v - 1);
      const auto xs = random_point_set(rng, n, 4), ys = random_point_set(rng, n, 4);
      const auto wx = random_weights(rng, xs.size()), wy = random_weights(rng, ys.size());
      std::vector<Configuration> atoms;
      std::vector<double> w;
      for (std::size_t a = 0; a < xs.size(); ++a)
        for (std::size_t b = 0; b < ys.size(); ++b) {
          atoms.push_back(pair_configuration(xs[a], ys[b]));
          w.push_back(wx[a] * wy[b]);
        }
      const double eps = 0.02 + 0.4 * rng.uniform();
      const double delta = random_scale(rng, n);
      const Bounds prod = cov_eps_delta(pair_distance_matrix(atoms, 2), as_vector(w), eps, delta / 4);
      const Bounds a = cov_eps_delta(distance_matrix(xs), as_vector(wx), std::sqrt(eps), delta);
      const Bounds b = cov_eps_delta(distance_matrix(ys), as_vector(wy), std::sqrt(eps), delta);
      const bool holds = prod.exact && a.exact && b.exact && *prod.exact >= *a.exact * *b.exact;
      table.add_row({cell(i), "product", cell(n), cell(atoms.size()), cell(eps), cell(delta), cell(prod.best()), "",
                     cell(a.best() * b.best()), cell(prod.greedy), "", cell(holds)});
      record("product", holds);
    }
  }
  r.tables.emplace_back("chains", std::move(table));

  CsvTable balls({"eta", "delta", "vertices", "log_volume", "bound", "holds"});
  const auto sizes = cfg.value("ball_sizes", std::vector<std::size_t>{64, 256, 1024, 4096});
  bool balls_hold = true;
  r.metrics["ball_radius"] = Json::object();
  for (double eta : cfg.value("eta", std::vector<double>{0.1, 0.2, 0.5})) {
    const double delta = largest_radius_for_growth(eta, sizes, 2);
    r.metrics["ball_radius"][format_double(eta)] = delta;
    for (auto n : sizes) {
      const double lv = hamming_ball_log_volume(n, delta, 2), bound = eta * static_cast<double>(n);
      const bool holds = delta > 0 && lv <= bound;
      balls_hold = balls_hold && holds;
      balls.add_row({cell(eta), cell(delta), cell(n), cell(lv), cell(bound), cell(holds)});
    }
  }
  r.tables.emplace_back("ball_volume", std::move(balls));

  for (const auto& [kind, t] : tally) {
    r.metrics[kind] = {{"instances", t.first}, {"violations", t.second}};
    add_check(r, kind + " inequality holds on every instance", t.second == 0, static_cast<double>(t.second), 0);
  }
  add_check(r, "a positive radius keeps ball growth below eta", balls_hold, balls_hold ? 1 : 0, 1);
  return r;
}

// ---------------------------------------------------------------------------
// E3: good models of a product project into doubled neighbourhoods

Process random_binary_process(CounterRng& rng, const GroupSpec& group) {
  if (rng.below(2) == 0) {
    const double p = 0.15 + 0.7 * rng.uniform();
    return bernoulli((Eigen::VectorXd(2) << p, 1 - p).finished(), group);
  }
  const double flip = 0.05 + 0.45 * rng.uniform();
  return tree_markov((Eigen::MatrixXd(2, 2) << 1 - flip, flip, flip, 1 - flip).finished(),
                     (Eigen::VectorXd(2) << 0.5, 0.5).finished(), group);
}

ExperimentResult run_e3(const Json& cfg, const RunOptions&) {
  ExperimentResult r;
  const GroupSpec group = group_from_json(cfg.at("group"));
  const std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
  const std::size_t pairs = cfg.at("pairs").get<std::size_t>();
  const std::size_t min_v = cfg.at("min_vertices").get<std::size_t>(), max_v = cfg.at("max_vertices").get<std::size_t>();
  const auto eps_range = cfg.at("epsilon_range").get<std::vector<double>>();
  const int max_radius = cfg.value("max_radius", 1);
  const std::uint64_t budget = budget_of(cfg);
  if (min_v < 1 || max_v < min_v) throw ValidationError("bad vertex range");
  if (eps_range.size() != 2) throw ValidationError("epsilon_range needs two entries");

  CsvTable table({"pair", "seed", "mu", "nu", "vertices", "window", "epsilon", "pair_models", "left_models",
                  "right_models", "log_pair", "log_bound", "inclusion"});
  const CounterRng root(seed);
  std::size_t failures = 0;
  for (std::size_t i = 0; i < pairs; ++i) {
    CounterRng rng = root.split(i);
    const std::size_t n = min_v + rng.below(max_v - min_v + 1);
    const std::uint64_t s = rng();
    const SoficMap sigma = random_uniform(group, n, s);
    const Process mu = random_binary_process(rng, group), nu = random_binary_process(rng, group);
    const Window window = group.ball(static_cast<int>(rng.below(static_cast<std::uint64_t>(max_radius) + 1)));
    const double eps = eps_range[0] + (eps_range[1] - eps_range[0]) * rng.uniform();
    const Process joint = product_process(mu, nu);
    const auto both = enumerate_good_models(sigma, *joint, window, eps, budget);
    const auto left = enumerate_good_models(sigma, *mu, window, 2 * eps, budget);
    const auto right = enumerate_good_models(sigma, *nu, window, 2 * eps, budget);
    const std::set<Configuration> ls(left.begin(), left.end()), rs(right.begin(), right.end());
    bool inclusion = true;
    for (const auto& z : both) {
      const auto [x, y] = split_pair(z, 2);
      if (!ls.count(x) || !rs.count(y)) {
        inclusion = false;
        break;
      }
    }
    auto log_size = [](std::size_t k) { return k ? std::log(static_cast<double>(k)) : kNegInf; };
    const double lhs = log_size(both.size()), rhs = log_size(left.size()) + log_size(right.size());
    const bool holds = inclusion && lhs <= rhs;
    if (!holds) ++failures;
    table.add_row({cell(i), cell(std::to_string(s)), mu->describe(), nu->describe(), cell(n), window.describe(), cell(eps),
                   cell(both.size()), cell(left.size()), cell(right.size()), cell(lhs), cell(rhs), cell(holds)});
  }
  r.tables.emplace_back("subadditivity", std::move(table));
  r.metrics["pairs"] = pairs;
  r.metrics["violations"] = failures;
  add_check(r, "product good models project into doubled neighbourhoods", failures == 0, static_cast<double>(failures), 0);
  return r;
}

// ---------------------------------------------------------------------------
// E4: quenched and doubly-quenched convergence of Bernoulli model measures

ExperimentResult run_e4(const Json& cfg, const RunOptions& opts) {
  ExperimentResult r;
  const GroupSpec group = group_from_json(cfg.at("group"));
  const Json approx = cfg.value("approximation", Json::object());
  const Process mu = process_from_json(cfg.at("process"), group);
  const Eigen::VectorXd weights = mu->letter_marginal();
  const auto radii = cfg.at("radii").get<std::vector<int>>();
  const double eps = cfg.at("epsilon").get<double>();
  const auto sizes = cfg.at("sizes").get<std::vector<std::size_t>>();
  const std::size_t samples = cfg.at("samples").get<std::size_t>();
  const std::size_t replicates = cfg.at("replicates").get<std::size_t>();
  const std::size_t dispersion_samples = cfg.value("dispersion_samples", std::size_t{100});
  const std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
  const double q_max = cfg.at("thresholds").at("quenched").get<double>();
  const double dq_max = cfg.at("thresholds").at("doubly_quenched").get<double>();

  CsvTable table({"replicate", "seed", "n", "vertices", "radius", "epsilon", "lw_defect", "q_defect", "q_se",
                  "dq_defect", "dq_se", "binomial_oracle", "dispersion_clusters", "barycentre_tv"});
  CsvTable covering({"replicate", "n", "vertices", "epsilon", "log_cov", "normalized", "shannon"});
  std::map<std::pair<std::size_t, int>, std::vector<double>> q_by, dq_by;
  std::map<std::pair<std::size_t, int>, std::vector<double>> oracle_gap;
  for (std::size_t rep = 0; rep < replicates; ++rep) {
    const std::uint64_t s = replicate_seed(seed, rep);
    for (auto n : sizes) {
      const SoficMap sigma = make_approximation(approx, group, n, s);
      const ModelMeasure nu_n = ModelMeasure::iid(weights, sigma.size());
      for (int radius : radii) {
        const Window window = group.ball(radius);
        const CounterRng streams(s ^ (n * 0x9E37ULL) ^ static_cast<std::uint64_t>(radius));
        const double lw = lw_defect(sigma, nu_n, *mu, window, eps, samples, streams.split(0).key());
        const auto q = quenched_defect(sigma, nu_n, *mu, window, eps, samples, streams.split(1).key());
        const auto dq = dq_defect(sigma, nu_n, *mu, window, eps, samples, streams.split(2).key());
        const Dispersion disp = dispersion(sigma, nu_n, window, dispersion_samples, streams.split(3).key(), mu.get());
        std::string oracle;
        if (window.size() == 1 && weights.size() == 2) {
          const double tail = binary_tail(weights[1], sigma.size(), eps);
          oracle = cell(tail);
          oracle_gap[{n, radius}].push_back(std::abs(q.value - tail) - 3 * std::sqrt(tail * (1 - tail) / static_cast<double>(samples)));  // <= 0 inside 3 SE
        }
        table.add_row({cell(rep), cell(std::to_string(s)), cell(n), cell(sigma.size()), cell(radius), cell(eps), cell(lw),
                       cell(q.value), cell(q.standard_error), cell(dq.value), cell(dq.standard_error), oracle,
                       cell(disp.clusters.size()), cell(disp.barycentre_distance)});
        q_by[{n, radius}].push_back(q.value);
        dq_by[{n, radius}].push_back(dq.value);
      }
      const CovEps cov = cov_eps(nu_n, eps);
      covering.add_row({cell(rep), cell(n), cell(sigma.size()), cell(eps), cell(cov.log_value),
                        cell(cov.log_value / static_cast<double>(sigma.size())), cell(shannon_entropy(weights))});
    }
  }
  r.tables.emplace_back("defects", std::move(table));
  r.tables.emplace_back("covering", std::move(covering));

  const std::size_t n_max = sizes.back();
  r.metrics["largest"] = Json::array();
  for (int radius : radii) {
    const auto& q = q_by[{n_max, radius}];
    const auto& dq = dq_by[{n_max, radius}];
    const double q_worst = max_of(q), dq_worst = max_of(dq);
    const double q_spread = q_worst - *std::min_element(q.begin(), q.end());
    r.metrics["largest"].push_back({{"radius", radius}, {"n", n_max}, {"q_max", q_worst}, {"dq_max", dq_worst},
                                    {"q_spread", q_spread}, {"q", q}, {"dq", dq}});
    const std::string where = " (radius " + std::to_string(radius) + ", n = " + std::to_string(n_max) + ")";
    add_check(r, "quenched defect below threshold in every replicate" + where, q_worst < q_max, q_worst, q_max);
    add_check(r, "doubly-quenched defect below threshold in every replicate" + where, dq_worst < dq_max, dq_worst, dq_max);
    if (oracle_gap.count({n_max, radius})) {
      const double worst = max_of(oracle_gap[{n_max, radius}]);
      add_check(r, "quenched defect within 3 SE of the binomial tail" + where, worst <= 1e-12, worst, 0);
    }
  }
  if (opts.plot) {
    std::vector<PlotSeries> series;
    for (int radius : radii) {
      PlotSeries q{"q radius " + std::to_string(radius), {}, {}}, dq{"dq radius " + std::to_string(radius), {}, {}};
      for (auto n : sizes) {
        const auto& a = q_by[{n, radius}];
        const auto& b = dq_by[{n, radius}];
        q.x.push_back(static_cast<double>(n));
        dq.x.push_back(static_cast<double>(n));
        q.y.push_back(std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size()));
        dq.y.push_back(std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(b.size()));
      }
      series.push_back(std::move(q));
      series.push_back(std::move(dq));
    }
    r.plots.emplace_back("defects", svg_line_plot("Mean defects of i.i.d. model measures", "|V|", "defect", series, true));
  }
  return r;
}

// ---------------------------------------------------------------------------
// E5 / E6: the coset-constant process over partition-preserving approximations

struct CosetInstance {
  std::uint64_t seed;
  SoficMap sigma;
  Configuration indicator;  // 1_W
  bool letter_good;
  double indicator_tv;  // TV of 1_W's empirical F-marginal to nu_F
  double epsilon;       // calibrated
  std::vector<Configuration> good;
};

CosetInstance coset_instance(const Json& cfg, const Process& nu, const Window& window, std::size_t rep, std::uint64_t budget) {
  const std::size_t n = cfg.at("n").get<std::size_t>();
  const std::uint64_t s = replicate_seed(cfg.at("seed").get<std::uint64_t>(), rep);
  SoficMap sigma = partitioned_random(n, s);
  std::vector<Symbol> w(sigma.partition()->begin(), sigma.partition()->end());
  Configuration indicator(2, w);
  const double letter_eps = cfg.value("letter_epsilon", 0.05);
  const bool letter_good = is_good_model(sigma, indicator, *nu, Window::identity_only(nu->group()), letter_eps);
  GoodModelTest test(sigma, *nu, window, 1.0);
  const double tv = test.distance(indicator);
  const double eps = tv + cfg.at("epsilon_margin").get<double>();
  auto good = enumerate_good_models(sigma, *nu, window, eps, budget);
  return {s, std::move(sigma), std::move(indicator), letter_good, tv, eps, std::move(good)};
}

ExperimentResult run_e5(const Json& cfg, const RunOptions&) {
  ExperimentResult r;
  const GroupSpec group = partitioned_group();
  const Process nu = coset_iid(vector_of(cfg.at("mu0")), group, 0);
  const Window window = group.ball(cfg.value("radius", 1));
  const std::size_t replicates = cfg.at("replicates").get<std::size_t>();
  const double radius = cfg.at("hamming_threshold").get<double>();
  const std::size_t required = cfg.at("required_seeds").get<std::size_t>();

  CsvTable table({"replicate", "seed", "vertices", "indicator_letter_good", "indicator_tv", "epsilon", "good_models",
                  "max_distance", "mean_distance", "clustered"});
  std::size_t letter_ok = 0, clustered = 0;
  for (std::size_t rep = 0; rep < replicates; ++rep) {
    const CosetInstance inst = coset_instance(cfg, nu, window, rep, budget_of(cfg));
    double worst = 0, mean = 0;
    for (const auto& x : inst.good) {
      const double d = hamming_distance(x, inst.indicator);
      worst = std::max(worst, d);
      mean += d;
    }
    mean /= static_cast<double>(std::max<std::size_t>(inst.good.size(), 1));
    const bool close = worst <= radius + kDistanceTolerance;
    letter_ok += inst.letter_good;
    clustered += close;
    table.add_row({cell(rep), cell(std::to_string(inst.seed)), cell(inst.sigma.size()), cell(inst.letter_good),
                   cell(inst.indicator_tv), cell(inst.epsilon), cell(inst.good.size()), cell(worst), cell(mean), cell(close)});
  }
  r.tables.emplace_back("clustering", std::move(table));
  r.metrics["letter_good"] = letter_ok;
  r.metrics["clustered"] = clustered;
  r.metrics["replicates"] = replicates;
  add_check(r, "indicator of W is a letter-level good model in every replicate", letter_ok == replicates,
            static_cast<double>(letter_ok), static_cast<double>(replicates));
  add_check(r, "good models cluster around the indicator of W", clustered >= required, static_cast<double>(clustered),
            static_cast<double>(required));
  return r;
}

ExperimentResult run_e6(const Json& cfg, const RunOptions&) {
  ExperimentResult r;
  const GroupSpec group = partitioned_group();
  const Eigen::VectorXd mu0 = vector_of(cfg.at("mu0"));
  const Process nu = coset_iid(mu0, group, 0);
  const Window window = group.ball(cfg.value("radius", 1));
  const std::size_t replicates = cfg.at("replicates").get<std::size_t>();
  const double pair_eps = cfg.at("pair_epsilon").get<double>();
  Eigen::VectorXd target(4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) target[a * 2 + b] = mu0[a] * mu0[b];

  CsvTable table({"replicate", "seed", "good_models", "pairs_checked", "good_pairs", "min_pair_tv", "min_freq_10",
                  "max_freq_10", "target_freq_10"});
  std::size_t total_good_pairs = 0, total_pairs = 0;
  double min_tv = 1;
  for (std::size_t rep = 0; rep < replicates; ++rep) {
    const CosetInstance inst = coset_instance(cfg, nu, window, rep, budget_of(cfg));
    const std::size_t n = inst.sigma.size();
    std::size_t good_pairs = 0;
    double rep_min_tv = 1, f_lo = 1, f_hi = 0;
    for (const auto& y : inst.good)
      for (const auto& y2 : inst.good) {
        std::array<std::size_t, 4> counts{};
        for (std::size_t v = 0; v < n; ++v) ++counts[static_cast<std::size_t>(y[v]) * 2 + y2[v]];
        double tv = 0;
        for (int k = 0; k < 4; ++k) tv += std::abs(static_cast<double>(counts[static_cast<std::size_t>(k)]) / static_cast<double>(n) - target[k]);
        tv *= 0.5;
        rep_min_tv = std::min(rep_min_tv, tv);
        const double f10 = static_cast<double>(counts[2]) / static_cast<double>(n);
        f_lo = std::min(f_lo, f10);
        f_hi = std::max(f_hi, f10);
        if (tv < pair_eps - kProbabilityTolerance) ++good_pairs;
      }
    const std::size_t checked = inst.good.size() * inst.good.size();
    total_pairs += checked;
    total_good_pairs += good_pairs;
    min_tv = std::min(min_tv, rep_min_tv);
    table.add_row({cell(rep), cell(std::to_string(inst.seed)), cell(inst.good.size()), cell(checked), cell(good_pairs),
                   cell(rep_min_tv), cell(f_lo), cell(f_hi), cell(target[2])});
  }
  r.tables.emplace_back("pairs", std::move(table));
  r.metrics["pairs_checked"] = total_pairs;
  r.metrics["good_pairs"] = total_good_pairs;
  r.metrics["min_pair_tv"] = min_tv;
  add_check(r, "no pair of good models is a good model of the squared process", total_good_pairs == 0 && total_pairs > 0,
            static_cast<double>(total_good_pairs), 0);
  return r;
}

// ---------------------------------------------------------------------------
// E7: Schreier expansion within U and W

ExperimentResult run_e7(const Json& cfg, const RunOptions& opts) {
  ExperimentResult r;
  const auto sizes = cfg.at("sizes").get<std::vector<std::size_t>>();
  const std::size_t replicates = cfg.at("replicates").get<std::size_t>();
  const std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
  const double threshold = cfg.at("threshold").get<double>();
  const std::size_t required = cfg.at("required").get<std::size_t>();
  const GroupSpec group = partitioned_group();
  std::vector<int> gens;
  for (const auto& label : cfg.value("generators", std::vector<std::string>{"a", "b"})) {
    const auto& labels = group.labels();
    const auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) throw ValidationError("unknown generator '" + label + "'");
    gens.push_back(static_cast<int>(it - labels.begin()));
  }
  SpectralOptions so;
  so.tolerance = cfg.value("tolerance", 1e-9);
  so.max_iterations = cfg.value("max_iterations", 100000L);

  CsvTable table({"replicate", "seed", "n", "part", "vertices", "lambda2", "expansion_bound", "residual", "iterations",
                  "converged"});
  std::map<std::pair<std::size_t, std::string>, std::size_t> below;
  std::vector<PlotSeries> series;
  for (auto n : sizes) {
    PlotSeries su{"U, n = " + std::to_string(n), {}, {}}, sw{"W, n = " + std::to_string(n), {}, {}};
    for (std::size_t rep = 0; rep < replicates; ++rep) {
      const std::uint64_t s = replicate_seed(seed, rep);
      const SoficMap sigma = partitioned_random(n, s);
      std::vector<Vertex> u, w;
      for (Vertex v = 0; v < sigma.size(); ++v) ((*sigma.partition())[v] ? w : u).push_back(v);
      for (const auto& [part, subset] : {std::pair{std::string("U"), u}, std::pair{std::string("W"), w}}) {
        so.seed = s;
        const SpectralEstimate est = schreier_spectral_gap(sigma, gens, subset, so);
        if (est.lambda2 < threshold) ++below[{n, part}];
        table.add_row({cell(rep), cell(std::to_string(s)), cell(n), part, cell(est.vertex_count), cell(est.lambda2),
                       cell(est.expansion_bound), cell(est.residual), cell(static_cast<std::size_t>(est.iterations)),
                       cell(est.converged)});
        (part == "U" ? su : sw).x.push_back(static_cast<double>(rep));
        (part == "U" ? su : sw).y.push_back(est.lambda2);
      }
    }
    series.push_back(std::move(su));
    series.push_back(std::move(sw));
  }
  r.tables.emplace_back("spectral", std::move(table));
  r.metrics["below_threshold"] = Json::array();
  for (auto n : sizes)
    for (const std::string part : {"U", "W"}) {
      const std::size_t k = below[{n, part}];
      r.metrics["below_threshold"].push_back({{"n", n}, {"part", part}, {"count", k}, {"replicates", replicates}});
      add_check(r, "lambda2 below threshold on " + part + " for n = " + std::to_string(n), k >= required,
                static_cast<double>(k), static_cast<double>(required));
    }
  if (opts.plot) r.plots.emplace_back("spectral", svg_line_plot("Second eigenvalue per seed", "replicate", "lambda2", series));
  return r;
}

// ---------------------------------------------------------------------------
// E8: quenched but not doubly-quenched convergence on cycles

ExperimentResult run_e8(const Json& cfg, const RunOptions& opts) {
  ExperimentResult r;
  const GroupSpec z = GroupSpec::integers();
  const std::string period_text = cfg.at("period").get<std::string>();
  const Process mu = process_from_json({{"process", "periodic_orbit"}, {"period", period_text}, {"alphabet", 2}}, z);
  const std::size_t p = period_text.size();
  const Window window = window_from_json(cfg.at("window"), z);
  const auto sizes = cfg.at("sizes").get<std::vector<std::size_t>>();
  const auto epsilons = cfg.at("epsilons").get<std::vector<double>>();
  const std::size_t pairs = cfg.at("vertex_pairs").get<std::size_t>();
  const std::size_t samples = cfg.value("samples", std::size_t{100});
  const std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
  const double threshold = cfg.value("cluster_threshold", 0.05);
  const double pair_eps = cfg.at("pair_epsilon").get<double>();
  const double pair_min = cfg.at("thresholds").at("pair_stat").get<double>();
  const double bary_max = cfg.at("thresholds").at("barycentre").get<double>();
  const Process pair_process = product_process(mu, mu);

  CsvTable table({"n", "vertices", "epsilon", "lw_defect", "q_defect", "dq_defect", "pair_stat", "clusters",
                  "cluster_masses", "centroid_target_tv", "centroid_gap", "barycentre_tv", "hq_lower"});
  double worst_q = 0, worst_bary = 0, worst_mass = 0, worst_centroid = 0, min_pair = 1;
  const double centroid_target = cfg.value("centroid_target", 0.5);
  std::size_t wrong_clusters = 0;
  PlotSeries dq_series{"dq defect", {}, {}}, q_series{"q defect", {}, {}};
  for (auto n : sizes) {
    const std::size_t vertices = p * n;
    const SoficMap sigma = quotient_map(z, vertices);
    std::vector<Configuration> rotations;
    for (std::size_t shift = 0; shift < p; ++shift) {
      std::vector<Symbol> xs(vertices);
      for (std::size_t v = 0; v < vertices; ++v) xs[v] = static_cast<Symbol>(period_text[(v + shift) % p] - '0');
      rotations.emplace_back(2, xs);
    }
    const ModelMeasure nu = ModelMeasure::uniform(rotations);
    const std::uint64_t s = replicate_seed(seed, n);
    const Dispersion disp = dispersion(sigma, nu.square(), window, samples, s, pair_process.get(), threshold);
    std::vector<double> masses, target_tv;
    for (const auto& c : disp.clusters) {
      masses.push_back(c.mass);
      target_tv.push_back(c.target_distance);
      worst_mass = std::max(worst_mass, std::abs(c.mass - 1.0 / static_cast<double>(p)));
      worst_centroid = std::max(worst_centroid, std::abs(c.target_distance - centroid_target));
    }
    if (disp.clusters.size() != p) ++wrong_clusters;
    worst_bary = std::max(worst_bary, disp.barycentre_distance);
    for (double eps : epsilons) {
      const double lw = lw_defect(sigma, nu, *mu, window, eps, samples, s);
      const auto q = quenched_defect(sigma, nu, *mu, window, eps, samples, s);
      const auto dq = dq_defect(sigma, nu, *mu, window, eps, samples, s);
      const double stat = pair_vertex_stat(sigma, nu, *mu, window, eps, pairs, samples, s);
      if (eps == pair_eps) min_pair = std::min(min_pair, stat);
      worst_q = std::max(worst_q, q.value);
      table.add_row({cell(n), cell(vertices), cell(eps), cell(lw), cell(q.value), cell(dq.value), cell(stat),
                     cell(disp.clusters.size()), join(masses), join(target_tv), cell(disp.max_centroid_distance),
                     cell(disp.barycentre_distance), cell(cov_eps(nu, eps).log_value / static_cast<double>(vertices))});
      if (eps == epsilons.front()) {
        q_series.x.push_back(static_cast<double>(vertices));
        q_series.y.push_back(q.value);
        dq_series.x.push_back(static_cast<double>(vertices));
        dq_series.y.push_back(dq.value);
      }
    }
  }
  r.tables.emplace_back("defects", std::move(table));
  r.metrics = {{"max_q_defect", worst_q},         {"wrong_cluster_counts", wrong_clusters},
               {"max_cluster_mass_error", worst_mass}, {"max_barycentre_tv", worst_bary},
               {"max_centroid_target_error", worst_centroid}, {"min_pair_stat", min_pair}};
  add_check(r, "quenched defect is zero at every size", worst_q == 0.0, worst_q, 0);
  add_check(r, "squared measure splits into one cluster per rotation", wrong_clusters == 0 && worst_mass < 1e-12,
            static_cast<double>(wrong_clusters), 0);
  add_check(r, "each cluster centroid sits at the expected TV from the product marginal", worst_centroid <= 1e-9,
            worst_centroid, 1e-9);
  add_check(r, "barycentre of the squared marginals matches the product marginal", worst_bary <= bary_max, worst_bary, bary_max);
  add_check(r, "pair-vertex statistic stays high", min_pair >= pair_min, min_pair, pair_min);
  if (opts.plot)
    r.plots.emplace_back("defects", svg_line_plot("Orbit measure on cycles", "|V|", "defect", {q_series, dq_series}, true));
  return r;
}

// ---------------------------------------------------------------------------
// E9: model measures from independent samples, then averaging over H-shifts

ExperimentResult run_e9(const Json& cfg, const RunOptions&) {
  ExperimentResult r;
  const GroupSpec g = group_from_json(cfg.value("group", Json{{"kind", "integers"}}));
  const Process mu = process_from_json(cfg.at("process"), g);
  const Eigen::VectorXd weights = mu->letter_marginal();
  const std::size_t vertices = cfg.at("vertices").get<std::size_t>();
  const std::size_t k = cfg.at("k").get<std::size_t>();
  const int radius = cfg.at("radius").get<int>();
  const double eps = cfg.at("epsilon").get<double>();
  const std::size_t replicates = cfg.at("replicates").get<std::size_t>();
  const std::size_t samples = cfg.at("samples").get<std::size_t>();
  const std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
  const Json& avg = cfg.at("averaging");
  const std::size_t g_vertices = avg.at("g_vertices").get<std::size_t>();
  const std::size_t h_cycle = avg.at("h_cycle").get<std::size_t>();
  const std::size_t shifts = avg.at("shifts").get<std::size_t>();
  const double lw_max = cfg.at("thresholds").at("lw").get<double>();
  const double dq_max = cfg.at("thresholds").at("dq").get<double>();
  const double shift_max = cfg.at("thresholds").at("h_shift").get<double>();

  const GroupSpec h = GroupSpec::integers();
  const GroupSpec gh = GroupSpec::direct_product(g, h);
  const Process co = coinduced(mu, h);
  const Window window = g.ball(radius);
  std::vector<int> diagnostic_radii{radius};
  for (int extra : avg.value("diagnostic_radii", std::vector<int>{}))
    if (extra != radius) diagnostic_radii.push_back(extra);
  Json diagnostic_change = Json::object();
  std::vector<GroupElement> e_set;
  for (std::size_t i = 0; i < shifts; ++i) e_set.push_back(h.power(h.generator(0), static_cast<long>(i)));

  CsvTable table({"replicate", "seed", "stage", "vertices", "atoms", "window", "epsilon", "lw_defect", "q_defect",
                  "dq_defect", "dq_se"});
  double worst_lw = 0, worst_dq = 0, worst_shift = 0;
  auto draw = [&](std::size_t n, std::uint64_t s) {
    const ModelMeasure iid = ModelMeasure::iid(weights, n);
    const CounterRng root(s);
    std::vector<Configuration> xs;
    for (std::size_t i = 0; i < k; ++i) {
      CounterRng rng = root.split(i);
      xs.push_back(iid.sample(rng));
    }
    return models_to_measure(xs);
  };
  for (std::size_t rep = 0; rep < replicates; ++rep) {
    const std::uint64_t s = replicate_seed(seed, rep);
    const CounterRng streams(s);
    {
      const SoficMap sigma = random_uniform(g, vertices, streams.split(0).key());
      const ModelMeasure rho = draw(vertices, streams.split(1).key());
      const double lw = lw_defect(sigma, rho, *mu, window, eps, samples, streams.split(2).key());
      const auto q = quenched_defect(sigma, rho, *mu, window, eps, samples, streams.split(3).key());
      const auto dq = dq_defect(sigma, rho, *mu, window, eps, samples, streams.split(4).key());
      worst_lw = std::max(worst_lw, lw);
      worst_dq = std::max(worst_dq, dq.value);
      table.add_row({cell(rep), cell(std::to_string(s)), "models", cell(sigma.size()), cell(rho.support().size()),
                     window.describe(), cell(eps), cell(lw), cell(q.value), cell(dq.value), cell(dq.standard_error)});
    }
    {
      const SoficMap product = SoficMap::product(random_uniform(g, g_vertices, streams.split(5).key()), quotient_map(h, h_cycle));
      const ModelMeasure theta = draw(product.size(), streams.split(6).key());
      const ModelMeasure averaged = h_average(product, theta, e_set);
      // The gated comparison uses the radius of the first stage; the other
      // radii are reported only.
      for (int r_avg : diagnostic_radii) {
        const Window w = gh.ball(r_avg);
        std::array<double, 3> before{}, after{};
        for (int stage = 0; stage < 2; ++stage) {
          const ModelMeasure& m = stage == 0 ? theta : averaged;
          const double lw = lw_defect(product, m, *co, w, eps, samples, streams.split(7).key());
          const auto q = quenched_defect(product, m, *co, w, eps, samples, streams.split(8).key());
          const auto dq = dq_defect(product, m, *co, w, eps, samples, streams.split(9).key());
          (stage == 0 ? before : after) = {lw, q.value, dq.value};
          table.add_row({cell(rep), cell(std::to_string(s)), stage == 0 ? "theta" : "averaged", cell(product.size()),
                         cell(m.support().size()), w.describe(), cell(eps), cell(lw), cell(q.value), cell(dq.value),
                         cell(dq.standard_error)});
        }
        double change = 0;
        for (std::size_t i = 0; i < 3; ++i) change = std::max(change, std::abs(after[i] - before[i]));
        if (r_avg == radius) worst_shift = std::max(worst_shift, change);
        else diagnostic_change[std::to_string(r_avg)] = std::max(diagnostic_change.value(std::to_string(r_avg), 0.0), change);
      }
    }
  }
  r.tables.emplace_back("pipeline", std::move(table));
  r.metrics = {{"max_lw_defect", worst_lw},
               {"max_dq_defect", worst_dq},
               {"max_averaging_change", worst_shift},
               {"diagnostic_averaging_change", diagnostic_change}};
  add_check(r, "local weak defect of the sampled model measure", worst_lw < lw_max, worst_lw, lw_max);
  add_check(r, "doubly-quenched defect of the sampled model measure", worst_dq < dq_max, worst_dq, dq_max);
  add_check(r, "averaging over H-shifts preserves the defects", worst_shift <= shift_max, worst_shift, shift_max);
  return r;
}

// ---------------------------------------------------------------------------
// Validation

enum class Kind { kNumber, kInteger, kArray, kObject, kString };

struct Field {
  const char* name;
  Kind kind;
};

const std::map<std::string, std::vector<Field>>& required_fields() {
  static const std::map<std::string, std::vector<Field>> fields = {
      {"E1", {{"group", Kind::kObject}, {"processes", Kind::kArray}, {"epsilon", Kind::kNumber}, {"sizes", Kind::kArray},
              {"seed", Kind::kInteger}, {"thresholds", Kind::kObject}}},
      {"E2", {{"seed", Kind::kInteger}, {"instances", Kind::kInteger}}},
      {"E3", {{"group", Kind::kObject}, {"seed", Kind::kInteger}, {"pairs", Kind::kInteger}, {"min_vertices", Kind::kInteger},
              {"max_vertices", Kind::kInteger}, {"epsilon_range", Kind::kArray}}},
      {"E4", {{"group", Kind::kObject}, {"process", Kind::kObject}, {"radii", Kind::kArray}, {"epsilon", Kind::kNumber},
              {"sizes", Kind::kArray}, {"samples", Kind::kInteger}, {"replicates", Kind::kInteger}, {"seed", Kind::kInteger},
              {"thresholds", Kind::kObject}}},
      {"E5", {{"n", Kind::kInteger}, {"mu0", Kind::kArray}, {"seed", Kind::kInteger}, {"replicates", Kind::kInteger},
              {"epsilon_margin", Kind::kNumber}, {"hamming_threshold", Kind::kNumber}, {"required_seeds", Kind::kInteger}}},
      {"E6", {{"n", Kind::kInteger}, {"mu0", Kind::kArray}, {"seed", Kind::kInteger}, {"replicates", Kind::kInteger},
              {"epsilon_margin", Kind::kNumber}, {"pair_epsilon", Kind::kNumber}}},
      {"E7", {{"sizes", Kind::kArray}, {"replicates", Kind::kInteger}, {"seed", Kind::kInteger}, {"threshold", Kind::kNumber},
              {"required", Kind::kInteger}}},
      {"E8", {{"period", Kind::kString}, {"window", Kind::kObject}, {"sizes", Kind::kArray}, {"epsilons", Kind::kArray},
              {"vertex_pairs", Kind::kInteger}, {"seed", Kind::kInteger}, {"pair_epsilon", Kind::kNumber},
              {"thresholds", Kind::kObject}}},
      {"E9", {{"process", Kind::kObject}, {"vertices", Kind::kInteger}, {"k", Kind::kInteger}, {"radius", Kind::kInteger},
              {"epsilon", Kind::kNumber}, {"replicates", Kind::kInteger}, {"samples", Kind::kInteger}, {"seed", Kind::kInteger},
              {"averaging", Kind::kObject}, {"thresholds", Kind::kObject}}},
  };
  return fields;
}

bool has_kind(const Json& j, Kind kind) {
  switch (kind) {
    case Kind::kNumber:
      return j.is_number();
    case Kind::kInteger:
      return j.is_number_integer() || j.is_number_unsigned();
    case Kind::kArray:
      return j.is_array();
    case Kind::kObject:
      return j.is_object();
    case Kind::kString:
      return j.is_string();
  }
  return false;
}

const char* kind_name(Kind kind) {
  switch (kind) {
    case Kind::kNumber:
      return "a number";
    case Kind::kInteger:
      return "an integer";
    case Kind::kArray:
      return "an array";
    case Kind::kObject:
      return "an object";
    case Kind::kString:
      return "a string";
  }
  return "?";
}

}  // namespace

// ---------------------------------------------------------------------------

bool ExperimentResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

std::string ExperimentResult::csv(const std::string& table) const {
  for (const auto& [name, t] : tables)
    if (name == table) return t.render(checksum);
  throw StructuralError("no table named '" + table + "'");
}

const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids = {"E1", "E2", "E3", "E4", "E5", "E6", "E7", "E8", "E9"};
  return ids;
}

Json effective_config(const Json& config, const RunOptions& options) {
  Json out = config;
  if (options.seed) out["seed"] = *options.seed;
  if (options.budget) out["budget"] = *options.budget;
  return out;
}

std::vector<std::string> validate_config(const Json& config) {
  std::vector<std::string> problems;
  if (!config.is_object()) return {"config must be a JSON object"};
  if (!config.contains("experiment") || !config.at("experiment").is_string()) return {"missing string field 'experiment'"};
  const std::string id = config.at("experiment").get<std::string>();
  const auto& table = required_fields();
  const auto it = table.find(id);
  if (it == table.end()) return {"unknown experiment '" + id + "'"};
  for (const auto& f : it->second) {
    if (!config.contains(f.name))
      problems.push_back(std::string("missing field '") + f.name + "'");
    else if (!has_kind(config.at(f.name), f.kind))
      problems.push_back(std::string("field '") + f.name + "' must be " + kind_name(f.kind));
  }
  if (config.contains("budget") && !has_kind(config.at("budget"), Kind::kInteger)) problems.push_back("field 'budget' must be an integer");
  if (config.contains("output") && !config.at("output").is_string()) problems.push_back("field 'output' must be a string");
  if (config.contains("schema_version") && config.at("schema_version") != kSchemaVersion)
    problems.push_back("unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
  if (config.contains("sizes") && config.at("sizes").is_array()) {
    if (config.at("sizes").empty()) problems.push_back("'sizes' must be nonempty");
    for (const auto& s : config.at("sizes"))
      if (!has_kind(s, Kind::kInteger) || s.get<long long>() < 1) problems.push_back("'sizes' entries must be positive integers");
  }
  for (const char* key : {"epsilon", "pair_epsilon", "epsilon_margin"})
    if (config.contains(key) && config.at(key).is_number() && !(config.at(key).get<double>() > 0))
      problems.push_back(std::string("'") + key + "' must be positive");
  if (problems.empty()) {
    // Structural parts that only the library can judge.
    try {
      if (config.contains("group")) {
        const GroupSpec g = group_from_json(config.at("group"));
        if (config.contains("process")) process_from_json(config.at("process"), g);
        if (config.contains("processes"))
          for (const auto& p : config.at("processes")) process_from_json(p, g);
      }
    } catch (const std::exception& e) {
      problems.push_back(e.what());
    }
  }
  return problems;
}

ExperimentResult run_experiment(const Json& config, const RunOptions& options) {
  const Json cfg = effective_config(config, options);
  const auto problems = validate_config(cfg);
  if (!problems.empty()) throw ValidationError("invalid config: " + problems.front());
  const std::string id = cfg.at("experiment").get<std::string>();
  ExperimentResult r;
  if (id == "E1") r = run_e1(cfg, options);
  else if (id == "E2") r = run_e2(cfg, options);
  else if (id == "E3") r = run_e3(cfg, options);
  else if (id == "E4") r = run_e4(cfg, options);
  else if (id == "E5") r = run_e5(cfg, options);
  else if (id == "E6") r = run_e6(cfg, options);
  else if (id == "E7") r = run_e7(cfg, options);
  else if (id == "E8") r = run_e8(cfg, options);
  else r = run_e9(cfg, options);
  r.id = id;
  r.checksum = config_checksum(cfg);
  return r;
}

Json summary_json(const ExperimentResult& result) {
  Json checks = Json::array();
  for (const auto& c : result.checks)
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"value", json_number(c.value)},
                      {"threshold", json_number(c.threshold)}, {"detail", c.detail}});
  Json tables = Json::array();
  for (const auto& t : result.tables) tables.push_back(result.id + "_" + t.first + ".csv");
  return {{"experiment", result.id}, {"config_checksum", result.checksum}, {"passed", result.passed()},
          {"checks", checks},        {"metrics", result.metrics},          {"tables", tables}};
}

std::vector<std::string> write_result(const ExperimentResult& result, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<std::string> written;
  auto write = [&](const std::string& name, const std::string& text) {
    const std::string path = (fs::path(dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
    written.push_back(path);
  };
  for (const auto& [name, table] : result.tables) write(result.id + "_" + name + ".csv", table.render(result.checksum));
  for (const auto& [name, svg] : result.plots) write(result.id + "_" + name + ".svg", svg);
  write(result.id + "_summary.json", summary_json(result).dump(2) + "\n");
  return written;
}

std::vector<ReportLine> read_report(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ValidationError("not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > 13 && name.compare(name.size() - 13, 13, "_summary.json") == 0) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<ReportLine> out;
  for (const auto& f : files) {
    std::ifstream in(f);
    const Json j = Json::parse(in);
    ReportLine line;
    line.id = j.value("experiment", f.filename().string());
    line.checksum = j.value("config_checksum", std::string());
    for (const auto& c : j.at("checks")) {
      ++line.checks;
      if (!c.at("passed").get<bool>()) {
        ++line.failed;
        line.failures.push_back(c.at("name").get<std::string>());
      }
    }
    out.push_back(std::move(line));
  }
  return out;
}

}  // namespace sofic
