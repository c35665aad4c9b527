#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "sofic/convergence.hpp"
#include "sofic/entropy.hpp"
#include "sofic/errors.hpp"
#include "sofic/metric_cov.hpp"
#include "support.hpp"

using namespace sofic;
using namespace sofic::testing;

namespace {

const ApproxFamily cycles = [](std::size_t n) { return cycle(n); };

}  // namespace

TEST_CASE("shannon entropy") {
  CHECK(shannon_entropy(vec({1, 0})) == 0.0);
  CHECK(shannon_entropy(vec({0.5, 0.5})) == doctest::Approx(std::log(2.0)));
  CHECK(std::abs(shannon_entropy(vec({0.75, 0.25})) - 0.5623) < 1e-4);
  CHECK_THROWS_AS(shannon_entropy(vec({0.5, 0.4})), ValidationError);
}

TEST_CASE("letter-exact entropy curves") {
  const auto z = GroupSpec::integers();
  const Window e = Window::identity_only(z);
  const auto fair = entropy_curve(cycles, *bernoulli(vec({0.5, 0.5}), z), e, 0.05, {4096}, CountMethod::kLetterExact);
  CHECK(std::abs(fair.rows[0].normalized - std::log(2.0)) < 0.02);
  const auto biased = entropy_curve(cycles, *bernoulli(vec({0.75, 0.25}), z), e, 0.02, {4096}, CountMethod::kLetterExact);
  CHECK(std::abs(biased.rows[0].normalized - shannon_entropy(vec({0.75, 0.25}))) < 0.03);
  CHECK(biased.rows[0].method == "letter-exact");
  CHECK(biased.rows[0].vertices == 4096);
  CHECK_THROWS_AS(entropy_curve(cycles, *bernoulli(vec({0.5, 0.5}), z), z.ball(1), 0.05, {16}, CountMethod::kLetterExact),
                  ValidationError);
}

TEST_CASE("empty good-model sets give -inf") {
  const auto z = GroupSpec::integers();
  const auto fair = bernoulli(vec({0.5, 0.5}), z);
  const auto curve = entropy_curve(cycles, *fair, Window::identity_only(z), 0.1, {3, 4}, CountMethod::kExhaustive);
  CHECK(curve.rows[0].normalized == -std::numeric_limits<double>::infinity());
  CHECK(curve.rows[1].normalized == doctest::Approx(std::log(6.0) / 4));
}

TEST_CASE("counting methods agree") {
  const auto z = GroupSpec::integers();
  const auto mu = bernoulli(vec({0.6, 0.4}), z);
  const Window e = Window::identity_only(z);
  const auto exact = entropy_curve(cycles, *mu, e, 0.15, {10, 12}, CountMethod::kExhaustive);
  const auto letter = entropy_curve(cycles, *mu, e, 0.15, {10, 12}, CountMethod::kLetterExact);
  CountOptions opts;
  opts.mc_samples = 20000;
  const auto mc = entropy_curve(cycles, *mu, e, 0.15, {10, 12}, CountMethod::kMonteCarlo, opts);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(exact.rows[i].normalized == doctest::Approx(letter.rows[i].normalized).epsilon(1e-12));
    CHECK(std::abs(mc.rows[i].normalized - exact.rows[i].normalized) < 4 * mc.rows[i].standard_error + 1e-9);
    CHECK(mc.rows[i].standard_error > 0);
  }
}

TEST_CASE("covering curves of model measures") {
  const auto points = hq_lower_curve(
      cycles, [](std::size_t n, const SoficMap&) { return ModelMeasure::point_mass(Configuration::constant(2, n)); },
      {16, 64}, 0.1);
  for (const auto& r : points.rows) CHECK(r.normalized == 0.0);
  const auto fair = hq_lower_curve(
      cycles, [](std::size_t n, const SoficMap&) { return ModelMeasure::iid(vec({0.5, 0.5}), n); }, {4096}, 0.1);
  CHECK(std::abs(fair.rows[0].normalized - std::log(2.0)) < 0.05);
  const auto orbit = hq_lower_curve(
      cycles,
      [](std::size_t n, const SoficMap&) {
        std::vector<Symbol> a(n), b(n);
        for (std::size_t v = 0; v < n; ++v) a[v] = static_cast<Symbol>(v % 2), b[v] = static_cast<Symbol>(1 - v % 2);
        return ModelMeasure::uniform({Configuration(2, a), Configuration(2, b)});
      },
      {8, 64}, 0.1);
  CHECK(orbit.rows[0].normalized == doctest::Approx(std::log(2.0) / 8));
  CHECK(orbit.rows[1].normalized == doctest::Approx(std::log(2.0) / 64));
}

TEST_CASE("power-stabilized curves") {
  const auto z = GroupSpec::integers();
  const auto nu = vec({0.7, 0.3});
  const auto mu = bernoulli(nu, z);
  const Window e = Window::identity_only(z);
  const auto ps = hps_curve(cycles, mu, e, 0.02, 3, {512}, CountMethod::kLetterExact);
  REQUIRE(ps.rows.size() == 3);
  for (const auto& r : ps.rows) CHECK(std::abs(r.normalized - shannon_entropy(nu)) < 0.06);
  const auto single = entropy_curve(cycles, *mu, e, 0.02, {512}, CountMethod::kLetterExact);
  CHECK(ps.rows[0].normalized == single.rows[0].normalized);
  CHECK_THROWS_AS(hps_curve(cycles, mu, e, 0.02, 9, {16}, CountMethod::kLetterExact), ValidationError);
}

TEST_CASE("good models of a product project into doubled neighbourhoods") {
  CounterRng rng(81);
  const auto f2 = GroupSpec::free(2);
  for (int t = 0; t < 8; ++t) {
    const std::size_t n = 4 + rng.below(3);  // (2 x 2)^n <= 4^6 configurations
    const SoficMap s = random_uniform(f2, n, rng());
    const auto mu = bernoulli(random_distribution(rng, 2), f2);
    const auto nu = tree_markov((Eigen::MatrixXd(2, 2) << 0.8, 0.2, 0.2, 0.8).finished(), vec({0.5, 0.5}), f2);
    const Window f = random_window(f2, rng, 1 + rng.below(2));
    const double eps = 0.1 + 0.3 * rng.uniform();
    const auto joint = product_process(mu, nu);
    const auto pairs = enumerate_good_models(s, *joint, f, eps);
    const auto left = enumerate_good_models(s, *mu, f, 2 * eps);
    const auto right = enumerate_good_models(s, *nu, f, 2 * eps);
    const std::set<Configuration> ls(left.begin(), left.end()), rs(right.begin(), right.end());
    for (const auto& z : pairs) {
      const auto [x, y] = split_pair(z, 2);
      CHECK(ls.count(x) == 1);
      CHECK(rs.count(y) == 1);
    }
    CHECK(static_cast<double>(pairs.size()) <= static_cast<double>(left.size()) * static_cast<double>(right.size()));
  }
}

TEST_CASE("entropy rows are monotone and bounded") {
  CounterRng rng(82);
  const auto f2 = GroupSpec::free(2);
  for (int t = 0; t < 6; ++t) {
    const std::size_t n = 6 + rng.below(6);
    const auto seed = rng();
    const ApproxFamily family = [seed](std::size_t m) { return random_uniform(GroupSpec::free(2), m, seed); };
    const auto mu = tree_markov((Eigen::MatrixXd(3, 3) << 0.6, 0.2, 0.2, 0.2, 0.6, 0.2, 0.2, 0.2, 0.6).finished(),
                                vec({1. / 3, 1. / 3, 1. / 3}), f2);
    if (n > 9) continue;  // 3^n configurations
    const Window big = random_window(f2, rng, 3);
    const Window small(f2, {big[0], big[1]});
    const double eps = 0.2 + 0.3 * rng.uniform();
    const double wide = entropy_curve(family, *mu, small, eps, {n}, CountMethod::kExhaustive).rows[0].normalized;
    const double narrow = entropy_curve(family, *mu, small, eps / 2, {n}, CountMethod::kExhaustive).rows[0].normalized;
    const double larger = entropy_curve(family, *mu, big, eps, {n}, CountMethod::kExhaustive).rows[0].normalized;
    CHECK(narrow <= wide);
    CHECK(larger <= wide);
    CHECK(wide <= std::log(3.0) + 1e-9);
  }
}

TEST_CASE("covering numbers of convergent measures are bounded by good-model counts") {
  CounterRng rng(83);
  const auto z = GroupSpec::integers();
  const auto fair = bernoulli(vec({0.5, 0.5}), z);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 6 + rng.below(5);
    const SoficMap s = cycle(n);
    const Window f = z.ball(static_cast<int>(rng.below(2)));
    const double eps = 0.15 + 0.3 * rng.uniform();
    const auto good = enumerate_good_models(s, *fair, f, eps);
    // A measure mixing good and bad atoms.
    std::vector<Configuration> atoms;
    std::vector<double> w;
    for (std::uint64_t i = 0; i < (std::uint64_t{1} << n); ++i) {
      if (rng.below(3) != 0) continue;
      atoms.push_back(configuration_at(i, 2, n));
      w.push_back(0.05 + rng.uniform());
    }
    if (atoms.empty()) continue;
    double total = 0;
    for (double x : w) total += x;
    for (double& x : w) x /= total;
    const auto mu_n = ModelMeasure::explicit_support(atoms, w);
    const double defect = quenched_defect(s, mu_n, *fair, f, eps, 0, 0).value;
    const std::set<Configuration> omega(good.begin(), good.end());
    // Heaviest atoms realizing cov_eps lose at most `defect` mass when restricted to Omega.
    const auto cov = cov_eps(mu_n, eps);
    std::vector<std::size_t> order(atoms.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mu_n.weights()[static_cast<Eigen::Index>(a)] > mu_n.weights()[static_cast<Eigen::Index>(b)]; });
    double heavy = 0, heavy_good = 0;
    for (std::size_t k = 0; k < *cov.value; ++k) {
      const auto i = static_cast<Eigen::Index>(order[k]);
      heavy += mu_n.weights()[i];
      if (omega.count(mu_n.support()[order[k]])) heavy_good += mu_n.weights()[i];
    }
    CHECK(heavy - heavy_good <= defect + 1e-12);
    if (defect < eps - 1e-12) CHECK(*cov.value <= good.size());
  }
}
