#include <doctest.h>

#include <cmath>
#include <set>

#include "sofic/errors.hpp"
#include "sofic/model_space.hpp"
#include "support.hpp"

using namespace sofic;
using namespace sofic::testing;

namespace {

double log_binomial(double n, double k) { return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1); }

Window ea(const GroupSpec& g) { return Window(g, {g.identity(), g.generator(0)}); }

}  // namespace

TEST_CASE("pullback names on a 3-cycle") {
  const SoficMap s = cycle(3);
  const Configuration x(3, {0, 1, 2});
  const Window e = Window::identity_only(s.group());
  CHECK(pullback_name(s, x, 1, e) == std::vector<Symbol>{1});
  CHECK(pullback_name(s, x, 0, ea(s.group())) == std::vector<Symbol>{0, 1});
  CHECK(pullback_name(s, x, 2, ea(s.group())) == std::vector<Symbol>{2, 0});
}

TEST_CASE("empirical distributions") {
  const SoficMap s = cycle(4);
  const auto& z = s.group();
  const Window b = z.ball(1);
  const auto zero = empirical_distribution(s, Configuration::constant(2, 4), b).frequencies();
  CHECK(zero[0] == 1.0);
  CHECK(zero.sum() == 1.0);
  const auto half = empirical_distribution(s, bits("0011"), Window::identity_only(z)).frequencies();
  CHECK(half[0] == 0.5);
  CHECK(half[1] == 0.5);
  const auto alt = empirical_distribution(s, bits("0101"), ea(z)).frequencies();
  CHECK(alt[1] == 0.5);  // pattern 01
  CHECK(alt[2] == 0.5);  // pattern 10
  CHECK(alt[0] + alt[3] == 0.0);
}

TEST_CASE("empirical counts are exact") {
  CounterRng rng(51);
  const auto f2 = GroupSpec::free(2);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 3 + rng.below(20);
    const SoficMap s = random_uniform(f2, n, rng());
    std::vector<Symbol> xs(n);
    for (auto& v : xs) v = static_cast<Symbol>(rng.below(3));
    const auto emp = empirical_distribution(s, Configuration(3, xs), f2.ball(1));
    std::uint64_t total = 0;
    for (auto c : emp.counts) total += c;
    CHECK(total == n);
  }
}

TEST_CASE("good model predicate") {
  const SoficMap s = cycle(4);
  const auto& z = s.group();
  const Window e = Window::identity_only(z);
  const auto fair = bernoulli(vec({0.5, 0.5}), z);
  CHECK(is_good_model(s, bits("0000"), *fair, z.ball(1), 1.01));
  CHECK(is_good_model(s, bits("0011"), *fair, e, 0.1));
  CHECK_FALSE(is_good_model(s, bits("0000"), *fair, e, 0.3));
  // Exact ties are excluded.
  CHECK_FALSE(is_good_model(s, bits("0000"), *fair, e, 0.5));
  CHECK(is_good_model(s, bits("0000"), *fair, e, 0.5 + 1e-9));
}

TEST_CASE("exhaustive counts") {
  const SoficMap s = cycle(4);
  const auto& z = s.group();
  const Window e = Window::identity_only(z);
  CHECK(count_good_models(s, *bernoulli(vec({0.5, 0.5}), z), e, 0.3) == 14);
  CHECK(count_good_models(s, *bernoulli(vec({0.75, 0.25}), z), e, 0.3) == 11);
  CHECK(count_good_models(s, *bernoulli(vec({0.75, 0.25}), z), z.ball(1), 1.0 + 1e-9) == 16);
  const auto list = enumerate_good_models(s, *bernoulli(vec({0.5, 0.5}), z), e, 0.3);
  CHECK(list.size() == 14);
  CHECK(std::is_sorted(list.begin(), list.end()));
  CHECK(list.front() == bits("0001"));
  CHECK_THROWS_AS(count_good_models(cycle(30), *bernoulli(vec({0.5, 0.5}), z), e, 0.3), BudgetExceeded);
}

TEST_CASE("letter-type counts") {
  CHECK(letter_frequency_count(vec({0.5, 0.5}), 4, 0.3).count == 14u);
  CHECK(letter_frequency_count(vec({0.75, 0.25}), 4, 0.3).count == 11u);
  const std::size_t n = 15;
  const double eps = 0.27;
  std::uint64_t expected = 0;
  for (std::size_t j = 0; j < n && static_cast<double>(j) < eps * static_cast<double>(n); ++j)
    expected += static_cast<std::uint64_t>(std::llround(std::exp(log_binomial(n, static_cast<double>(j)))));
  CHECK(letter_frequency_count(vec({1, 0}), n, eps).count == expected);
  // Large vertex sets stay in log space.
  const auto big = letter_frequency_count(vec({0.5, 0.5}), 4096, 0.05);
  CHECK_FALSE(big.count.has_value());
  CHECK(big.log_count / 4096 < std::log(2.0));
  CHECK(big.log_count / 4096 > std::log(2.0) - 0.01);
  const auto empty = letter_frequency_count(vec({0.5, 0.5}), 3, 0.1);
  CHECK(empty.log_count == -std::numeric_limits<double>::infinity());
  CHECK(empty.count == 0u);
}

TEST_CASE("letter-type counts agree with enumeration") {
  CounterRng rng(52);
  const auto z = GroupSpec::integers();
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 2 + rng.below(9), q = 2 + rng.below(2);
    const auto p = random_distribution(rng, q);
    const double eps = 0.05 + 0.5 * rng.uniform();
    const auto mu = bernoulli(p, z);
    const auto exact = count_good_models(cycle(n), *mu, Window::identity_only(z), eps);
    CHECK(letter_frequency_count(p, n, eps).count == exact);
  }
}

TEST_CASE("Monte Carlo counts") {
  const auto z = GroupSpec::integers();
  const Window e = Window::identity_only(z);
  const auto fair = bernoulli(vec({0.5, 0.5}), z);
  const SoficMap s12 = cycle(12);
  const auto all = count_good_models_mc(s12, *fair, z.ball(1), 1.5, vec({0.3, 0.7}), 4000, 1);
  CHECK(std::abs(all.estimate - 4096.0) < 3 * all.standard_error);
  const auto exact = static_cast<double>(count_good_models(s12, *fair, e, 0.1));
  const auto uni = count_good_models_mc(s12, *fair, e, 0.1, vec({0.5, 0.5}), 20000, 2);
  CHECK(std::abs(uni.estimate - exact) < 3 * uni.standard_error);
  const auto biased = bernoulli(vec({0.7, 0.3}), z);
  const auto exact_b = static_cast<double>(count_good_models(s12, *biased, e, 0.1));
  const auto u = count_good_models_mc(s12, *biased, e, 0.1, vec({0.5, 0.5}), 20000, 3);
  const auto m = count_good_models_mc(s12, *biased, e, 0.1, vec({0.7, 0.3}), 20000, 4);
  CHECK(std::abs(u.estimate - m.estimate) < 3 * std::hypot(u.standard_error, m.standard_error));
  CHECK(std::abs(m.estimate - exact_b) < 3 * m.standard_error);
  CHECK_THROWS_AS(count_good_models_mc(s12, *fair, e, 0.1, vec({1.0, 0.0}), 10, 1), ValidationError);
  // Deterministic given the seed.
  const auto again = count_good_models_mc(s12, *fair, e, 0.1, vec({0.5, 0.5}), 20000, 2);
  CHECK(again.log_estimate == uni.log_estimate);
}

TEST_CASE("Monte Carlo agrees with enumeration on random instances") {
  CounterRng rng(53);
  const auto f2 = GroupSpec::free(2);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 6 + rng.below(5);
    const SoficMap s = random_uniform(f2, n, rng());
    const auto mu = bernoulli(random_distribution(rng, 2), f2);
    const Window w = random_window(f2, rng, 1 + rng.below(2));
    const double eps = 0.2 + 0.4 * rng.uniform();
    const auto exact = static_cast<double>(count_good_models(s, *mu, w, eps));
    const auto est = count_good_models_mc(s, *mu, w, eps, vec({0.5, 0.5}), 5000, rng());
    if (exact == 0) {
      CHECK(est.hits == 0);
    } else {
      CHECK(std::abs(est.estimate - exact) <= 4 * est.standard_error + 1e-9);
    }
  }
}

TEST_CASE("good models shrink with larger windows") {
  CounterRng rng(54);
  const auto f2 = GroupSpec::free(2);
  for (int t = 0; t < 6; ++t) {
    const std::size_t n = 6 + rng.below(7);
    const SoficMap s = random_uniform(f2, n, rng());
    const auto mu = tree_markov((Eigen::MatrixXd(2, 2) << 0.8, 0.2, 0.2, 0.8).finished(), vec({0.5, 0.5}), f2);
    const Window big = random_window(f2, rng, 3 + rng.below(3));
    const Window small(f2, std::vector<GroupElement>(big.begin(), big.begin() + 2));
    const double eps = 0.15 + 0.3 * rng.uniform();
    const auto in_big = enumerate_good_models(s, *mu, big, eps);
    const auto in_small = enumerate_good_models(s, *mu, small, eps);
    const std::set<Configuration> small_set(in_small.begin(), in_small.end());
    for (const auto& x : in_big) CHECK(small_set.count(x) == 1);
  }
}

TEST_CASE("XOR and trivial block maps") {
  const SoficMap s = cycle(4);
  const auto& z = s.group();
  const auto xor_map = BlockMap::from_function(ea(z), 2, 2, [](const std::vector<Symbol>& p) { return p[0] ^ p[1]; });
  CHECK(apply_block_map(xor_map, s, bits("0011")) == bits("0101"));
  const auto proj = BlockMap::from_function(z.ball(1), 2, 2, [](const std::vector<Symbol>& p) { return p[0]; });
  CHECK(apply_block_map(proj, s, bits("0110")) == bits("0110"));
  const auto constant = BlockMap::from_function(ea(z), 2, 3, [](const std::vector<Symbol>&) { return 2; });
  CHECK(apply_block_map(constant, s, bits("0110")) == Configuration::constant(3, 4, 2));
  CHECK_THROWS(BlockMap(ea(z), 2, 2, {0, 1, 2, 0}));
}

TEST_CASE("block maps are compatible up to multiplicativity defects") {
  CounterRng rng(55);
  const auto f2 = GroupSpec::free(2);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 4 + rng.below(30);
    const SoficMap s = random_uniform(f2, n, rng());
    const Window d = random_window(f2, rng, 2 + rng.below(2));
    const Window f = random_window(f2, rng, 1 + rng.below(3));
    std::vector<Symbol> table(pattern_count(2, d.size()));
    for (auto& v : table) v = static_cast<Symbol>(rng.below(2));
    const BlockMap psi(d, 2, 2, table);
    std::vector<Symbol> xs(n);
    for (auto& v : xs) v = static_cast<Symbol>(rng.below(2));
    std::vector<std::pair<GroupElement, GroupElement>> pairs;
    for (const auto& a : d)
      for (const auto& b : f) pairs.emplace_back(a, b);
    double bound = 0;
    for (const auto& m : defect(s, pairs, {}).multiplicativity) bound += m.fraction;
    CHECK(block_compatibility_mismatch(psi, s, Configuration(2, xs), f) <= bound + 1e-12);
  }
  const SoficMap q = cycle(9);
  const auto& z = q.group();
  const auto xor_map = BlockMap::from_function(ea(z), 2, 2, [](const std::vector<Symbol>& p) { return p[0] ^ p[1]; });
  CHECK(block_compatibility_mismatch(xor_map, q, bits("011010001"), z.ball(2)) == 0.0);
}

TEST_CASE("approximate shift invariance") {
  CounterRng rng(56);
  const auto f2 = GroupSpec::free(2);
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = 4 + rng.below(40);
    const SoficMap s = random_uniform(f2, n, rng());
    const Window f = random_window(f2, rng, 1 + rng.below(4));
    const auto g = random_element(f2, rng, 3);
    std::vector<Symbol> xs(n);
    for (auto& v : xs) v = static_cast<Symbol>(rng.below(2));
    const double lhs = shifted_empirical_distance(s, Configuration(2, xs), f, g);
    CHECK(lhs <= 2 * shift_mismatch_fraction(s, f, g) + 1e-12);
  }
  // Exhaustively on one small instance.
  const SoficMap s = random_uniform(f2, 5, 9);
  const Window f = f2.ball(1);
  const auto g = f2.parse("ab");
  const double bound = 2 * shift_mismatch_fraction(s, f, g);
  for (std::uint64_t i = 0; i < 32; ++i)
    CHECK(shifted_empirical_distance(s, configuration_at(i, 2, 5), f, g) <= bound + 1e-12);
  const SoficMap q = cycle(7);
  CHECK(shift_mismatch_fraction(q, q.group().ball(2), q.group().parse("a^3")) == 0.0);
  CHECK(shifted_empirical_distance(q, bits("0110100"), q.group().ball(2), q.group().parse("a^3")) == 0.0);
}

TEST_CASE("adjoint shifts") {
  const SoficMap p = SoficMap::product(cycle(3), cycle(2));
  const auto& h = p.right_factor().group();
  const Configuration x(2, {0, 1, 1, 1, 0, 0});  // rows v, columns w
  CHECK(adjoint_shift(p, h.identity(), x) == x);
  CHECK(adjoint_shift(p, h.parse("a"), x) == Configuration(2, {1, 0, 1, 1, 0, 0}));
  CHECK_THROWS_AS(adjoint_shift(cycle(6), h.identity(), x), StructuralError);

  const SoficMap p5 = SoficMap::product(cycle(2), cycle(5));
  const auto& h5 = p5.right_factor().group();
  CounterRng rng(57);
  std::vector<Symbol> xs(10);
  for (auto& v : xs) v = static_cast<Symbol>(rng.below(3));
  const Configuration y(3, xs);
  for (int t = 0; t < 20; ++t) {
    const auto h1 = random_element(h5, rng, 4), h2 = random_element(h5, rng, 4);
    CHECK(adjoint_shift(p5, h1, adjoint_shift(p5, h2, y)) == adjoint_shift(p5, h5.multiply(h1, h2), y));
  }
}
