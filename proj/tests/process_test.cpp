#include <doctest.h>

#include <cmath>

#include "sofic/entropy.hpp"
#include "sofic/errors.hpp"
#include "sofic/process.hpp"
#include "support.hpp"

using namespace sofic;
using namespace sofic::testing;

namespace {

double prob(const MarginalOracle& mu, const Window& w, std::vector<Symbol> pattern) {
  return mu.marginal(w).probabilities[static_cast<Eigen::Index>(encode_pattern(pattern, mu.alphabet().size()))];
}

Window window_of(const GroupSpec& g, std::vector<std::string> texts) {
  std::vector<GroupElement> els;
  for (const auto& t : texts) els.push_back(g.parse(t));
  return Window(g, els);
}

Eigen::MatrixXd flip_chain(double p) {
  Eigen::MatrixXd t(2, 2);
  t << 1 - p, p, p, 1 - p;
  return t;
}

}  // namespace

TEST_CASE("bernoulli marginals") {
  const auto f2 = GroupSpec::free(2);
  const Window ea = window_of(f2, {"e", "a"});
  const auto frozen = bernoulli(vec({1, 0}), f2);
  CHECK(frozen->marginal(f2.ball(1)).probabilities[0] == doctest::Approx(1.0));
  const auto fair = bernoulli(vec({0.5, 0.5}), f2);
  const auto m3 = fair->marginal(window_of(f2, {"e", "a", "b"}));
  for (Eigen::Index i = 0; i < 8; ++i) CHECK(m3.probabilities[i] == doctest::Approx(0.125));
  const auto biased = bernoulli(vec({0.75, 0.25}), f2);
  CHECK(prob(*biased, ea, {0, 0}) == doctest::Approx(9.0 / 16));
  CHECK_THROWS_AS(bernoulli(vec({0.5, 0.6}), f2), ValidationError);
  CHECK_THROWS_AS(bernoulli(vec({1.2, -0.2}), f2), ValidationError);
}

TEST_CASE("tree Markov marginals") {
  const auto f2 = GroupSpec::free(2);
  const Window ea = window_of(f2, {"e", "a"});
  const auto frozen = tree_markov(Eigen::MatrixXd::Identity(2, 2), vec({0.5, 0.5}), f2);
  const auto ball = f2.ball(2);
  const auto m = frozen->marginal(ball).probabilities;
  CHECK(m[0] == doctest::Approx(0.5));
  CHECK(m[m.size() - 1] == doctest::Approx(0.5));
  CHECK(m.sum() == doctest::Approx(1.0));

  const auto uniform_rows = tree_markov(Eigen::MatrixXd::Constant(3, 3, 1.0 / 3), vec({1. / 3, 1. / 3, 1. / 3}), f2);
  const auto iid = bernoulli(vec({1. / 3, 1. / 3, 1. / 3}), f2);
  const auto b1 = f2.ball(1);
  CHECK(total_variation(uniform_rows->marginal(b1).probabilities, iid->marginal(b1).probabilities) < 1e-12);

  const auto flip = tree_markov(flip_chain(0.3), vec({0.5, 0.5}), f2);
  CHECK(prob(*flip, ea, {0, 0}) == doctest::Approx(0.35));
  // Two steps along a then b: P(x_e = x_{ba}) = 0.7^2 + 0.3^2.
  const Window two = window_of(f2, {"e", "ba"});
  CHECK(prob(*flip, two, {0, 0}) + prob(*flip, two, {1, 1}) == doctest::Approx(0.58));
  // a and b are both neighbours of e, so they are two steps apart.
  const Window siblings = window_of(f2, {"e", "a", "b"});
  CHECK(prob(*flip, siblings, {0, 1, 1}) == doctest::Approx(0.5 * 0.3 * 0.3));

  CHECK_THROWS_AS(tree_markov(flip_chain(0.3), vec({0.6, 0.4}), f2), ValidationError);
  Eigen::MatrixXd not_reversible(3, 3);
  not_reversible << 0, 1, 0, 0, 0, 1, 1, 0, 0;
  CHECK_THROWS_AS(tree_markov(not_reversible, vec({1. / 3, 1. / 3, 1. / 3}), f2), ValidationError);
  Eigen::MatrixXd not_stochastic = flip_chain(0.3);
  not_stochastic(0, 0) = 0.8;
  CHECK_THROWS_AS(tree_markov(not_stochastic, vec({0.5, 0.5}), f2), ValidationError);
}

TEST_CASE("coinduced marginals") {
  const auto f2 = GroupSpec::free(2);
  const auto z = GroupSpec::integers();
  const auto gh = GroupSpec::direct_product(f2, z);
  const auto nu = vec({0.75, 0.25});
  const auto co = coinduced(bernoulli(nu, f2), z);
  const auto direct = bernoulli(nu, gh);
  const Window b = gh.ball(1);
  CHECK(total_variation(co->marginal(b).probabilities, direct->marginal(b).probabilities) < 1e-12);

  const auto flip = tree_markov(flip_chain(0.3), vec({0.5, 0.5}), f2);
  const auto coflip = coinduced(flip, z);
  const Window fibre = window_of(gh, {"(e,e)", "(a,e)", "(ab,e)"});
  const Window base = window_of(f2, {"e", "a", "ab"});
  CHECK(total_variation(coflip->marginal(fibre).probabilities, flip->marginal(base).probabilities) < 1e-12);
  const Window across = window_of(gh, {"(e,e)", "(e,a)"});
  for (Symbol x : {0, 1})
    for (Symbol y : {0, 1}) CHECK(prob(*coflip, across, {x, y}) == doctest::Approx(0.25));
}

TEST_CASE("coset-constant marginals") {
  const auto g = partitioned_group();
  const auto mu0 = vec({0.75, 0.25});
  const auto nu = coset_iid(mu0, g, 0);
  const Window ea = window_of(g, {"e", "a"});
  CHECK(prob(*nu, ea, {0, 0}) == doctest::Approx(0.75));
  CHECK(prob(*nu, ea, {1, 1}) == doctest::Approx(0.25));
  CHECK(prob(*nu, ea, {0, 1}) == 0.0);
  CHECK(prob(*nu, ea, {1, 0}) == 0.0);
  const Window eap = window_of(g, {"e", "a'"});
  CHECK(prob(*nu, eap, {1, 0}) == doctest::Approx(0.25 * 0.75));
  CHECK(nu->letter_marginal()[1] == doctest::Approx(0.25));

  const auto pair = product_process(nu, nu);
  CHECK(pair->letter_marginal()[2] == doctest::Approx(3.0 / 16));  // symbol (1, 0)

  // Zero mass on patterns that are not constant on coset classes.
  const Window big = window_of(g, {"e", "a", "b", "a'", "ba'", "a'a"});
  const auto m = nu->marginal(big);
  for (std::size_t i = 0; i < static_cast<std::size_t>(m.probabilities.size()); ++i) {
    const auto p = decode_pattern(i, 2, big.size());
    const bool constant = p[0] == p[1] && p[1] == p[2] && p[3] == p[4];
    if (!constant) CHECK(m.probabilities[static_cast<Eigen::Index>(i)] == 0.0);
  }
}

TEST_CASE("periodic orbit marginals") {
  const auto z = GroupSpec::integers();
  const auto orbit = periodic_orbit({0, 1}, 2, z);
  CHECK(orbit->letter_marginal()[0] == doctest::Approx(0.5));
  const Window ea = window_of(z, {"e", "a"});
  CHECK(prob(*orbit, ea, {0, 1}) == doctest::Approx(0.5));
  CHECK(prob(*orbit, ea, {1, 0}) == doctest::Approx(0.5));
  CHECK(prob(*orbit, ea, {0, 0}) == 0.0);
  const auto zero = periodic_orbit({0}, 2, z);
  CHECK(zero->marginal(z.ball(2)).probabilities[0] == doctest::Approx(1.0));
  CHECK_THROWS_AS(periodic_orbit({0, 1, 0, 1}, 2, z), ValidationError);
}

TEST_CASE("products, powers and diagonals") {
  const auto f2 = GroupSpec::free(2);
  const Window b = f2.ball(1);
  const auto point = bernoulli(vec({0, 1}), f2);
  const auto flip = tree_markov(flip_chain(0.2), vec({0.5, 0.5}), f2);
  const auto tagged = product_process(point, flip);
  CHECK(tagged->alphabet().size() == 4);
  const auto m = tagged->marginal(b).probabilities;
  const auto base = flip->marginal(b).probabilities;
  // Every coordinate carries the frozen symbol 1: symbol 1 * 2 + y.
  for (std::size_t i = 0; i < static_cast<std::size_t>(base.size()); ++i) {
    auto p = decode_pattern(i, 2, b.size());
    for (auto& s : p) s = static_cast<Symbol>(2 + s);
    CHECK(m[static_cast<Eigen::Index>(encode_pattern(p, 4))] == doctest::Approx(base[static_cast<Eigen::Index>(i)]));
  }

  const auto p = vec({0.2, 0.8}), q = vec({0.5, 0.3, 0.2});
  const auto joint = product_process(bernoulli(p, f2), bernoulli(q, f2));
  Eigen::VectorXd pq(6);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) pq[i * 3 + j] = p[i] * q[j];
  CHECK(total_variation(joint->marginal(b).probabilities, bernoulli(pq, f2)->marginal(b).probabilities) < 1e-12);
  CHECK_THROWS_AS(product_process(bernoulli(p, f2), bernoulli(p, GroupSpec::integers())), StructuralError);

  const auto fair = bernoulli(vec({0.5, 0.5}), f2);
  CHECK(power_process(fair, 1) == fair);
  CHECK(total_variation(power_process(fair, 2)->marginal(b).probabilities,
                        bernoulli(Eigen::VectorXd::Constant(4, 0.25), f2)->marginal(b).probabilities) < 1e-12);
  for (int k = 1; k <= 4; ++k)
    CHECK(shannon_entropy(power_process(flip, k)->letter_marginal()) ==
          doctest::Approx(k * shannon_entropy(flip->letter_marginal())));
  CHECK_THROWS_AS(power_process(fair, 9), ValidationError);

  const auto diag = diagonal_process(flip);
  const Window ea = window_of(f2, {"e", "a"});
  CHECK(prob(*diag, ea, {3, 0}) == doctest::Approx(0.5 * 0.2));
  CHECK(prob(*diag, ea, {1, 0}) == 0.0);
}

TEST_CASE("product marginals project to each factor") {
  const auto f2 = GroupSpec::free(2);
  const auto mu = tree_markov(flip_chain(0.1), vec({0.5, 0.5}), f2);
  const auto nu = bernoulli(vec({0.3, 0.3, 0.4}), f2);
  const auto joint = product_process(mu, nu);
  const Window w = f2.ball(1);
  const auto m = joint->marginal(w).probabilities;
  Eigen::VectorXd left = Eigen::VectorXd::Zero(32), right = Eigen::VectorXd::Zero(243);
  for (std::size_t i = 0; i < static_cast<std::size_t>(m.size()); ++i) {
    const auto p = decode_pattern(i, 6, w.size());
    std::vector<Symbol> l, r;
    for (auto s : p) {
      l.push_back(static_cast<Symbol>(s / 3));
      r.push_back(static_cast<Symbol>(s % 3));
    }
    left[static_cast<Eigen::Index>(encode_pattern(l, 2))] += m[static_cast<Eigen::Index>(i)];
    right[static_cast<Eigen::Index>(encode_pattern(r, 3))] += m[static_cast<Eigen::Index>(i)];
  }
  CHECK(total_variation(left, mu->marginal(w).probabilities) < 1e-12);
  CHECK(total_variation(right, nu->marginal(w).probabilities) < 1e-12);
}

TEST_CASE("consistency and shift invariance for every constructor") {
  const auto f2 = GroupSpec::free(2);
  const auto z = GroupSpec::integers();
  const auto fp = partitioned_group();
  const auto gh = GroupSpec::direct_product(f2, z);
  Eigen::MatrixXd p3(3, 3);
  p3 << 0.5, 0.3, 0.2, 0.3, 0.4, 0.3, 0.2, 0.3, 0.5;  // symmetric, uniform stationary
  const std::vector<Process> processes = {
      bernoulli(vec({0.2, 0.5, 0.3}), f2),
      tree_markov(flip_chain(0.3), vec({0.5, 0.5}), f2),
      tree_markov(p3, vec({1. / 3, 1. / 3, 1. / 3}), f2),
      coinduced(tree_markov(flip_chain(0.2), vec({0.5, 0.5}), f2), z),
      coset_iid(vec({0.75, 0.25}), fp, 0),
      periodic_orbit({0, 1, 1}, 2, z),
      product_process(bernoulli(vec({0.4, 0.6}), f2), tree_markov(flip_chain(0.3), vec({0.5, 0.5}), f2)),
      power_process(tree_markov(flip_chain(0.4), vec({0.5, 0.5}), f2), 2),
      diagonal_process(coset_iid(vec({0.6, 0.4}), fp, 1)),
  };
  CounterRng rng(41);
  for (const auto& mu : processes) {
    const auto& g = mu->group();
    for (int t = 0; t < 12; ++t) {
      const Window w = random_window(g, rng, 2 + rng.below(4));
      std::vector<GroupElement> sub_els(w.begin(), w.begin() + 1 + static_cast<std::ptrdiff_t>(rng.below(w.size())));
      const Window sub(g, sub_els);
      CHECK(consistency_error(*mu, w, sub) < 1e-12);
      CHECK(translation_error(*mu, w, random_element(g, rng, 3)) < 1e-12);
    }
  }
}
