#include <doctest.h>

#include <set>

#include "sofic/errors.hpp"
#include "sofic/group.hpp"
#include "support.hpp"

using namespace sofic;
using sofic::testing::random_word;

TEST_CASE("free group multiplication cancels") {
  const auto f2 = GroupSpec::free(2);
  const auto a = f2.parse("a");
  CHECK(f2.is_identity(f2.multiply(a, f2.inverse(a))));
  const auto lhs = f2.parse("ab");
  const auto rhs = f2.parse("b^-1a");
  CHECK(f2.format(f2.multiply(lhs, rhs)) == "aa");
  CHECK(f2.multiply(lhs, rhs) == f2.parse("a^2"));
}

TEST_CASE("finite table arithmetic") {
  const auto z4 = GroupSpec::cyclic(4);
  CHECK(z4.multiply(GroupElement::from_index(3), GroupElement::from_index(2)) == GroupElement::from_index(1));
  CHECK(z4.order() == 4);
  CHECK(z4.power(z4.generator(0), 4) == z4.identity());
}

TEST_CASE("finite tables are validated") {
  // Not associative-compatible: row 1 is not a permutation.
  CHECK_THROWS_AS(GroupSpec::finite_table({{0, 1}, {1, 1}}, {1}, {"s"}), ValidationError);
  CHECK_NOTHROW(GroupSpec::finite_table({{0, 1}, {1, 0}}, {1}, {"s"}));
}

TEST_CASE("mismatched groups are rejected") {
  const auto z4 = GroupSpec::cyclic(4);
  const auto f2 = GroupSpec::free(2);
  CHECK_THROWS_AS(z4.multiply(f2.parse("a"), z4.identity()), StructuralError);
}

TEST_CASE("ball sizes in free groups") {
  const auto f2 = GroupSpec::free(2);
  CHECK(f2.ball(0).size() == 1);
  CHECK(f2.ball(1).size() == 5);
  CHECK(f2.ball(2).size() == 17);
  CHECK(f2.is_identity(f2.ball(2)[0]));
  for (int k = 1; k <= 3; ++k) {
    const auto fk = GroupSpec::free(k);
    for (int r = 0; r <= 3; ++r) {
      std::size_t expected = 1, layer = 2 * static_cast<std::size_t>(k);
      for (int j = 1; j <= r; ++j, layer *= 2 * static_cast<std::size_t>(k) - 1) expected += layer;
      const Window ball = fk.ball(r);
      CHECK(ball.size() == expected);
      if (r > 0) CHECK(ball.contains_all(fk.ball(r - 1)));
    }
  }
}

TEST_CASE("ball of a finite group exhausts it") {
  const auto z5 = GroupSpec::cyclic(5);
  CHECK(z5.ball(10).size() == 5);
  CHECK(z5.ball(1).size() == 3);
}

TEST_CASE("ball of a direct product uses the max length") {
  const auto z = GroupSpec::integers();
  const auto zz = GroupSpec::direct_product(z, z);
  CHECK(zz.ball(1).size() == 9);
  CHECK(zz.ball(2).size() == 25);
}

TEST_CASE("canonical forms are idempotent") {
  CounterRng rng(11);
  for (const auto& g : {GroupSpec::free(2), GroupSpec::free(3), GroupSpec::integers(),
                        GroupSpec::free_product({{"a", "b"}, {"c"}})}) {
    for (int t = 0; t < 200; ++t) {
      const Word w = random_word(rng, g.generator_count(), 20);
      const GroupElement x = g.from_letters(w);
      CHECK(g.from_letters(g.word_for(x)) == x);
      const Word& r = x.word();
      for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i] != inverse_letter(r[i - 1]));
    }
  }
}

TEST_CASE("group axioms hold") {
  CounterRng rng(12);
  for (const auto& g : {GroupSpec::free(2), GroupSpec::free_product({{"a", "b"}, {"c", "d"}})}) {
    for (int t = 0; t < 200; ++t) {
      const auto a = g.from_letters(random_word(rng, g.generator_count(), 8));
      const auto b = g.from_letters(random_word(rng, g.generator_count(), 8));
      const auto c = g.from_letters(random_word(rng, g.generator_count(), 8));
      CHECK(g.multiply(g.multiply(a, b), c) == g.multiply(a, g.multiply(b, c)));
      CHECK(g.multiply(a, g.identity()) == a);
      CHECK(g.is_identity(g.multiply(a, g.inverse(a))));
    }
  }
  const auto z6 = GroupSpec::cyclic(6);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j)
      for (std::size_t k = 0; k < 6; ++k) {
        const auto a = GroupElement::from_index(i), b = GroupElement::from_index(j), c = GroupElement::from_index(k);
        CHECK(z6.multiply(z6.multiply(a, b), c) == z6.multiply(a, z6.multiply(b, c)));
      }
}

TEST_CASE("right coset keys") {
  const auto g = partitioned_group();
  CHECK(g.right_coset_key(g.identity(), 0).empty());
  CHECK(g.right_coset_key(g.parse("ab"), 0) == g.right_coset_key(g.identity(), 0));
  CHECK(g.right_coset_key(g.parse("aa'"), 0) == g.right_coset_key(g.parse("ba'"), 0));
  CHECK(g.right_coset_key(g.parse("a'"), 0) != g.right_coset_key(g.parse("b'"), 0));
  CHECK_THROWS_AS(g.right_coset_key(g.identity(), 5), StructuralError);

  // Constant on H g, injective on chosen representatives.
  CounterRng rng(13);
  const std::vector<std::string> reps = {"e", "a'", "b'", "a'a", "a'^-1", "b'a'", "a'b'^-1a"};
  std::set<Word> keys;
  for (const auto& text : reps) {
    const auto rep = g.parse(text);
    const Word key = g.right_coset_key(rep, 0);
    keys.insert(key);
    for (int t = 0; t < 50; ++t) {
      Word h = random_word(rng, 2, 6);  // letters of a and b only
      CHECK(g.right_coset_key(g.multiply(g.from_letters(h), rep), 0) == key);
    }
  }
  CHECK(keys.size() == reps.size());
}

TEST_CASE("parse and format round trip") {
  const auto f2 = GroupSpec::free(2);
  CounterRng rng(14);
  for (int t = 0; t < 100; ++t) {
    const auto x = f2.from_letters(random_word(rng, 2, 10));
    CHECK(f2.parse(f2.format(x)) == x);
  }
  const auto zz = GroupSpec::direct_product(GroupSpec::integers(), GroupSpec::cyclic(3));
  const auto p = zz.parse("(a^2,a)");
  CHECK(zz.parse(zz.format(p)) == p);
}

TEST_CASE("windows need the identity first and distinct elements") {
  const auto f2 = GroupSpec::free(2);
  CHECK_THROWS_AS(Window(f2, {f2.parse("a")}), ValidationError);
  CHECK_THROWS_AS(Window(f2, {f2.identity(), f2.parse("a"), f2.parse("a")}), ValidationError);
  const Window w = Window::anchored(f2, {f2.parse("a"), f2.parse("ab")});
  CHECK(f2.is_identity(w[0]));
}
