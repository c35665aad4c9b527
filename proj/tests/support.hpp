#pragma once

#include <Eigen/Core>
#include <vector>

#include "sofic/group.hpp"
#include "sofic/model_space.hpp"
#include "sofic/rng.hpp"
#include "sofic/sofic_map.hpp"

namespace sofic::testing {

inline Configuration bits(std::string_view s) { return Configuration::parse(s, Alphabet(2)); }

inline Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline SoficMap cycle(std::size_t n) { return quotient_map(GroupSpec::integers(), n); }

inline Word random_word(CounterRng& rng, int generators, std::size_t max_len) {
  Word w(rng.below(max_len + 1));
  for (auto& l : w) l = static_cast<Letter>(rng.below(2 * static_cast<std::uint64_t>(generators)));
  return w;
}

inline GroupElement random_element(const GroupSpec& g, CounterRng& rng, std::size_t max_len = 6) {
  if (g.kind() == GroupKind::kDirectProduct)
    return GroupElement::from_pair(random_element(g.left(), rng, max_len), random_element(g.right(), rng, max_len));
  return g.from_letters(random_word(rng, g.generator_count(), max_len));
}

/// Window of up to `size` distinct elements drawn from the radius-2 ball.
inline Window random_window(const GroupSpec& g, CounterRng& rng, std::size_t size) {
  const Window ball = g.ball(2);
  std::vector<GroupElement> out{g.identity()};
  std::vector<GroupElement> pool(ball.begin() + 1, ball.end());
  while (out.size() < size && !pool.empty()) {
    const auto j = rng.below(pool.size());
    out.push_back(pool[j]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(j));
  }
  return Window(g, out);
}

inline Eigen::VectorXd random_distribution(CounterRng& rng, std::size_t q) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(q));
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = 0.05 + rng.uniform();
  return w / w.sum();
}

}  // namespace sofic::testing
