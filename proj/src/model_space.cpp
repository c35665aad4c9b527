#include "sofic/model_space.hpp"

#include <cmath>
#include <limits>

#include "sofic/errors.hpp"
#include "sofic/parallel.hpp"

namespace sofic {

namespace {

constexpr std::size_t kEnumerationBlock = std::size_t{1} << 14;
constexpr std::size_t kSampleBlock = 256;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

// ---------------------------------------------------------------------------
// Configurations

Configuration::Configuration(std::size_t q, std::vector<Symbol> symbols)
    : alphabet_size(q), values(std::move(symbols)) {
  if (q == 0 || q > kMaxAlphabet) throw ValidationError("configuration alphabet size must be in [1, 256]");
  for (auto s : values)
    if (s >= q) throw ValidationError("configuration symbol outside the alphabet");
}

Configuration Configuration::constant(std::size_t q, std::size_t n, Symbol s) {
  return Configuration(q, std::vector<Symbol>(n, s));
}

Configuration Configuration::parse(std::string_view text, const Alphabet& alphabet) {
  std::vector<Symbol> values;
  for (char c : text) {
    std::size_t s = 0;
    while (s < alphabet.size() && alphabet.label(s) != std::string(1, c)) ++s;
    if (s == alphabet.size()) throw ValidationError(std::string("unknown symbol '") + c + "'");
    values.push_back(static_cast<Symbol>(s));
  }
  return Configuration(alphabet.size(), std::move(values));
}

std::string Configuration::to_string(const Alphabet& alphabet) const {
  bool single = true;
  for (const auto& l : alphabet.labels()) single = single && l.size() == 1;
  std::string out;
  for (std::size_t v = 0; v < values.size(); ++v) {
    if (!single && v) out += ' ';
    out += alphabet.label(values[v]);
  }
  return out;
}

Configuration pair_configuration(const Configuration& x, const Configuration& y) {
  if (x.size() != y.size()) throw StructuralError("pair_configuration: lengths differ");
  std::vector<Symbol> z(x.size());
  for (std::size_t v = 0; v < z.size(); ++v)
    z[v] = static_cast<Symbol>(x.values[v] * y.alphabet_size + y.values[v]);
  return Configuration(x.alphabet_size * y.alphabet_size, std::move(z));
}

std::pair<Configuration, Configuration> split_pair(const Configuration& z, std::size_t right_alphabet) {
  if (z.alphabet_size % right_alphabet) throw StructuralError("split_pair: alphabet does not factor");
  std::vector<Symbol> x(z.size()), y(z.size());
  for (std::size_t v = 0; v < z.size(); ++v) {
    x[v] = static_cast<Symbol>(z.values[v] / right_alphabet);
    y[v] = static_cast<Symbol>(z.values[v] % right_alphabet);
  }
  return {Configuration(z.alphabet_size / right_alphabet, std::move(x)), Configuration(right_alphabet, std::move(y))};
}

Configuration configuration_at(std::uint64_t index, std::size_t q, std::size_t n) {
  std::vector<Symbol> values(n);
  for (std::size_t v = n; v-- > 0;) {
    values[v] = static_cast<Symbol>(index % q);
    index /= q;
  }
  Configuration x;
  x.alphabet_size = q;
  x.values = std::move(values);
  return x;
}

// ---------------------------------------------------------------------------
// Pullback names and empirical distributions

WindowImages::WindowImages(const SoficMap& sigma, const std::vector<GroupElement>& elements)
    : n_(sigma.size()) {
  images_.reserve(elements.size());
  for (const auto& g : elements) images_.push_back(sigma.image(g));
}

std::vector<Symbol> pullback_name(const SoficMap& sigma, const Configuration& x, Vertex v,
                                  const Window& window) {
  if (x.size() != sigma.size()) throw StructuralError("configuration length differs from |V|");
  std::vector<Symbol> out;
  out.reserve(window.size());
  for (const auto& g : window) out.push_back(x.values[sigma.evaluate(g, v)]);
  return out;
}

Eigen::VectorXd EmpiricalDistribution::frequencies() const {
  Eigen::VectorXd f(static_cast<Eigen::Index>(counts.size()));
  for (std::size_t i = 0; i < counts.size(); ++i)
    f[static_cast<Eigen::Index>(i)] = static_cast<double>(counts[i]) / static_cast<double>(vertex_count);
  return f;
}

EmpiricalDistribution empirical_distribution(const SoficMap& sigma, const Configuration& x,
                                             const Window& window) {
  if (x.size() != sigma.size()) throw StructuralError("configuration length differs from |V|");
  const WindowImages images(sigma, window);
  std::vector<std::uint64_t> counts(pattern_count(x.alphabet_size, window.size()), 0);
  for (Vertex v = 0; v < sigma.size(); ++v) ++counts[images.pattern_index(x, v)];
  return {window, x.alphabet_size, sigma.size(), std::move(counts)};
}

Eigen::VectorXd empirical_of(const SoficMap& sigma, const Configuration& x,
                             const std::vector<GroupElement>& elements) {
  if (x.size() != sigma.size()) throw StructuralError("configuration length differs from |V|");
  const WindowImages images(sigma, elements);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pattern_count(x.alphabet_size, elements.size())));
  for (Vertex v = 0; v < sigma.size(); ++v) f[static_cast<Eigen::Index>(images.pattern_index(x, v))] += 1.0;
  return f / static_cast<double>(sigma.size());
}

// ---------------------------------------------------------------------------
// Good models

GoodModelTest::GoodModelTest(const SoficMap& sigma, const MarginalOracle& mu, const Window& window, double epsilon)
    : GoodModelTest(WindowImages(sigma, window), mu.marginal(window).probabilities, mu.alphabet().size(), epsilon) {}

GoodModelTest::GoodModelTest(WindowImages images, Eigen::VectorXd target, std::size_t alphabet_size, double epsilon)
    : images_(std::move(images)),
      target_(std::move(target)),
      q_(alphabet_size),
      epsilon_(epsilon),
      target_mass_(target_.sum()),
      counts_(static_cast<std::size_t>(target_.size()), 0) {
  if (!(epsilon > 0)) throw ValidationError("epsilon must be positive");
  if (pattern_count(q_, images_.window_size()) != static_cast<std::size_t>(target_.size()))
    throw StructuralError("target marginal does not match the window");
}

double GoodModelTest::distance(const Configuration& x) {
  if (x.size() != images_.vertex_count() || x.alphabet_size != q_)
    throw StructuralError("configuration does not match the sofic map or alphabet");
  touched_.clear();
  for (Vertex v = 0; v < images_.vertex_count(); ++v) {
    const std::size_t idx = images_.pattern_index(x, v);
    if (counts_[idx]++ == 0) touched_.push_back(idx);
  }
  // sum_p |f_p - mu_p| = sum_mu + sum_{f_p > 0} (|f_p - mu_p| - mu_p)
  const double n = static_cast<double>(images_.vertex_count());
  double l1 = target_mass_;
  for (auto idx : touched_) {
    const double f = counts_[idx] / n;
    const double p = target_[static_cast<Eigen::Index>(idx)];
    l1 += std::abs(f - p) - p;
    counts_[idx] = 0;
  }
  return 0.5 * l1;
}

bool is_good_model(const SoficMap& sigma, const Configuration& x, const MarginalOracle& mu,
                   const Window& window, double epsilon) {
  GoodModelTest test(sigma, mu, window, epsilon);
  return test.good(x);
}

namespace {

std::uint64_t configuration_space_size(std::size_t q, std::size_t n, std::uint64_t budget) {
  const double required = std::pow(static_cast<double>(q), static_cast<double>(n));
  if (required > static_cast<double>(budget))
    throw BudgetExceeded("exhaustive enumeration needs " + std::to_string(q) + "^" + std::to_string(n) +
                             " configurations, budget is " + std::to_string(budget),
                         required, static_cast<double>(budget));
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= q;
  return total;
}

}  // namespace

std::vector<Configuration> enumerate_good_models(const SoficMap& sigma, const MarginalOracle& mu,
                                                 const Window& window, double epsilon, std::uint64_t budget) {
  const std::size_t q = mu.alphabet().size(), n = sigma.size();
  const std::uint64_t total = configuration_space_size(q, n, budget);
  const GoodModelTest prototype(sigma, mu, window, epsilon);
  std::vector<std::vector<Configuration>> found(block_count(total, kEnumerationBlock));
  for_each_block(total, kEnumerationBlock, [&](std::size_t b, std::size_t begin, std::size_t end) {
    GoodModelTest test = prototype;
    for (std::size_t i = begin; i < end; ++i) {
      Configuration x = configuration_at(i, q, n);
      if (test.good(x)) found[b].push_back(std::move(x));
    }
  });
  std::vector<Configuration> out;
  for (auto& block : found)
    for (auto& x : block) out.push_back(std::move(x));
  return out;
}

std::uint64_t count_good_models(const SoficMap& sigma, const MarginalOracle& mu, const Window& window,
                                double epsilon, std::uint64_t budget) {
  const std::size_t q = mu.alphabet().size(), n = sigma.size();
  const std::uint64_t total = configuration_space_size(q, n, budget);
  const GoodModelTest prototype(sigma, mu, window, epsilon);
  std::vector<std::uint64_t> counts(block_count(total, kEnumerationBlock), 0);
  for_each_block(total, kEnumerationBlock, [&](std::size_t b, std::size_t begin, std::size_t end) {
    GoodModelTest test = prototype;
    for (std::size_t i = begin; i < end; ++i)
      if (test.good(configuration_at(i, q, n))) ++counts[b];
  });
  std::uint64_t sum = 0;
  for (auto c : counts) sum += c;
  return sum;
}

CountEstimate count_good_models_mc(const SoficMap& sigma, const MarginalOracle& mu, const Window& window,
                                   double epsilon, const Eigen::VectorXd& proposal, std::size_t samples,
                                   std::uint64_t seed) {
  const std::size_t q = mu.alphabet().size(), n = sigma.size();
  if (static_cast<std::size_t>(proposal.size()) != q) throw ValidationError("proposal size differs from |X|");
  if ((proposal.array() <= 0).any()) throw ValidationError("proposal must be strictly positive");
  if (std::abs(proposal.sum() - 1.0) > 1e-10) throw ValidationError("proposal must sum to 1");
  if (samples == 0) throw ValidationError("need at least one sample");
  const Eigen::VectorXd log_proposal = proposal.array().log();
  const GoodModelTest prototype(sigma, mu, window, epsilon);
  const CounterRng root(seed);
  std::vector<double> log_weight(samples, kNegInf);
  for_each_block(samples, kSampleBlock, [&](std::size_t, std::size_t begin, std::size_t end) {
    GoodModelTest test = prototype;
    Configuration x = Configuration::constant(q, n);
    for (std::size_t i = begin; i < end; ++i) {
      CounterRng rng = root.split(i);
      double log_q = 0;
      for (std::size_t v = 0; v < n; ++v) {
        const auto s = draw_index(rng, proposal);
        x.values[v] = static_cast<Symbol>(s);
        log_q += log_proposal[static_cast<Eigen::Index>(s)];
      }
      if (test.good(x)) log_weight[i] = -log_q;
    }
  });

  CountEstimate out;
  out.samples = samples;
  double shift = kNegInf;
  for (double lw : log_weight)
    if (lw != kNegInf) {
      ++out.hits;
      shift = std::max(shift, lw);
    }
  if (out.hits == 0) {
    out.log_estimate = out.log_standard_error = kNegInf;
    return out;
  }
  double mean = 0;
  for (double lw : log_weight) mean += lw == kNegInf ? 0.0 : std::exp(lw - shift);
  mean /= static_cast<double>(samples);
  double var = 0;
  for (double lw : log_weight) {
    const double d = (lw == kNegInf ? 0.0 : std::exp(lw - shift)) - mean;
    var += d * d;
  }
  var = samples > 1 ? var / static_cast<double>(samples - 1) : 0.0;
  const double se = std::sqrt(var / static_cast<double>(samples));
  out.log_estimate = shift + std::log(mean);
  out.log_standard_error = se > 0 ? shift + std::log(se) : kNegInf;
  out.estimate = std::exp(out.log_estimate);
  out.standard_error = se > 0 ? std::exp(out.log_standard_error) : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Letter-type counting

namespace {

constexpr double kLog2Pow64 = 44.3614195558365;  // log(2^64)

struct TypeWalker {
  const Eigen::VectorXd& p;
  std::size_t n;
  std::size_t q;
  double max_l1;  // 2 epsilon n, in count units
  double limit;   // TV must stay below this
  std::uint64_t budget;
  std::vector<std::size_t> k;
  double log_total = kNegInf;
  unsigned __int128 exact = 0;
  bool exact_ok = true;
  std::uint64_t types = 0;
  double log_n_fact;

  void visit(std::size_t symbol, std::size_t remaining, double l1) {
    if (symbol + 1 == q) {
      k[symbol] = remaining;
      const double dev = l1 + std::abs(static_cast<double>(remaining) - static_cast<double>(n) * p[static_cast<Eigen::Index>(symbol)]);
      if (0.5 * dev / static_cast<double>(n) >= limit) return;
      if (++types > budget)
        throw BudgetExceeded("letter-type enumeration exceeds its budget", static_cast<double>(types),
                             static_cast<double>(budget));
      double log_m = log_n_fact;
      for (auto c : k) log_m -= std::lgamma(static_cast<double>(c) + 1.0);
      log_total = log_sum_exp(log_total, log_m);
      if (exact_ok) add_exact(log_m);
      return;
    }
    const double centre = static_cast<double>(n) * p[static_cast<Eigen::Index>(symbol)];
    for (std::size_t c = 0; c <= remaining; ++c) {
      const double d = std::abs(static_cast<double>(c) - centre);
      if (l1 + d > max_l1) {
        if (static_cast<double>(c) > centre) break;
        continue;
      }
      k[symbol] = c;
      visit(symbol + 1, remaining - c, l1 + d);
    }
  }

  void add_exact(double log_m) {
    if (log_m > kLog2Pow64) {
      exact_ok = false;
      return;
    }
    unsigned __int128 m = 1;
    std::size_t rem = n;
    for (auto c : k) {
      // m *= C(rem, c); intermediate values stay below 2^64 * n.
      unsigned __int128 b = 1;
      for (std::size_t i = 1; i <= c; ++i) b = b * (rem - c + i) / i;
      m *= b;
      rem -= c;
    }
    exact += m;
    if (exact > std::numeric_limits<std::uint64_t>::max()) exact_ok = false;
  }
};

}  // namespace

LetterCount letter_frequency_count(const Eigen::VectorXd& letter_marginal, std::size_t vertices, double epsilon,
                                   std::uint64_t type_budget) {
  if (!(epsilon > 0)) throw ValidationError("epsilon must be positive");
  if (vertices == 0) throw ValidationError("need at least one vertex");
  const auto q = static_cast<std::size_t>(letter_marginal.size());
  TypeWalker walker{letter_marginal,
                    vertices,
                    q,
                    2.0 * epsilon * static_cast<double>(vertices),
                    epsilon - kProbabilityTolerance,
                    type_budget,
                    std::vector<std::size_t>(q, 0),
                    kNegInf,
                    0,
                    true,
                    0,
                    std::lgamma(static_cast<double>(vertices) + 1.0)};
  walker.visit(0, vertices, 0.0);
  LetterCount out;
  out.types = walker.types;
  out.log_count = walker.log_total;
  if (walker.exact_ok) {
    out.count = static_cast<std::uint64_t>(walker.exact);
    if (*out.count > 0) out.log_count = std::log(static_cast<double>(*out.count));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Block maps and shifts

BlockMap::BlockMap(Window d, std::size_t q_in, std::size_t q_out, std::vector<Symbol> t)
    : domain(std::move(d)), input_alphabet(q_in), output_alphabet(q_out), table(std::move(t)) {
  if (table.size() != pattern_count(q_in, domain.size())) throw ValidationError("block map table is not total on X^D");
  for (auto s : table)
    if (s >= q_out) throw ValidationError("block map value outside the target alphabet");
}

Configuration apply_block_map(const BlockMap& psi, const SoficMap& sigma, const Configuration& x) {
  if (x.alphabet_size != psi.input_alphabet) throw StructuralError("block map input alphabet differs");
  const WindowImages images(sigma, psi.domain);
  std::vector<Symbol> y(sigma.size());
  for (Vertex v = 0; v < sigma.size(); ++v) y[v] = psi.table[images.pattern_index(x, v)];
  return Configuration(psi.output_alphabet, std::move(y));
}

double block_compatibility_mismatch(const BlockMap& psi, const SoficMap& sigma, const Configuration& x,
                                    const Window& window) {
  const Configuration y = apply_block_map(psi, sigma, x);
  const GroupSpec& group = sigma.group();
  std::vector<WindowImages> df;  // for each f, the elements d f over d in D
  for (const auto& f : window) {
    std::vector<GroupElement> row;
    for (const auto& d : psi.domain) row.push_back(group.multiply(d, f));
    df.emplace_back(sigma, row);
  }
  const WindowImages f_images(sigma, window);
  std::size_t bad = 0;
  for (Vertex v = 0; v < sigma.size(); ++v) {
    for (std::size_t i = 0; i < window.size(); ++i) {
      if (y.values[f_images(i, v)] != psi.table[df[i].pattern_index(x, v)]) {
        ++bad;
        break;
      }
    }
  }
  return static_cast<double>(bad) / static_cast<double>(sigma.size());
}

double shifted_empirical_distance(const SoficMap& sigma, const Configuration& x, const Window& window,
                                  const GroupElement& g) {
  std::vector<GroupElement> shifted;
  for (const auto& f : window) shifted.push_back(sigma.group().multiply(f, g));
  return total_variation(empirical_of(sigma, x, window.elements()), empirical_of(sigma, x, shifted));
}

double shift_mismatch_fraction(const SoficMap& sigma, const Window& window, const GroupElement& g) {
  const Permutation sg = sigma.image(g);
  const WindowImages direct(sigma, window);
  std::vector<GroupElement> shifted;
  for (const auto& f : window) shifted.push_back(sigma.group().multiply(f, g));
  const WindowImages composed(sigma, shifted);
  std::size_t bad = 0;
  for (Vertex v = 0; v < sigma.size(); ++v) {
    for (std::size_t i = 0; i < window.size(); ++i) {
      if (direct(i, sg[v]) != composed(i, v)) {
        ++bad;
        break;
      }
    }
  }
  return static_cast<double>(bad) / static_cast<double>(sigma.size());
}

Configuration adjoint_shift(const SoficMap& product, const GroupElement& h, const Configuration& x) {
  if (!product.is_product()) throw StructuralError("adjoint_shift needs a product sofic approximation");
  if (x.size() != product.size()) throw StructuralError("configuration length differs from |V x W|");
  const SoficMap& tau = product.right_factor();
  const Permutation shift = tau.image(tau.group().inverse(h));
  const std::size_t w_size = tau.size();
  std::vector<Symbol> out(x.size());
  for (std::size_t vw = 0; vw < x.size(); ++vw) {
    const std::size_t v = vw / w_size, w = vw % w_size;
    out[vw] = x.values[v * w_size + shift[w]];
  }
  return Configuration(x.alphabet_size, std::move(out));
}

}  // namespace sofic
