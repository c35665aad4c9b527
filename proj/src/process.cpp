#include "sofic/process.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "sofic/errors.hpp"

namespace sofic {

namespace {

constexpr double kInputTolerance = 1e-10;

void validate_distribution(const Eigen::VectorXd& w, const std::string& what) {
  if (w.size() == 0) throw ValidationError(what + ": empty probability vector");
  if (static_cast<std::size_t>(w.size()) > kMaxAlphabet)
    throw ValidationError(what + ": alphabet larger than 256 symbols");
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (!(w[i] >= 0.0) || !std::isfinite(w[i]))
      throw ValidationError(what + ": negative or non-finite weight");
  if (std::abs(w.sum() - 1.0) > kInputTolerance)
    throw ValidationError(what + ": weights do not sum to 1");
}

// Joint law of independent blocks; block b covers the listed window
// positions (in the order its distribution is indexed).
Eigen::VectorXd combine_blocks(std::size_t window_size, std::size_t q,
                               const std::vector<std::pair<std::vector<std::size_t>, Eigen::VectorXd>>& blocks) {
  const std::size_t total = pattern_count(q, window_size);
  Eigen::VectorXd out(static_cast<Eigen::Index>(total));
  std::vector<Symbol> digits(window_size);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t r = idx;
    for (std::size_t i = window_size; i-- > 0;) {
      digits[i] = static_cast<Symbol>(r % q);
      r /= q;
    }
    double p = 1.0;
    for (const auto& [positions, dist] : blocks) {
      std::size_t sub = 0;
      for (auto pos : positions) sub = sub * q + digits[pos];
      p *= dist[static_cast<Eigen::Index>(sub)];
      if (p == 0.0) break;
    }
    out[static_cast<Eigen::Index>(idx)] = p;
  }
  return out;
}

// ---------------------------------------------------------------------------

class BernoulliProcess final : public MarginalOracle {
 public:
  BernoulliProcess(Eigen::VectorXd weights, GroupSpec group)
      : MarginalOracle(Alphabet(static_cast<std::size_t>(weights.size())), std::move(group)),
        weights_(std::move(weights)) {}

  std::string describe() const override {
    std::ostringstream os;
    os << "bernoulli(" << weights_.transpose() << ")";
    return os.str();
  }

 protected:
  Eigen::VectorXd compute(const Window& window) const override {
    const auto q = weights_.size();
    Eigen::VectorXd v = Eigen::VectorXd::Ones(1);
    for (std::size_t k = 0; k < window.size(); ++k) {
      Eigen::VectorXd next(v.size() * q);
      for (Eigen::Index i = 0; i < v.size(); ++i) next.segment(i * q, q) = v[i] * weights_;
      v = std::move(next);
    }
    return v;
  }

 private:
  Eigen::VectorXd weights_;
};

// ---------------------------------------------------------------------------

class TreeMarkovProcess final : public MarginalOracle {
 public:
  TreeMarkovProcess(Eigen::MatrixXd transition, Eigen::VectorXd initial, GroupSpec group)
      : MarginalOracle(Alphabet(static_cast<std::size_t>(initial.size())), std::move(group)),
        transition_(std::move(transition)),
        initial_(std::move(initial)) {}

  std::string describe() const override { return "tree_markov"; }

 protected:
  // Adjacent vertices of the Cayley tree are g and s g, so the geodesic from
  // e to a reduced word runs through its suffixes. The minimal subtree
  // spanning the window is the set of suffixes of its elements; internal
  // non-window nodes are summed out bottom-up.
  Eigen::VectorXd compute(const Window& window) const override {
    std::map<Word, std::size_t> node_of;
    std::vector<Word> nodes;
    std::vector<std::size_t> parent;
    auto add_node = [&](const Word& w) {
      auto it = node_of.find(w);
      if (it != node_of.end()) return it->second;
      const std::size_t id = nodes.size();
      node_of.emplace(w, id);
      nodes.push_back(w);
      parent.push_back(0);
      return id;
    };
    add_node({});
    std::vector<std::size_t> window_node(window.size());
    for (std::size_t i = 0; i < window.size(); ++i) {
      const Word& w = window[i].word();
      std::size_t child = add_node(w);
      window_node[i] = child;
      for (std::size_t k = 1; k <= w.size(); ++k) {
        const std::size_t up = add_node(Word(w.begin() + static_cast<std::ptrdiff_t>(k), w.end()));
        parent[child] = up;
        child = up;
      }
    }
    // Children before parents: longer words first.
    std::vector<std::size_t> order(nodes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return nodes[a].size() > nodes[b].size(); });

    const auto q = static_cast<std::size_t>(initial_.size());
    const std::size_t total = pattern_count(q, window.size());
    Eigen::VectorXd out(static_cast<Eigen::Index>(total));
    std::vector<int> fixed(nodes.size());
    Eigen::MatrixXd beta(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(nodes.size()));
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::fill(fixed.begin(), fixed.end(), -1);
      const auto digits = decode_pattern(idx, q, window.size());
      for (std::size_t i = 0; i < window.size(); ++i) fixed[window_node[i]] = digits[i];
      beta.setOnes();
      for (std::size_t node : order) {
        auto col = beta.col(static_cast<Eigen::Index>(node));
        if (fixed[node] >= 0) {
          const double keep = col[fixed[node]];
          col.setZero();
          col[fixed[node]] = keep;
        }
        if (node == 0) continue;
        // Fold into the parent: beta_parent(s) *= sum_t P(s, t) beta_node(t).
        beta.col(static_cast<Eigen::Index>(parent[node])).array() *= (transition_ * col).array();
      }
      out[static_cast<Eigen::Index>(idx)] = initial_.dot(beta.col(0));
    }
    return out;
  }

 private:
  Eigen::MatrixXd transition_;
  Eigen::VectorXd initial_;
};

// ---------------------------------------------------------------------------

class CoinducedProcess final : public MarginalOracle {
 public:
  CoinducedProcess(Process base, const GroupSpec& h_group)
      : MarginalOracle(base->alphabet(), GroupSpec::direct_product(base->group(), h_group)),
        base_(std::move(base)) {}

  std::string describe() const override { return "coinduced(" + base_->describe() + ")"; }

 protected:
  Eigen::VectorXd compute(const Window& window) const override {
    std::vector<GroupElement> fibre_keys;
    std::vector<std::vector<std::size_t>> fibres;
    for (std::size_t i = 0; i < window.size(); ++i) {
      const GroupElement& h = window[i].right();
      std::size_t f = 0;
      while (f < fibre_keys.size() && !(fibre_keys[f] == h)) ++f;
      if (f == fibre_keys.size()) {
        fibre_keys.push_back(h);
        fibres.emplace_back();
      }
      fibres[f].push_back(i);
    }
    std::vector<std::pair<std::vector<std::size_t>, Eigen::VectorXd>> blocks;
    for (const auto& positions : fibres) {
      std::vector<GroupElement> g_parts;
      for (auto pos : positions) g_parts.push_back(window[pos].left());
      blocks.emplace_back(positions, base_->marginal_of(g_parts));
    }
    return combine_blocks(window.size(), alphabet().size(), blocks);
  }

 private:
  Process base_;
};

// ---------------------------------------------------------------------------

class CosetIidProcess final : public MarginalOracle {
 public:
  CosetIidProcess(Eigen::VectorXd mu0, GroupSpec group, int factor)
      : MarginalOracle(Alphabet(static_cast<std::size_t>(mu0.size())), std::move(group)),
        mu0_(std::move(mu0)),
        factor_(factor) {}

  std::string describe() const override { return "coset_iid(factor " + std::to_string(factor_) + ")"; }

 protected:
  Eigen::VectorXd compute(const Window& window) const override {
    std::vector<Word> keys;
    std::vector<std::size_t> class_of(window.size());
    for (std::size_t i = 0; i < window.size(); ++i) {
      Word key = group().right_coset_key(window[i], factor_);
      std::size_t c = 0;
      while (c < keys.size() && keys[c] != key) ++c;
      if (c == keys.size()) keys.push_back(std::move(key));
      class_of[i] = c;
    }
    const auto q = static_cast<std::size_t>(mu0_.size());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pattern_count(q, window.size())));
    const std::size_t assignments = pattern_count(q, keys.size());
    for (std::size_t a = 0; a < assignments; ++a) {
      const auto class_symbols = decode_pattern(a, q, keys.size());
      double p = 1.0;
      for (auto s : class_symbols) p *= mu0_[s];
      std::size_t idx = 0;
      for (std::size_t i = 0; i < window.size(); ++i) idx = idx * q + class_symbols[class_of[i]];
      out[static_cast<Eigen::Index>(idx)] = p;
    }
    return out;
  }

 private:
  Eigen::VectorXd mu0_;
  int factor_;
};

// ---------------------------------------------------------------------------

long z_exponent(const GroupElement& g) {
  long k = 0;
  for (Letter l : g.word()) k += is_inverse_letter(l) ? -1 : 1;
  return k;
}

class PeriodicOrbitProcess final : public MarginalOracle {
 public:
  PeriodicOrbitProcess(std::vector<Symbol> period, std::size_t q, GroupSpec group)
      : MarginalOracle(Alphabet(q), std::move(group)), period_(std::move(period)) {}

  std::string describe() const override {
    std::string s;
    for (auto c : period_) s += alphabet().label(c);
    return "periodic_orbit(" + s + ")";
  }

 protected:
  Eigen::VectorXd compute(const Window& window) const override {
    const std::size_t q = alphabet().size();
    const auto p = static_cast<long>(period_.size());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pattern_count(q, window.size())));
    std::vector<long> offsets;
    for (const auto& g : window) offsets.push_back(z_exponent(g));
    for (long t = 0; t < p; ++t) {
      std::size_t idx = 0;
      for (long k : offsets) idx = idx * q + period_[static_cast<std::size_t>(((t + k) % p + p) % p)];
      out[static_cast<Eigen::Index>(idx)] += 1.0 / static_cast<double>(p);
    }
    return out;
  }

 private:
  std::vector<Symbol> period_;
};

// ---------------------------------------------------------------------------

class ProductProcess final : public MarginalOracle {
 public:
  ProductProcess(Process mu, Process nu)
      : MarginalOracle(Alphabet::product(mu->alphabet(), nu->alphabet()), mu->group()),
        mu_(std::move(mu)),
        nu_(std::move(nu)) {}

  std::string describe() const override { return mu_->describe() + " x " + nu_->describe(); }

 protected:
  Eigen::VectorXd compute(const Window& window) const override {
    return tensor(mu_->marginal(window), nu_->marginal(window)).probabilities;
  }

 private:
  Process mu_, nu_;
};

class DiagonalProcess final : public MarginalOracle {
 public:
  explicit DiagonalProcess(Process mu)
      : MarginalOracle(Alphabet::product(mu->alphabet(), mu->alphabet()), mu->group()), mu_(std::move(mu)) {}

  std::string describe() const override { return "diagonal(" + mu_->describe() + ")"; }

 protected:
  Eigen::VectorXd compute(const Window& window) const override {
    const std::size_t q = mu_->alphabet().size();
    const PatternDistribution base = mu_->marginal(window);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pattern_count(q * q, window.size())));
    for (Eigen::Index i = 0; i < base.probabilities.size(); ++i) {
      const auto digits = decode_pattern(static_cast<std::size_t>(i), q, window.size());
      std::size_t idx = 0;
      for (auto d : digits) idx = idx * q * q + d * q + d;
      out[static_cast<Eigen::Index>(idx)] = base.probabilities[i];
    }
    return out;
  }

 private:
  Process mu_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Alphabet and patterns

Alphabet::Alphabet(std::size_t size) {
  if (size == 0 || size > kMaxAlphabet) throw ValidationError("alphabet size must be in [1, 256]");
  for (std::size_t i = 0; i < size; ++i) labels_.push_back(std::to_string(i));
}

Alphabet::Alphabet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.empty() || labels_.size() > kMaxAlphabet)
    throw ValidationError("alphabet size must be in [1, 256]");
  std::vector<std::string> sorted = labels_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw ValidationError("alphabet labels must be distinct");
}

Alphabet Alphabet::product(const Alphabet& x, const Alphabet& y) {
  if (x.size() * y.size() > kMaxAlphabet) throw ValidationError("product alphabet exceeds 256 symbols");
  std::vector<std::string> labels;
  for (const auto& a : x.labels())
    for (const auto& b : y.labels()) labels.push_back("(" + a + "," + b + ")");
  return Alphabet(std::move(labels));
}

std::size_t pattern_count(std::size_t alphabet_size, std::size_t window_size) {
  std::size_t total = 1;
  for (std::size_t i = 0; i < window_size; ++i) {
    total *= alphabet_size;
    if (total > kMaxPatternEntries)
      throw BudgetExceeded("pattern space |X|^|F| exceeds 2^24 entries",
                           std::pow(static_cast<double>(alphabet_size), static_cast<double>(window_size)),
                           static_cast<double>(kMaxPatternEntries));
  }
  return total;
}

std::vector<Symbol> decode_pattern(std::size_t index, std::size_t alphabet_size, std::size_t window_size) {
  std::vector<Symbol> out(window_size);
  for (std::size_t i = window_size; i-- > 0;) {
    out[i] = static_cast<Symbol>(index % alphabet_size);
    index /= alphabet_size;
  }
  return out;
}

std::size_t encode_pattern(const std::vector<Symbol>& symbols, std::size_t alphabet_size) {
  std::size_t idx = 0;
  for (auto s : symbols) idx = idx * alphabet_size + s;
  return idx;
}

std::string PatternDistribution::pattern_string(std::size_t index, const Alphabet& alphabet) const {
  bool single = true;
  for (const auto& l : alphabet.labels()) single = single && l.size() == 1;
  std::string out;
  const auto digits = decode_pattern(index, alphabet_size, window.size());
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (!single && i) out += ' ';
    out += alphabet.label(digits[i]);
  }
  return out;
}

PatternDistribution project(const PatternDistribution& source, const Window& sub) {
  std::vector<std::size_t> positions;
  for (const auto& g : sub) {
    auto pos = source.window.index_of(g);
    if (!pos) throw StructuralError("project: sub-window not contained in source window");
    positions.push_back(*pos);
  }
  const std::size_t q = source.alphabet_size;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pattern_count(q, sub.size())));
  for (Eigen::Index i = 0; i < source.probabilities.size(); ++i) {
    const auto digits = decode_pattern(static_cast<std::size_t>(i), q, source.window.size());
    std::size_t idx = 0;
    for (auto pos : positions) idx = idx * q + digits[pos];
    out[static_cast<Eigen::Index>(idx)] += source.probabilities[i];
  }
  return {sub, q, std::move(out)};
}

PatternDistribution tensor(const PatternDistribution& p, const PatternDistribution& q) {
  if (p.window.size() != q.window.size()) throw StructuralError("tensor: windows differ");
  const std::size_t qx = p.alphabet_size, qy = q.alphabet_size, m = p.window.size();
  const std::size_t total = pattern_count(qx * qy, m);
  Eigen::VectorXd out(static_cast<Eigen::Index>(total));
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t r = idx, ix = 0, iy = 0, px = 1, py = 1;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t d = r % (qx * qy);
      r /= qx * qy;
      ix += (d / qy) * px;
      iy += (d % qy) * py;
      px *= qx;
      py *= qy;
    }
    out[static_cast<Eigen::Index>(idx)] =
        p.probabilities[static_cast<Eigen::Index>(ix)] * q.probabilities[static_cast<Eigen::Index>(iy)];
  }
  return {p.window, qx * qy, std::move(out)};
}

// ---------------------------------------------------------------------------
// MarginalOracle

PatternDistribution MarginalOracle::marginal(const Window& window) const {
  if (!(window.group() == group_)) throw StructuralError("window belongs to a different group");
  pattern_count(alphabet_.size(), window.size());
  return {window, alphabet_.size(), compute(window)};
}

Eigen::VectorXd MarginalOracle::marginal_of(const std::vector<GroupElement>& elements) const {
  return marginal(Window::anchored(group_, elements)).probabilities;
}

Eigen::VectorXd MarginalOracle::letter_marginal() const {
  return marginal(Window::identity_only(group_)).probabilities;
}

// ---------------------------------------------------------------------------
// Constructors

Process bernoulli(const Eigen::VectorXd& weights, const GroupSpec& group) {
  validate_distribution(weights, "bernoulli");
  return std::make_shared<BernoulliProcess>(weights, group);
}

Process tree_markov(const Eigen::MatrixXd& transition, const Eigen::VectorXd& initial, const GroupSpec& group) {
  if (!group.is_word_kind()) throw StructuralError("tree_markov requires a free group");
  validate_distribution(initial, "tree_markov initial");
  const auto q = initial.size();
  if (transition.rows() != q || transition.cols() != q)
    throw ValidationError("tree_markov: transition must be |X| x |X|");
  for (Eigen::Index i = 0; i < q; ++i) {
    if ((transition.row(i).array() < 0).any()) throw ValidationError("tree_markov: negative transition");
    if (std::abs(transition.row(i).sum() - 1.0) > kInputTolerance)
      throw ValidationError("tree_markov: transition rows must sum to 1");
  }
  const Eigen::VectorXd stationary = transition.transpose() * initial;
  if ((stationary - initial).cwiseAbs().maxCoeff() > kInputTolerance)
    throw ValidationError("tree_markov: initial vector is not stationary");
  for (Eigen::Index i = 0; i < q; ++i)
    for (Eigen::Index j = 0; j < q; ++j)
      if (std::abs(initial[i] * transition(i, j) - initial[j] * transition(j, i)) > kInputTolerance)
        throw ValidationError("tree_markov: detailed balance violated");
  return std::make_shared<TreeMarkovProcess>(transition, initial, group);
}

Process coinduced(const Process& base, const GroupSpec& h_group) {
  return std::make_shared<CoinducedProcess>(base, h_group);
}

Process coset_iid(const Eigen::VectorXd& mu0, const GroupSpec& group, int factor) {
  validate_distribution(mu0, "coset_iid");
  if (group.kind() != GroupKind::kFreeProduct) throw StructuralError("coset_iid requires a free product");
  if (factor < 0 || factor >= group.factor_count()) throw StructuralError("coset_iid: factor not declared");
  return std::make_shared<CosetIidProcess>(mu0, group, factor);
}

Process periodic_orbit(const std::vector<Symbol>& period, std::size_t alphabet_size, const GroupSpec& integers) {
  if (integers.kind() != GroupKind::kFree || integers.generator_count() != 1)
    throw StructuralError("periodic_orbit is defined over Z");
  if (period.empty()) throw ValidationError("periodic_orbit: empty period");
  for (auto s : period)
    if (s >= alphabet_size) throw ValidationError("periodic_orbit: symbol outside alphabet");
  const std::size_t p = period.size();
  for (std::size_t d = 1; d < p; ++d) {
    if (p % d) continue;
    bool periodic = true;
    for (std::size_t i = 0; i < p && periodic; ++i) periodic = period[i] == period[(i + d) % p];
    if (periodic) throw ValidationError("periodic_orbit: word has a smaller least period");
  }
  return std::make_shared<PeriodicOrbitProcess>(period, alphabet_size, integers);
}

Process product_process(const Process& mu, const Process& nu) {
  if (!(mu->group() == nu->group())) throw StructuralError("product_process: groups differ");
  return std::make_shared<ProductProcess>(mu, nu);
}

Process power_process(const Process& mu, int k) {
  if (k < 1) throw ValidationError("power_process: k must be positive");
  double size = std::pow(static_cast<double>(mu->alphabet().size()), k);
  if (size > static_cast<double>(kMaxAlphabet))
    throw ValidationError("power_process: |X|^k exceeds 256 symbols");
  Process out = mu;
  for (int i = 1; i < k; ++i) out = product_process(out, mu);
  return out;
}

Process diagonal_process(const Process& mu) { return std::make_shared<DiagonalProcess>(mu); }

double consistency_error(const MarginalOracle& mu, const Window& window, const Window& sub) {
  const PatternDistribution full = mu.marginal(window);
  const PatternDistribution part = mu.marginal(sub);
  const double mass = std::abs(full.probabilities.sum() - 1.0);
  return std::max(mass, total_variation(project(full, sub).probabilities, part.probabilities));
}

double translation_error(const MarginalOracle& mu, const Window& window, const GroupElement& g) {
  std::vector<GroupElement> shifted;
  for (const auto& f : window) shifted.push_back(window.group().multiply(f, g));
  return total_variation(mu.marginal(window).probabilities, mu.marginal_of(shifted));
}

}  // namespace sofic
