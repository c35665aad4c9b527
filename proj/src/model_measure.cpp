#include "sofic/model_measure.hpp"

#include <cmath>
#include <map>

#include "sofic/errors.hpp"

namespace sofic {

namespace {
constexpr double kWeightTolerance = 1e-9;
}

ModelMeasure ModelMeasure::explicit_support(const std::vector<Configuration>& support,
                                            const std::vector<double>& weights) {
  if (support.empty()) throw ValidationError("explicit measure needs at least one atom");
  if (support.size() != weights.size()) throw ValidationError("support and weights differ in length");
  double total = 0;
  for (double w : weights) {
    if (!(w >= 0) || !std::isfinite(w)) throw ValidationError("negative or non-finite atom weight");
    total += w;
  }
  if (std::abs(total - 1.0) > kWeightTolerance) throw ValidationError("atom weights do not sum to 1");

  ModelMeasure m;
  m.kind_ = Kind::kExplicit;
  m.vertices_ = support.front().size();
  m.q_ = support.front().alphabet_size;
  std::map<std::vector<Symbol>, std::size_t> position;
  std::vector<double> merged;
  for (std::size_t i = 0; i < support.size(); ++i) {
    const auto& x = support[i];
    if (x.size() != m.vertices_ || x.alphabet_size != m.q_)
      throw StructuralError("atoms must share length and alphabet");
    if (weights[i] == 0.0) continue;
    auto [it, inserted] = position.emplace(x.values, m.support_.size());
    if (inserted) {
      m.support_.push_back(x);
      merged.push_back(weights[i]);
    } else {
      merged[it->second] += weights[i];
    }
  }
  m.weights_ = Eigen::Map<const Eigen::VectorXd>(merged.data(), static_cast<Eigen::Index>(merged.size()));
  return m;
}

ModelMeasure ModelMeasure::point_mass(Configuration x) { return explicit_support({std::move(x)}, {1.0}); }

ModelMeasure ModelMeasure::uniform(const std::vector<Configuration>& support) {
  return explicit_support(support, std::vector<double>(support.size(), 1.0 / static_cast<double>(support.size())));
}

ModelMeasure ModelMeasure::iid(const Eigen::VectorXd& letter_weights, std::size_t vertices) {
  if (letter_weights.size() == 0 || static_cast<std::size_t>(letter_weights.size()) > kMaxAlphabet)
    throw ValidationError("letter weights must have 1..256 entries");
  if ((letter_weights.array() < 0).any() || std::abs(letter_weights.sum() - 1.0) > kWeightTolerance)
    throw ValidationError("letter weights must be a probability vector");
  ModelMeasure m;
  m.kind_ = Kind::kIid;
  m.vertices_ = vertices;
  m.q_ = static_cast<std::size_t>(letter_weights.size());
  m.letter_weights_ = letter_weights;
  return m;
}

ModelMeasure ModelMeasure::sampler(std::size_t vertices, std::size_t alphabet_size, Sampler draw,
                                   std::string description) {
  ModelMeasure m;
  m.kind_ = Kind::kSampler;
  m.vertices_ = vertices;
  m.q_ = alphabet_size;
  m.sampler_ = std::make_shared<const Sampler>(std::move(draw));
  m.description_ = std::move(description);
  return m;
}

std::string ModelMeasure::describe() const {
  switch (kind_) {
    case Kind::kExplicit:
      return "explicit(" + std::to_string(support_.size()) + " atoms)";
    case Kind::kIid:
      return "iid";
    case Kind::kSampler:
      return description_;
  }
  return {};
}

void ModelMeasure::require_explicit(const std::string& operation) const {
  if (kind_ != Kind::kExplicit)
    throw RefusedOperation(operation + " needs an explicitly supported measure, got " + describe());
}

const std::vector<Configuration>& ModelMeasure::support() const {
  require_explicit("support");
  return support_;
}

const Eigen::VectorXd& ModelMeasure::weights() const {
  require_explicit("weights");
  return weights_;
}

const Eigen::VectorXd& ModelMeasure::letter_weights() const {
  if (kind_ != Kind::kIid) throw RefusedOperation("letter_weights needs an i.i.d. measure");
  return letter_weights_;
}

Configuration ModelMeasure::sample(CounterRng& rng) const {
  switch (kind_) {
    case Kind::kExplicit:
      return support_[draw_index(rng, weights_)];
    case Kind::kIid: {
      Configuration x = Configuration::constant(q_, vertices_);
      for (auto& s : x.values) s = static_cast<Symbol>(draw_index(rng, letter_weights_));
      return x;
    }
    case Kind::kSampler:
      return (*sampler_)(rng);
  }
  throw StructuralError("unknown measure kind");
}

ModelMeasure ModelMeasure::square() const {
  switch (kind_) {
    case Kind::kExplicit: {
      const std::size_t k = support_.size();
      if (k * k > kMaxSquaredAtoms)
        throw BudgetExceeded("square of an explicit measure with " + std::to_string(k) + " atoms",
                             static_cast<double>(k * k), static_cast<double>(kMaxSquaredAtoms));
      // Pairs of distinct atoms are distinct, so no merging is needed.
      ModelMeasure m;
      m.kind_ = Kind::kExplicit;
      m.vertices_ = vertices_;
      m.q_ = q_ * q_;
      m.weights_.resize(static_cast<Eigen::Index>(k * k));
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
          m.support_.push_back(pair_configuration(support_[i], support_[j]));
          m.weights_[static_cast<Eigen::Index>(i * k + j)] = weights_[static_cast<Eigen::Index>(i)] * weights_[static_cast<Eigen::Index>(j)];
        }
      return m;
    }
    case Kind::kIid: {
      Eigen::VectorXd pair(letter_weights_.size() * letter_weights_.size());
      for (Eigen::Index i = 0; i < letter_weights_.size(); ++i)
        pair.segment(i * letter_weights_.size(), letter_weights_.size()) = letter_weights_[i] * letter_weights_;
      return iid(pair, vertices_);
    }
    case Kind::kSampler: {
      auto base = sampler_;
      return sampler(vertices_, q_ * q_,
                     [base](CounterRng& rng) {
                       CounterRng left(rng()), right(rng());
                       return pair_configuration((*base)(left), (*base)(right));
                     },
                     description_ + "^2");
    }
  }
  throw StructuralError("unknown measure kind");
}

}  // namespace sofic
