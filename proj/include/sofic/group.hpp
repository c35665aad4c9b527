#pragma once

// Finitely generated groups used by the experiments: free groups (Z is the
// free group of rank one), finite groups given by multiplication tables, free
// products of free groups, and direct products of any two of these.
//
// Word letters are encoded as 2*i for generator i and 2*i + 1 for its
// inverse. Free and free-product elements are stored as freely reduced
// words; for free products the alternating syllables are the maximal runs of
// letters belonging to one factor.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sofic {

using Letter = std::int32_t;

constexpr Letter make_letter(int generator, bool inverse = false) {
  return 2 * generator + (inverse ? 1 : 0);
}
constexpr Letter inverse_letter(Letter l) { return l ^ 1; }
constexpr int generator_of(Letter l) { return l >> 1; }
constexpr bool is_inverse_letter(Letter l) { return (l & 1) != 0; }

using Word = std::vector<Letter>;

/// Canonical form of a group element. Which member is meaningful depends on
/// the GroupSpec the element belongs to.
class GroupElement {
 public:
  GroupElement() = default;

  static GroupElement from_word(Word reduced);
  static GroupElement from_index(std::size_t index);
  static GroupElement from_pair(GroupElement left, GroupElement right);

  const Word& word() const { return word_; }
  std::size_t index() const { return index_; }
  bool is_pair() const { return parts_.size() == 2; }
  const GroupElement& left() const;
  const GroupElement& right() const;

  bool operator==(const GroupElement&) const = default;
  std::strong_ordering operator<=>(const GroupElement& other) const;

 private:
  Word word_;
  std::size_t index_ = 0;
  std::vector<GroupElement> parts_;
};

enum class GroupKind { kFree, kFiniteTable, kFreeProduct, kDirectProduct };

class Window;

class GroupSpec {
 public:
  /// Free group of the given rank. Default labels are a, b, c, ...
  static GroupSpec free(int rank, std::vector<std::string> labels = {});
  /// The integers, as the free group on one generator "a".
  static GroupSpec integers();
  /// Z/order as a multiplication table generated by 1 (label "a").
  static GroupSpec cyclic(std::size_t order);
  /// Finite group from its Cayley table. The table is checked exhaustively
  /// for closure, associativity, identity and inverses.
  static GroupSpec finite_table(std::vector<std::vector<std::size_t>> table,
                                std::vector<std::size_t> generators,
                                std::vector<std::string> labels);
  /// Free product of free groups; factor i has generators factor_labels[i].
  static GroupSpec free_product(std::vector<std::vector<std::string>> factor_labels);
  /// G x H; generators are those of G (paired with e) followed by those of H.
  static GroupSpec direct_product(const GroupSpec& left, const GroupSpec& right);

  GroupKind kind() const;
  bool is_word_kind() const;
  int generator_count() const;
  const std::vector<std::string>& labels() const;

  GroupElement identity() const;
  GroupElement generator(int i) const;
  GroupElement letter_element(Letter l) const;
  GroupElement inverse(const GroupElement& g) const;
  GroupElement multiply(const GroupElement& a, const GroupElement& b) const;
  GroupElement power(const GroupElement& g, long exponent) const;
  GroupElement from_letters(const Word& letters) const;
  bool contains(const GroupElement& g) const;
  bool is_identity(const GroupElement& g) const;

  /// Word length with respect to the declared generators; for direct
  /// products, the max of the component lengths.
  int word_length(const GroupElement& g) const;
  /// Shortlex-minimal word representing g (not defined for direct products).
  Word word_for(const GroupElement& g) const;

  /// Elements of word length <= radius, identity first, ordered by
  /// (length, shortlex word).
  Window ball(int radius) const;

  // Finite kind.
  std::size_t order() const;

  // Free-product kind.
  int factor_count() const;
  int factor_of_generator(int generator) const;
  /// Key equal for g and g' iff g g'^{-1} lies in the given free factor:
  /// the normal form with its leading factor syllable removed.
  Word right_coset_key(const GroupElement& g, int factor) const;

  // Direct-product kind.
  const GroupSpec& left() const;
  const GroupSpec& right() const;

  /// Parses "e", words such as "ab^-1a'", powers "a^3", and "(g,h)" pairs.
  GroupElement parse(std::string_view text) const;
  std::string format(const GroupElement& g) const;

  bool operator==(const GroupSpec& other) const;

  struct Data;

 private:
  explicit GroupSpec(std::shared_ptr<const Data> data) : data_(std::move(data)) {}
  Word parse_word(std::string_view text) const;
  std::shared_ptr<const Data> data_;
};

/// A finite ordered set of distinct group elements with the identity at
/// index 0. Marginals and pullback names are indexed in this order.
class Window {
 public:
  Window(GroupSpec group, std::vector<GroupElement> elements);

  /// The window {e}.
  static Window identity_only(const GroupSpec& group);
  /// Any finite set of distinct elements, right-translated by the inverse of
  /// its first element so that the identity comes first.
  static Window anchored(const GroupSpec& group, const std::vector<GroupElement>& elements);

  const GroupSpec& group() const { return group_; }
  std::size_t size() const { return elements_.size(); }
  const GroupElement& operator[](std::size_t i) const { return elements_[i]; }
  const std::vector<GroupElement>& elements() const { return elements_; }
  auto begin() const { return elements_.begin(); }
  auto end() const { return elements_.end(); }
  std::optional<std::size_t> index_of(const GroupElement& g) const;
  bool contains_all(const Window& other) const;

  std::string describe() const;

 private:
  GroupSpec group_;
  std::vector<GroupElement> elements_;
};

}  // namespace sofic
