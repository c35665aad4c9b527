#include "sofic/group.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <deque>
#include <set>
#include <sstream>

#include "sofic/errors.hpp"

namespace sofic {

// ---------------------------------------------------------------------------
// GroupElement

GroupElement GroupElement::from_word(Word reduced) {
  GroupElement g;
  g.word_ = std::move(reduced);
  return g;
}

GroupElement GroupElement::from_index(std::size_t index) {
  GroupElement g;
  g.index_ = index;
  return g;
}

GroupElement GroupElement::from_pair(GroupElement left, GroupElement right) {
  GroupElement g;
  g.parts_.reserve(2);
  g.parts_.push_back(std::move(left));
  g.parts_.push_back(std::move(right));
  return g;
}

const GroupElement& GroupElement::left() const {
  if (!is_pair()) throw StructuralError("group element is not a pair");
  return parts_[0];
}

const GroupElement& GroupElement::right() const {
  if (!is_pair()) throw StructuralError("group element is not a pair");
  return parts_[1];
}

std::strong_ordering GroupElement::operator<=>(const GroupElement& other) const {
  if (auto c = word_ <=> other.word_; c != 0) return c;
  if (auto c = index_ <=> other.index_; c != 0) return c;
  if (auto c = parts_.size() <=> other.parts_.size(); c != 0) return c;
  for (std::size_t i = 0; i < parts_.size(); ++i)
    if (auto c = parts_[i] <=> other.parts_[i]; c != 0) return c;
  return std::strong_ordering::equal;
}

// ---------------------------------------------------------------------------
// GroupSpec data

struct GroupSpec::Data {
  GroupKind kind = GroupKind::kFree;
  std::vector<std::string> labels;
  int generators = 0;

  // Free product.
  std::vector<int> factor_of;
  int factors = 1;

  // Finite table.
  std::vector<std::vector<std::size_t>> table;
  std::vector<std::size_t> generator_elements;
  std::size_t identity = 0;
  std::vector<std::size_t> inverse;
  std::vector<Word> shortlex;        // minimal word per element
  std::vector<int> lengths;          // word length per element
  std::vector<std::size_t> bfs_order;

  // Direct product: {left, right}.
  std::vector<GroupSpec> components;
};

namespace {

std::vector<std::string> default_labels(int rank) {
  std::vector<std::string> out;
  const std::string letters = "abcdfghijklmnopqrstuvwxyz";
  for (int i = 0; i < rank; ++i) {
    if (i < static_cast<int>(letters.size()))
      out.emplace_back(1, letters[static_cast<std::size_t>(i)]);
    else
      out.push_back("x" + std::to_string(i));
  }
  return out;
}

void check_labels(const std::vector<std::string>& labels) {
  std::set<std::string> seen;
  for (const auto& l : labels) {
    if (l.empty() || l == "e" || l == "1")
      throw ValidationError("invalid generator label '" + l + "'");
    for (char c : l)
      if (std::isspace(static_cast<unsigned char>(c)) || c == '^' || c == '(' || c == ')' ||
          c == ',')
        throw ValidationError("generator label '" + l + "' contains a reserved character");
    if (!seen.insert(l).second) throw ValidationError("duplicate generator label '" + l + "'");
  }
}

Word reduce_concat(const Word& a, const Word& b) {
  Word out = a;
  for (Letter l : b) {
    if (!out.empty() && out.back() == inverse_letter(l))
      out.pop_back();
    else
      out.push_back(l);
  }
  return out;
}

Word invert_word(const Word& w) {
  Word out(w.rbegin(), w.rend());
  for (auto& l : out) l = inverse_letter(l);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Construction

GroupSpec GroupSpec::free(int rank, std::vector<std::string> labels) {
  if (rank < 0) throw ValidationError("free group rank must be nonnegative");
  if (labels.empty()) labels = default_labels(rank);
  if (static_cast<int>(labels.size()) != rank)
    throw ValidationError("free group: label count does not match rank");
  check_labels(labels);
  auto d = std::make_shared<Data>();
  d->kind = GroupKind::kFree;
  d->generators = rank;
  d->labels = std::move(labels);
  d->factor_of.assign(static_cast<std::size_t>(rank), 0);
  return GroupSpec(std::move(d));
}

GroupSpec GroupSpec::integers() { return free(1, {"a"}); }

GroupSpec GroupSpec::cyclic(std::size_t order) {
  if (order == 0) throw ValidationError("cyclic group order must be positive");
  std::vector<std::vector<std::size_t>> table(order, std::vector<std::size_t>(order));
  for (std::size_t i = 0; i < order; ++i)
    for (std::size_t j = 0; j < order; ++j) table[i][j] = (i + j) % order;
  return finite_table(std::move(table), {order > 1 ? 1u : 0u}, {"a"});
}

GroupSpec GroupSpec::finite_table(std::vector<std::vector<std::size_t>> table,
                                  std::vector<std::size_t> generators,
                                  std::vector<std::string> labels) {
  const std::size_t n = table.size();
  if (n == 0) throw ValidationError("empty multiplication table");
  for (const auto& row : table) {
    if (row.size() != n) throw ValidationError("multiplication table is not square");
    for (auto v : row)
      if (v >= n) throw ValidationError("multiplication table entry out of range");
  }
  // Identity.
  std::optional<std::size_t> identity;
  for (std::size_t e = 0; e < n && !identity; ++e) {
    bool ok = true;
    for (std::size_t x = 0; x < n && ok; ++x) ok = table[e][x] == x && table[x][e] == x;
    if (ok) identity = e;
  }
  if (!identity) throw ValidationError("multiplication table has no identity");
  // Associativity, exhaustively.
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c)
        if (table[table[a][b]][c] != table[a][table[b][c]])
          throw ValidationError("multiplication table is not associative");
  std::vector<std::size_t> inverse(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b)
      if (table[a][b] == *identity && table[b][a] == *identity) inverse[a] = b;
    if (inverse[a] == n) throw ValidationError("multiplication table lacks inverses");
  }
  if (labels.size() != generators.size())
    throw ValidationError("finite group: label count does not match generators");
  check_labels(labels);
  for (auto g : generators)
    if (g >= n) throw ValidationError("finite group generator out of range");

  auto d = std::make_shared<Data>();
  d->kind = GroupKind::kFiniteTable;
  d->generators = static_cast<int>(generators.size());
  d->labels = std::move(labels);
  d->table = std::move(table);
  d->generator_elements = std::move(generators);
  d->identity = *identity;
  d->inverse = std::move(inverse);

  // Breadth-first search in letter order gives shortlex-minimal words.
  d->shortlex.assign(n, {});
  d->lengths.assign(n, -1);
  d->lengths[d->identity] = 0;
  d->bfs_order.push_back(d->identity);
  for (std::size_t head = 0; head < d->bfs_order.size(); ++head) {
    const std::size_t x = d->bfs_order[head];
    for (Letter l = 0; l < 2 * d->generators; ++l) {
      const std::size_t s = d->generator_elements[static_cast<std::size_t>(generator_of(l))];
      const std::size_t step = is_inverse_letter(l) ? d->inverse[s] : s;
      const std::size_t y = d->table[x][step];
      if (d->lengths[y] >= 0) continue;
      d->lengths[y] = d->lengths[x] + 1;
      d->shortlex[y] = d->shortlex[x];
      d->shortlex[y].push_back(l);
      d->bfs_order.push_back(y);
    }
  }
  if (d->bfs_order.size() != n)
    throw ValidationError("declared generators do not generate the finite group");
  return GroupSpec(std::move(d));
}

GroupSpec GroupSpec::free_product(std::vector<std::vector<std::string>> factor_labels) {
  if (factor_labels.empty()) throw ValidationError("free product needs at least one factor");
  auto d = std::make_shared<Data>();
  d->kind = GroupKind::kFreeProduct;
  d->factors = static_cast<int>(factor_labels.size());
  for (std::size_t f = 0; f < factor_labels.size(); ++f) {
    if (factor_labels[f].empty()) throw ValidationError("free factor of rank zero");
    for (auto& l : factor_labels[f]) {
      d->labels.push_back(l);
      d->factor_of.push_back(static_cast<int>(f));
    }
  }
  check_labels(d->labels);
  d->generators = static_cast<int>(d->labels.size());
  return GroupSpec(std::move(d));
}

GroupSpec GroupSpec::direct_product(const GroupSpec& left, const GroupSpec& right) {
  auto d = std::make_shared<Data>();
  d->kind = GroupKind::kDirectProduct;
  d->components = {left, right};
  d->labels = left.labels();
  for (const auto& l : right.labels()) d->labels.push_back(l);
  d->generators = left.generator_count() + right.generator_count();
  return GroupSpec(std::move(d));
}

// ---------------------------------------------------------------------------
// Queries

GroupKind GroupSpec::kind() const { return data_->kind; }

bool GroupSpec::is_word_kind() const {
  return data_->kind == GroupKind::kFree || data_->kind == GroupKind::kFreeProduct;
}

int GroupSpec::generator_count() const { return data_->generators; }

const std::vector<std::string>& GroupSpec::labels() const { return data_->labels; }

const GroupSpec& GroupSpec::left() const {
  if (data_->kind != GroupKind::kDirectProduct)
    throw StructuralError("left(): not a direct product");
  return data_->components[0];
}

const GroupSpec& GroupSpec::right() const {
  if (data_->kind != GroupKind::kDirectProduct)
    throw StructuralError("right(): not a direct product");
  return data_->components[1];
}

GroupElement GroupSpec::identity() const {
  switch (data_->kind) {
    case GroupKind::kFree:
    case GroupKind::kFreeProduct:
      return GroupElement::from_word({});
    case GroupKind::kFiniteTable:
      return GroupElement::from_index(data_->identity);
    case GroupKind::kDirectProduct:
      return GroupElement::from_pair(left().identity(), right().identity());
  }
  return {};
}

GroupElement GroupSpec::letter_element(Letter l) const {
  const int gen = generator_of(l);
  if (l < 0 || gen >= data_->generators) throw StructuralError("letter out of range");
  switch (data_->kind) {
    case GroupKind::kFree:
    case GroupKind::kFreeProduct:
      return GroupElement::from_word({l});
    case GroupKind::kFiniteTable: {
      const std::size_t s = data_->generator_elements[static_cast<std::size_t>(gen)];
      return GroupElement::from_index(is_inverse_letter(l) ? data_->inverse[s] : s);
    }
    case GroupKind::kDirectProduct: {
      const int nl = left().generator_count();
      if (gen < nl) return GroupElement::from_pair(left().letter_element(l), right().identity());
      return GroupElement::from_pair(left().identity(),
                                     right().letter_element(l - 2 * nl));
    }
  }
  return {};
}

GroupElement GroupSpec::generator(int i) const { return letter_element(make_letter(i)); }

bool GroupSpec::contains(const GroupElement& g) const {
  switch (data_->kind) {
    case GroupKind::kFree:
    case GroupKind::kFreeProduct: {
      if (g.is_pair() || g.index() != 0) return false;
      const auto& w = g.word();
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] < 0 || generator_of(w[i]) >= data_->generators) return false;
        if (i > 0 && w[i] == inverse_letter(w[i - 1])) return false;
      }
      return true;
    }
    case GroupKind::kFiniteTable:
      return !g.is_pair() && g.word().empty() && g.index() < data_->table.size();
    case GroupKind::kDirectProduct:
      return g.is_pair() && left().contains(g.left()) && right().contains(g.right());
  }
  return false;
}

bool GroupSpec::is_identity(const GroupElement& g) const { return g == identity(); }

GroupElement GroupSpec::inverse(const GroupElement& g) const {
  if (!contains(g)) throw StructuralError("inverse: element not in group");
  switch (data_->kind) {
    case GroupKind::kFree:
    case GroupKind::kFreeProduct:
      return GroupElement::from_word(invert_word(g.word()));
    case GroupKind::kFiniteTable:
      return GroupElement::from_index(data_->inverse[g.index()]);
    case GroupKind::kDirectProduct:
      return GroupElement::from_pair(left().inverse(g.left()), right().inverse(g.right()));
  }
  return {};
}

GroupElement GroupSpec::multiply(const GroupElement& a, const GroupElement& b) const {
  if (!contains(a) || !contains(b)) throw StructuralError("multiply: element not in group");
  switch (data_->kind) {
    case GroupKind::kFree:
    case GroupKind::kFreeProduct:
      return GroupElement::from_word(reduce_concat(a.word(), b.word()));
    case GroupKind::kFiniteTable:
      return GroupElement::from_index(data_->table[a.index()][b.index()]);
    case GroupKind::kDirectProduct:
      return GroupElement::from_pair(left().multiply(a.left(), b.left()),
                                     right().multiply(a.right(), b.right()));
  }
  return {};
}

GroupElement GroupSpec::power(const GroupElement& g, long exponent) const {
  GroupElement base = exponent < 0 ? inverse(g) : g;
  unsigned long e = exponent < 0 ? static_cast<unsigned long>(-exponent)
                                 : static_cast<unsigned long>(exponent);
  GroupElement result = identity();
  while (e > 0) {
    if (e & 1UL) result = multiply(result, base);
    e >>= 1;
    if (e > 0) base = multiply(base, base);
  }
  return result;
}

GroupElement GroupSpec::from_letters(const Word& letters) const {
  if (is_word_kind()) {
    for (Letter l : letters)
      if (l < 0 || generator_of(l) >= data_->generators)
        throw StructuralError("letter out of range");
    return GroupElement::from_word(reduce_concat({}, letters));
  }
  GroupElement out = identity();
  for (Letter l : letters) out = multiply(out, letter_element(l));
  return out;
}

int GroupSpec::word_length(const GroupElement& g) const {
  if (!contains(g)) throw StructuralError("word_length: element not in group");
  switch (data_->kind) {
    case GroupKind::kFree:
    case GroupKind::kFreeProduct:
      return static_cast<int>(g.word().size());
    case GroupKind::kFiniteTable:
      return data_->lengths[g.index()];
    case GroupKind::kDirectProduct:
      return std::max(left().word_length(g.left()), right().word_length(g.right()));
  }
  return 0;
}

Word GroupSpec::word_for(const GroupElement& g) const {
  if (!contains(g)) throw StructuralError("word_for: element not in group");
  switch (data_->kind) {
    case GroupKind::kFree:
    case GroupKind::kFreeProduct:
      return g.word();
    case GroupKind::kFiniteTable:
      return data_->shortlex[g.index()];
    case GroupKind::kDirectProduct:
      break;
  }
  throw StructuralError("word_for: direct products act componentwise");
}

Window GroupSpec::ball(int radius) const {
  if (radius < 0) throw ValidationError("ball radius must be nonnegative");
  std::vector<GroupElement> out;
  switch (data_->kind) {
    case GroupKind::kFree:
    case GroupKind::kFreeProduct: {
      std::vector<Word> frontier{{}};
      out.push_back(identity());
      for (int r = 1; r <= radius; ++r) {
        std::vector<Word> next;
        for (const auto& w : frontier) {
          for (Letter l = 0; l < 2 * data_->generators; ++l) {
            if (!w.empty() && w.back() == inverse_letter(l)) continue;
            Word x = w;
            x.push_back(l);
            next.push_back(std::move(x));
          }
        }
        for (const auto& w : next) out.push_back(GroupElement::from_word(w));
        frontier = std::move(next);
      }
      break;
    }
    case GroupKind::kFiniteTable:
      for (auto x : data_->bfs_order)
        if (data_->lengths[x] <= radius) out.push_back(GroupElement::from_index(x));
      break;
    case GroupKind::kDirectProduct: {
      const Window lb = left().ball(radius);
      const Window rb = right().ball(radius);
      struct Entry {
        int length;
        std::size_t li, ri;
      };
      std::vector<Entry> entries;
      for (std::size_t i = 0; i < lb.size(); ++i)
        for (std::size_t j = 0; j < rb.size(); ++j)
          entries.push_back({std::max(left().word_length(lb[i]), right().word_length(rb[j])), i,
                             j});
      std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return std::tie(a.length, a.li, a.ri) < std::tie(b.length, b.li, b.ri);
      });
      for (const auto& e : entries) out.push_back(GroupElement::from_pair(lb[e.li], rb[e.ri]));
      break;
    }
  }
  return Window(*this, std::move(out));
}

std::size_t GroupSpec::order() const {
  if (data_->kind != GroupKind::kFiniteTable) throw StructuralError("order(): not a finite group");
  return data_->table.size();
}

int GroupSpec::factor_count() const {
  if (data_->kind == GroupKind::kFreeProduct || data_->kind == GroupKind::kFree)
    return data_->factors;
  throw StructuralError("factor_count(): not a free product");
}

int GroupSpec::factor_of_generator(int generator) const {
  if (!is_word_kind()) throw StructuralError("factor_of_generator(): not a free product");
  if (generator < 0 || generator >= data_->generators)
    throw StructuralError("generator out of range");
  return data_->factor_of[static_cast<std::size_t>(generator)];
}

Word GroupSpec::right_coset_key(const GroupElement& g, int factor) const {
  if (data_->kind != GroupKind::kFreeProduct)
    throw StructuralError("right_coset_key requires a free-product group");
  if (factor < 0 || factor >= data_->factors)
    throw StructuralError("right_coset_key: factor not declared");
  if (!contains(g)) throw StructuralError("right_coset_key: element not in group");
  const auto& w = g.word();
  std::size_t k = 0;
  while (k < w.size() && data_->factor_of[static_cast<std::size_t>(generator_of(w[k]))] == factor)
    ++k;
  return Word(w.begin() + static_cast<std::ptrdiff_t>(k), w.end());
}

// ---------------------------------------------------------------------------
// Text form

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

Word GroupSpec::parse_word(std::string_view text) const {
  text = trim(text);
  if (text == "e" || text == "1" || text.empty()) return {};
  const auto& labels = data_->labels;
  Word out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char c = text[pos];
    if (std::isspace(static_cast<unsigned char>(c)) || c == '*' || c == '.') {
      ++pos;
      continue;
    }
    int best = -1;
    std::size_t best_len = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const auto& l = labels[i];
      if (l.size() > best_len && text.substr(pos, l.size()) == l) {
        best = static_cast<int>(i);
        best_len = l.size();
      }
    }
    if (best < 0)
      throw ValidationError("cannot parse group word '" + std::string(text) + "' at offset " +
                            std::to_string(pos));
    pos += best_len;
    long exponent = 1;
    if (pos < text.size() && text[pos] == '^') {
      ++pos;
      const char* first = text.data() + pos;
      const char* last = text.data() + text.size();
      auto [ptr, ec] = std::from_chars(first, last, exponent);
      if (ec != std::errc()) throw ValidationError("bad exponent in '" + std::string(text) + "'");
      pos += static_cast<std::size_t>(ptr - first);
    }
    const Letter l = make_letter(best, exponent < 0);
    for (long k = 0; k < (exponent < 0 ? -exponent : exponent); ++k) out.push_back(l);
  }
  return out;
}

GroupElement GroupSpec::parse(std::string_view text) const {
  text = trim(text);
  if (data_->kind == GroupKind::kDirectProduct) {
    if (text.size() < 2 || text.front() != '(' || text.back() != ')')
      throw ValidationError("direct-product element must be written (g,h)");
    const std::string_view inner = text.substr(1, text.size() - 2);
    int depth = 0;
    for (std::size_t i = 0; i < inner.size(); ++i) {
      if (inner[i] == '(') ++depth;
      if (inner[i] == ')') --depth;
      if (inner[i] == ',' && depth == 0)
        return GroupElement::from_pair(left().parse(inner.substr(0, i)),
                                       right().parse(inner.substr(i + 1)));
    }
    throw ValidationError("direct-product element must be written (g,h)");
  }
  return from_letters(parse_word(text));
}

std::string GroupSpec::format(const GroupElement& g) const {
  if (data_->kind == GroupKind::kDirectProduct)
    return "(" + left().format(g.left()) + "," + right().format(g.right()) + ")";
  const Word w = word_for(g);
  if (w.empty()) return "e";
  std::string out;
  for (Letter l : w) {
    out += data_->labels[static_cast<std::size_t>(generator_of(l))];
    if (is_inverse_letter(l)) out += "^-1";
  }
  return out;
}

namespace {

bool same_data(const GroupSpec::Data* a, const GroupSpec::Data* b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind || a->labels != b->labels || a->factor_of != b->factor_of ||
      a->table != b->table || a->generator_elements != b->generator_elements)
    return false;
  if (a->kind == GroupKind::kDirectProduct)
    return a->components[0] == b->components[0] && a->components[1] == b->components[1];
  return true;
}

}  // namespace

bool GroupSpec::operator==(const GroupSpec& other) const {
  return same_data(data_.get(), other.data_.get());
}

// ---------------------------------------------------------------------------
// Window

Window::Window(GroupSpec group, std::vector<GroupElement> elements)
    : group_(std::move(group)), elements_(std::move(elements)) {
  if (elements_.empty() || !group_.is_identity(elements_.front()))
    throw ValidationError("window must contain the identity at index 0");
  for (const auto& g : elements_)
    if (!group_.contains(g)) throw StructuralError("window element not in group");
  std::vector<GroupElement> sorted = elements_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw ValidationError("window elements must be distinct");
}

Window Window::identity_only(const GroupSpec& group) { return Window(group, {group.identity()}); }

Window Window::anchored(const GroupSpec& group, const std::vector<GroupElement>& elements) {
  if (elements.empty()) throw ValidationError("anchored window needs at least one element");
  const GroupElement shift = group.inverse(elements.front());
  std::vector<GroupElement> out;
  out.reserve(elements.size());
  for (const auto& g : elements) out.push_back(group.multiply(g, shift));
  return Window(group, std::move(out));
}

std::optional<std::size_t> Window::index_of(const GroupElement& g) const {
  for (std::size_t i = 0; i < elements_.size(); ++i)
    if (elements_[i] == g) return i;
  return std::nullopt;
}

bool Window::contains_all(const Window& other) const {
  for (const auto& g : other)
    if (!index_of(g)) return false;
  return true;
}

std::string Window::describe() const {
  std::string out = "{";
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    if (i) out += ",";
    out += group_.format(elements_[i]);
  }
  return out + "}";
}

}  // namespace sofic
