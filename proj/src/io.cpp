#include "sofic/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "sofic/errors.hpp"

namespace sofic {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string config_checksum(const Json& config) { return hex64(fnv1a64(config.dump())); }

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value < 0 ? "-inf" : "inf";
  if (value == 0) return "0";  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

Json json_number(double value) {
  if (std::isfinite(value)) return value;
  return format_double(value);
}

// ---------------------------------------------------------------------------
// Groups, windows, processes

namespace {

Eigen::VectorXd vector_from(const Json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw ValidationError(std::string(what) + " must be a nonempty array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

Eigen::MatrixXd matrix_from(const Json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw ValidationError(std::string(what) + " must be a nonempty array of rows");
  const std::size_t rows = j.size(), cols = j[0].size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (j[r].size() != cols) throw ValidationError(std::string(what) + " rows differ in length");
    for (std::size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
  }
  return m;
}

const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
  return j.at(key);
}

}  // namespace

GroupSpec group_from_json(const Json& j) {
  const std::string kind = require(j, "kind").get<std::string>();
  if (kind == "free") {
    std::vector<std::string> labels;
    if (j.contains("labels")) labels = j.at("labels").get<std::vector<std::string>>();
    return GroupSpec::free(require(j, "rank").get<int>(), labels);
  }
  if (kind == "integers") return GroupSpec::integers();
  if (kind == "cyclic") return GroupSpec::cyclic(require(j, "order").get<std::size_t>());
  if (kind == "table")
    return GroupSpec::finite_table(require(j, "table").get<std::vector<std::vector<std::size_t>>>(),
                                   require(j, "generators").get<std::vector<std::size_t>>(),
                                   require(j, "labels").get<std::vector<std::string>>());
  if (kind == "free_product")
    return GroupSpec::free_product(require(j, "factors").get<std::vector<std::vector<std::string>>>());
  if (kind == "partitioned") return partitioned_group();
  if (kind == "product") return GroupSpec::direct_product(group_from_json(require(j, "left")), group_from_json(require(j, "right")));
  throw ValidationError("unknown group kind '" + kind + "'");
}

Json group_to_json(const GroupSpec& group) {
  switch (group.kind()) {
    case GroupKind::kFree:
      return {{"kind", "free"}, {"rank", group.generator_count()}, {"labels", group.labels()}};
    case GroupKind::kFreeProduct: {
      std::vector<std::vector<std::string>> factors(static_cast<std::size_t>(group.factor_count()));
      for (int s = 0; s < group.generator_count(); ++s)
        factors[static_cast<std::size_t>(group.factor_of_generator(s))].push_back(group.labels()[static_cast<std::size_t>(s)]);
      return {{"kind", "free_product"}, {"factors", factors}};
    }
    case GroupKind::kFiniteTable: {
      const std::size_t n = group.order();
      std::vector<std::vector<std::size_t>> table(n, std::vector<std::size_t>(n));
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
          table[a][b] = group.multiply(GroupElement::from_index(a), GroupElement::from_index(b)).index();
      std::vector<std::size_t> gens;
      for (int s = 0; s < group.generator_count(); ++s) gens.push_back(group.generator(s).index());
      return {{"kind", "table"}, {"table", table}, {"generators", gens}, {"labels", group.labels()}};
    }
    case GroupKind::kDirectProduct:
      return {{"kind", "product"}, {"left", group_to_json(group.left())}, {"right", group_to_json(group.right())}};
  }
  return {};
}

Window window_from_json(const Json& j, const GroupSpec& group) {
  if (j.is_number_integer()) return group.ball(j.get<int>());
  if (j.contains("radius")) return group.ball(j.at("radius").get<int>());
  std::vector<GroupElement> els;
  for (const auto& e : require(j, "elements")) els.push_back(group.parse(e.get<std::string>()));
  return Window(group, els);
}

Process process_from_json(const Json& j, const GroupSpec& group) {
  const std::string kind = require(j, "process").get<std::string>();
  if (kind == "bernoulli") return bernoulli(vector_from(require(j, "weights"), "weights"), group);
  if (kind == "tree_markov")
    return tree_markov(matrix_from(require(j, "transition"), "transition"), vector_from(require(j, "initial"), "initial"), group);
  if (kind == "coinduced") {
    if (group.kind() != GroupKind::kDirectProduct) throw StructuralError("coinduced processes live on a direct product G x H");
    return coinduced(process_from_json(require(j, "base"), group.left()), group.right());
  }
  if (kind == "coset_iid") return coset_iid(vector_from(require(j, "mu0"), "mu0"), group, j.value("factor", 0));
  if (kind == "periodic_orbit") {
    const std::string word = require(j, "period").get<std::string>();
    const std::size_t q = j.value("alphabet", std::size_t{2});
    std::vector<Symbol> period;
    for (char c : word) {
      if (c < '0' || static_cast<std::size_t>(c - '0') >= q) throw ValidationError("period symbol out of range");
      period.push_back(static_cast<Symbol>(c - '0'));
    }
    return periodic_orbit(period, q, group);
  }
  if (kind == "product") return product_process(process_from_json(require(j, "left"), group), process_from_json(require(j, "right"), group));
  if (kind == "power") return power_process(process_from_json(require(j, "base"), group), require(j, "k").get<int>());
  if (kind == "diagonal") return diagonal_process(process_from_json(require(j, "base"), group));
  throw ValidationError("unknown process '" + kind + "'");
}

Json sofic_map_to_json(const SoficMap& sigma) {
  Json perms = Json::object();
  for (int s = 0; s < sigma.group().generator_count(); ++s)
    perms[sigma.group().labels()[static_cast<std::size_t>(s)]] = sigma.permutation(s);
  Json out = {{"n", sigma.size()}, {"perms", perms}};
  if (sigma.partition()) out["partition"] = *sigma.partition();
  return out;
}

SoficMap sofic_map_from_json(const Json& j, const GroupSpec& group) {
  const auto& perms = require(j, "perms");
  std::vector<Permutation> out;
  for (const auto& label : group.labels()) {
    if (!perms.contains(label)) throw ValidationError("missing permutation for generator '" + label + "'");
    out.push_back(perms.at(label).get<Permutation>());
  }
  std::optional<std::vector<std::uint8_t>> partition;
  if (j.contains("partition")) partition = j.at("partition").get<std::vector<std::uint8_t>>();
  SoficMap sigma(group, std::move(out), std::move(partition));
  if (j.contains("n") && j.at("n").get<std::size_t>() != sigma.size()) throw ValidationError("'n' disagrees with the permutations");
  return sigma;
}

// ---------------------------------------------------------------------------
// CSV

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != columns_.size()) throw StructuralError("CSV row width differs from the header");
  rows_.push_back(std::move(row));
}

namespace {

std::string escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void append_line(std::string& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += escape(cells[i]);
  }
  out += '\n';
}

}  // namespace

std::string CsvTable::render(const std::string& checksum) const {
  std::string out = "# config_checksum=" + checksum + "\n";
  append_line(out, columns_);
  for (const auto& r : rows_) append_line(out, r);
  return out;
}

std::string cell(double value) { return format_double(value); }
std::string cell(std::size_t value) { return std::to_string(value); }
std::string cell(int value) { return std::to_string(value); }
std::string cell(bool value) { return value ? "true" : "false"; }

// ---------------------------------------------------------------------------
// SVG

std::string svg_line_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<PlotSeries>& series, bool log_x) {
  constexpr double width = 640, height = 400, left = 70, right = 160, top = 40, bottom = 50;
  auto tx = [&](double x) { return log_x ? std::log10(x) : x; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (log_x && s.x[i] <= 0)) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return left + (tx(x) - x0) / (x1 - x0) * (width - left - right); };
  auto py = [&](double y) { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); };
  static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" font-family=\"sans-serif\" font-size=\"12\">\n",
                width, height);
  out += buf;
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"22\" font-size=\"14\">", left);
  out += buf + title + "</text>\n";
  std::snprintf(buf, sizeof buf, "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", left, height - bottom,
                width - right, height - bottom);
  out += buf;
  std::snprintf(buf, sizeof buf, "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", left, top, left,
                height - bottom);
  out += buf;
  for (int k = 0; k <= 4; ++k) {
    const double y = y0 + (y1 - y0) * k / 4.0;
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" text-anchor=\"end\">%.3g</text>\n", left - 6, py(y) + 4, y);
    out += buf;
    const double xv = x0 + (x1 - x0) * k / 4.0;
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">%.4g</text>\n",
                  left + (xv - x0) / (x1 - x0) * (width - left - right), height - bottom + 16, log_x ? std::pow(10.0, xv) : xv);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">", (left + width - right) / 2, height - 12);
  out += buf + x_label + "</text>\n";
  std::snprintf(buf, sizeof buf, "<text x=\"16\" y=\"%g\" transform=\"rotate(-90 16 %g)\" text-anchor=\"middle\">",
                (top + height - bottom) / 2, (top + height - bottom) / 2);
  out += buf + y_label + "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* colour = colours[s % 7];
    std::string points;
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      if (!std::isfinite(series[s].y[i]) || (log_x && series[s].x[i] <= 0)) continue;
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(series[s].x[i]), py(series[s].y[i]));
      points += buf;
      std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\"/>\n", px(series[s].x[i]),
                    py(series[s].y[i]), colour);
      out += buf;
    }
    out += "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" points=\"" + points + "\"/>\n";
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" fill=\"%s\">", width - right + 10, top + 16.0 * static_cast<double>(s), colour);
    out += buf + series[s].name + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace sofic
