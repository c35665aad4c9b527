#pragma once

// JSON descriptions of groups, processes, windows and sofic maps; CSV tables
// with a checksum line; a minimal SVG line plot.

#include <cstdint>
#include <json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "sofic/group.hpp"
#include "sofic/process.hpp"
#include "sofic/sofic_map.hpp"

namespace sofic {

using Json = nlohmann::json;

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);
/// Checksum of the canonical dump (sorted keys, no whitespace).
std::string config_checksum(const Json& config);

/// Shortest round-trip-stable text used in every table: %.12g, with
/// "-inf", "inf" and "nan" spelled out.
std::string format_double(double value);
/// Same sentinels inside JSON, where infinities are not representable.
Json json_number(double value);

/// {"kind":"free","rank":2}, {"kind":"integers"}, {"kind":"cyclic","order":5},
/// {"kind":"table",...}, {"kind":"free_product","factors":[["a","b"],["c"]]},
/// {"kind":"partitioned"}, {"kind":"product","left":{...},"right":{...}}.
GroupSpec group_from_json(const Json& j);
Json group_to_json(const GroupSpec& group);

/// {"radius": r} or {"elements": ["e", "a", ...]}.
Window window_from_json(const Json& j, const GroupSpec& group);

/// {"process":"bernoulli","weights":[...]} and the other constructors; the
/// group is the one the process lives on.
Process process_from_json(const Json& j, const GroupSpec& group);

Json sofic_map_to_json(const SoficMap& sigma);
SoficMap sofic_map_from_json(const Json& j, const GroupSpec& group);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns = {});
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  void add_row(std::vector<std::string> row);
  /// "# config_checksum=<hex>" line, header, rows.
  std::string render(const std::string& checksum) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

std::string cell(double value);
std::string cell(std::size_t value);
std::string cell(int value);
std::string cell(bool value);
inline std::string cell(std::string value) { return value; }
inline std::string cell(const char* value) { return value; }

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

std::string svg_line_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<PlotSeries>& series, bool log_x = false);

}  // namespace sofic
