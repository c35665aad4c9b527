#include <doctest.h>

#include <cmath>
#include <limits>

#include "sofic/errors.hpp"
#include "sofic/experiments.hpp"
#include "sofic/io.hpp"
#include "support.hpp"

using namespace sofic;
using namespace sofic::testing;

TEST_CASE("FNV-1a reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("number formatting") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(-0.0) == "0");
  CHECK(format_double(std::log(2.0)) == "0.69314718056");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(json_number(std::numeric_limits<double>::quiet_NaN()) == Json("nan"));
  CHECK(json_number(0.25) == Json(0.25));
}

TEST_CASE("CSV rendering") {
  CsvTable t({"a", "b"});
  t.add_row({"1", "x,y"});
  t.add_row({cell(true), "say \"hi\""});
  CHECK(t.render("00ff") == "# config_checksum=00ff\na,b\n1,\"x,y\"\ntrue,\"say \"\"hi\"\"\"\n");
  CHECK_THROWS_AS(t.add_row({"only one"}), StructuralError);
}

TEST_CASE("group JSON round trip") {
  for (const Json& j : {Json{{"kind", "free"}, {"rank", 3}}, Json{{"kind", "integers"}}, Json{{"kind", "cyclic"}, {"order", 5}},
                        Json{{"kind", "partitioned"}},
                        Json{{"kind", "product"}, {"left", {{"kind", "integers"}}}, {"right", {{"kind", "cyclic"}, {"order", 3}}}}}) {
    const GroupSpec g = group_from_json(j);
    const GroupSpec again = group_from_json(group_to_json(g));
    CHECK(again.ball(2).size() == g.ball(2).size());
    CHECK(group_to_json(again) == group_to_json(g));
  }
  CHECK_THROWS(group_from_json({{"kind", "torus"}}));
  CHECK_THROWS(group_from_json({{"kind", "free"}}));
}

TEST_CASE("windows and processes from JSON") {
  const GroupSpec f2 = GroupSpec::free(2);
  CHECK(window_from_json(1, f2).size() == 5u);
  CHECK(window_from_json({{"radius", 0}}, f2).size() == 1u);
  CHECK(window_from_json({{"elements", {"e", "a", "b^-1"}}}, f2).size() == 3u);
  const auto mu = process_from_json({{"process", "bernoulli"}, {"weights", {0.25, 0.75}}}, f2);
  CHECK(mu->letter_marginal()[1] == doctest::Approx(0.75));
  CHECK_THROWS_AS(process_from_json({{"process", "bernoulli"}, {"weights", {0.5, 0.6}}}, f2), ValidationError);
  const auto prod = process_from_json({{"process", "product"},
                                       {"left", {{"process", "bernoulli"}, {"weights", {0.5, 0.5}}}},
                                       {"right", {{"process", "bernoulli"}, {"weights", {0.25, 0.75}}}}},
                                      f2);
  CHECK(prod->alphabet().size() == 4u);
}

TEST_CASE("sofic map JSON round trip") {
  const SoficMap s = partitioned_random(3, 9);
  const SoficMap back = sofic_map_from_json(sofic_map_to_json(s), partitioned_group());
  CHECK(sofic_map_to_json(back) == sofic_map_to_json(s));
  CHECK(back.partition().has_value());
}

TEST_CASE("config validation") {
  CHECK(validate_config(Json::array()).size() == 1u);
  CHECK(validate_config({{"experiment", "E42"}, {"seed", 1}}).front().find("unknown") != std::string::npos);
  const Json ok = {{"experiment", "E7"}, {"seed", 1}, {"sizes", {8}}, {"replicates", 1}, {"threshold", 0.99}, {"required", 0}};
  CHECK(validate_config(ok).empty());
  Json bad = ok;
  bad["sizes"] = {0};
  CHECK_FALSE(validate_config(bad).empty());
  bad = ok;
  bad["schema_version"] = 7;
  CHECK_FALSE(validate_config(bad).empty());
  CHECK_THROWS_AS(run_experiment({{"experiment", "E7"}}), ValidationError);
}

TEST_CASE("overrides change the checksum and the run") {
  const Json cfg = {{"experiment", "E7"}, {"seed", 1}, {"sizes", {8}}, {"replicates", 2}, {"threshold", 0.99}, {"required", 0}};
  const auto a = run_experiment(cfg);
  const auto b = run_experiment(cfg);
  RunOptions o;
  o.seed = 2;
  const auto c = run_experiment(cfg, o);
  CHECK(a.checksum == b.checksum);
  CHECK(a.csv("spectral") == b.csv("spectral"));
  CHECK(a.checksum != c.checksum);
  CHECK(effective_config(cfg, o).at("seed") == 2);
  CHECK(a.passed());
  CHECK(summary_json(a).at("tables")[0] == "E7_spectral.csv");
}

TEST_CASE("SVG plots") {
  const std::string svg = svg_line_plot("t", "x", "y", {{"s", {1, 10, 100}, {0.1, 0.2, 0.3}}}, true);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("polyline") != std::string::npos);
}
