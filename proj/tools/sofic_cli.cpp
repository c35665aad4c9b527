// sofic_cli: run, validate and summarize the E1..E9 experiments.
//
// Exit codes: 0 all checks passed, 2 some threshold failed, 1 error.
// Errors print a JSON diagnostic on stderr.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "sofic/errors.hpp"
#include "sofic/experiments.hpp"
#include "sofic/parallel.hpp"

namespace {

sofic::Json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw sofic::ValidationError("cannot open config " + path);
  try {
    return sofic::Json::parse(in);
  } catch (const sofic::Json::parse_error& e) {
    throw sofic::ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
}

int report_error(const std::string& kind, const std::string& message, sofic::Json extra = sofic::Json::object()) {
  extra["error"] = kind;
  extra["message"] = message;
  std::cerr << extra.dump() << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sofic entropy experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "results", report_dir;
  std::optional<std::uint64_t> seed, budget;
  unsigned threads = 0;
  bool plot = false;

  auto* run = app.add_subcommand("run", "Run one experiment config");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  auto* out_opt = run->add_option("--out", out_dir, "Output directory (default: config \"output\" or results)");
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--threads", threads, "Worker threads (0 = hardware)");
  run->add_option("--budget", budget, "Override the enumeration budget");
  run->add_flag("--plot", plot, "Also write SVG plots");

  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  validate->add_option("config", config_path, "Experiment config (JSON)")->required();

  auto* report = app.add_subcommand("report", "Summarize a results directory");
  report->add_option("dir", report_dir, "Results directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) {
      const auto problems = sofic::validate_config(load_config(config_path));
      if (problems.empty()) {
        std::cout << "ok\n";
        return 0;
      }
      sofic::Json j;
      j["problems"] = problems;
      return report_error("ValidationError", problems.front(), j);
    }
    if (*report) {
      bool all = true;
      for (const auto& line : sofic::read_report(report_dir)) {
        all = all && line.failed == 0;
        std::cout << line.id << " " << (line.failed ? "FAIL" : "PASS") << " " << (line.checks - line.failed) << "/"
                  << line.checks << " checksum=" << line.checksum << "\n";
        for (const auto& f : line.failures) std::cout << "  failed: " << f << "\n";
      }
      return all ? 0 : 2;
    }
    sofic::set_max_threads(threads);
    sofic::RunOptions options;
    options.seed = seed;
    options.budget = budget;
    options.plot = plot;
    const sofic::Json config = load_config(config_path);
    if (out_opt->count() == 0 && config.contains("output") && config.at("output").is_string())
      out_dir = config.at("output").get<std::string>();
    const auto result = sofic::run_experiment(config, options);
    for (const auto& path : sofic::write_result(result, out_dir)) std::cout << "wrote " << path << "\n";
    for (const auto& c : result.checks)
      std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " (value " << sofic::format_double(c.value)
                << ", threshold " << sofic::format_double(c.threshold) << ")\n";
    return result.passed() ? 0 : 2;
  } catch (const sofic::BudgetExceeded& e) {
    return report_error("BudgetExceeded", e.what(), {{"required", e.required()}, {"budget", static_cast<std::uint64_t>(e.budget())}});
  } catch (const sofic::ValidationError& e) {
    return report_error("ValidationError", e.what());
  } catch (const sofic::StructuralError& e) {
    return report_error("StructuralError", e.what());
  } catch (const sofic::RefusedOperation& e) {
    return report_error("RefusedOperation", e.what());
  } catch (const std::exception& e) {
    return report_error("Error", e.what());
  }
}
