// masslab <subcommand> --config <path> [--out <dir>] [--seed <u64>] [--threads <n>]
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "masslab/parallel.hpp"
#include "masslab/runner.hpp"
#include "masslab/selftest.hpp"

namespace {

int run_experiment(const std::string& kind, const std::string& config_path, const std::string& out,
                   const std::optional<std::uint64_t>& seed, int threads) {
  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "error: cannot read config " << config_path << "\n";
    return 2;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(buf.str());
  } catch (const std::exception& e) {
    std::cerr << "error: invalid JSON in " << config_path << ": " << e.what() << "\n";
    return 2;
  }
  if (!j.is_object()) {
    std::cerr << "error: config must be a JSON object\n";
    return 2;
  }
  if (!j.contains("kind")) j["kind"] = kind;
  if (j["kind"] != kind) {
    std::cerr << "error: config kind " << j["kind"].dump() << " does not match subcommand " << kind << "\n";
    return 2;
  }
  if (seed) j["seed"] = *seed;
  if (!out.empty()) j["out"] = out;

  masslab::RunConfig config;
  try {
    config = masslab::parse_config(j.dump());
  } catch (const masslab::ConfigError& e) {
    for (const auto& err : e.errors()) std::cerr << "config error: " << err << "\n";
    return 2;
  }
  masslab::set_worker_count(threads);
  try {
    const masslab::ExperimentReport report = masslab::run(config);
    masslab::write_report(report, config.out);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& r : report.rows) {
      std::printf("%-5s k=%-5d %-20s %-8s estimate=%-14.8g target=%-14.8g\n", r.pass ? "PASS" : "FAIL", r.k,
                  r.check.c_str(), r.phi.c_str(), r.estimate, r.target);
    }
    std::fprintf(stderr, "wrote %s (%.2f s)\n", config.out.c_str(), report.wall_seconds);
    return report.all_pass() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"masslab: random holomorphic sections on CP^1 - Bergman kernels, mass statistics, limit laws"};
  app.require_subcommand(1);

  std::string config_path, out;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  int exit_code = 0;

  for (const auto& kind : masslab::experiment_kinds()) {
    auto* sub = app.add_subcommand(kind, "run the " + kind + " experiment");
    sub->add_option("--config", config_path, "flat JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory (overrides config)");
    sub->add_option("--seed", seed, "seed (overrides config)");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sub->callback([&, kind] { exit_code = run_experiment(kind, config_path, out, seed, threads); });
  }
  auto* selftest = app.add_subcommand("selftest", "run the built-in example suite");
  selftest->callback([&] {
    const auto cases = masslab::run_selftest();
    std::size_t failed = 0;
    for (const auto& c : cases) {
      std::printf("%s  %s%s%s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.detail.empty() ? "" : "  ",
                  c.detail.c_str());
      failed += c.pass ? 0 : 1;
    }
    std::printf("%zu/%zu passed\n", cases.size() - failed, cases.size());
    exit_code = failed == 0 ? 0 : 1;
  });

  CLI11_PARSE(app, argc, argv);
  return exit_code;
}
