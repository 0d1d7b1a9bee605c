#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "exlab/harness.hpp"

namespace {

int run(const std::string& sub, const std::string& config_path, const std::string& out, unsigned threads,
        const std::optional<std::uint64_t>& seed) {
  std::ifstream in(config_path);
  if (!in) throw std::runtime_error("cannot open config " + config_path);
  exlab::Json j;
  try {
    in >> j;
  } catch (const exlab::Json::exception& e) {
    throw std::runtime_error("cannot parse config " + config_path + ": " + e.what());
  }
  const auto kind = exlab::parse_kind(sub);
  if (!j.is_object()) throw std::runtime_error("config: expected a JSON object");
  if (!j.contains("kind")) j["kind"] = exlab::kind_name(kind);
  auto config = exlab::ExperimentConfig::from_json(j);
  if (config.kind != kind)
    throw std::runtime_error(std::string("config kind ") + exlab::kind_name(config.kind) + " does not match subcommand " + sub);
  if (seed) config.seed = *seed;
  if (!out.empty()) config.output = out;
  if (config.output.empty()) config.output = std::string(exlab::kind_name(kind)) + "_report";

  const auto result = exlab::run_ensemble(config, threads);
  exlab::emit_reports(result, config.output);
  for (const auto& p : result.predicates) {
    std::printf("%s %s value=%s bound=%s\n", p.pass ? "PASS" : "FAIL", p.name.c_str(),
                exlab::format_number(p.value).c_str(), exlab::format_number(p.bound).c_str());
  }
  for (const auto& f : result.failures) std::printf("replica %zu failed: %s\n", f.replica, f.message.c_str());
  for (const auto& w : result.warnings) std::printf("warning: %s\n", w.c_str());
  std::printf("wrote %s.json and %s.csv (%.1f s)\n", config.output.c_str(), config.output.c_str(),
              result.wall_seconds);
  return result.all_pass() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo and numerics laboratory for Hölder-noise diffusions"};
  app.require_subcommand(1);
  std::string config_path, out;
  unsigned threads = 0;
  std::optional<std::uint64_t> seed;
  for (const char* name : {"sde1d", "ladder", "zeroset", "lattice-support", "coupling", "bvp"}) {
    auto* sub = app.add_subcommand(name, std::string("run a ") + name + " experiment");
    sub->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "report stem; writes <stem>.json and <stem>.csv");
    sub->add_option("--threads", threads, "worker threads (0 = hardware concurrency)");
    sub->add_option("--seed", seed, "override the config seed");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    return run(app.get_subcommands().front()->get_name(), config_path, out, threads, seed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
