#include <cstdio>
#include <string>

#include "skelsim.h"

#include <CLI11.hpp>

int main(int argc, char** argv) {
  CLI::App app{"Autonomic-management simulator for skeleton applications"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "out", mode, trace_path;
  unsigned long long seed = 0;
  bool seed_set = false;

  auto* run = app.add_subcommand("run", "Run a scenario and write trace/metrics/verdict");
  run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  run->add_option("--out", out_dir, "Output directory (default: out)");
  run->add_option("--seed", seed, "Override the scenario seed")->trigger_on_parse();
  run->add_option("--mode", mode, "Coordination mode: sm|cm")
      ->check(CLI::IsMember({"sm", "cm"}));

  auto* replay = app.add_subcommand("replay", "Re-run a scenario and diff against a trace");
  replay->add_option("trace", trace_path, "trace.jsonl from a previous run")->required();
  replay->add_option("scenario", scenario_path, "Scenario JSON file")->required();

  CLI11_PARSE(app, argc, argv);
  seed_set = run->count("--seed") > 0;

  if (app.got_subcommand(run)) {
    skelsim_engine* engine = skelsim_engine_new_from_file(scenario_path.c_str());
    if (!engine) {
      std::fprintf(stderr, "error: %s\n", skelsim_last_error());
      return 1;
    }
    if (seed_set) skelsim_engine_set_seed(engine, seed);
    if (!mode.empty() && skelsim_engine_set_mode(engine, mode.c_str()) != SKELSIM_OK) {
      std::fprintf(stderr, "error: %s\n", skelsim_last_error());
      skelsim_engine_free(engine);
      return 1;
    }
    skelsim_status st = skelsim_engine_run(engine, out_dir.c_str());
    if (st != SKELSIM_OK && st != SKELSIM_NOT_CONVERGED) {
      std::fprintf(stderr, "error: %s\n", skelsim_last_error());
      skelsim_engine_free(engine);
      return 1;
    }
    const char* verdict = skelsim_engine_verdict_json(engine);
    if (verdict) std::printf("%s\n", verdict);
    skelsim_engine_free(engine);
    return st == SKELSIM_OK ? 0 : 2;
  }

  // replay
  long line = 0;
  skelsim_status st = skelsim_replay(trace_path.c_str(), scenario_path.c_str(), &line);
  if (st == SKELSIM_OK) {
    std::printf("replay ok: traces identical\n");
    return 0;
  }
  if (st == SKELSIM_REPLAY_MISMATCH)
    std::fprintf(stderr, "replay mismatch at line %ld: %s\n", line, skelsim_last_error());
  else
    std::fprintf(stderr, "error: %s\n", skelsim_last_error());
  return 1;
}
