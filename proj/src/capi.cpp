#include "skelsim.h"

#include <memory>
#include <string>

#include "skelsim/engine.hpp"
#include "skelsim/scenario.hpp"

#include <nlohmann/json.hpp>

using namespace skelsim;

/* The engine proper is built lazily at run time so seed/mode overrides can
 * be applied to the scenario first. */
struct skelsim_engine {
  Scenario scenario;
  std::unique_ptr<Engine> engine;
  std::string verdict_json;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

skelsim_status status_for(const Error& e) {
  switch (e.code()) {
    case Errc::InvalidScenario: return SKELSIM_INVALID_SCENARIO;
    default: return SKELSIM_INTERNAL_ERROR;
  }
}

}  // namespace

extern "C" {

const char* skelsim_version(void) { return "1.0.0"; }

const char* skelsim_last_error(void) { return g_last_error.c_str(); }

skelsim_engine* skelsim_engine_new_from_file(const char* path) {
  if (!path) {
    set_error("path is null");
    return nullptr;
  }
  try {
    auto* e = new skelsim_engine{Scenario::load(path), nullptr, {}};
    g_last_error.clear();
    return e;
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

skelsim_engine* skelsim_engine_new_from_json(const char* json_text) {
  if (!json_text) {
    set_error("json_text is null");
    return nullptr;
  }
  try {
    auto* e = new skelsim_engine{Scenario::from_string(json_text), nullptr, {}};
    g_last_error.clear();
    return e;
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

void skelsim_engine_free(skelsim_engine* engine) { delete engine; }

skelsim_status skelsim_engine_set_seed(skelsim_engine* engine, unsigned long long seed) {
  if (!engine) {
    set_error("engine is null");
    return SKELSIM_INTERNAL_ERROR;
  }
  if (engine->engine) {
    set_error("engine already ran");
    return SKELSIM_INTERNAL_ERROR;
  }
  engine->scenario.sim.seed = seed;
  return SKELSIM_OK;
}

skelsim_status skelsim_engine_set_mode(skelsim_engine* engine, const char* mode) {
  if (!engine || !mode) {
    set_error("null argument");
    return SKELSIM_INTERNAL_ERROR;
  }
  if (engine->engine) {
    set_error("engine already ran");
    return SKELSIM_INTERNAL_ERROR;
  }
  std::string m = mode;
  if (m == "sm") engine->scenario.mode = CoordinationMode::SM;
  else if (m == "cm") engine->scenario.mode = CoordinationMode::CM;
  else {
    set_error("mode must be sm or cm");
    return SKELSIM_INVALID_SCENARIO;
  }
  return SKELSIM_OK;
}

skelsim_status skelsim_engine_run(skelsim_engine* engine, const char* out_dir) {
  if (!engine || !out_dir) {
    set_error("null argument");
    return SKELSIM_INTERNAL_ERROR;
  }
  try {
    if (!engine->engine) engine->engine = std::make_unique<Engine>(engine->scenario);
    int rc = engine->engine->run_to_dir(out_dir);
    engine->verdict_json = engine->engine->verdict().to_json().dump();
    g_last_error.clear();
    return rc == 0 ? SKELSIM_OK : SKELSIM_NOT_CONVERGED;
  } catch (const Error& e) {
    set_error(e.what());
    return status_for(e);
  } catch (const std::exception& e) {
    set_error(e.what());
    return SKELSIM_IO_ERROR;
  }
}

const char* skelsim_engine_verdict_json(skelsim_engine* engine) {
  if (!engine || engine->verdict_json.empty()) return nullptr;
  return engine->verdict_json.c_str();
}

skelsim_status skelsim_replay(const char* trace_path, const char* scenario_path,
                              long* first_divergence) {
  if (first_divergence) *first_divergence = 0;
  if (!trace_path || !scenario_path) {
    set_error("null argument");
    return SKELSIM_INTERNAL_ERROR;
  }
  try {
    Scenario scenario = Scenario::load(scenario_path);
    ReplayResult r = replay_check(trace_path, scenario);
    if (r.ok) {
      g_last_error.clear();
      return SKELSIM_OK;
    }
    if (r.first_divergence == 0) {
      set_error(r.message);
      return SKELSIM_IO_ERROR;
    }
    if (first_divergence) *first_divergence = r.first_divergence;
    set_error(r.message);
    return SKELSIM_REPLAY_MISMATCH;
  } catch (const Error& e) {
    set_error(e.what());
    return status_for(e);
  } catch (const std::exception& e) {
    set_error(e.what());
    return SKELSIM_IO_ERROR;
  }
}

}  // extern "C"
