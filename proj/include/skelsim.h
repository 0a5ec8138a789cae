/* C interface to the skeleton-application autonomic-management simulator.
 * All functions are synchronous; handles are opaque and single-threaded.
 * String results stay valid until the next call on the same handle (or, for
 * skelsim_last_error, the next failing call on any handle). */
#ifndef SKELSIM_H
#define SKELSIM_H

#ifdef __cplusplus
extern "C" {
#endif

typedef struct skelsim_engine skelsim_engine;

typedef enum skelsim_status {
  SKELSIM_OK = 0,
  SKELSIM_INVALID_SCENARIO = 1,
  SKELSIM_NOT_CONVERGED = 2,
  SKELSIM_IO_ERROR = 3,
  SKELSIM_REPLAY_MISMATCH = 4,
  SKELSIM_INTERNAL_ERROR = 5,
} skelsim_status;

const char* skelsim_version(void);

/* Message for the most recent failure on this thread; empty string if none. */
const char* skelsim_last_error(void);

/* Builds an engine from a scenario file / JSON text. Returns NULL on
 * failure (consult skelsim_last_error). */
skelsim_engine* skelsim_engine_new_from_file(const char* path);
skelsim_engine* skelsim_engine_new_from_json(const char* json_text);
void skelsim_engine_free(skelsim_engine* engine);

/* Overrides applied before the run; no effect once the engine has run. */
skelsim_status skelsim_engine_set_seed(skelsim_engine* engine, unsigned long long seed);
/* mode: "sm" or "cm". */
skelsim_status skelsim_engine_set_mode(skelsim_engine* engine, const char* mode);

/* Runs the scenario and writes trace.jsonl, metrics.csv, graph_final.json
 * and verdict.json into out_dir. Returns SKELSIM_OK when every contract
 * converged, SKELSIM_NOT_CONVERGED otherwise (outputs still written). */
skelsim_status skelsim_engine_run(skelsim_engine* engine, const char* out_dir);

/* Verdict of a completed run as a JSON string, or NULL before run. */
const char* skelsim_engine_verdict_json(skelsim_engine* engine);

/* Re-runs the scenario and diffs against a saved trace. Returns SKELSIM_OK
 * on a byte-identical trace; SKELSIM_REPLAY_MISMATCH sets the 1-based line
 * of the first divergence in *first_divergence (may be NULL). */
skelsim_status skelsim_replay(const char* trace_path, const char* scenario_path,
                              long* first_divergence);

#ifdef __cplusplus
}
#endif

#endif
