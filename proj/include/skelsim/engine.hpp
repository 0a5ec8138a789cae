#ifndef SKELSIM_ENGINE_HPP
#define SKELSIM_ENGINE_HPP

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "skelsim/consensus.hpp"
#include "skelsim/managers.hpp"
#include "skelsim/scenario.hpp"
#include "skelsim/sim.hpp"

#include <nlohmann/json_fwd.hpp>

namespace skelsim {

struct Verdict {
  bool converged = false;
  int ticks_to_converge = -1;  // tick index of the third stable tick; -1 if never
  double final_throughput = 0;
  std::vector<std::pair<std::string, bool>> contracts_satisfied;  // contract order

  nlohmann::json to_json() const;
};

/// Drives one scenario end to end: initialization by the first contract's
/// manager, the discrete-event simulation, and the per-tick manager control
/// loop with consensus on every proposal. Accumulates the merged trace and
/// the metrics table; everything is a pure function of the scenario.
class Engine : public TraceSink {
 public:
  explicit Engine(Scenario scenario);
  ~Engine() override;

  Verdict run();

  /// run() plus output files (trace.jsonl, metrics.csv, graph_final.json,
  /// verdict.json). Returns 0 when converged, 2 otherwise.
  int run_to_dir(const std::filesystem::path& out_dir);

  const std::vector<std::string>& trace_lines() const { return trace_lines_; }
  const std::vector<std::string>& metrics_rows() const { return metrics_rows_; }
  const ApplicationGraph& graph() const { return world_->graph(); }
  World& world() { return *world_; }
  const Verdict& verdict() const { return verdict_; }
  /// Managers in contract order; mutable so callers can install alternative
  /// rule sets before run().
  std::vector<Manager*> managers();

  // TraceSink
  void mgmt_event(double t, const std::string& ev, const std::string& decision_id,
                  const std::string& by, const nlohmann::json& detail) override;

 private:
  void drain_sim_trace();
  void metrics_row(double t, const MonitorSnapshot& snap);
  void manage_tick(double t, const MonitorSnapshot& snap);
  void run_plain(Manager& mgr, const CycleOutcome& outcome, double t);
  void run_proposal(Manager& mgr, const CycleOutcome& outcome, double t);
  bool contract_satisfied(const QoSContract& c, const MonitorSnapshot& snap) const;
  std::string next_decision_id() { return "d" + std::to_string(++decision_counter_); }
  std::vector<Participant*> participants() const;
  FactStore base_facts(const MonitorSnapshot& snap) const;

  Scenario scenario_;
  ResourcePool pool_;
  std::vector<std::unique_ptr<Manager>> managers_;
  std::unique_ptr<World> world_;
  DecisionLock lock_;
  bool power_active_ = false;
  long decision_counter_ = 0;
  std::vector<std::string> trace_lines_;
  std::vector<std::string> metrics_rows_;
  Verdict verdict_;
  bool ran_ = false;
};

struct ReplayResult {
  bool ok = false;
  long first_divergence = 0;  // 1-based trace line; 0 when ok
  std::string expected;       // regenerated line
  std::string actual;         // line found in the file
  std::string message;
};

/// Re-runs the scenario and diffs the regenerated trace against a saved one.
ReplayResult replay_check(const std::filesystem::path& trace_path, const Scenario& scenario);

}  // namespace skelsim

#endif
