#ifndef SKELSIM_CONSENSUS_HPP
#define SKELSIM_CONSENSUS_HPP

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "skelsim/graph.hpp"
#include "skelsim/rules.hpp"

#include <nlohmann/json_fwd.hpp>

namespace skelsim {

enum class CoordinationMode { SM, CM };
enum class Interference { Independent, Interfering };

std::string to_string(CoordinationMode m);

/// A manager's reconfiguration intent under consensus: the proposed new
/// graph as a delta against the shared one, the recruited resource, and the
/// base plan with its substitutes.
struct Decision {
  std::string id;
  std::string tag;  // rule family that produced it, keyed by PH2 rules
  Concern proposer = Concern::Performance;
  GraphDelta proposed_delta;
  std::optional<ResourceId> recruited_resource;
  Plan base_plan;
  /// Properties the proposer can adjust plans for (its introspection
  /// registry), shipped with the proposal so responders can consult it.
  std::vector<std::string> proposer_properties;
};

struct ConsensusOutcome {
  enum class Kind { Commit, Abort };
  enum class AbortReason { AnyNack, InconsistentSubstitutes };

  Kind kind = Kind::Abort;
  std::vector<Action> final_plan;  // Commit only
  AbortReason reason = AbortReason::AnyNack;

  static ConsensusOutcome commit(std::vector<Action> plan) {
    return {Kind::Commit, std::move(plan), AbortReason::AnyNack};
  }
  static ConsensusOutcome abort(AbortReason r) { return {Kind::Abort, {}, r}; }
  bool committed() const { return kind == Kind::Commit; }
};

/// Classifies one plan action against the set of active concerns.
/// Connecting a worker interferes with an active security concern unless
/// every node the decision adds is already marked secure; allocating a
/// worker interferes with an active power concern; the bookkeeping actions
/// and worker removal are always independent.
Interference classify(const Action& action, const std::set<Concern>& active_concerns,
                      const ApplicationGraph& graph, const Decision& decision);

/// Pure outcome resolution over the collected responses: all-ACK commits
/// the base plan, any NACK aborts, needProperty responses select or merge
/// substitute plans. A needProperty naming a property without a substitute
/// is a responder bug and aborts like a NACK.
ConsensusOutcome resolve(const Decision& decision,
                         const std::vector<ConsensusResponse>& responses);

// ---------------------------------------------------------------------------
// Protocol plumbing
// ---------------------------------------------------------------------------

/// A manager as seen by the protocol: answers proposals and receives
/// committed deltas.
class Participant {
 public:
  virtual ~Participant() = default;
  virtual Concern concern() const = 0;
  virtual ConsensusResponse respond(const Decision& decision,
                                    const ApplicationGraph& shared) = 0;
  virtual void notify_commit(const GraphDelta& delta, std::uint64_t new_version) = 0;
};

/// Sink for protocol trace records.
class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void mgmt_event(double t, const std::string& ev, const std::string& decision_id,
                          const std::string& by, const nlohmann::json& detail) = 0;
};

/// Working state of one plan execution: the recruited resource and the
/// graph changes staged so far. Nothing touches the shared graph until
/// commit applies the staged delta as a whole.
struct PlanContext {
  bool power_active = false;
  std::optional<ResourceId> recruited;
  std::set<ResourceId> reserved;
  GraphDelta staged;
  std::string farm_tag;
  std::optional<NodeId> new_worker;
  std::optional<NodeId> removed_worker;
};

/// Simulation-side action semantics, implemented by the world.
class ActionExecutor {
 public:
  virtual ~ActionExecutor() = default;
  virtual const ApplicationGraph& graph() const = 0;
  /// Stages the effect of one action into ctx. Throws Error with
  /// NoFreeResource / RemoveLastWorker / ActionFailure codes.
  virtual void execute_action(const Action& action, PlanContext& ctx) = 0;
  /// Applies ctx.staged to the shared graph and world structures.
  /// Returns the applied delta.
  virtual GraphDelta commit_staged(PlanContext& ctx) = 0;
};

/// One in-flight decision system-wide; held across propose -> resolve ->
/// commit. Single-threaded simulation makes this an assertion, not a mutex.
class DecisionLock {
 public:
  void acquire();
  void release();
  bool held() const { return held_; }

 private:
  bool held_ = false;
};

/// Phase one: broadcasts the decision to every other active manager in
/// contract order and collects one response each. SM mode relays through
/// the super manager and adds relay trace records; responses are identical
/// in both modes.
std::vector<ConsensusResponse> propose(const Decision& decision, CoordinationMode mode,
                                       const std::vector<Participant*>& responders,
                                       const ApplicationGraph& shared, double now,
                                       TraceSink* trace);

/// Phase two tail: executes the final plan atomically against the world,
/// applies the resulting delta to the shared graph, and notifies every
/// participant. Returns the delta, or nullopt on abort (including action
/// failure, which rolls back by never applying the staged changes).
std::optional<GraphDelta> commit(const ConsensusOutcome& outcome, const Decision& decision,
                                 ActionExecutor& world, PlanContext& ctx,
                                 const std::vector<Participant*>& participants,
                                 CoordinationMode mode, double now, TraceSink* trace);

}  // namespace skelsim

#endif
