#ifndef SKELSIM_RULES_HPP
#define SKELSIM_RULES_HPP

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "skelsim/graph.hpp"
#include "skelsim/types.hpp"

namespace skelsim {

// ---------------------------------------------------------------------------
// Facts
// ---------------------------------------------------------------------------

using FactValue =
    std::variant<bool, double, std::string, GraphDelta, std::vector<std::string>>;

/// Variable bindings read by rule preconditions. A precondition that reads
/// an absent variable evaluates to false, never errors; the typed getters
/// return nullopt for both absent and wrongly-typed entries to support that.
class FactStore {
 public:
  void set(const std::string& name, FactValue value) { entries_[name] = std::move(value); }
  void erase(const std::string& name) { entries_.erase(name); }
  bool has(const std::string& name) const { return entries_.count(name) != 0; }

  std::optional<bool> get_bool(const std::string& name) const;
  std::optional<double> get_number(const std::string& name) const;
  std::optional<std::string> get_string(const std::string& name) const;
  const GraphDelta* get_delta(const std::string& name) const;
  const std::vector<std::string>* get_list(const std::string& name) const;

  bool truthy(const std::string& name) const { return get_bool(name) == true; }
  bool list_contains(const std::string& name, const std::string& item) const;

 private:
  std::map<std::string, FactValue> entries_;
};

// ---------------------------------------------------------------------------
// Actions and plans
// ---------------------------------------------------------------------------

struct ConsensusResponse {
  enum class Kind { Ack, Nack, NeedProperty };
  Concern responder = Concern::Performance;
  Kind kind = Kind::Ack;
  std::string property;  // NeedProperty only

  static ConsensusResponse ack(Concern c) { return {c, Kind::Ack, ""}; }
  static ConsensusResponse nack(Concern c) { return {c, Kind::Nack, ""}; }
  static ConsensusResponse need(Concern c, std::string prop) {
    return {c, Kind::NeedProperty, std::move(prop)};
  }
  bool operator==(const ConsensusResponse&) const = default;
};

/// How FindNewResource ranks candidate resources. Auto applies the power
/// preference (green first) whenever the power concern is active, then
/// fastest-first; the other policies are for alternative rules.
enum class RecruitPolicy { Auto, FastestOnly, GreenOnly };

struct Action {
  enum class Kind {
    FindNewResource,
    AskConsensus,
    AllocateNewWorker,
    ConnectWorker,
    ConnectSslWorker,
    RemoveWorker,
    Answer,
    LowerPriority,
  };

  Kind kind;
  RecruitPolicy recruit = RecruitPolicy::Auto;  // FindNewResource
  ConsensusResponse answer;                     // Answer
  std::string rule_name;                        // LowerPriority

  static Action find_new_resource(RecruitPolicy p = RecruitPolicy::Auto) {
    Action a{Kind::FindNewResource};
    a.recruit = p;
    return a;
  }
  static Action ask_consensus() { return Action{Kind::AskConsensus}; }
  static Action allocate_new_worker() { return Action{Kind::AllocateNewWorker}; }
  static Action connect_worker() { return Action{Kind::ConnectWorker}; }
  static Action connect_ssl_worker() { return Action{Kind::ConnectSslWorker}; }
  static Action remove_worker() { return Action{Kind::RemoveWorker}; }
  static Action respond(ConsensusResponse r) {
    Action a{Kind::Answer};
    a.answer = std::move(r);
    return a;
  }
  static Action lower_priority_of(std::string rule) {
    Action a{Kind::LowerPriority};
    a.rule_name = std::move(rule);
    return a;
  }

  bool operator==(const Action&) const = default;
};

std::string to_string(Action::Kind k);

struct Plan {
  std::vector<Action> actions;
  /// property name -> full replacement plan with the same proposer-concern
  /// effect as `actions`.
  std::map<std::string, std::vector<Action>> substitutes;

  bool operator==(const Plan&) const = default;
};

// ---------------------------------------------------------------------------
// Rules
// ---------------------------------------------------------------------------

enum class RulePhase { Plain, PH1, PH2 };

using Precondition = std::function<bool(const FactStore&)>;

struct Rule {
  std::string name;
  int priority = 0;
  int initial_priority = 0;
  RulePhase phase = RulePhase::Plain;
  /// PH1: the tag attached to the decision this rule proposes.
  /// PH2: the tag of the pending decision whose responses it consumes.
  std::string decision_tag;
  Precondition precondition;
  Plan plan;

  static Rule make(std::string name, int priority, RulePhase phase, std::string tag,
                   Precondition pre, Plan plan);
};

/// Rules whose preconditions hold, in canonical firing order:
/// priority descending, then name ascending.
std::vector<Rule> evaluate(const std::vector<Rule>& rules, const FactStore& facts);

/// First rule of a canonically ordered fireable list, or nullopt.
std::optional<Rule> select(const std::vector<Rule>& fireable);

/// Decrements the named rule's priority by 1, saturating at `floor`.
/// Throws UnknownRule if no rule has that name.
std::vector<Rule> lower_priority(std::vector<Rule> rules, const std::string& name, int floor);

// ---------------------------------------------------------------------------
// Control cycle
// ---------------------------------------------------------------------------

struct PendingDecision {
  std::string id;
  std::string tag;
  Plan plan;  // base plan plus substitutes
};

struct ManagerState {
  std::vector<Rule> rules;
  std::optional<PendingDecision> pending;
  int priority_floor = 0;

  void reset_priorities();
};

struct CycleOutcome {
  enum class Kind { Idle, Execute, Propose, Abort };
  Kind kind = Kind::Idle;
  std::string rule_name;
  /// Execute: the concrete action list to run.
  std::vector<Action> actions;
  /// Propose: the plan whose consensus phase must be started (PH1 rules).
  Plan proposal;
  std::string decision_tag;
  /// Abort: rules whose priority was lowered while handling a NACK.
  std::vector<std::string> lowered_rules;
};

/// One monitor->analyse->plan step of the manager control loop. Evaluates
/// and selects at most one rule; Plain rules yield Execute, PH1 rules yield
/// Propose, PH2 rules yield Execute of the consensus-chosen plan or Abort
/// (applying any LowerPriority actions to `state` in place).
CycleOutcome control_cycle(ManagerState& state, const FactStore& facts);

/// Applies the substitutions requested via needProperty to the base plan,
/// in the given request order. Substitutions compose positionally: each
/// substitute may replace base actions at its indices, and two substitutes
/// replacing the same position must agree. Returns nullopt when the
/// requested substitutes are inconsistent or a property has no substitute.
std::optional<std::vector<Action>> merge_substitutes(
    const Plan& base, const std::vector<std::string>& ordered_properties);

}  // namespace skelsim

#endif
