#ifndef SKELSIM_MANAGERS_HPP
#define SKELSIM_MANAGERS_HPP

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "skelsim/consensus.hpp"
#include "skelsim/rules.hpp"
#include "skelsim/sim.hpp"

namespace skelsim {

struct QoSContract {
  enum class Kind { SecureData, MinThroughput, PowerBudget };
  Kind kind = Kind::MinThroughput;
  double rate = 0;    // MinThroughput: tasks/second
  double budget = 0;  // PowerBudget: max total power units

  Concern concern() const;

  static QoSContract secure_data() { return {Kind::SecureData, 0, 0}; }
  static QoSContract min_throughput(double rate) { return {Kind::MinThroughput, rate, 0}; }
  static QoSContract power_budget(double budget) { return {Kind::PowerBudget, 0, budget}; }
};

using ContractList = std::vector<QoSContract>;

struct RuleKnobs {
  double hysteresis_factor = 1.5;  // Farm_dec trigger: throughput >= factor * contract
  int base_priority = 5;
  int priority_floor = 0;
  bool max_greedy = false;  // performance-first sizing uses the whole pool
};

/// One per-concern autonomic manager: a rule set, an introspection registry
/// of properties it can adjust plans for, and the consensus participant
/// surface. Single-threaded logical actor.
class Manager : public Participant {
 public:
  Manager(Concern concern, QoSContract contract, std::vector<Rule> rules,
          std::vector<std::string> registry, const ResourcePool* pool, int priority_floor);

  Concern concern() const override { return concern_; }
  const QoSContract& contract() const { return contract_; }
  const std::vector<std::string>& registry() const { return registry_; }
  ManagerState& state() { return state_; }
  std::uint64_t local_graph_version() const { return local_version_; }
  void set_local_graph_version(std::uint64_t v) { local_version_ = v; }

  /// One control-loop step over freshly monitored facts.
  CycleOutcome cycle(const FactStore& facts);

  void begin_pending(PendingDecision pending) { state_.pending = std::move(pending); }
  bool has_pending() const { return state_.pending.has_value(); }
  void reset_priorities() { state_.reset_priorities(); }

  // Participant
  ConsensusResponse respond(const Decision& decision, const ApplicationGraph& shared) override;
  void notify_commit(const GraphDelta& delta, std::uint64_t new_version) override;

 private:
  Concern concern_;
  QoSContract contract_;
  ManagerState state_;
  std::vector<std::string> registry_;
  const ResourcePool* pool_;
  std::uint64_t local_version_ = 0;
};

/// The farm elasticity rule set: a two-phase grow rule (recruit + consensus,
/// then commit plain or ssl-adjusted, or lower priority on nack) and a
/// hysteresis-guarded shrink rule.
std::vector<Rule> build_performance_rules(const QoSContract& contract, const RuleKnobs& knobs);

/// Consensus-response rules guarding the secure-data contract: nodes added
/// on untrusted resources demand the security property (or nack a proposer
/// that cannot adjust); anything else is acked.
std::vector<Rule> build_security_rules(const QoSContract& contract);

/// Consensus-response rules enforcing a hard additive power budget.
std::vector<Rule> build_power_rules(const QoSContract& contract);

struct InitConfig {
  int default_degree = 4;
  RuleKnobs knobs;
};

struct InitResult {
  ApplicationGraph graph;
  std::vector<std::unique_ptr<Manager>> managers;  // contract order
};

/// Activates one manager per contract and lets the first contract's manager
/// build and place the initial application graph.
InitResult initialize(const ContractList& contracts, const SkeletonExpr& expr,
                      const ResourcePool& pool, const InitConfig& config);

}  // namespace skelsim

#endif
