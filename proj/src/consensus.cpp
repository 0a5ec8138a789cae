#include "skelsim/consensus.hpp"

#include <algorithm>
#include <cassert>

#include <nlohmann/json.hpp>

namespace skelsim {

std::string to_string(CoordinationMode m) { return m == CoordinationMode::SM ? "sm" : "cm"; }

namespace {

bool all_added_nodes_secure(const Decision& d) {
  if (d.proposed_delta.added_nodes.empty()) return false;
  return std::all_of(d.proposed_delta.added_nodes.begin(), d.proposed_delta.added_nodes.end(),
                     [](const auto& n) { return n.second.meta.secure() == true; });
}

}  // namespace

Interference classify(const Action& action, const std::set<Concern>& active_concerns,
                      const ApplicationGraph& graph, const Decision& decision) {
  (void)graph;
  switch (action.kind) {
    case Action::Kind::FindNewResource:
    case Action::Kind::AskConsensus:
    case Action::Kind::Answer:
    case Action::Kind::LowerPriority:
    case Action::Kind::RemoveWorker:
      return Interference::Independent;
    case Action::Kind::ConnectWorker:
    case Action::Kind::ConnectSslWorker:
      if (active_concerns.count(Concern::Security) && !all_added_nodes_secure(decision))
        return Interference::Interfering;
      return Interference::Independent;
    case Action::Kind::AllocateNewWorker:
      return active_concerns.count(Concern::Power) ? Interference::Interfering
                                                   : Interference::Independent;
  }
  return Interference::Independent;
}

ConsensusOutcome resolve(const Decision& decision,
                         const std::vector<ConsensusResponse>& responses) {
  for (const auto& r : responses)
    if (r.kind == ConsensusResponse::Kind::Nack)
      return ConsensusOutcome::abort(ConsensusOutcome::AbortReason::AnyNack);

  // Distinct requested properties, in response (= contract) order.
  std::vector<std::string> props;
  for (const auto& r : responses) {
    if (r.kind != ConsensusResponse::Kind::NeedProperty) continue;
    if (std::find(props.begin(), props.end(), r.property) == props.end())
      props.push_back(r.property);
  }
  if (props.empty()) return ConsensusOutcome::commit(decision.base_plan.actions);

  for (const auto& p : props) {
    if (!decision.base_plan.substitutes.count(p))
      // Responder bug per the introspection contract; demote to a NACK.
      return ConsensusOutcome::abort(ConsensusOutcome::AbortReason::AnyNack);
  }
  auto merged = merge_substitutes(decision.base_plan, props);
  if (!merged)
    return ConsensusOutcome::abort(ConsensusOutcome::AbortReason::InconsistentSubstitutes);
  return ConsensusOutcome::commit(*merged);
}

void DecisionLock::acquire() {
  assert(!held_ && "decision lock already held");
  held_ = true;
}

void DecisionLock::release() {
  assert(held_);
  held_ = false;
}

namespace {

nlohmann::json response_json(const ConsensusResponse& r) {
  switch (r.kind) {
    case ConsensusResponse::Kind::Ack: return {{"verdict", "ack"}};
    case ConsensusResponse::Kind::Nack: return {{"verdict", "nack"}};
    case ConsensusResponse::Kind::NeedProperty:
      return {{"verdict", "needProperty"}, {"property", r.property}};
  }
  return {};
}

}  // namespace

std::vector<ConsensusResponse> propose(const Decision& decision, CoordinationMode mode,
                                       const std::vector<Participant*>& responders,
                                       const ApplicationGraph& shared, double now,
                                       TraceSink* trace) {
  if (decision.proposed_delta.base_version != shared.version())
    throw Error(Errc::StaleDecision,
                "decision " + decision.id + " proposed against stale graph version");

  if (trace) {
    nlohmann::json detail{{"tag", decision.tag},
                          {"delta", decision.proposed_delta.to_json()}};
    if (decision.recruited_resource) detail["resource"] = *decision.recruited_resource;
    trace->mgmt_event(now, "propose", decision.id, to_string(decision.proposer), detail);
    if (mode == CoordinationMode::SM)
      trace->mgmt_event(now, "relay", decision.id, to_string(decision.proposer),
                        {{"from", to_string(decision.proposer)}, {"to", "am0"}});
  }

  std::vector<ConsensusResponse> responses;
  for (Participant* p : responders) {
    if (p->concern() == decision.proposer) continue;
    if (trace && mode == CoordinationMode::SM)
      trace->mgmt_event(now, "relay", decision.id, "am0",
                        {{"from", "am0"}, {"to", to_string(p->concern())}});
    ConsensusResponse r = p->respond(decision, shared);
    responses.push_back(r);
    if (trace)
      trace->mgmt_event(now, "response", decision.id, to_string(p->concern()),
                        response_json(r));
  }
  return responses;
}

std::optional<GraphDelta> commit(const ConsensusOutcome& outcome, const Decision& decision,
                                 ActionExecutor& world, PlanContext& ctx,
                                 const std::vector<Participant*>& participants,
                                 CoordinationMode mode, double now, TraceSink* trace) {
  if (outcome.kind == ConsensusOutcome::Kind::Abort) {
    if (trace) {
      const char* why = outcome.reason == ConsensusOutcome::AbortReason::AnyNack
                            ? "nack"
                            : "inconsistent_substitutes";
      trace->mgmt_event(now, "abort", decision.id, to_string(decision.proposer),
                        {{"reason", why}});
    }
    return std::nullopt;
  }

  // Stage the whole final plan first; the shared graph changes only if
  // every action succeeds.
  try {
    for (const auto& a : outcome.final_plan) world.execute_action(a, ctx);
  } catch (const Error& e) {
    if (trace)
      trace->mgmt_event(now, "abort", decision.id, to_string(decision.proposer),
                        {{"reason", "action_failure"}, {"error", e.what()}});
    return std::nullopt;
  }

  GraphDelta applied = world.commit_staged(ctx);
  for (Participant* p : participants) p->notify_commit(applied, world.graph().version());

  if (trace) {
    nlohmann::json plan = nlohmann::json::array();
    for (const auto& a : outcome.final_plan) plan.push_back(to_string(a.kind));
    nlohmann::json detail{{"tag", decision.tag}, {"plan", plan}, {"delta", applied.to_json()},
                          {"version", world.graph().version()}};
    if (mode == CoordinationMode::SM)
      trace->mgmt_event(now, "relay", decision.id, to_string(decision.proposer),
                        {{"from", to_string(decision.proposer)}, {"to", "am0"}, {"phase", "commit"}});
    trace->mgmt_event(now, "commit", decision.id, to_string(decision.proposer), detail);
  }
  return applied;
}

}  // namespace skelsim
