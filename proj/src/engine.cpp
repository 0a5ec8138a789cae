#include "skelsim/engine.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

namespace skelsim {

namespace {

std::string num_str(double x) { return nlohmann::json(x).dump(); }

std::string contract_kind_name(const QoSContract& c) {
  switch (c.kind) {
    case QoSContract::Kind::SecureData: return "secureData";
    case QoSContract::Kind::MinThroughput: return "minThroughput";
    case QoSContract::Kind::PowerBudget: return "powerBudget";
  }
  return "?";
}

}  // namespace

nlohmann::json Verdict::to_json() const {
  nlohmann::json sat = nlohmann::json::object();
  for (const auto& [kind, ok] : contracts_satisfied) sat[kind] = ok;
  nlohmann::json j{{"converged", converged},
                   {"final_throughput", final_throughput},
                   {"contracts_satisfied", sat}};
  if (ticks_to_converge >= 0) j["ticks_to_converge"] = ticks_to_converge;
  else j["ticks_to_converge"] = nullptr;
  return j;
}

Engine::Engine(Scenario scenario) : scenario_(std::move(scenario)), pool_(scenario_.pool) {
  InitConfig cfg;
  cfg.default_degree = scenario_.default_degree;
  cfg.knobs = scenario_.knobs;
  InitResult init = initialize(scenario_.contracts, scenario_.skeleton, pool_, cfg);
  managers_ = std::move(init.managers);
  world_ = std::make_unique<World>(std::move(init.graph), pool_, scenario_.workload,
                                   scenario_.sim);
  for (const auto& m : managers_)
    if (m->concern() == Concern::Power) power_active_ = true;
}

Engine::~Engine() = default;

std::vector<Manager*> Engine::managers() {
  std::vector<Manager*> out;
  for (const auto& m : managers_) out.push_back(m.get());
  return out;
}

std::vector<Participant*> Engine::participants() const {
  std::vector<Participant*> out;
  for (const auto& m : managers_) out.push_back(m.get());
  return out;
}

void Engine::mgmt_event(double t, const std::string& ev, const std::string& decision_id,
                        const std::string& by, const nlohmann::json& detail) {
  nlohmann::json line{{"t", t}, {"src", "mgmt"}, {"ev", ev},
                      {"decision", decision_id}, {"by", by}, {"detail", detail}};
  trace_lines_.push_back(line.dump());
}

void Engine::drain_sim_trace() {
  EventTrace batch;
  world_->drain_trace(batch);
  for (const auto& e : batch) {
    nlohmann::json line{{"t", e.t}, {"src", "sim"}, {"ev", e.ev},
                        {"node", e.node}, {"task", e.task}};
    trace_lines_.push_back(line.dump());
  }
}

void Engine::metrics_row(double t, const MonitorSnapshot& snap) {
  metrics_rows_.push_back(num_str(t) + "," + num_str(snap.throughput) + "," +
                          std::to_string(world_->farm_degree()) + "," +
                          std::to_string(world_->ssl_arc_count()) + "," +
                          num_str(world_->committed_power()));
}

FactStore Engine::base_facts(const MonitorSnapshot& snap) const {
  FactStore f;
  f.set("instanceof_farm", !world_->graph().farm_tags().empty());
  if (snap.t_arr) f.set("T_arr", *snap.t_arr);
  f.set("throughput", snap.throughput);
  f.set("power.committed", world_->committed_power());
  return f;
}

bool Engine::contract_satisfied(const QoSContract& c, const MonitorSnapshot& snap) const {
  switch (c.kind) {
    case QoSContract::Kind::MinThroughput:
      return snap.throughput + 1e-9 >= c.rate;
    case QoSContract::Kind::PowerBudget:
      return world_->committed_power() <= c.budget + 1e-9;
    case QoSContract::Kind::SecureData: {
      const auto& g = world_->graph();
      for (const auto& [arc, rec] : g.arcs()) {
        bool ends_secure = g.node(arc.first).meta.secure() == true &&
                           g.node(arc.second).meta.secure() == true;
        if (!ends_secure && rec.meta.channel_kind() != ChannelKind::Ssl) return false;
      }
      return true;
    }
  }
  return false;
}

void Engine::run_plain(Manager& mgr, const CycleOutcome& outcome, double t) {
  if (outcome.actions.empty()) return;
  const std::string by = to_string(mgr.concern());
  lock_.acquire();
  std::string id = next_decision_id();
  PlanContext ctx = world_->new_plan_context(power_active_);
  try {
    for (const auto& a : outcome.actions) world_->execute_action(a, ctx);
  } catch (const Error& e) {
    mgmt_event(t, "abort", id, by, {{"reason", "action_failure"}, {"error", e.what()}});
    lock_.release();
    return;
  }
  GraphDelta applied = world_->commit_staged(ctx);
  for (const auto& m : managers_) m->notify_commit(applied, world_->graph().version());

  nlohmann::json plan = nlohmann::json::array();
  for (const auto& a : outcome.actions) plan.push_back(to_string(a.kind));
  if (scenario_.mode == CoordinationMode::SM)
    mgmt_event(t, "relay", id, by, {{"from", by}, {"to", "am0"}, {"phase", "commit"}});
  mgmt_event(t, "commit", id, by,
             {{"tag", outcome.rule_name},
              {"plan", plan},
              {"delta", applied.to_json()},
              {"version", world_->graph().version()}});
  mgr.reset_priorities();
  lock_.release();
}

void Engine::run_proposal(Manager& mgr, const CycleOutcome& outcome, double t) {
  const std::string by = to_string(mgr.concern());
  lock_.acquire();
  std::string id = next_decision_id();
  PlanContext ctx = world_->new_plan_context(power_active_);

  // Recruit up front so the proposal can name the resource.
  try {
    for (const auto& a : outcome.proposal.actions)
      if (a.kind == Action::Kind::FindNewResource) {
        world_->execute_action(a, ctx);
        break;
      }
  } catch (const Error& e) {
    mgmt_event(t, "abort", id, by, {{"reason", "no_free_resource"}, {"error", e.what()}});
    lock_.release();
    return;
  }

  // Stage the rest of the base plan against a scratch context; the staged
  // delta is the proposed graph, shipped for inspection but never applied.
  PlanContext preview = ctx;
  try {
    for (const auto& a : outcome.proposal.actions) {
      if (a.kind == Action::Kind::FindNewResource || a.kind == Action::Kind::AskConsensus)
        continue;
      world_->execute_action(a, preview);
    }
  } catch (const Error& e) {
    mgmt_event(t, "abort", id, by, {{"reason", "action_failure"}, {"error", e.what()}});
    lock_.release();
    return;
  }

  Decision d;
  d.id = id;
  d.tag = outcome.decision_tag;
  d.proposer = mgr.concern();
  d.proposed_delta = preview.staged;
  d.recruited_resource = ctx.recruited;
  d.base_plan = outcome.proposal;
  d.proposer_properties = mgr.registry();

  mgr.begin_pending(PendingDecision{id, outcome.decision_tag, outcome.proposal});

  auto responses = propose(d, scenario_.mode, participants(), world_->graph(), t, this);
  ConsensusOutcome res = resolve(d, responses);

  FactStore facts;
  if (res.committed()) {
    facts.set("consensus.ackFromAll", true);
    std::vector<std::string> props;
    for (const auto& r : responses) {
      if (r.kind != ConsensusResponse::Kind::NeedProperty) continue;
      if (std::find(props.begin(), props.end(), r.property) == props.end())
        props.push_back(r.property);
    }
    facts.set("consensus.needProperty", props);
  } else {
    facts.set("consensus.nack", true);
  }
  CycleOutcome ph2 = mgr.cycle(facts);
  if (mgr.has_pending()) mgr.state().pending.reset();  // no matching PH2 rule fired

  auto applied = commit(res, d, *world_, ctx, participants(), scenario_.mode, t, this);
  if (applied) {
    mgr.reset_priorities();
  } else {
    for (const auto& name : ph2.lowered_rules) {
      int prio = 0;
      for (const auto& r : mgr.state().rules)
        if (r.name == name) prio = r.priority;
      mgmt_event(t, "lower_priority", id, by, {{"rule", name}, {"priority", prio}});
    }
  }
  lock_.release();
}

void Engine::manage_tick(double t, const MonitorSnapshot& snap) {
  for (const auto& m : managers_) {
    FactStore facts = base_facts(snap);
    CycleOutcome outcome = m->cycle(facts);
    switch (outcome.kind) {
      case CycleOutcome::Kind::Idle:
      case CycleOutcome::Kind::Abort:
        break;
      case CycleOutcome::Kind::Execute:
        run_plain(*m, outcome, t);
        break;
      case CycleOutcome::Kind::Propose:
        run_proposal(*m, outcome, t);
        break;
    }
  }
}

Verdict Engine::run() {
  if (ran_) return verdict_;
  ran_ = true;

  {
    const auto& g = world_->graph();
    mgmt_event(0, "commit", "init", to_string(scenario_.contracts.front().concern()),
               {{"tag", "init"},
                {"version", g.version()},
                {"nodes", g.nodes().size()},
                {"arcs", g.arcs().size()}});
  }

  const double tick = scenario_.sim.tick;
  const long n_ticks = static_cast<long>(scenario_.sim.run_length / tick + 1e-9);
  int consecutive = 0;
  for (long i = 1; i <= n_ticks; ++i) {
    double t = static_cast<double>(i) * tick;
    world_->step(t);
    drain_sim_trace();
    if (t + 1e-9 < scenario_.sim.window) continue;

    MonitorSnapshot snap = world_->monitor(t);
    manage_tick(t, snap);
    drain_sim_trace();  // re-dispatch events raised while committing
    metrics_row(t, snap);

    verdict_.contracts_satisfied.clear();
    bool all = true;
    for (const auto& c : scenario_.contracts) {
      bool ok = contract_satisfied(c, snap);
      verdict_.contracts_satisfied.emplace_back(contract_kind_name(c), ok);
      all = all && ok;
    }
    consecutive = all ? consecutive + 1 : 0;
    if (consecutive >= 3 && !verdict_.converged) {
      verdict_.converged = true;
      verdict_.ticks_to_converge = static_cast<int>(i);
    }
    verdict_.final_throughput = snap.throughput;
  }
  if (verdict_.contracts_satisfied.empty())
    for (const auto& c : scenario_.contracts)
      verdict_.contracts_satisfied.emplace_back(contract_kind_name(c), false);
  return verdict_;
}

int Engine::run_to_dir(const std::filesystem::path& out_dir) {
  run();
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream out(out_dir / "trace.jsonl");
    for (const auto& l : trace_lines_) out << l << '\n';
  }
  {
    std::ofstream out(out_dir / "metrics.csv");
    out << "time,throughput,degree,ssl_arcs,power_committed\n";
    for (const auto& r : metrics_rows_) out << r << '\n';
  }
  {
    std::ofstream out(out_dir / "graph_final.json");
    out << world_->graph().to_json_string() << '\n';
  }
  {
    std::ofstream out(out_dir / "verdict.json");
    out << verdict_.to_json().dump(2) << '\n';
  }
  return verdict_.converged ? 0 : 2;
}

ReplayResult replay_check(const std::filesystem::path& trace_path, const Scenario& scenario) {
  ReplayResult result;
  std::ifstream in(trace_path);
  if (!in) {
    result.message = "cannot read trace file " + trace_path.string();
    return result;
  }
  Engine engine(scenario);
  engine.run();
  const auto& fresh = engine.trace_lines();

  std::string line;
  size_t i = 0;
  while (std::getline(in, line)) {
    if (i >= fresh.size()) {
      result.first_divergence = static_cast<long>(i + 1);
      result.actual = line;
      result.message = "saved trace has extra lines starting at line " +
                       std::to_string(i + 1);
      return result;
    }
    if (line != fresh[i]) {
      result.first_divergence = static_cast<long>(i + 1);
      result.expected = fresh[i];
      result.actual = line;
      result.message = "traces diverge at line " + std::to_string(i + 1);
      return result;
    }
    ++i;
  }
  if (i < fresh.size()) {
    result.first_divergence = static_cast<long>(i + 1);
    result.expected = fresh[i];
    result.message = "saved trace truncated at line " + std::to_string(i + 1);
    return result;
  }
  result.ok = true;
  return result;
}

}  // namespace skelsim
