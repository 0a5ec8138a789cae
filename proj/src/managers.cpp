#include "skelsim/managers.hpp"

#include <algorithm>
#include <cmath>

namespace skelsim {

Concern QoSContract::concern() const {
  switch (kind) {
    case Kind::SecureData: return Concern::Security;
    case Kind::MinThroughput: return Concern::Performance;
    case Kind::PowerBudget: return Concern::Power;
  }
  return Concern::Performance;
}

Manager::Manager(Concern concern, QoSContract contract, std::vector<Rule> rules,
                 std::vector<std::string> registry, const ResourcePool* pool,
                 int priority_floor)
    : concern_(concern), contract_(contract), registry_(std::move(registry)), pool_(pool) {
  state_.rules = std::move(rules);
  state_.priority_floor = priority_floor;
}

CycleOutcome Manager::cycle(const FactStore& facts) { return control_cycle(state_, facts); }

void Manager::notify_commit(const GraphDelta& delta, std::uint64_t new_version) {
  (void)delta;
  local_version_ = new_version;
}

ConsensusResponse Manager::respond(const Decision& decision, const ApplicationGraph& shared) {
  FactStore facts;
  facts.set("consensus.asked", decision.proposed_delta);
  facts.set("consensus.proposerProps", decision.proposer_properties);

  bool added_any = !decision.proposed_delta.added_nodes.empty();
  facts.set("consensus.addedAny", added_any);

  // A proposed node counts as secured when its resource is trusted or when
  // every channel the delta attaches to it is already ssl.
  bool nonsecure = false;
  double added_power = 0;
  for (const auto& [id, rec] : decision.proposed_delta.added_nodes) {
    bool secure = rec.meta.secure() == true;
    if (!secure) {
      bool all_ssl = true;
      bool any_arc = false;
      for (const auto& [a, arec] : decision.proposed_delta.added_arcs) {
        if (a.first != id && a.second != id) continue;
        any_arc = true;
        if (arec.meta.channel_kind() != ChannelKind::Ssl) all_ssl = false;
      }
      if (!(any_arc && all_ssl)) nonsecure = true;
    }
    if (auto loc = rec.meta.location(); loc && pool_) {
      if (const Resource* r = pool_->find(*loc)) added_power += r->power_cost;
    }
  }
  facts.set("consensus.addedNonsecure", nonsecure);
  facts.set("consensus.addedPowerCost", added_power);

  if (pool_) {
    double committed = 0;
    for (const auto& [nid, rec] : shared.nodes())
      if (auto loc = rec.meta.location())
        if (const Resource* r = pool_->find(*loc)) committed += r->power_cost;
    facts.set("power.committed", committed);
  }

  auto fired = select(evaluate(state_.rules, facts));
  if (fired) {
    for (const auto& a : fired->plan.actions) {
      if (a.kind == Action::Kind::Answer) {
        ConsensusResponse r = a.answer;
        r.responder = concern_;
        return r;
      }
    }
  }
  return ConsensusResponse::ack(concern_);
}

// ---------------------------------------------------------------------------
// Rule sets
// ---------------------------------------------------------------------------

std::vector<Rule> build_performance_rules(const QoSContract& contract, const RuleKnobs& knobs) {
  const double rate = contract.rate;
  const double hysteresis = knobs.hysteresis_factor;
  const int p = knobs.base_priority;

  Plan grow;
  grow.actions = {Action::find_new_resource(), Action::allocate_new_worker(),
                  Action::connect_worker()};
  grow.substitutes["security"] = {Action::find_new_resource(), Action::allocate_new_worker(),
                                  Action::connect_ssl_worker()};

  std::vector<Rule> rules;
  rules.push_back(Rule::make(
      "farm_inc", p, RulePhase::PH1, "farm_inc",
      [rate](const FactStore& f) {
        auto t_arr = f.get_number("T_arr");
        auto thr = f.get_number("throughput");
        // demand covers the contract while delivery falls short; inclusive on
        // the demand side because an upstream stage can quantize the measured
        // arrival rate to exactly the contract rate
        return f.truthy("instanceof_farm") && t_arr && thr &&
               1.0 / *t_arr >= rate - 1e-9 && *thr + 1e-9 < rate;
      },
      grow));
  rules.push_back(Rule::make(
      "farm_inc.commit", p, RulePhase::PH2, "farm_inc",
      [](const FactStore& f) {
        const auto* props = f.get_list("consensus.needProperty");
        return f.truthy("consensus.ackFromAll") && (!props || props->empty());
      },
      Plan{}));
  rules.push_back(Rule::make(
      "farm_inc.commit_ssl", p, RulePhase::PH2, "farm_inc",
      [](const FactStore& f) {
        return f.truthy("consensus.ackFromAll") &&
               f.list_contains("consensus.needProperty", "security");
      },
      Plan{}));
  rules.push_back(Rule::make(
      "farm_inc.nack", p, RulePhase::PH2, "farm_inc",
      [](const FactStore& f) { return f.truthy("consensus.nack"); },
      Plan{{Action::lower_priority_of("farm_inc")}, {}}));
  rules.push_back(Rule::make(
      "farm_dec", p, RulePhase::Plain, "",
      [rate, hysteresis](const FactStore& f) {
        auto thr = f.get_number("throughput");
        return f.truthy("instanceof_farm") && thr && *thr >= hysteresis * rate;
      },
      Plan{{Action::remove_worker()}, {}}));
  return rules;
}

std::vector<Rule> build_security_rules(const QoSContract& contract) {
  (void)contract;
  std::vector<Rule> rules;
  rules.push_back(Rule::make(
      "node_new.adjust", 3, RulePhase::Plain, "",
      [](const FactStore& f) {
        return f.truthy("consensus.addedAny") && f.truthy("consensus.addedNonsecure") &&
               f.list_contains("consensus.proposerProps", "security");
      },
      Plan{{Action::respond(ConsensusResponse::need(Concern::Security, "security"))}, {}}));
  rules.push_back(Rule::make(
      "node_new.nack", 2, RulePhase::Plain, "",
      [](const FactStore& f) {
        return f.truthy("consensus.addedAny") && f.truthy("consensus.addedNonsecure") &&
               !f.list_contains("consensus.proposerProps", "security");
      },
      Plan{{Action::respond(ConsensusResponse::nack(Concern::Security))}, {}}));
  rules.push_back(Rule::make(
      "node_new.ok", 1, RulePhase::Plain, "",
      [](const FactStore& f) {
        return f.truthy("consensus.addedAny") && !f.truthy("consensus.addedNonsecure");
      },
      Plan{{Action::respond(ConsensusResponse::ack(Concern::Security))}, {}}));
  rules.push_back(Rule::make(
      "node_new.none", 0, RulePhase::Plain, "",
      [](const FactStore& f) {
        return f.has("consensus.addedAny") && !f.truthy("consensus.addedAny");
      },
      Plan{{Action::respond(ConsensusResponse::ack(Concern::Security))}, {}}));
  return rules;
}

std::vector<Rule> build_power_rules(const QoSContract& contract) {
  const double budget = contract.budget;
  std::vector<Rule> rules;
  rules.push_back(Rule::make(
      "power.within", 1, RulePhase::Plain, "",
      [budget](const FactStore& f) {
        auto added = f.get_number("consensus.addedPowerCost");
        auto committed = f.get_number("power.committed");
        return added && committed && *committed + *added <= budget;
      },
      Plan{{Action::respond(ConsensusResponse::ack(Concern::Power))}, {}}));
  rules.push_back(Rule::make(
      "power.exceeds", 1, RulePhase::Plain, "",
      [budget](const FactStore& f) {
        auto added = f.get_number("consensus.addedPowerCost");
        auto committed = f.get_number("power.committed");
        return added && committed && *committed + *added > budget;
      },
      Plan{{Action::respond(ConsensusResponse::nack(Concern::Power))}, {}}));
  return rules;
}

// ---------------------------------------------------------------------------
// Initialization
// ---------------------------------------------------------------------------

namespace {

const SkeletonExpr::Farm* find_farm(const SkeletonExpr& e) {
  if (e.is_farm()) return &e.as_farm();
  if (e.is_pipeline()) {
    for (const auto& s : e.as_pipeline().stages)
      if (const auto* f = find_farm(s)) return f;
  }
  return nullptr;
}

std::unique_ptr<Manager> make_manager(const QoSContract& c, const ResourcePool& pool,
                                      const RuleKnobs& knobs) {
  switch (c.kind) {
    case QoSContract::Kind::MinThroughput:
      return std::make_unique<Manager>(Concern::Performance, c,
                                       build_performance_rules(c, knobs),
                                       std::vector<std::string>{"security"}, &pool,
                                       knobs.priority_floor);
    case QoSContract::Kind::SecureData:
      return std::make_unique<Manager>(Concern::Security, c, build_security_rules(c),
                                       std::vector<std::string>{}, &pool,
                                       knobs.priority_floor);
    case QoSContract::Kind::PowerBudget:
      return std::make_unique<Manager>(Concern::Power, c, build_power_rules(c),
                                       std::vector<std::string>{}, &pool,
                                       knobs.priority_floor);
  }
  throw Error(Errc::InvalidScenario, "unknown contract kind");
}

}  // namespace

InitResult initialize(const ContractList& contracts, const SkeletonExpr& expr,
                      const ResourcePool& pool, const InitConfig& config) {
  if (contracts.empty()) throw Error(Errc::InvalidScenario, "contract list is empty");
  if (pool.empty()) throw Error(Errc::InsufficientResources, "resource pool is empty");
  {
    std::set<Concern> seen;
    for (const auto& c : contracts)
      if (!seen.insert(c.concern()).second)
        throw Error(Errc::DuplicateConcern,
                    "more than one contract for concern " + to_string(c.concern()));
  }

  const QoSContract& first = contracts.front();
  expr.check_well_formed();

  // Degree of farms left at the default, chosen by the initializing manager.
  int degree = config.default_degree;
  if (first.kind == QoSContract::Kind::MinThroughput) {
    int fixed_nodes = static_cast<int>(expand(expr, ExpandConfig{1}).nodes().size()) - 1;
    int cap = static_cast<int>(pool.size()) - fixed_nodes;
    if (cap < 1)
      throw Error(Errc::InsufficientResources, "pool cannot host even a degree-1 farm");
    if (const auto* farm = find_farm(expr); farm && !farm->degree) {
      double wst = farm->worker->total_service_time();
      degree = config.knobs.max_greedy
                   ? cap
                   : std::clamp(static_cast<int>(std::ceil(first.rate * wst)), 1, cap);
    }
  }

  ApplicationGraph graph = expand(expr, ExpandConfig{degree});

  // Resource preference of the initializing manager.
  std::vector<const Resource*> ranked;
  for (const auto& r : pool.all()) ranked.push_back(&r);
  switch (first.kind) {
    case QoSContract::Kind::SecureData:
      std::sort(ranked.begin(), ranked.end(), [](const Resource* a, const Resource* b) {
        if (a->trusted != b->trusted) return a->trusted;
        if (a->speed != b->speed) return a->speed > b->speed;
        return a->id < b->id;
      });
      break;
    case QoSContract::Kind::MinThroughput:
      std::sort(ranked.begin(), ranked.end(), [](const Resource* a, const Resource* b) {
        if (a->speed != b->speed) return a->speed > b->speed;
        return a->id < b->id;
      });
      break;
    case QoSContract::Kind::PowerBudget:
      std::erase_if(ranked, [](const Resource* r) { return r->power_class != PowerClass::Green; });
      std::sort(ranked.begin(), ranked.end(), [](const Resource* a, const Resource* b) {
        if (a->speed != b->speed) return a->speed > b->speed;
        return a->id < b->id;
      });
      break;
  }

  auto order = graph.topo_order();
  if (order.size() > ranked.size())
    throw Error(Errc::InsufficientResources,
                std::to_string(order.size()) + " nodes but only " +
                    std::to_string(ranked.size()) + " placeable resources");

  GraphBuilder b{std::move(graph)};
  for (size_t i = 0; i < order.size(); ++i) {
    auto& meta = b.nodes().at(order[i]).meta;
    meta.set("location", ranked[i]->id);
    meta.set("secure", ranked[i]->trusted);
    meta.set("powerClass", to_string(ranked[i]->power_class));
  }
  for (auto& [a, rec] : b.arcs()) {
    bool untrusted_end = b.nodes().at(a.first).meta.secure() != true ||
                         b.nodes().at(a.second).meta.secure() != true;
    bool ssl = first.kind == QoSContract::Kind::SecureData && untrusted_end;
    rec.meta.set("channelKind", std::string(ssl ? "ssl" : "plain"));
  }
  b.set_version(0);

  InitResult result;
  result.graph = std::move(b.g);
  for (const auto& c : contracts)
    result.managers.push_back(make_manager(c, pool, config.knobs));
  return result;
}

}  // namespace skelsim
