#include "skelsim/rules.hpp"

#include <algorithm>

namespace skelsim {

std::optional<bool> FactStore::get_bool(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end() || !std::holds_alternative<bool>(it->second)) return std::nullopt;
  return std::get<bool>(it->second);
}

std::optional<double> FactStore::get_number(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end() || !std::holds_alternative<double>(it->second)) return std::nullopt;
  return std::get<double>(it->second);
}

std::optional<std::string> FactStore::get_string(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end() || !std::holds_alternative<std::string>(it->second))
    return std::nullopt;
  return std::get<std::string>(it->second);
}

const GraphDelta* FactStore::get_delta(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end() || !std::holds_alternative<GraphDelta>(it->second)) return nullptr;
  return &std::get<GraphDelta>(it->second);
}

const std::vector<std::string>* FactStore::get_list(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end() || !std::holds_alternative<std::vector<std::string>>(it->second))
    return nullptr;
  return &std::get<std::vector<std::string>>(it->second);
}

bool FactStore::list_contains(const std::string& name, const std::string& item) const {
  const auto* l = get_list(name);
  return l && std::find(l->begin(), l->end(), item) != l->end();
}

std::string to_string(Action::Kind k) {
  switch (k) {
    case Action::Kind::FindNewResource: return "findNewResource";
    case Action::Kind::AskConsensus: return "askConsensus";
    case Action::Kind::AllocateNewWorker: return "allocateNewWorker";
    case Action::Kind::ConnectWorker: return "connectWorker";
    case Action::Kind::ConnectSslWorker: return "connectSslWorker";
    case Action::Kind::RemoveWorker: return "removeWorker";
    case Action::Kind::Answer: return "answer";
    case Action::Kind::LowerPriority: return "lowerPriority";
  }
  return "?";
}

Rule Rule::make(std::string name, int priority, RulePhase phase, std::string tag,
                Precondition pre, Plan plan) {
  Rule r;
  r.name = std::move(name);
  r.priority = priority;
  r.initial_priority = priority;
  r.phase = phase;
  r.decision_tag = std::move(tag);
  r.precondition = std::move(pre);
  r.plan = std::move(plan);
  return r;
}

namespace {

bool canonical_before(const Rule& a, const Rule& b) {
  if (a.priority != b.priority) return a.priority > b.priority;
  return a.name < b.name;
}

}  // namespace

std::vector<Rule> evaluate(const std::vector<Rule>& rules, const FactStore& facts) {
  std::vector<Rule> fireable;
  for (const auto& r : rules)
    if (r.precondition && r.precondition(facts)) fireable.push_back(r);
  std::stable_sort(fireable.begin(), fireable.end(), canonical_before);
  return fireable;
}

std::optional<Rule> select(const std::vector<Rule>& fireable) {
  if (fireable.empty()) return std::nullopt;
  return fireable.front();
}

std::vector<Rule> lower_priority(std::vector<Rule> rules, const std::string& name, int floor) {
  auto it = std::find_if(rules.begin(), rules.end(),
                         [&](const Rule& r) { return r.name == name; });
  if (it == rules.end()) throw Error(Errc::UnknownRule, "no rule named " + name);
  it->priority = std::max(floor, it->priority - 1);
  return rules;
}

void ManagerState::reset_priorities() {
  for (auto& r : rules) r.priority = r.initial_priority;
}

std::optional<std::vector<Action>> merge_substitutes(
    const Plan& base, const std::vector<std::string>& ordered_properties) {
  if (ordered_properties.empty()) return base.actions;

  std::vector<const std::vector<Action>*> subs;
  for (const auto& prop : ordered_properties) {
    auto it = base.substitutes.find(prop);
    if (it == base.substitutes.end()) return std::nullopt;
    subs.push_back(&it->second);
  }

  bool all_same_length = std::all_of(subs.begin(), subs.end(), [&](const auto* s) {
    return s->size() == base.actions.size();
  });
  if (!all_same_length) {
    // Whole-plan replacements compose only when identical.
    for (size_t i = 1; i < subs.size(); ++i)
      if (*subs[i] != *subs[0]) return std::nullopt;
    return *subs[0];
  }

  std::vector<Action> merged = base.actions;
  std::vector<bool> replaced(merged.size(), false);
  for (const auto* sub : subs) {
    for (size_t i = 0; i < merged.size(); ++i) {
      if ((*sub)[i] == base.actions[i]) continue;
      if (replaced[i] && merged[i] != (*sub)[i]) return std::nullopt;
      merged[i] = (*sub)[i];
      replaced[i] = true;
    }
  }
  return merged;
}

CycleOutcome control_cycle(ManagerState& state, const FactStore& facts) {
  // With a decision pending only its PH2 rules are eligible; without one,
  // PH2 rules are excluded entirely.
  std::vector<Rule> eligible;
  for (const auto& r : state.rules) {
    if (state.pending) {
      if (r.phase == RulePhase::PH2 && r.decision_tag == state.pending->tag)
        eligible.push_back(r);
    } else if (r.phase != RulePhase::PH2) {
      eligible.push_back(r);
    }
  }

  auto chosen = select(evaluate(eligible, facts));
  if (!chosen) return CycleOutcome{};

  CycleOutcome out;
  out.rule_name = chosen->name;

  switch (chosen->phase) {
    case RulePhase::Plain:
      out.kind = CycleOutcome::Kind::Execute;
      out.actions = chosen->plan.actions;
      break;
    case RulePhase::PH1:
      out.kind = CycleOutcome::Kind::Propose;
      out.proposal = chosen->plan;
      out.decision_tag = chosen->decision_tag;
      break;
    case RulePhase::PH2: {
      bool lowers = std::any_of(chosen->plan.actions.begin(), chosen->plan.actions.end(),
                                [](const Action& a) {
                                  return a.kind == Action::Kind::LowerPriority;
                                });
      if (lowers) {
        out.kind = CycleOutcome::Kind::Abort;
        for (const auto& a : chosen->plan.actions) {
          if (a.kind == Action::Kind::LowerPriority) {
            state.rules = lower_priority(std::move(state.rules), a.rule_name,
                                         state.priority_floor);
            out.lowered_rules.push_back(a.rule_name);
          }
        }
      } else {
        out.kind = CycleOutcome::Kind::Execute;
        std::vector<std::string> props;
        if (const auto* l = facts.get_list("consensus.needProperty")) props = *l;
        auto merged = merge_substitutes(state.pending->plan, props);
        out.actions = merged ? *merged : chosen->plan.actions;
      }
      out.decision_tag = state.pending->id;
      state.pending.reset();
      break;
    }
  }
  return out;
}

}  // namespace skelsim
