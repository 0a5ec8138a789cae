#include "skelsim/scenario.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace skelsim {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw Error(Errc::InvalidScenario, what); }

void require_keys(const json& j, const std::string& where,
                  std::initializer_list<const char*> allowed) {
  if (!j.is_object()) bad(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (k == a) ok = true;
    if (!ok) bad(where + ": unknown key '" + k + "'");
  }
}

double num(const json& j, const std::string& where) {
  if (!j.is_number()) bad(where + " must be a number");
  return j.get<double>();
}

SkeletonExpr parse_skeleton(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("type")) bad(where + " needs a 'type'");
  std::string type = j.at("type").get<std::string>();
  if (type == "seq") {
    require_keys(j, where, {"type", "label", "service"});
    if (!j.contains("label") || !j.contains("service")) bad(where + " seq needs label/service");
    return SkeletonExpr::seq(j.at("label").get<std::string>(),
                             num(j.at("service"), where + ".service"));
  }
  if (type == "pipeline") {
    require_keys(j, where, {"type", "stages"});
    if (!j.contains("stages") || !j.at("stages").is_array()) bad(where + " pipeline needs stages");
    std::vector<SkeletonExpr> stages;
    size_t i = 0;
    for (const auto& s : j.at("stages"))
      stages.push_back(parse_skeleton(s, where + ".stages[" + std::to_string(i++) + "]"));
    return SkeletonExpr::pipeline(std::move(stages));
  }
  if (type == "farm") {
    require_keys(j, where, {"type", "worker", "degree"});
    if (!j.contains("worker")) bad(where + " farm needs a worker");
    std::optional<int> degree;
    if (j.contains("degree")) degree = j.at("degree").get<int>();
    return SkeletonExpr::farm(parse_skeleton(j.at("worker"), where + ".worker"), degree);
  }
  bad(where + ": unknown skeleton type '" + type + "'");
}

QoSContract parse_contract(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("kind")) bad(where + " needs a 'kind'");
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "secureData") {
    require_keys(j, where, {"kind"});
    return QoSContract::secure_data();
  }
  if (kind == "minThroughput") {
    require_keys(j, where, {"kind", "rate"});
    double rate = num(j.at("rate"), where + ".rate");
    if (rate <= 0) bad(where + ": minThroughput rate must be > 0");
    return QoSContract::min_throughput(rate);
  }
  if (kind == "powerBudget") {
    require_keys(j, where, {"kind", "budget"});
    double budget = num(j.at("budget"), where + ".budget");
    if (budget <= 0) bad(where + ": powerBudget must be > 0");
    return QoSContract::power_budget(budget);
  }
  bad(where + ": unknown contract kind '" + kind + "'");
}

Resource parse_resource(const json& j, const std::string& where) {
  require_keys(j, where, {"id", "domain", "powerClass", "powerCost", "speed"});
  if (!j.contains("id")) bad(where + " needs an id");
  Resource r;
  r.id = j.at("id").get<std::string>();
  if (j.contains("domain")) {
    std::string d = j.at("domain").get<std::string>();
    if (d == "trusted") r.trusted = true;
    else if (d == "untrusted") r.trusted = false;
    else bad(where + ": domain must be trusted|untrusted");
  }
  if (j.contains("powerClass")) {
    std::string p = j.at("powerClass").get<std::string>();
    if (p == "green") r.power_class = PowerClass::Green;
    else if (p == "amber") r.power_class = PowerClass::Amber;
    else if (p == "red") r.power_class = PowerClass::Red;
    else bad(where + ": powerClass must be green|amber|red");
  }
  if (j.contains("powerCost")) r.power_cost = num(j.at("powerCost"), where + ".powerCost");
  if (j.contains("speed")) r.speed = num(j.at("speed"), where + ".speed");
  if (r.power_cost <= 0) bad(where + ": powerCost must be > 0");
  if (r.speed <= 0) bad(where + ": speed must be > 0");
  return r;
}

}  // namespace

Scenario Scenario::from_json(const nlohmann::json& j) {
  require_keys(j, "scenario",
               {"skeleton", "contracts", "pool", "workload", "mode", "sim", "knobs"});
  Scenario s;
  if (!j.contains("skeleton")) bad("scenario needs a skeleton");
  s.skeleton = parse_skeleton(j.at("skeleton"), "skeleton");
  s.skeleton.check_well_formed();

  if (!j.contains("contracts") || !j.at("contracts").is_array() || j.at("contracts").empty())
    bad("scenario needs a non-empty contracts array");
  size_t i = 0;
  for (const auto& c : j.at("contracts"))
    s.contracts.push_back(parse_contract(c, "contracts[" + std::to_string(i++) + "]"));

  if (!j.contains("pool") || !j.at("pool").is_array() || j.at("pool").empty())
    bad("scenario needs a non-empty pool array");
  i = 0;
  for (const auto& r : j.at("pool"))
    s.pool.push_back(parse_resource(r, "pool[" + std::to_string(i++) + "]"));

  if (!j.contains("workload") || !j.at("workload").is_array() || j.at("workload").empty())
    bad("scenario needs a non-empty workload array");
  i = 0;
  for (const auto& p : j.at("workload")) {
    std::string where = "workload[" + std::to_string(i++) + "]";
    require_keys(p, where, {"duration", "rate"});
    if (!p.contains("duration") || !p.contains("rate")) bad(where + " needs duration and rate");
    WorkloadPhase ph{num(p.at("duration"), where + ".duration"),
                    num(p.at("rate"), where + ".rate")};
    if (ph.duration <= 0) bad(where + ": duration must be > 0");
    if (ph.arrival_rate < 0) bad(where + ": rate must be >= 0");
    s.workload.push_back(ph);
  }

  if (j.contains("mode")) {
    std::string m = j.at("mode").get<std::string>();
    if (m == "sm") s.mode = CoordinationMode::SM;
    else if (m == "cm") s.mode = CoordinationMode::CM;
    else bad("mode must be sm|cm");
  }

  if (j.contains("sim")) {
    const auto& sj = j.at("sim");
    require_keys(sj, "sim", {"seed", "tick", "window", "ssl_overhead", "run_length", "jitter"});
    if (sj.contains("seed")) s.sim.seed = sj.at("seed").get<std::uint64_t>();
    if (sj.contains("tick")) s.sim.tick = num(sj.at("tick"), "sim.tick");
    if (sj.contains("window")) s.sim.window = num(sj.at("window"), "sim.window");
    if (sj.contains("ssl_overhead"))
      s.sim.ssl_overhead = num(sj.at("ssl_overhead"), "sim.ssl_overhead");
    if (sj.contains("run_length")) s.sim.run_length = num(sj.at("run_length"), "sim.run_length");
    if (sj.contains("jitter")) s.sim.jitter = sj.at("jitter").get<bool>();
  }
  if (s.sim.tick <= 0 || s.sim.window <= 0 || s.sim.tick > s.sim.window)
    bad("sim: need 0 < tick <= window");
  if (s.sim.ssl_overhead < 1) bad("sim.ssl_overhead must be >= 1");
  if (s.sim.run_length <= 0) bad("sim.run_length must be > 0");

  if (j.contains("knobs")) {
    const auto& k = j.at("knobs");
    require_keys(k, "knobs",
                 {"hysteresis_factor", "base_priority", "priority_floor", "max_greedy",
                  "default_degree"});
    if (k.contains("hysteresis_factor"))
      s.knobs.hysteresis_factor = num(k.at("hysteresis_factor"), "knobs.hysteresis_factor");
    if (k.contains("base_priority")) s.knobs.base_priority = k.at("base_priority").get<int>();
    if (k.contains("priority_floor")) s.knobs.priority_floor = k.at("priority_floor").get<int>();
    if (k.contains("max_greedy")) s.knobs.max_greedy = k.at("max_greedy").get<bool>();
    if (k.contains("default_degree")) s.default_degree = k.at("default_degree").get<int>();
  }
  if (s.knobs.hysteresis_factor < 1) bad("knobs.hysteresis_factor must be >= 1");
  if (s.default_degree < 1) bad("knobs.default_degree must be >= 1");
  return s;
}

Scenario Scenario::from_string(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) bad("scenario is not valid JSON");
  return from_json(j);
}

Scenario Scenario::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad("cannot read scenario file " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_string(text);
}

}  // namespace skelsim
