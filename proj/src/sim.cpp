#include "skelsim/sim.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace skelsim {

ResourcePool::ResourcePool(std::vector<Resource> resources) : resources_(std::move(resources)) {
  std::sort(resources_.begin(), resources_.end(),
            [](const Resource& a, const Resource& b) { return a.id < b.id; });
  for (size_t i = 1; i < resources_.size(); ++i)
    if (resources_[i].id == resources_[i - 1].id)
      throw Error(Errc::InvalidScenario, "duplicate resource id " + resources_[i].id);
}

const Resource* ResourcePool::find(const ResourceId& id) const {
  auto it = std::lower_bound(resources_.begin(), resources_.end(), id,
                             [](const Resource& r, const ResourceId& v) { return r.id < v; });
  if (it == resources_.end() || it->id != id) return nullptr;
  return &*it;
}

// ---------------------------------------------------------------------------

World::World(ApplicationGraph graph, ResourcePool pool, std::vector<WorkloadPhase> workload,
             SimConfig cfg)
    : graph_(std::move(graph)),
      pool_(std::move(pool)),
      workload_(std::move(workload)),
      cfg_(cfg),
      rng_(cfg.seed) {
  auto order = graph_.topo_order();
  if (order.empty()) throw Error(Errc::InvalidScenario, "empty application graph");
  entry_node_ = order.front();
  exit_node_ = order.back();
  auto tags = graph_.farm_tags();
  if (!tags.empty()) {
    arrival_probe_ = *graph_.farm_emitter(tags.front());
    completion_probe_ = *graph_.farm_collector(tags.front());
  } else {
    arrival_probe_ = entry_node_;
    completion_probe_ = exit_node_;
  }
  schedule_next_arrival();
}

double World::uniform01() {
  return static_cast<double>(rng_() >> 11) * (1.0 / 9007199254740992.0);
}

void World::record(double t, const char* ev, const NodeId& node, long task) {
  trace_.push_back(SimEvent{t, ev, node, task});
}

void World::drain_trace(EventTrace& into) {
  into.insert(into.end(), trace_.begin(), trace_.end());
  trace_.clear();
}

void World::schedule_next_arrival() {
  while (phase_index_ < workload_.size()) {
    const auto& ph = workload_[phase_index_];
    double phase_end = phase_start_ + ph.duration;
    if (ph.arrival_rate <= 0 || next_arrival_time_ >= phase_end) {
      phase_start_ = phase_end;
      ++phase_index_;
      next_arrival_time_ = std::max(next_arrival_time_, phase_start_);
      if (phase_index_ < workload_.size() && workload_[phase_index_].arrival_rate > 0 &&
          next_arrival_time_ < phase_start_ + workload_[phase_index_].duration)
        next_arrival_time_ = std::max(next_arrival_time_, phase_start_);
      continue;
    }
    events_.push(Ev{next_arrival_time_, next_seq_++, Ev::Kind::Arrival, entry_node_,
                    next_task_id_, 0});
    double gap = cfg_.jitter ? -std::log(1.0 - uniform01()) / ph.arrival_rate
                             : 1.0 / ph.arrival_rate;
    next_arrival_time_ += gap;
    ++next_task_id_;
    return;
  }
}

std::optional<NodeId> World::successor(const NodeId& node) const {
  std::optional<NodeId> out;
  for (const auto& [a, rec] : graph_.arcs()) {
    if (a.first != node) continue;
    if (out) return std::nullopt;  // ambiguous; emitters never call this
    out = a.second;
  }
  return out;
}

NodeId World::pick_worker(const std::string& farm_tag, double t) {
  (void)t;
  auto workers = graph_.farm_workers(farm_tag);
  assert(!workers.empty());
  size_t& idx = rr_index_[farm_tag];
  NodeId chosen = workers[idx % workers.size()];
  ++idx;
  return chosen;
}

double World::service_time(const NodeId& node, long task) const {
  (void)task;
  const auto& rec = graph_.node(node);
  auto loc = rec.meta.location();
  if (!loc) throw Error(Errc::UnplacedNode, "node " + node + " has no location");
  const Resource* res = pool_.find(*loc);
  if (!res) throw Error(Errc::UnplacedNode, "node " + node + " placed on unknown resource");
  double st = rec.service_time / res->speed;
  if (rec.kind == NodeKind::Worker) {
    for (const auto& a : graph_.arcs_touching(node)) {
      if (graph_.arc(a).meta.channel_kind() == ChannelKind::Ssl) {
        st *= cfg_.ssl_overhead;
        break;
      }
    }
  }
  return st;
}

void World::start_service_if_idle(const NodeId& node, double t) {
  auto& q = queues_[node];
  if (q.active_task != -1 || q.waiting.empty()) return;
  long task = q.waiting.front();
  q.waiting.pop_front();
  double st;
  auto ov = remaining_override_.find(task);
  if (ov != remaining_override_.end()) {
    st = ov->second;
    remaining_override_.erase(ov);
  } else {
    st = service_time(node, task);
  }
  q.active_task = task;
  q.active_end = t + st;
  q.busy.emplace_back(t, t + st);
  record(t, "start", node, task);
  events_.push(Ev{t + st, next_seq_++, Ev::Kind::Complete, node, task, q.generation});
}

void World::deliver(long task, const NodeId& node, double t) {
  record(t, "arrive", node, task);
  if (node == arrival_probe_) probe_arrivals_.push_back(t);
  const auto& rec = graph_.node(node);
  switch (rec.kind) {
    case NodeKind::Emitter: {
      NodeId w = pick_worker(rec.farm_tag, t);
      record(t, "dispatch", w, task);
      deliver(task, w, t);
      break;
    }
    case NodeKind::Collector: {
      if (node == completion_probe_) probe_completions_.push_back(t);
      auto next = successor(node);
      if (next) deliver(task, *next, t);
      else ++completed_;
      break;
    }
    case NodeKind::SeqStage:
    case NodeKind::Worker:
      queues_[node].waiting.push_back(task);
      start_service_if_idle(node, t);
      break;
  }
}

void World::step(double until) {
  while (!events_.empty() && events_.top().t <= until) {
    Ev ev = events_.top();
    events_.pop();
    if (ev.kind == Ev::Kind::Arrival) {
      ++injected_;
      deliver(ev.task, ev.node, ev.t);
      schedule_next_arrival();
      continue;
    }
    auto qit = queues_.find(ev.node);
    if (qit == queues_.end() || qit->second.generation != ev.generation ||
        qit->second.active_task != ev.task)
      continue;  // node removed or task re-dispatched since scheduling
    auto& q = qit->second;
    q.active_task = -1;
    record(ev.t, "complete", ev.node, ev.task);
    start_service_if_idle(ev.node, ev.t);
    auto next = successor(ev.node);
    if (next) {
      deliver(ev.task, *next, ev.t);
    } else {
      if (ev.node == completion_probe_) probe_completions_.push_back(ev.t);
      ++completed_;
    }
  }
  now_ = until;
}

MonitorSnapshot World::monitor(double now) const {
  MonitorSnapshot s;
  s.window = cfg_.window;
  double from = now - cfg_.window;
  long arrivals = std::count_if(probe_arrivals_.begin(), probe_arrivals_.end(),
                                [&](double t) { return t > from && t <= now; });
  if (arrivals > 0) s.t_arr = cfg_.window / static_cast<double>(arrivals);
  long completions = std::count_if(probe_completions_.begin(), probe_completions_.end(),
                                   [&](double t) { return t > from && t <= now; });
  s.throughput = static_cast<double>(completions) / cfg_.window;
  for (const auto& [id, q] : queues_)
    s.utilization[id] = busy_in_window(q, from, now) / cfg_.window;
  return s;
}

double World::busy_in_window(const QueueState& q, double from, double to) const {
  double busy = 0;
  for (const auto& [b, e] : q.busy) {
    double lo = std::max(b, from), hi = std::min(e, to);
    if (hi > lo) busy += hi - lo;
  }
  return busy;
}

std::map<ResourceId, NodeId> World::occupancy() const {
  std::map<ResourceId, NodeId> occ;
  for (const auto& [id, rec] : graph_.nodes())
    if (auto loc = rec.meta.location()) occ[*loc] = id;
  return occ;
}

double World::committed_power() const {
  double total = 0;
  for (const auto& [rid, nid] : occupancy())
    if (const Resource* r = pool_.find(rid)) total += r->power_cost;
  return total;
}

long World::ssl_arc_count() const {
  long n = 0;
  for (const auto& [a, rec] : graph_.arcs())
    if (rec.meta.channel_kind() == ChannelKind::Ssl) ++n;
  return n;
}

int World::farm_degree() const {
  auto tags = graph_.farm_tags();
  if (tags.empty()) return 0;
  return static_cast<int>(graph_.farm_workers(tags.front()).size());
}

PlanContext World::new_plan_context(bool power_active) const {
  PlanContext ctx;
  ctx.power_active = power_active;
  ctx.staged.base_version = graph_.version();
  auto tags = graph_.farm_tags();
  if (!tags.empty()) ctx.farm_tag = tags.front();
  return ctx;
}

// ---------------------------------------------------------------------------
// Action semantics
// ---------------------------------------------------------------------------

namespace {

int power_rank(PowerClass p) {
  switch (p) {
    case PowerClass::Green: return 0;
    case PowerClass::Amber: return 1;
    case PowerClass::Red: return 2;
  }
  return 3;
}

}  // namespace

std::vector<const Resource*> World::rank_resources(const ResourcePool& pool,
                                                   bool power_preference) {
  std::vector<const Resource*> out;
  for (const auto& r : pool.all()) out.push_back(&r);
  std::sort(out.begin(), out.end(), [&](const Resource* a, const Resource* b) {
    if (power_preference && power_rank(a->power_class) != power_rank(b->power_class))
      return power_rank(a->power_class) < power_rank(b->power_class);
    if (a->speed != b->speed) return a->speed > b->speed;
    return a->id < b->id;
  });
  return out;
}

void World::execute_action(const Action& action, PlanContext& ctx) {
  switch (action.kind) {
    case Action::Kind::FindNewResource: {
      if (ctx.recruited) return;  // already recruited during the proposal phase
      auto occ = occupancy();
      auto ranked = rank_resources(
          pool_, action.recruit == RecruitPolicy::Auto && ctx.power_active);
      const Resource* chosen = nullptr;
      for (const Resource* r : ranked) {
        if (occ.count(r->id) || ctx.reserved.count(r->id)) continue;
        if (action.recruit == RecruitPolicy::GreenOnly && r->power_class != PowerClass::Green)
          continue;
        chosen = r;
        break;
      }
      if (!chosen) throw Error(Errc::NoFreeResource, "no free resource to recruit");
      ctx.recruited = chosen->id;
      ctx.reserved.insert(chosen->id);
      break;
    }
    case Action::Kind::AskConsensus:
      break;  // protocol driven by the engine
    case Action::Kind::AllocateNewWorker: {
      if (!ctx.recruited)
        throw Error(Errc::ActionFailure, "allocateNewWorker without a recruited resource");
      if (ctx.farm_tag.empty())
        throw Error(Errc::ActionFailure, "allocateNewWorker without a farm");
      auto workers = graph_.farm_workers(ctx.farm_tag);
      if (workers.empty())
        throw Error(Errc::ActionFailure, "farm has no existing worker to model");
      // Worker ids are <prefix><index>; the new worker takes max index + 1.
      std::string sample = workers.front();
      size_t digits = 0;
      while (digits < sample.size() && std::isdigit(sample[sample.size() - 1 - digits]))
        ++digits;
      std::string prefix = sample.substr(0, sample.size() - digits);
      int max_index = 0;
      for (const auto& w : workers) {
        if (w.size() > prefix.size() && w.compare(0, prefix.size(), prefix) == 0)
          max_index = std::max(max_index, std::atoi(w.c_str() + prefix.size()));
      }
      NodeId id = prefix + std::to_string(max_index + 1);
      const NodeRecord& model = graph_.node(workers.front());
      const Resource* res = pool_.find(*ctx.recruited);
      if (!res) throw Error(Errc::ActionFailure, "recruited resource vanished");
      NodeRecord rec;
      rec.kind = NodeKind::Worker;
      rec.skeleton_path = model.skeleton_path.substr(0, model.skeleton_path.rfind('/')) +
                          "/w" + std::to_string(max_index + 1);
      rec.farm_tag = ctx.farm_tag;
      rec.service_time = model.service_time;
      rec.meta.set("location", *ctx.recruited);
      rec.meta.set("secure", res->trusted);
      rec.meta.set("powerClass", to_string(res->power_class));
      ctx.staged.added_nodes.emplace_back(id, std::move(rec));
      ctx.new_worker = id;
      break;
    }
    case Action::Kind::ConnectWorker:
    case Action::Kind::ConnectSslWorker: {
      if (!ctx.new_worker)
        throw Error(Errc::ActionFailure, "connect action without an allocated worker");
      auto em = graph_.farm_emitter(ctx.farm_tag);
      auto co = graph_.farm_collector(ctx.farm_tag);
      if (!em || !co) throw Error(Errc::ActionFailure, "farm lost emitter or collector");
      ArcRecord rec;
      rec.meta.set("channelKind",
                   std::string(action.kind == Action::Kind::ConnectSslWorker ? "ssl" : "plain"));
      ctx.staged.added_arcs.emplace_back(ArcId{*em, *ctx.new_worker}, rec);
      ctx.staged.added_arcs.emplace_back(ArcId{*ctx.new_worker, *co}, rec);
      break;
    }
    case Action::Kind::RemoveWorker: {
      if (ctx.farm_tag.empty()) throw Error(Errc::ActionFailure, "removeWorker without a farm");
      auto workers = graph_.farm_workers(ctx.farm_tag);
      if (workers.size() <= 1)
        throw Error(Errc::RemoveLastWorker, "farm degree would reach 0");
      double from = now_ - cfg_.window;
      NodeId victim = workers.front();
      double best = std::numeric_limits<double>::max();
      for (const auto& w : workers) {
        auto it = queues_.find(w);
        double u = it == queues_.end() ? 0.0 : busy_in_window(it->second, from, now_);
        if (u < best) {
          best = u;
          victim = w;
        }
      }
      ctx.staged.removed_nodes.emplace_back(victim, graph_.node(victim));
      for (const auto& a : graph_.arcs_touching(victim))
        ctx.staged.removed_arcs.emplace_back(a, graph_.arc(a));
      ctx.removed_worker = victim;
      break;
    }
    case Action::Kind::Answer:
    case Action::Kind::LowerPriority:
      break;  // manager-side actions, nothing to stage
  }
}

GraphDelta World::commit_staged(PlanContext& ctx) {
  GraphDelta applied = ctx.staged;
  graph_ = apply_delta(graph_, ctx.staged);
  sync_after_commit(applied);
  return applied;
}

void World::sync_after_commit(const GraphDelta& delta) {
  for (const auto& [id, rec] : delta.removed_nodes) {
    auto it = queues_.find(id);
    if (it == queues_.end()) continue;
    std::vector<long> orphans;
    if (it->second.active_task != -1) {
      remaining_override_[it->second.active_task] =
          std::max(0.0, it->second.active_end - now_);
      orphans.push_back(it->second.active_task);
    }
    for (long t : it->second.waiting) orphans.push_back(t);
    std::string tag = rec.farm_tag;
    queues_.erase(it);
    for (long t : orphans) {
      NodeId w = pick_worker(tag, now_);
      record(now_, "dispatch", w, t);
      queues_[w].waiting.push_back(t);
      start_service_if_idle(w, now_);
    }
  }
}

}  // namespace skelsim
