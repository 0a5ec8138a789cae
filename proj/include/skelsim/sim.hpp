#ifndef SKELSIM_SIM_HPP
#define SKELSIM_SIM_HPP

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "skelsim/consensus.hpp"
#include "skelsim/graph.hpp"

namespace skelsim {

struct Resource {
  ResourceId id;
  bool trusted = true;
  PowerClass power_class = PowerClass::Green;
  double power_cost = 1.0;  // power units while hosting a node
  double speed = 1.0;       // service-time divisor
};

class ResourcePool {
 public:
  ResourcePool() = default;
  explicit ResourcePool(std::vector<Resource> resources);
  const std::vector<Resource>& all() const { return resources_; }
  const Resource* find(const ResourceId& id) const;
  bool empty() const { return resources_.empty(); }
  size_t size() const { return resources_.size(); }

 private:
  std::vector<Resource> resources_;
};

struct WorkloadPhase {
  double duration;      // seconds
  double arrival_rate;  // tasks/second; 0 = silence
};

struct SimConfig {
  std::uint64_t seed = 1;
  double tick = 5.0;          // monitoring period, seconds
  double window = 10.0;       // sliding monitor window, seconds
  double ssl_overhead = 1.1;  // service-time factor on ssl-attached workers
  double run_length = 600.0;
  bool jitter = false;  // seeded exponential inter-arrival gaps
};

struct MonitorSnapshot {
  double window = 0;
  std::optional<double> t_arr;  // mean inter-arrival time at the farm emitter
  double throughput = 0;        // completions/second at the farm collector
  std::map<NodeId, double> utilization;
};

struct SimEvent {
  double t;
  std::string ev;  // arrive | start | complete | dispatch
  NodeId node;
  long task;
};

using EventTrace = std::vector<SimEvent>;

/// Deterministic discrete-event execution of the application the graph
/// describes. Owns the shared graph; managers interact through monitor
/// snapshots and the ActionExecutor interface at tick boundaries.
class World : public ActionExecutor {
 public:
  World(ApplicationGraph graph, ResourcePool pool, std::vector<WorkloadPhase> workload,
        SimConfig cfg);

  /// Advances the event queue to the target time. Throws UnplacedNode when
  /// a task reaches a node without a location.
  void step(double until);

  MonitorSnapshot monitor(double now) const;

  double now() const { return now_; }
  const EventTrace& trace() const { return trace_; }
  void drain_trace(EventTrace& into);

  long injected() const { return injected_; }
  long completed() const { return completed_; }
  long in_flight() const { return injected_ - completed_; }

  std::map<ResourceId, NodeId> occupancy() const;
  double committed_power() const;
  long ssl_arc_count() const;
  int farm_degree() const;

  PlanContext new_plan_context(bool power_active) const;

  // ActionExecutor
  const ApplicationGraph& graph() const override { return graph_; }
  void execute_action(const Action& action, PlanContext& ctx) override;
  GraphDelta commit_staged(PlanContext& ctx) override;

  /// Resource ranking used by FindNewResource; exposed for the
  /// initial-configuration managers.
  static std::vector<const Resource*> rank_resources(const ResourcePool& pool,
                                                     bool power_preference);

 private:
  struct QueueState {
    std::deque<long> waiting;
    long active_task = -1;
    double active_end = 0;
    std::uint64_t generation = 0;
    std::vector<std::pair<double, double>> busy;  // closed service intervals
  };

  struct Ev {
    double t;
    std::uint64_t seq;
    enum class Kind { Arrival, Complete } kind;
    NodeId node;
    long task;
    std::uint64_t generation;
  };
  struct EvLater {
    bool operator()(const Ev& a, const Ev& b) const {
      if (a.t != b.t) return a.t > b.t;
      return a.seq > b.seq;
    }
  };

  void record(double t, const char* ev, const NodeId& node, long task);
  void schedule_next_arrival();
  void deliver(long task, const NodeId& node, double t);
  void start_service_if_idle(const NodeId& node, double t);
  double service_time(const NodeId& node, long task) const;
  std::optional<NodeId> successor(const NodeId& node) const;
  NodeId pick_worker(const std::string& farm_tag, double t);
  double busy_in_window(const QueueState& q, double from, double to) const;
  void sync_after_commit(const GraphDelta& delta);
  double uniform01();

  ApplicationGraph graph_;
  ResourcePool pool_;
  std::vector<WorkloadPhase> workload_;
  SimConfig cfg_;

  std::priority_queue<Ev, std::vector<Ev>, EvLater> events_;
  std::uint64_t next_seq_ = 0;
  std::map<NodeId, QueueState> queues_;
  std::map<std::string, size_t> rr_index_;
  std::map<long, double> remaining_override_;  // re-dispatched in-flight tasks

  NodeId entry_node_;
  NodeId exit_node_;
  NodeId arrival_probe_;     // farm emitter, or entry when no farm exists
  NodeId completion_probe_;  // farm collector, or exit

  std::vector<double> probe_arrivals_;
  std::vector<double> probe_completions_;

  std::mt19937_64 rng_;
  double now_ = 0;
  double next_arrival_time_ = 0;
  size_t phase_index_ = 0;
  double phase_start_ = 0;
  long next_task_id_ = 0;
  long injected_ = 0;
  long completed_ = 0;
  EventTrace trace_;
};

}  // namespace skelsim

#endif
