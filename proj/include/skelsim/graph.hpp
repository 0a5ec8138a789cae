#ifndef SKELSIM_GRAPH_HPP
#define SKELSIM_GRAPH_HPP

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "skelsim/types.hpp"

#include <nlohmann/json_fwd.hpp>

namespace skelsim {

// ---------------------------------------------------------------------------
// Skeleton expressions
// ---------------------------------------------------------------------------

/// Composition tree of sequential / pipeline / farm patterns.
/// Immutable value; children are shared, never mutated after construction.
class SkeletonExpr {
 public:
  struct Seq {
    std::string label;
    double service_time;  // seconds/task
  };
  struct Pipeline {
    std::vector<SkeletonExpr> stages;
  };
  struct Farm {
    std::shared_ptr<const SkeletonExpr> worker;
    std::optional<int> degree;  // nullopt = use configured default
  };

  static SkeletonExpr seq(std::string label, double service_time);
  static SkeletonExpr pipeline(std::vector<SkeletonExpr> stages);
  static SkeletonExpr farm(SkeletonExpr worker, std::optional<int> degree = std::nullopt);

  const std::variant<Seq, Pipeline, Farm>& node() const { return node_; }
  bool is_seq() const { return std::holds_alternative<Seq>(node_); }
  bool is_pipeline() const { return std::holds_alternative<Pipeline>(node_); }
  bool is_farm() const { return std::holds_alternative<Farm>(node_); }
  const Seq& as_seq() const { return std::get<Seq>(node_); }
  const Pipeline& as_pipeline() const { return std::get<Pipeline>(node_); }
  const Farm& as_farm() const { return std::get<Farm>(node_); }

  /// Throws Error(MalformedSkeleton) on empty pipelines, degree < 1,
  /// or duplicate sequential-stage labels.
  void check_well_formed() const;

  /// Total sequential service time of the subtree (seconds/task).
  double total_service_time() const;

 private:
  explicit SkeletonExpr(std::variant<Seq, Pipeline, Farm> node) : node_(std::move(node)) {}
  std::variant<Seq, Pipeline, Farm> node_;
};

// ---------------------------------------------------------------------------
// Metadata
// ---------------------------------------------------------------------------

using MetaValue = std::variant<bool, double, std::string>;

enum class MetaTargetClass { Node, Arc };

/// Typed key/value annotations on graph nodes and arcs. The key set is
/// closed except for the "ext." namespace, which core rules ignore.
class MetadataSet {
 public:
  static bool key_admissible(const std::string& key, MetaTargetClass target);

  void set(const std::string& key, MetaValue value);
  void erase(const std::string& key);
  bool has(const std::string& key) const;
  std::optional<MetaValue> get(const std::string& key) const;

  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;
  std::optional<double> get_number(const std::string& key) const;

  std::optional<ResourceId> location() const { return get_string("location"); }
  std::optional<bool> secure() const { return get_bool("secure"); }
  std::optional<ChannelKind> channel_kind() const;

  const std::map<std::string, MetaValue>& entries() const { return entries_; }

  bool operator==(const MetadataSet&) const = default;

 private:
  std::map<std::string, MetaValue> entries_;
};

// ---------------------------------------------------------------------------
// Application graph
// ---------------------------------------------------------------------------

enum class NodeKind { SeqStage, Emitter, Worker, Collector };

std::string to_string(NodeKind k);

struct NodeRecord {
  NodeKind kind = NodeKind::SeqStage;
  std::string skeleton_path;
  /// Farm membership tag for Emitter/Worker/Collector nodes; empty for
  /// sequential stages. Workers carry the tag of their farm.
  std::string farm_tag;
  /// Per-task service time in seconds; 0 for emitters/collectors.
  /// Not part of the exported snapshot.
  double service_time = 0.0;
  MetadataSet meta;

  bool operator==(const NodeRecord&) const = default;
};

using ArcId = std::pair<NodeId, NodeId>;

struct ArcRecord {
  MetadataSet meta;
  bool operator==(const ArcRecord&) const = default;
};

struct ValidationIssue {
  enum class Severity { Error, Lint };
  Severity severity;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool well_formed() const;  // no Error-severity issues
  bool empty() const { return issues.empty(); }
};

/// Shared knowledge base of the managers: nodes are parallel activities,
/// arcs are channels, both annotated. Immutable value; every mutation
/// returns a new graph with version bumped.
class ApplicationGraph {
 public:
  const std::map<NodeId, NodeRecord>& nodes() const { return nodes_; }
  const std::map<ArcId, ArcRecord>& arcs() const { return arcs_; }
  std::uint64_t version() const { return version_; }

  bool has_node(const NodeId& id) const { return nodes_.count(id) != 0; }
  bool has_arc(const ArcId& id) const { return arcs_.count(id) != 0; }
  const NodeRecord& node(const NodeId& id) const;
  const ArcRecord& arc(const ArcId& id) const;

  std::vector<NodeId> nodes_of_kind(NodeKind kind) const;
  std::vector<ArcId> arcs_touching(const NodeId& id) const;

  /// Workers of the farm tagged `farm_tag`, sorted by id.
  std::vector<NodeId> farm_workers(const std::string& farm_tag) const;
  std::optional<NodeId> farm_emitter(const std::string& farm_tag) const;
  std::optional<NodeId> farm_collector(const std::string& farm_tag) const;
  /// Tags of all farms present, sorted.
  std::vector<std::string> farm_tags() const;

  /// Deterministic topological order (ties broken by id ascending).
  std::vector<NodeId> topo_order() const;

  nlohmann::json to_json() const;
  std::string to_json_string() const;

  bool same_content(const ApplicationGraph& other) const {
    return nodes_ == other.nodes_ && arcs_ == other.arcs_;
  }
  bool operator==(const ApplicationGraph&) const = default;

 private:
  friend struct GraphBuilder;
  std::map<NodeId, NodeRecord> nodes_;
  std::map<ArcId, ArcRecord> arcs_;
  std::uint64_t version_ = 0;
};

/// Mutable access used by expand/apply_delta/annotate implementations only.
struct GraphBuilder {
  ApplicationGraph g;
  std::map<NodeId, NodeRecord>& nodes() { return g.nodes_; }
  std::map<ArcId, ArcRecord>& arcs() { return g.arcs_; }
  void set_version(std::uint64_t v) { g.version_ = v; }
};

// ---------------------------------------------------------------------------
// Deltas
// ---------------------------------------------------------------------------

struct MetadataChange {
  std::variant<NodeId, ArcId> target;
  std::string key;
  std::optional<MetaValue> old_value;  // nullopt = key absent before
  std::optional<MetaValue> new_value;  // nullopt = key removed
  bool operator==(const MetadataChange&) const = default;
};

struct GraphDelta {
  std::vector<std::pair<NodeId, NodeRecord>> added_nodes;
  std::vector<std::pair<NodeId, NodeRecord>> removed_nodes;
  std::vector<std::pair<ArcId, ArcRecord>> added_arcs;
  std::vector<std::pair<ArcId, ArcRecord>> removed_arcs;
  std::vector<MetadataChange> metadata_changes;
  std::uint64_t base_version = 0;

  bool empty() const {
    return added_nodes.empty() && removed_nodes.empty() && added_arcs.empty() &&
           removed_arcs.empty() && metadata_changes.empty();
  }
  bool operator==(const GraphDelta&) const = default;

  nlohmann::json to_json() const;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

struct ExpandConfig {
  int default_farm_degree = 4;
};

/// Expands a skeleton expression into the application graph. Node ids are
/// deterministic functions of the skeleton path, so equal inputs produce
/// structurally identical graphs.
ApplicationGraph expand(const SkeletonExpr& expr, const ExpandConfig& defaults);

/// Reports every violated structural invariant; metadata placement problems
/// between consistent endpoints are lints, not errors.
ValidationReport validate(const ApplicationGraph& g);

/// Minimal delta such that apply_delta(g_old, diff(g_old, g_new)) == g_new.
GraphDelta diff(const ApplicationGraph& g_old, const ApplicationGraph& g_new);

/// Applies a delta, returning a new graph with version + 1.
/// Throws StaleDelta on base-version mismatch, WouldMalform if the result
/// fails validation.
ApplicationGraph apply_delta(const ApplicationGraph& g, const GraphDelta& d);

ApplicationGraph annotate(const ApplicationGraph& g, const NodeId& node,
                          const std::string& key, MetaValue value);
ApplicationGraph annotate(const ApplicationGraph& g, const ArcId& arc,
                          const std::string& key, MetaValue value);

nlohmann::json meta_to_json(const MetadataSet& m);

}  // namespace skelsim

#endif
