#include "skelsim/graph.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

#include <nlohmann/json.hpp>

namespace skelsim {

std::string to_string(Concern c) {
  switch (c) {
    case Concern::Performance: return "performance";
    case Concern::Security: return "security";
    case Concern::Power: return "power";
  }
  return "?";
}

std::string to_string(PowerClass p) {
  switch (p) {
    case PowerClass::Green: return "green";
    case PowerClass::Amber: return "amber";
    case PowerClass::Red: return "red";
  }
  return "?";
}

std::string to_string(ChannelKind k) {
  return k == ChannelKind::Ssl ? "ssl" : "plain";
}

std::string to_string(NodeKind k) {
  switch (k) {
    case NodeKind::SeqStage: return "seq";
    case NodeKind::Emitter: return "emitter";
    case NodeKind::Worker: return "worker";
    case NodeKind::Collector: return "collector";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// SkeletonExpr
// ---------------------------------------------------------------------------

SkeletonExpr SkeletonExpr::seq(std::string label, double service_time) {
  return SkeletonExpr(Seq{std::move(label), service_time});
}

SkeletonExpr SkeletonExpr::pipeline(std::vector<SkeletonExpr> stages) {
  return SkeletonExpr(Pipeline{std::move(stages)});
}

SkeletonExpr SkeletonExpr::farm(SkeletonExpr worker, std::optional<int> degree) {
  return SkeletonExpr(Farm{std::make_shared<const SkeletonExpr>(std::move(worker)), degree});
}

namespace {

void collect_labels(const SkeletonExpr& e, std::vector<std::string>& labels) {
  if (e.is_seq()) {
    labels.push_back(e.as_seq().label);
  } else if (e.is_pipeline()) {
    for (const auto& s : e.as_pipeline().stages) collect_labels(s, labels);
  } else {
    collect_labels(*e.as_farm().worker, labels);
  }
}

void check_rec(const SkeletonExpr& e) {
  if (e.is_seq()) {
    const auto& s = e.as_seq();
    if (s.label.empty())
      throw Error(Errc::MalformedSkeleton, "sequential stage needs a label");
    if (s.service_time < 0)
      throw Error(Errc::MalformedSkeleton, "negative service time on '" + s.label + "'");
  } else if (e.is_pipeline()) {
    const auto& p = e.as_pipeline();
    if (p.stages.size() < 2)
      throw Error(Errc::MalformedSkeleton, "pipeline needs at least 2 stages");
    for (const auto& s : p.stages) check_rec(s);
  } else {
    const auto& f = e.as_farm();
    if (f.degree && *f.degree < 1)
      throw Error(Errc::MalformedSkeleton, "farm degree must be >= 1");
    if (!f.worker->is_seq())
      throw Error(Errc::MalformedSkeleton, "farm worker must be a sequential stage");
    check_rec(*f.worker);
  }
}

}  // namespace

void SkeletonExpr::check_well_formed() const {
  check_rec(*this);
  std::vector<std::string> labels;
  collect_labels(*this, labels);
  std::sort(labels.begin(), labels.end());
  if (std::adjacent_find(labels.begin(), labels.end()) != labels.end())
    throw Error(Errc::MalformedSkeleton, "duplicate stage labels");
}

double SkeletonExpr::total_service_time() const {
  if (is_seq()) return as_seq().service_time;
  if (is_pipeline()) {
    double t = 0;
    for (const auto& s : as_pipeline().stages) t += s.total_service_time();
    return t;
  }
  return as_farm().worker->total_service_time();
}

// ---------------------------------------------------------------------------
// MetadataSet
// ---------------------------------------------------------------------------

namespace {

// key -> (admissible on nodes, admissible on arcs, value index in MetaValue)
struct KeySpec {
  bool on_node;
  bool on_arc;
  int value_index;  // 0 bool, 1 double, 2 string, -1 any
};

const std::map<std::string, KeySpec>& key_table() {
  static const std::map<std::string, KeySpec> t = {
      {"location", {true, false, 2}},  {"secure", {true, false, 0}},
      {"powerClass", {true, false, 2}}, {"procType", {true, false, 2}},
      {"channelKind", {false, true, 2}}, {"bandwidth", {false, true, 1}},
  };
  return t;
}

}  // namespace

bool MetadataSet::key_admissible(const std::string& key, MetaTargetClass target) {
  if (key.rfind("ext.", 0) == 0) return true;
  auto it = key_table().find(key);
  if (it == key_table().end()) return false;
  return target == MetaTargetClass::Node ? it->second.on_node : it->second.on_arc;
}

void MetadataSet::set(const std::string& key, MetaValue value) {
  entries_[key] = std::move(value);
}

void MetadataSet::erase(const std::string& key) { entries_.erase(key); }

bool MetadataSet::has(const std::string& key) const { return entries_.count(key) != 0; }

std::optional<MetaValue> MetadataSet::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> MetadataSet::get_string(const std::string& key) const {
  auto v = get(key);
  if (!v || !std::holds_alternative<std::string>(*v)) return std::nullopt;
  return std::get<std::string>(*v);
}

std::optional<bool> MetadataSet::get_bool(const std::string& key) const {
  auto v = get(key);
  if (!v || !std::holds_alternative<bool>(*v)) return std::nullopt;
  return std::get<bool>(*v);
}

std::optional<double> MetadataSet::get_number(const std::string& key) const {
  auto v = get(key);
  if (!v || !std::holds_alternative<double>(*v)) return std::nullopt;
  return std::get<double>(*v);
}

std::optional<ChannelKind> MetadataSet::channel_kind() const {
  auto s = get_string("channelKind");
  if (!s) return std::nullopt;
  if (*s == "ssl") return ChannelKind::Ssl;
  if (*s == "plain") return ChannelKind::Plain;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// ApplicationGraph accessors
// ---------------------------------------------------------------------------

const NodeRecord& ApplicationGraph::node(const NodeId& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw Error(Errc::UnknownTarget, "unknown node " + id);
  return it->second;
}

const ArcRecord& ApplicationGraph::arc(const ArcId& id) const {
  auto it = arcs_.find(id);
  if (it == arcs_.end())
    throw Error(Errc::UnknownTarget, "unknown arc (" + id.first + "," + id.second + ")");
  return it->second;
}

std::vector<NodeId> ApplicationGraph::nodes_of_kind(NodeKind kind) const {
  std::vector<NodeId> out;
  for (const auto& [id, rec] : nodes_)
    if (rec.kind == kind) out.push_back(id);
  return out;
}

std::vector<ArcId> ApplicationGraph::arcs_touching(const NodeId& id) const {
  std::vector<ArcId> out;
  for (const auto& [a, rec] : arcs_)
    if (a.first == id || a.second == id) out.push_back(a);
  return out;
}

std::vector<NodeId> ApplicationGraph::farm_workers(const std::string& farm_tag) const {
  std::vector<NodeId> out;
  for (const auto& [id, rec] : nodes_)
    if (rec.kind == NodeKind::Worker && rec.farm_tag == farm_tag) out.push_back(id);
  return out;
}

std::optional<NodeId> ApplicationGraph::farm_emitter(const std::string& farm_tag) const {
  for (const auto& [id, rec] : nodes_)
    if (rec.kind == NodeKind::Emitter && rec.farm_tag == farm_tag) return id;
  return std::nullopt;
}

std::optional<NodeId> ApplicationGraph::farm_collector(const std::string& farm_tag) const {
  for (const auto& [id, rec] : nodes_)
    if (rec.kind == NodeKind::Collector && rec.farm_tag == farm_tag) return id;
  return std::nullopt;
}

std::vector<std::string> ApplicationGraph::farm_tags() const {
  std::set<std::string> tags;
  for (const auto& [id, rec] : nodes_)
    if (!rec.farm_tag.empty()) tags.insert(rec.farm_tag);
  return {tags.begin(), tags.end()};
}

std::vector<NodeId> ApplicationGraph::topo_order() const {
  std::map<NodeId, int> indeg;
  for (const auto& [id, rec] : nodes_) indeg[id] = 0;
  for (const auto& [a, rec] : arcs_) indeg[a.second]++;
  std::set<NodeId> ready;
  for (const auto& [id, d] : indeg)
    if (d == 0) ready.insert(id);
  std::vector<NodeId> order;
  while (!ready.empty()) {
    NodeId id = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(id);
    for (const auto& [a, rec] : arcs_)
      if (a.first == id && --indeg[a.second] == 0) ready.insert(a.second);
  }
  return order;  // shorter than nodes_ if cyclic; validate reports that
}

// ---------------------------------------------------------------------------
// expand
// ---------------------------------------------------------------------------

namespace {

struct Expander {
  GraphBuilder b;
  const ExpandConfig& cfg;
  int farm_count = 0;

  NodeId add_node(const std::string& id, NodeRecord rec) {
    if (b.nodes().count(id))
      throw Error(Errc::MalformedSkeleton, "node id collision: " + id);
    b.nodes().emplace(id, std::move(rec));
    return id;
  }

  void add_arc(const NodeId& from, const NodeId& to) {
    b.arcs().emplace(ArcId{from, to}, ArcRecord{});
  }

  static std::string join_suffix(const std::string& suffix, int i) {
    return suffix.empty() ? std::to_string(i) : suffix + "_" + std::to_string(i);
  }

  // Returns (entry, exit) boundary node ids of the expanded subtree.
  std::pair<NodeId, NodeId> walk(const SkeletonExpr& e, const std::string& path,
                                 const std::string& replica_suffix) {
    if (e.is_seq()) {
      const auto& s = e.as_seq();
      NodeId id = "n_" + s.label + replica_suffix;
      add_node(id, NodeRecord{NodeKind::SeqStage, path, "", s.service_time, {}});
      return {id, id};
    }
    if (e.is_pipeline()) {
      const auto& p = e.as_pipeline();
      std::optional<NodeId> prev_exit;
      NodeId entry;
      for (size_t i = 0; i < p.stages.size(); ++i) {
        auto [en, ex] = walk(p.stages[i], path + "/s" + std::to_string(i + 1), replica_suffix);
        if (i == 0) entry = en;
        if (prev_exit) add_arc(*prev_exit, en);
        prev_exit = ex;
      }
      return {entry, *prev_exit};
    }
    const auto& f = e.as_farm();
    int fnum = ++farm_count;
    std::string fsuf = fnum == 1 ? "" : std::to_string(fnum);
    std::string tag = "farm" + std::to_string(fnum) +
                      (replica_suffix.empty() ? "" : "#" + replica_suffix);
    NodeId em = add_node("n_e" + fsuf + replica_suffix,
                         NodeRecord{NodeKind::Emitter, path + "/e", tag, 0.0, {}});
    NodeId co = add_node("n_c" + fsuf + replica_suffix,
                         NodeRecord{NodeKind::Collector, path + "/c", tag, 0.0, {}});
    int k = f.degree.value_or(cfg.default_farm_degree);
    if (k < 1) throw Error(Errc::MalformedSkeleton, "farm degree must be >= 1");
    const auto& w = f.worker->as_seq();
    for (int i = 1; i <= k; ++i) {
      std::string wsuf = join_suffix(replica_suffix, i);
      NodeId wid = add_node("n_" + w.label + wsuf,
                            NodeRecord{NodeKind::Worker, path + "/w" + std::to_string(i), tag,
                                       w.service_time, {}});
      add_arc(em, wid);
      add_arc(wid, co);
    }
    return {em, co};
  }
};

}  // namespace

ApplicationGraph expand(const SkeletonExpr& expr, const ExpandConfig& defaults) {
  expr.check_well_formed();
  Expander ex{GraphBuilder{}, defaults};
  ex.walk(expr, "", "");
  ex.b.set_version(0);
  return std::move(ex.b.g);
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

ValidationReport validate(const ApplicationGraph& g) {
  ValidationReport r;
  auto err = [&](const std::string& m) {
    r.issues.push_back({ValidationIssue::Severity::Error, m});
  };
  auto lint = [&](const std::string& m) {
    r.issues.push_back({ValidationIssue::Severity::Lint, m});
  };

  for (const auto& [a, rec] : g.arcs()) {
    if (!g.has_node(a.first) || !g.has_node(a.second))
      err("dangling arc (" + a.first + "," + a.second + ")");
    if (a.first == a.second) err("self-loop on " + a.first);
  }

  if (g.topo_order().size() != g.nodes().size()) err("graph contains a cycle");

  // weak connectivity
  if (g.nodes().size() > 1) {
    std::set<NodeId> seen;
    std::deque<NodeId> q{g.nodes().begin()->first};
    seen.insert(q.front());
    while (!q.empty()) {
      NodeId id = q.front();
      q.pop_front();
      for (const auto& [a, rec] : g.arcs()) {
        if (a.first == id && !seen.count(a.second)) { seen.insert(a.second); q.push_back(a.second); }
        if (a.second == id && !seen.count(a.first)) { seen.insert(a.first); q.push_back(a.first); }
      }
    }
    if (seen.size() != g.nodes().size()) err("graph is not connected");
  }

  // farm star shape
  for (const auto& tag : g.farm_tags()) {
    auto em = g.farm_emitter(tag);
    auto co = g.farm_collector(tag);
    auto workers = g.farm_workers(tag);
    if (!em) err("farm " + tag + " has no emitter");
    if (!co) err("farm " + tag + " has no collector");
    if (workers.empty()) err("farm " + tag + " has no workers");
    if (!em || !co) continue;
    for (const auto& w : workers) {
      if (!g.has_arc({*em, w})) err("farm " + tag + ": missing arc " + *em + "->" + w);
      if (!g.has_arc({w, *co})) err("farm " + tag + ": missing arc " + w + "->" + *co);
      for (const auto& a : g.arcs_touching(w)) {
        if (a != ArcId{*em, w} && a != ArcId{w, *co})
          err("farm " + tag + ": worker " + w + " has extra arc (" + a.first + "," +
              a.second + ")");
      }
    }
    for (const auto& a : g.arcs_touching(*em)) {
      if (a.first == *em && g.has_node(a.second) && g.node(a.second).farm_tag != tag)
        err("farm " + tag + ": emitter arc leaves the farm");
    }
  }

  for (const auto& [id, rec] : g.nodes()) {
    if (rec.kind != NodeKind::SeqStage && rec.farm_tag.empty())
      err("node " + id + " has farm role but no farm tag");
    for (const auto& [k, v] : rec.meta.entries())
      if (!MetadataSet::key_admissible(k, MetaTargetClass::Node))
        err("node " + id + ": inadmissible metadata key " + k);
  }
  for (const auto& [a, rec] : g.arcs()) {
    for (const auto& [k, v] : rec.meta.entries())
      if (!MetadataSet::key_admissible(k, MetaTargetClass::Arc))
        err("arc (" + a.first + "," + a.second + "): inadmissible metadata key " + k);
    if (rec.meta.channel_kind() == ChannelKind::Ssl && g.has_node(a.first) &&
        g.has_node(a.second)) {
      auto s1 = g.node(a.first).meta.secure();
      auto s2 = g.node(a.second).meta.secure();
      if (s1 == true && s2 == true)
        lint("arc (" + a.first + "," + a.second + ") is ssl between two secure nodes");
    }
  }
  return r;
}

bool ValidationReport::well_formed() const {
  return std::none_of(issues.begin(), issues.end(), [](const ValidationIssue& i) {
    return i.severity == ValidationIssue::Severity::Error;
  });
}

// ---------------------------------------------------------------------------
// diff / apply_delta / annotate
// ---------------------------------------------------------------------------

namespace {

bool same_structure(const NodeRecord& a, const NodeRecord& b) {
  return a.kind == b.kind && a.skeleton_path == b.skeleton_path &&
         a.farm_tag == b.farm_tag && a.service_time == b.service_time;
}

template <typename Id>
void diff_meta(const Id& target, const MetadataSet& oldm, const MetadataSet& newm,
               std::vector<MetadataChange>& out) {
  for (const auto& [k, v] : oldm.entries()) {
    auto nv = newm.get(k);
    if (!nv) out.push_back({target, k, v, std::nullopt});
    else if (*nv != v) out.push_back({target, k, v, nv});
  }
  for (const auto& [k, v] : newm.entries())
    if (!oldm.has(k)) out.push_back({target, k, std::nullopt, v});
}

}  // namespace

GraphDelta diff(const ApplicationGraph& g_old, const ApplicationGraph& g_new) {
  GraphDelta d;
  d.base_version = g_old.version();
  for (const auto& [id, rec] : g_old.nodes()) {
    auto it = g_new.nodes().find(id);
    if (it == g_new.nodes().end()) {
      d.removed_nodes.emplace_back(id, rec);
    } else if (!same_structure(rec, it->second)) {
      d.removed_nodes.emplace_back(id, rec);
      d.added_nodes.emplace_back(id, it->second);
    } else if (rec.meta != it->second.meta) {
      diff_meta(id, rec.meta, it->second.meta, d.metadata_changes);
    }
  }
  for (const auto& [id, rec] : g_new.nodes())
    if (!g_old.nodes().count(id)) d.added_nodes.emplace_back(id, rec);
  for (const auto& [a, rec] : g_old.arcs()) {
    auto it = g_new.arcs().find(a);
    if (it == g_new.arcs().end()) d.removed_arcs.emplace_back(a, rec);
    else if (rec.meta != it->second.meta)
      diff_meta(a, rec.meta, it->second.meta, d.metadata_changes);
  }
  for (const auto& [a, rec] : g_new.arcs())
    if (!g_old.arcs().count(a)) d.added_arcs.emplace_back(a, rec);
  return d;
}

ApplicationGraph apply_delta(const ApplicationGraph& g, const GraphDelta& d) {
  if (d.base_version != g.version())
    throw Error(Errc::StaleDelta, "delta base version " + std::to_string(d.base_version) +
                                      " != graph version " + std::to_string(g.version()));
  GraphBuilder b{g};
  for (const auto& [a, rec] : d.removed_arcs) {
    if (!b.arcs().erase(a))
      throw Error(Errc::WouldMalform, "removing absent arc (" + a.first + "," + a.second + ")");
  }
  for (const auto& [id, rec] : d.removed_nodes) {
    if (!b.nodes().erase(id)) throw Error(Errc::WouldMalform, "removing absent node " + id);
  }
  for (const auto& [id, rec] : d.added_nodes) {
    if (!b.nodes().emplace(id, rec).second)
      throw Error(Errc::WouldMalform, "adding duplicate node " + id);
  }
  for (const auto& [a, rec] : d.added_arcs) {
    if (!b.arcs().emplace(a, rec).second)
      throw Error(Errc::WouldMalform,
                  "adding duplicate arc (" + a.first + "," + a.second + ")");
  }
  for (const auto& mc : d.metadata_changes) {
    MetadataSet* meta = nullptr;
    if (std::holds_alternative<NodeId>(mc.target)) {
      auto it = b.nodes().find(std::get<NodeId>(mc.target));
      if (it == b.nodes().end())
        throw Error(Errc::WouldMalform, "metadata change on absent node");
      meta = &it->second.meta;
    } else {
      auto it = b.arcs().find(std::get<ArcId>(mc.target));
      if (it == b.arcs().end())
        throw Error(Errc::WouldMalform, "metadata change on absent arc");
      meta = &it->second.meta;
    }
    if (mc.new_value) meta->set(mc.key, *mc.new_value);
    else meta->erase(mc.key);
  }
  b.set_version(g.version() + 1);
  auto report = validate(b.g);
  if (!report.well_formed()) {
    std::ostringstream os;
    os << "delta would malform graph:";
    for (const auto& i : report.issues)
      if (i.severity == ValidationIssue::Severity::Error) os << " [" << i.message << "]";
    throw Error(Errc::WouldMalform, os.str());
  }
  return std::move(b.g);
}

namespace {

template <typename Map, typename Id>
ApplicationGraph annotate_impl(const ApplicationGraph& g, Map& (GraphBuilder::*access)(),
                               const Id& target, MetaTargetClass cls,
                               const std::string& key, MetaValue value) {
  if (!MetadataSet::key_admissible(key, cls))
    throw Error(Errc::KeyClassMismatch, "key '" + key + "' not admissible on this target");
  auto spec = key_table().find(key);
  if (spec != key_table().end() && spec->second.value_index >= 0 &&
      value.index() != static_cast<size_t>(spec->second.value_index))
    throw Error(Errc::KeyClassMismatch, "wrong value type for key '" + key + "'");
  GraphBuilder b{g};
  auto& map = (b.*access)();
  auto it = map.find(target);
  if (it == map.end()) throw Error(Errc::UnknownTarget, "annotate: unknown target");
  it->second.meta.set(key, std::move(value));
  b.set_version(g.version() + 1);
  return std::move(b.g);
}

}  // namespace

ApplicationGraph annotate(const ApplicationGraph& g, const NodeId& node,
                          const std::string& key, MetaValue value) {
  return annotate_impl(g, &GraphBuilder::nodes, node, MetaTargetClass::Node, key,
                       std::move(value));
}

ApplicationGraph annotate(const ApplicationGraph& g, const ArcId& arc,
                          const std::string& key, MetaValue value) {
  return annotate_impl(g, &GraphBuilder::arcs, arc, MetaTargetClass::Arc, key,
                       std::move(value));
}

// ---------------------------------------------------------------------------
// JSON export
// ---------------------------------------------------------------------------

nlohmann::json meta_to_json(const MetadataSet& m) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : m.entries()) {
    std::visit([&](const auto& x) { j[k] = x; }, v);
  }
  return j;
}

nlohmann::json ApplicationGraph::to_json() const {
  nlohmann::json j;
  j["version"] = version_;
  j["nodes"] = nlohmann::json::array();
  for (const auto& [id, rec] : nodes_) {
    j["nodes"].push_back(
        {{"id", id}, {"kind", to_string(rec.kind)}, {"meta", meta_to_json(rec.meta)}});
  }
  j["arcs"] = nlohmann::json::array();
  for (const auto& [a, rec] : arcs_) {
    j["arcs"].push_back(
        {{"from", a.first}, {"to", a.second}, {"meta", meta_to_json(rec.meta)}});
  }
  return j;
}

std::string ApplicationGraph::to_json_string() const { return to_json().dump(); }

nlohmann::json GraphDelta::to_json() const {
  nlohmann::json j;
  j["base_version"] = base_version;
  j["added_nodes"] = nlohmann::json::array();
  for (const auto& [id, rec] : added_nodes)
    j["added_nodes"].push_back(
        {{"id", id}, {"kind", to_string(rec.kind)}, {"meta", meta_to_json(rec.meta)}});
  j["removed_nodes"] = nlohmann::json::array();
  for (const auto& [id, rec] : removed_nodes) j["removed_nodes"].push_back(id);
  j["added_arcs"] = nlohmann::json::array();
  for (const auto& [a, rec] : added_arcs)
    j["added_arcs"].push_back(
        {{"from", a.first}, {"to", a.second}, {"meta", meta_to_json(rec.meta)}});
  j["removed_arcs"] = nlohmann::json::array();
  for (const auto& [a, rec] : removed_arcs)
    j["removed_arcs"].push_back({{"from", a.first}, {"to", a.second}});
  j["metadata_changes"] = nlohmann::json::array();
  for (const auto& mc : metadata_changes) {
    nlohmann::json e;
    if (std::holds_alternative<NodeId>(mc.target)) e["node"] = std::get<NodeId>(mc.target);
    else {
      e["arc"] = {{"from", std::get<ArcId>(mc.target).first},
                  {"to", std::get<ArcId>(mc.target).second}};
    }
    e["key"] = mc.key;
    if (mc.new_value)
      std::visit([&](const auto& x) { e["value"] = x; }, *mc.new_value);
    else e["value"] = nullptr;
    j["metadata_changes"].push_back(e);
  }
  return j;
}

}  // namespace skelsim
