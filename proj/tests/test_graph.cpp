#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "skelsim/graph.hpp"

#include <nlohmann/json.hpp>

using namespace skelsim;

namespace {

SkeletonExpr canonical() {
  return SkeletonExpr::pipeline({SkeletonExpr::seq("s1", 1.0),
                                 SkeletonExpr::farm(SkeletonExpr::seq("w", 4.0)),
                                 SkeletonExpr::seq("s2", 0.5)});
}

}  // namespace

TEST_CASE("expand: canonical three-stage pipeline with a degree-4 farm") {
  ApplicationGraph g = expand(canonical(), ExpandConfig{4});
  CHECK(g.nodes().size() == 8);
  CHECK(g.arcs().size() == 10);
  CHECK(g.version() == 0);

  for (const char* id : {"n_s1", "n_e", "n_w1", "n_w2", "n_w3", "n_w4", "n_c", "n_s2"})
    CHECK(g.has_node(id));

  CHECK(g.node("n_s1").kind == NodeKind::SeqStage);
  CHECK(g.node("n_e").kind == NodeKind::Emitter);
  CHECK(g.node("n_w1").kind == NodeKind::Worker);
  CHECK(g.node("n_c").kind == NodeKind::Collector);
  CHECK(g.node("n_w1").service_time == 4.0);
  CHECK(g.node("n_e").service_time == 0.0);

  CHECK(g.has_arc({"n_s1", "n_e"}));
  for (int i = 1; i <= 4; ++i) {
    std::string w = "n_w" + std::to_string(i);
    CHECK(g.has_arc({"n_e", w}));
    CHECK(g.has_arc({w, "n_c"}));
  }
  CHECK(g.has_arc({"n_c", "n_s2"}));

  CHECK(g.farm_tags() == std::vector<std::string>{"farm1"});
  CHECK(g.farm_workers("farm1").size() == 4);
  CHECK(g.farm_emitter("farm1") == NodeId("n_e"));
  CHECK(g.farm_collector("farm1") == NodeId("n_c"));

  auto order = g.topo_order();
  REQUIRE(order.size() == 8);
  CHECK(order.front() == "n_s1");
  CHECK(order.back() == "n_s2");
}

TEST_CASE("expand is deterministic") {
  ApplicationGraph a = expand(canonical(), ExpandConfig{4});
  ApplicationGraph b = expand(canonical(), ExpandConfig{4});
  CHECK(a == b);
  CHECK(a.to_json_string() == b.to_json_string());
}

TEST_CASE("expand honours explicit degree and the configured default") {
  auto farm1 = SkeletonExpr::pipeline(
      {SkeletonExpr::seq("a", 1.0), SkeletonExpr::farm(SkeletonExpr::seq("w", 1.0), 2)});
  CHECK(expand(farm1, ExpandConfig{7}).farm_workers("farm1").size() == 2);
  auto farm2 = SkeletonExpr::pipeline(
      {SkeletonExpr::seq("a", 1.0), SkeletonExpr::farm(SkeletonExpr::seq("w", 1.0))});
  CHECK(expand(farm2, ExpandConfig{7}).farm_workers("farm1").size() == 7);
}

TEST_CASE("check_well_formed rejects malformed skeletons") {
  CHECK_THROWS_WITH_AS(SkeletonExpr::pipeline({SkeletonExpr::seq("a", 1.0)}).check_well_formed(),
                       doctest::Contains("at least 2"), Error);
  CHECK_THROWS_AS(SkeletonExpr::farm(SkeletonExpr::seq("w", 1.0), 0).check_well_formed(),
                  Error);
  CHECK_THROWS_AS(SkeletonExpr::pipeline({SkeletonExpr::seq("a", 1.0),
                                          SkeletonExpr::seq("a", 2.0)})
                      .check_well_formed(),
                  Error);
  // farms of non-sequential workers are out of scope
  CHECK_THROWS_AS(
      SkeletonExpr::farm(SkeletonExpr::pipeline({SkeletonExpr::seq("a", 1.0),
                                                 SkeletonExpr::seq("b", 1.0)}))
          .check_well_formed(),
      Error);
  try {
    SkeletonExpr::farm(SkeletonExpr::seq("w", 1.0), 0).check_well_formed();
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MalformedSkeleton);
  }
}

TEST_CASE("validate flags structural damage") {
  ApplicationGraph g = expand(canonical(), ExpandConfig{4});
  CHECK(validate(g).well_formed());

  SUBCASE("dangling arc") {
    GraphBuilder b{g};
    b.nodes().erase("n_s2");
    auto r = validate(b.g);
    CHECK_FALSE(r.well_formed());
  }
  SUBCASE("self-loop") {
    GraphBuilder b{g};
    b.arcs().emplace(ArcId{"n_s1", "n_s1"}, ArcRecord{});
    CHECK_FALSE(validate(b.g).well_formed());
  }
  SUBCASE("worker with an extra arc breaks the farm star") {
    GraphBuilder b{g};
    b.arcs().emplace(ArcId{"n_w1", "n_w2"}, ArcRecord{});
    CHECK_FALSE(validate(b.g).well_formed());
  }
  SUBCASE("disconnected component") {
    GraphBuilder b{g};
    b.nodes().emplace("n_x", NodeRecord{NodeKind::SeqStage, "/x", "", 1.0, {}});
    CHECK_FALSE(validate(b.g).well_formed());
  }
  SUBCASE("inadmissible metadata key is an error") {
    GraphBuilder b{g};
    b.nodes().at("n_s1").meta.set("channelKind", std::string("ssl"));
    CHECK_FALSE(validate(b.g).well_formed());
  }
  SUBCASE("ssl between secure endpoints is a lint, not an error") {
    GraphBuilder b{g};
    b.nodes().at("n_s1").meta.set("secure", true);
    b.nodes().at("n_e").meta.set("secure", true);
    b.arcs().at({"n_s1", "n_e"}).meta.set("channelKind", std::string("ssl"));
    auto r = validate(b.g);
    CHECK(r.well_formed());
    CHECK_FALSE(r.empty());
  }
}

TEST_CASE("metadata key admissibility") {
  CHECK(MetadataSet::key_admissible("location", MetaTargetClass::Node));
  CHECK_FALSE(MetadataSet::key_admissible("location", MetaTargetClass::Arc));
  CHECK(MetadataSet::key_admissible("channelKind", MetaTargetClass::Arc));
  CHECK_FALSE(MetadataSet::key_admissible("channelKind", MetaTargetClass::Node));
  CHECK(MetadataSet::key_admissible("bandwidth", MetaTargetClass::Arc));
  CHECK_FALSE(MetadataSet::key_admissible("madeUpKey", MetaTargetClass::Node));
  CHECK(MetadataSet::key_admissible("ext.anything", MetaTargetClass::Node));
  CHECK(MetadataSet::key_admissible("ext.anything", MetaTargetClass::Arc));
}

TEST_CASE("annotate guards targets and key classes") {
  ApplicationGraph g = expand(canonical(), ExpandConfig{4});
  ApplicationGraph g2 = annotate(g, NodeId("n_w1"), "location", std::string("r1"));
  CHECK(g2.version() == g.version() + 1);
  CHECK(g2.node("n_w1").meta.location() == std::string("r1"));
  CHECK_FALSE(g.node("n_w1").meta.location().has_value());  // original untouched

  CHECK_THROWS_AS(annotate(g, NodeId("n_missing"), "secure", true), Error);
  try {
    annotate(g, NodeId("n_w1"), "channelKind", std::string("ssl"));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::KeyClassMismatch);
  }
  // wrong value type for a known key
  CHECK_THROWS_AS(annotate(g, NodeId("n_w1"), "secure", std::string("yes")), Error);
  // ext.* takes any type anywhere
  CHECK_NOTHROW(annotate(g, ArcId{"n_s1", "n_e"}, "ext.note", 3.0));
}

TEST_CASE("diff/apply round-trip on hand-built edits") {
  ApplicationGraph g0 = expand(canonical(), ExpandConfig{4});

  SUBCASE("add a worker") {
    GraphBuilder b{g0};
    NodeRecord w = b.nodes().at("n_w1");
    b.nodes().emplace("n_w5", w);
    b.arcs().emplace(ArcId{"n_e", "n_w5"}, ArcRecord{});
    b.arcs().emplace(ArcId{"n_w5", "n_c"}, ArcRecord{});
    ApplicationGraph g1 = std::move(b.g);
    GraphDelta d = diff(g0, g1);
    CHECK(d.added_nodes.size() == 1);
    CHECK(d.added_arcs.size() == 2);
    CHECK(d.removed_nodes.empty());
    ApplicationGraph applied = apply_delta(g0, d);
    CHECK(applied.same_content(g1));
    CHECK(applied.version() == g0.version() + 1);
  }
  SUBCASE("metadata-only change produces a metadata delta") {
    ApplicationGraph g1 = annotate(g0, NodeId("n_w1"), "secure", true);
    GraphBuilder fix{g1};
    fix.set_version(g0.version());  // compare content at equal version
    GraphDelta d = diff(g0, fix.g);
    CHECK(d.added_nodes.empty());
    CHECK(d.removed_nodes.empty());
    CHECK(d.metadata_changes.size() == 1);
    CHECK(apply_delta(g0, d).same_content(g1));
  }
  SUBCASE("empty diff for identical graphs") {
    CHECK(diff(g0, g0).empty());
  }
}

TEST_CASE("apply_delta rejects stale and malforming deltas") {
  ApplicationGraph g0 = expand(canonical(), ExpandConfig{4});
  GraphBuilder b{g0};
  NodeRecord w = b.nodes().at("n_w1");
  b.nodes().emplace("n_w5", w);
  b.arcs().emplace(ArcId{"n_e", "n_w5"}, ArcRecord{});
  b.arcs().emplace(ArcId{"n_w5", "n_c"}, ArcRecord{});
  GraphDelta d = diff(g0, b.g);

  ApplicationGraph g1 = apply_delta(g0, d);
  try {
    apply_delta(g1, d);  // base_version now stale
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::StaleDelta);
  }

  GraphDelta orphan;
  orphan.base_version = g0.version();
  orphan.added_arcs.emplace_back(ArcId{"n_e", "n_missing"}, ArcRecord{});
  try {
    apply_delta(g0, orphan);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::WouldMalform);
  }

  GraphDelta drop_worker;  // removing the node but not its arcs dangles them
  drop_worker.base_version = g0.version();
  drop_worker.removed_nodes.emplace_back("n_w1", g0.node("n_w1"));
  CHECK_THROWS_AS(apply_delta(g0, drop_worker), Error);
}

TEST_CASE("property: diff/apply round-trip under random valid mutations") {
  std::mt19937_64 rng(7);
  ApplicationGraph g = expand(canonical(), ExpandConfig{4});
  int next_worker = 5;

  for (int iter = 0; iter < 60; ++iter) {
    GraphBuilder b{g};
    switch (rng() % 4) {
      case 0: {  // add a worker
        NodeRecord w = b.nodes().at(*g.farm_workers("farm1").begin());
        NodeId id = "n_w" + std::to_string(next_worker++);
        b.nodes().emplace(id, w);
        b.arcs().emplace(ArcId{"n_e", id}, ArcRecord{});
        b.arcs().emplace(ArcId{id, "n_c"}, ArcRecord{});
        break;
      }
      case 1: {  // remove a worker if more than one remains
        auto workers = g.farm_workers("farm1");
        if (workers.size() > 1) {
          NodeId victim = workers[rng() % workers.size()];
          b.nodes().erase(victim);
          b.arcs().erase(ArcId{"n_e", victim});
          b.arcs().erase(ArcId{victim, "n_c"});
        }
        break;
      }
      case 2: {  // toggle an arc's channel kind
        auto it = b.arcs().begin();
        std::advance(it, rng() % b.arcs().size());
        bool ssl = it->second.meta.channel_kind() == ChannelKind::Ssl;
        it->second.meta.set("channelKind", std::string(ssl ? "plain" : "ssl"));
        break;
      }
      case 3: {  // flip a node's secure flag
        auto it = b.nodes().begin();
        std::advance(it, rng() % b.nodes().size());
        it->second.meta.set("secure", !(it->second.meta.secure() == true));
        break;
      }
    }
    b.set_version(g.version());
    ApplicationGraph target = std::move(b.g);
    REQUIRE(validate(target).well_formed());

    GraphDelta d = diff(g, target);
    ApplicationGraph applied = apply_delta(g, d);
    REQUIRE(applied.same_content(target));
    REQUIRE(applied.version() == g.version() + 1);
    g = std::move(applied);  // versions grow monotonically across iterations
    REQUIRE(g.version() == static_cast<std::uint64_t>(iter + 1));
  }
}

TEST_CASE("graph snapshot serializes nodes, arcs and version") {
  ApplicationGraph g = expand(canonical(), ExpandConfig{2});
  g = annotate(g, NodeId("n_w1"), "location", std::string("r9"));
  nlohmann::json j = g.to_json();
  CHECK(j["version"] == 1);
  CHECK(j["nodes"].size() == 6);
  CHECK(j["arcs"].size() == 6);
  bool found = false;
  for (const auto& n : j["nodes"])
    if (n["id"] == "n_w1") {
      found = true;
      CHECK(n["kind"] == "worker");
      CHECK(n["meta"]["location"] == "r9");
    }
  CHECK(found);
}
