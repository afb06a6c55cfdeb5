#include <gtest/gtest.h>

#include <thread>

#include "spotter/api.hpp"
#include "spotter/bench_sim.hpp"
#include "spotter/server.hpp"
#include "support/random_snapshot.hpp"

using namespace spotter;

namespace {

Snapshot bench() {
    auto c = scenario_paper(3);
    c.duration = Duration{400'000};
    return simulate(c);
}

}  // namespace

TEST(ProfileService, SessionSummary) {
    const auto s = bench();
    ProfileService svc(s);
    const auto r = svc.get_session();
    ASSERT_EQ(r.status, 200);
    EXPECT_EQ(r.body["session_id"], s.header.session_id);
    EXPECT_EQ(r.body["counts"]["messages"], s.messages.size());
    EXPECT_EQ(r.body["counts"]["activities"], s.activities.size());
    const auto t = compute_impact_table(s);
    EXPECT_EQ(r.body["total_impact_micros"], t.session.total_impact.micros);
    EXPECT_EQ(r.body["total_activity_micros"], t.session.total_activity.micros);
    const auto agents = r.body["agents"].get<std::vector<std::string>>();
    EXPECT_TRUE(std::is_sorted(agents.begin(), agents.end()));
    EXPECT_EQ(agents.size(), s.agents.size());
}

TEST(ProfileService, TreeForEveryOrder) {
    ProfileService svc(bench());
    const auto def = svc.get_tree("");
    ASSERT_EQ(def.status, 200);
    EXPECT_EQ(def.body["order"], "emitter,receiver,content");
    const auto& root = def.body["nodes"][0];
    EXPECT_TRUE(root["parent_id"].is_null());
    EXPECT_EQ(root["pct_parent"]["text"], "100.0");
    for (const auto& o : LevelOrder::all()) {
        const auto r = svc.get_tree(o.to_string());
        ASSERT_EQ(r.status, 200);
        EXPECT_EQ(r.body["nodes"][0]["total_micros"], root["total_micros"]);
        EXPECT_EQ(r.body["nodes"].size(), svc.tree(o.to_string()).node_count());
    }
    EXPECT_EQ(svc.get_tree("emitter,emitter,content").status, 400);
    EXPECT_EQ(svc.get_tree("sideways").status, 400);
}

TEST(ProfileService, SearchMatchesTreeSearch) {
    ProfileService svc(bench());
    const auto none = svc.get_search("zzzz-not-there", "");
    ASSERT_EQ(none.status, 200);
    EXPECT_EQ(none.body["count"], 0);
    const auto hit = svc.get_search("AGENT002", "receiver,emitter,content");
    ASSERT_EQ(hit.status, 200);
    const auto& tree = svc.tree("receiver,emitter,content");
    EXPECT_EQ(hit.body["count"], search(tree, "agent002").count);
    EXPECT_GE(hit.body["count"].get<int>(), 2);
    for (const auto& id : hit.body["node_ids"]) EXPECT_NE(tree.find(id.get<NodeId>()), nullptr);
    EXPECT_EQ(svc.get_search("", "").status, 400);
    EXPECT_EQ(svc.get_search("x", "bad").status, 400);
}

TEST(ProfileService, NodeDetail) {
    ProfileService svc(bench());
    const auto root = svc.get_node("0", "");
    ASSERT_EQ(root.status, 200);
    EXPECT_EQ(root.body["level"], "session");
    EXPECT_TRUE(root.body.contains("session"));
    const auto& tree = svc.tree("");
    const auto& leaf = tree.leaves.front();
    NodeId leaf_id = -1;
    auto walk = [&](auto&& self, const CallGraphNode& n) -> void {
        if (n.msg_id == leaf.msg_id) leaf_id = n.node_id;
        for (const auto& c : n.children) self(self, c);
    };
    walk(walk, tree.root);
    ASSERT_GE(leaf_id, 0);
    const auto r = svc.get_node(std::to_string(leaf_id), "");
    ASSERT_EQ(r.status, 200);
    EXPECT_EQ(r.body["sent_micros"], leaf.sent.micros);
    EXPECT_EQ(r.body["recv_micros"], leaf.recv.micros);
    EXPECT_EQ(r.body["message"]["msg_id"], leaf.msg_id);
    EXPECT_EQ(r.body["path"].size(), 5u);
    EXPECT_EQ(r.body["window"]["start_micros"], leaf.recv.micros);
    EXPECT_EQ(svc.get_node("999999999", "").status, 404);
    EXPECT_EQ(svc.get_node("abc", "").status, 400);
}

TEST(ProfileService, VisibleAndFlat) {
    ProfileService svc(bench());
    const auto v = svc.get_visible("0", "");
    ASSERT_EQ(v.status, 200);
    const auto ids = v.body["node_ids"].get<std::vector<NodeId>>();
    const auto expected = visible_set(svc.tree(""), 0);
    EXPECT_EQ(std::set<NodeId>(ids.begin(), ids.end()), expected);
    EXPECT_EQ(svc.get_visible("-5", "").status, 404);
    EXPECT_EQ(svc.get_visible("", "").status, 400);
    const auto f = svc.get_flat();
    ASSERT_EQ(f.status, 200);
    EXPECT_EQ(f.body["rows"].size(), svc.snapshot().agents.size());
}

TEST(TreePayload, RoundTripsRandomTrees) {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const auto s = normalize(testgen::random_snapshot(seed));
        const auto order = LevelOrder::all()[seed % 6];
        const auto tree = build_tree(s, compute_impact_table(s), order);
        const auto text = tree_payload(tree).dump();
        EXPECT_EQ(tree_from_payload(nlohmann::json::parse(text)), tree) << "seed " << seed;
    }
}

TEST(HttpServer, ServesEndpoints) {
    ProfileService svc(bench());
    auto server = make_server(svc);
    const int port = server->bind_to_any_port("127.0.0.1");
    ASSERT_GT(port, 0);
    std::thread t([&] { server->listen_after_bind(); });
    server->wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    auto session = client.Get("/api/session");
    ASSERT_TRUE(session);
    EXPECT_EQ(session->status, 200);
    EXPECT_EQ(nlohmann::json::parse(session->body)["session_id"], svc.snapshot().header.session_id);

    auto tree = client.Get("/api/tree?order=content,emitter,receiver");
    ASSERT_TRUE(tree);
    EXPECT_EQ(tree->status, 200);
    EXPECT_EQ(nlohmann::json::parse(tree->body)["order"], "content,emitter,receiver");

    auto node = client.Get("/api/node/1?order=receiver,content,emitter");
    ASSERT_TRUE(node);
    EXPECT_EQ(node->status, 200);
    EXPECT_EQ(nlohmann::json::parse(node->body)["level"], "receiver");

    auto search = client.Get("/api/search?q=master1");
    ASSERT_TRUE(search);
    EXPECT_EQ(search->status, 200);

    auto missing = client.Get("/api/node/424242");
    ASSERT_TRUE(missing);
    EXPECT_EQ(missing->status, 404);
    auto bad = client.Get("/api/tree?order=nope");
    ASSERT_TRUE(bad);
    EXPECT_EQ(bad->status, 400);

    auto index = client.Get("/");
    ASSERT_TRUE(index);
    EXPECT_EQ(index->status, 200);
    EXPECT_NE(index->body.find("/api/tree"), std::string::npos);

    server->stop();
    t.join();
}
