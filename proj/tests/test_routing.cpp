#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hdqr/routing.hpp"

using namespace hdqr;

namespace {

Network reference_net() { return Network::load_file("topologies/reference.json"); }

// always picks the given index
ChooseLinkFn fixed_choice(int a) {
    return [a](const ChooseContext&) { return Choice{a, -1}; };
}

}  // namespace

TEST_CASE("one-divergence route through the first inter-cluster link") {
    Network net = reference_net();
    auto res = route_request(net, 1, 9, {}, fixed_choice(0));
    REQUIRE(res.success);
    CHECK(res.path.edges == std::vector<EdgeId>{10, 1});
    REQUIRE(res.path.decisions.size() == 1);
    CHECK(res.path.decisions[0].deciding_group == 40);
    CHECK(res.path.decisions[0].leader == 2);
    CHECK(res.path.decisions[0].level == 2);
    CHECK(res.path.decisions[0].action == 0);
    CHECK(res.path.decisions[0].edge == 1);
}

TEST_CASE("nested divergences recurse on the far side") {
    Network net = reference_net();
    auto res = route_request(net, 1, 16, {}, fixed_choice(0));
    REQUIRE(res.success);
    CHECK(res.path.edges == std::vector<EdgeId>{10, 1, 18, 38, 24});
    REQUIRE(res.path.decisions.size() == 2);
    CHECK(res.path.decisions[0].deciding_group == 40);
    CHECK(res.path.decisions[0].edge == 1);
    CHECK(res.path.decisions[1].deciding_group == 31);
    CHECK(res.path.decisions[1].leader == 9);
    CHECK(res.path.decisions[1].level == 1);
    CHECK(res.path.decisions[1].edge == 38);
}

TEST_CASE("divergences on both sides of the top-level link") {
    Network net = reference_net();
    auto choose = [](const ChooseContext& ctx) {
        // middle link at the top, only option below
        return Choice{ctx.deciding_group == 40 ? 1 : 0, -1};
    };
    auto res = route_request(net, 3, 16, {}, choose);
    REQUIRE(res.success);
    CHECK(res.path.edges == std::vector<EdgeId>{27, 2, 20, 39, 24});
    REQUIRE(res.path.decisions.size() == 3);
    CHECK(res.path.decisions[0].deciding_group == 30);
    CHECK(res.path.decisions[0].edge == 27);
    CHECK(res.path.decisions[1].deciding_group == 40);
    CHECK(res.path.decisions[1].edge == 2);
    CHECK(res.path.decisions[2].deciding_group == 31);
    CHECK(res.path.decisions[2].edge == 39);
}

TEST_CASE("chooser sees sorted candidates and endpoint vectors") {
    Network net = reference_net();
    int calls = 0;
    auto choose = [&](const ChooseContext& ctx) {
        if (ctx.deciding_group == 40) {
            ++calls;
            REQUIRE(ctx.candidates->size() == 3);
            CHECK((*ctx.candidates)[0].id == 1);
            CHECK((*ctx.candidates)[1].id == 2);
            CHECK((*ctx.candidates)[2].id == 3);
            CHECK(ctx.leader == 2);
            CHECK(ctx.g1->at_level(2) == 30);
            CHECK(ctx.g2->at_level(2) == 31);
        }
        return Choice{0, 7};
    };
    auto res = route_request(net, 1, 9, {}, choose);
    REQUIRE(res.success);
    CHECK(calls == 1);
    CHECK(res.path.decisions[0].seq == 7);
}

TEST_CASE("same source and destination is a trivial success") {
    Network net = reference_net();
    auto res = route_request(net, 5, 5, {}, fixed_choice(0));
    REQUIRE(res.success);
    CHECK(res.path.edges.empty());
    CHECK(res.path.decisions.empty());
}

TEST_CASE("intra-group request never consults the chooser") {
    Network net = reference_net();
    auto res = route_request(net, 1, 2, {},
                             [](const ChooseContext&) -> Choice {
                                 throw std::logic_error("chooser must not run");
                             });
    REQUIRE(res.success);
    CHECK(res.path.edges == std::vector<EdgeId>{10});
}

TEST_CASE("QoS exclusion fails the route without a partial path") {
    Network net = reference_net();
    QosFilter qos;
    qos.min_capacity = 500;  // excludes the 70-capacity inter-cluster links
    auto res = route_request(net, 1, 9, qos, fixed_choice(0));
    CHECK_FALSE(res.success);
    CHECK(res.path.edges.empty());
    CHECK(res.path.decisions.empty());
    CHECK(res.failure.find("no candidate link") != std::string::npos);
}

TEST_CASE("unknown endpoints and bad actions") {
    Network net = reference_net();
    CHECK_THROWS(route_request(net, 1, 99, {}, fixed_choice(0)));
    CHECK_THROWS(route_request(net, 1, 9, {}, fixed_choice(3)));
    CHECK_THROWS(route_request(net, 1, 9, {}, fixed_choice(-1)));
}

TEST_CASE("intra_group_path is a directed hop-count search") {
    Network net = reference_net();
    CHECK(intra_group_path(net, 9, 10) == std::vector<EdgeId>{18});
    CHECK(intra_group_path(net, 10, 9) == std::vector<EdgeId>{19});
    CHECK(intra_group_path(net, 9, 9) == std::vector<EdgeId>{});
    CHECK_THROWS_AS(intra_group_path(net, 1, 9), TopologyError);
}

TEST_CASE("directed-only connectivity leaves the reverse side unreachable") {
    const char* doc = R"({
      "depth": 1,
      "nodes": [1, 2],
      "edges": [{"id": 1, "from": 1, "to": 2, "capacity": 1}],
      "groups": [{"level": 1, "id": 5, "members": [1, 2], "leader": 1}]
    })";
    Network net = Network::load_string(doc);
    CHECK(intra_group_path(net, 1, 2) == std::vector<EdgeId>{1});
    CHECK_FALSE(intra_group_path(net, 2, 1).has_value());
    auto res = route_request(net, 2, 1, {}, fixed_choice(0));
    CHECK_FALSE(res.success);
    CHECK(res.failure.find("no intra-group path") != std::string::npos);
}

TEST_CASE("feedback reaches every decision with the same signal") {
    Network net = reference_net();
    auto res = route_request(net, 3, 16, {}, fixed_choice(0));
    REQUIRE(res.success);
    REQUIRE(res.path.decisions.size() == 3);
    std::vector<std::pair<GroupId, double>> seen;
    dispatch_feedback(res.path, 0.5, [&](const LeaderDecision& d, double y) {
        seen.emplace_back(d.deciding_group, y);
    });
    REQUIRE(seen.size() == 3);
    for (auto& [g, y] : seen) CHECK(y == 0.5);
    CHECK(seen[0].first == 30);
    CHECK(seen[1].first == 40);
    CHECK(seen[2].first == 31);
    CHECK_THROWS(dispatch_feedback(res.path, 1.5, [](const LeaderDecision&, double) {}));
}

TEST_CASE("route determinism under a stateless chooser") {
    Network net = reference_net();
    for (int rep = 0; rep < 5; ++rep) {
        auto a = route_request(net, 4, 15, {}, fixed_choice(0));
        auto b = route_request(net, 4, 15, {}, fixed_choice(0));
        REQUIRE(a.success);
        CHECK(a.path.edges == b.path.edges);
    }
}
