#include "hdqr/routing.hpp"

#include <map>
#include <queue>

namespace hdqr {

std::optional<std::vector<EdgeId>> intra_group_path(const Network& net, NodeId from,
                                                    NodeId to) {
    if (from == to) return std::vector<EdgeId>{};
    if (net.group_at(from, 1) != net.group_at(to, 1))
        throw TopologyError("intra_group_path: nodes in different level-1 groups");
    std::map<NodeId, std::pair<NodeId, EdgeId>> prev;
    std::queue<NodeId> q;
    q.push(from);
    prev[from] = {from, 0};
    while (!q.empty()) {
        NodeId u = q.front();
        q.pop();
        if (u == to) break;
        for (auto [eid, w] : net.intra_group_out(u)) {
            if (!prev.count(w)) {
                prev[w] = {u, eid};
                q.push(w);
            }
        }
    }
    if (!prev.count(to)) return std::nullopt;
    std::vector<EdgeId> path;
    for (NodeId u = to; u != from; u = prev[u].first) path.push_back(prev[u].second);
    std::reverse(path.begin(), path.end());
    return path;
}

namespace {

struct Assembler {
    const Network& net;
    const QosFilter& qos;
    const ChooseLinkFn& choose;
    Path path;
    std::string failure;

    bool assemble(NodeId v1, NodeId v2, int h_bound) {
        const GroupVector& g1 = net.group_vector(v1);
        const GroupVector& g2 = net.group_vector(v2);
        for (int h = h_bound; h >= 1; --h) {
            if (g1.at_level(h) == g2.at_level(h)) continue;
            // first divergence found while scanning downward
            GroupId parent = g1.at_level(h + 1);  // == g2.at_level(h+1)
            NodeId leader = net.leader_of(parent);
            auto candidates = net.find_links(g1.at_level(h), g2.at_level(h), h, qos);
            if (candidates.empty()) {
                failure = "no candidate link between groups " +
                          std::to_string(g1.at_level(h)) + " and " +
                          std::to_string(g2.at_level(h)) + " at level " + std::to_string(h);
                return false;
            }
            ChooseContext ctx;
            ctx.deciding_group = parent;
            ctx.leader = leader;
            ctx.level = h;
            ctx.g1 = &g1;
            ctx.g2 = &g2;
            ctx.candidates = &candidates;
            Choice c = choose(ctx);
            if (c.action < 0 || c.action >= static_cast<int>(candidates.size()))
                throw std::out_of_range("ChooseLink returned an out-of-range action");
            const Edge& e = candidates[c.action];

            if (!assemble(v1, e.from, h - 1)) return false;
            path.edges.push_back(e.id);
            LeaderDecision d;
            d.leader = leader;
            d.deciding_group = parent;
            d.level = h;
            d.action = c.action;
            d.edge = e.id;
            d.seq = c.seq;
            path.decisions.push_back(d);
            return assemble(e.to, v2, h - 1);
        }
        // vectors agree on every scanned level: same level-1 group
        auto seg = intra_group_path(net, v1, v2);
        if (!seg) {
            failure = "no intra-group path from " + std::to_string(v1) + " to " +
                      std::to_string(v2);
            return false;
        }
        path.edges.insert(path.edges.end(), seg->begin(), seg->end());
        return true;
    }
};

}  // namespace

RouteResult route_request(const Network& net, NodeId source, NodeId destination,
                          const QosFilter& qos, const ChooseLinkFn& choose) {
    RouteResult res;
    Assembler as{net, qos, choose, {}, {}};
    if (as.assemble(source, destination, net.depth())) {
        res.success = true;
        res.path = std::move(as.path);
    } else {
        res.failure = std::move(as.failure);
    }
    return res;
}

void dispatch_feedback(const Path& path, double y,
                       const std::function<void(const LeaderDecision&, double)>& deliver) {
    if (y < 0 || y > 1) throw std::invalid_argument("feedback signal outside [0,1]");
    for (const auto& d : path.decisions) deliver(d, y);
}

}  // namespace hdqr
