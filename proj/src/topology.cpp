#include "hdqr/topology.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <sstream>

#include <json.hpp>

namespace hdqr {

using nlohmann::json;

std::optional<int> first_divergence(const GroupVector& a, const GroupVector& b) {
    if (a.depth() != b.depth())
        throw TopologyError("first_divergence: group vector length mismatch");
    for (int h = a.depth(); h >= 1; --h) {
        if (a.at_level(h) != b.at_level(h)) return h;
    }
    return std::nullopt;
}

const Edge& Network::edge(EdgeId id) const {
    auto it = edges_.find(id);
    if (it == edges_.end())
        throw TopologyError("unknown edge id " + std::to_string(id));
    return it->second;
}

const GroupVector& Network::group_vector(NodeId v) const {
    auto it = group_vectors_.find(v);
    if (it == group_vectors_.end())
        throw TopologyError("unknown node id " + std::to_string(v));
    return it->second;
}

NodeId Network::leader_of(GroupId g) const {
    auto it = hier_.leaders.find(g);
    if (it == hier_.leaders.end())
        throw TopologyError("no leader for group " + std::to_string(g));
    return it->second;
}

const std::vector<int>& Network::level1_members(GroupId g) const {
    auto it = hier_.groups.at(0).find(g);
    if (it == hier_.groups.at(0).end())
        throw TopologyError("unknown level-1 group " + std::to_string(g));
    return it->second;
}

std::vector<Edge> Network::find_links(GroupId ga, GroupId gb, int level,
                                      const QosFilter& qos) const {
    if (ga == gb) throw TopologyError("find_links: groups must be distinct");
    auto la = group_level_.find(ga);
    auto lb = group_level_.find(gb);
    if (la == group_level_.end() || lb == group_level_.end())
        throw TopologyError("find_links: unknown group");
    if (la->second != level || lb->second != level)
        throw TopologyError("find_links: groups are not at level " + std::to_string(level));
    if (level < hier_.depth) {
        if (parent_.at(ga) != parent_.at(gb))
            throw TopologyError("find_links: groups " + std::to_string(ga) + " and " +
                                std::to_string(gb) + " are not siblings");
    } else {
        throw TopologyError("find_links: no sibling groups exist at the top level");
    }
    std::vector<Edge> out;
    for (const auto& [id, e] : edges_) {
        if (group_at(e.from, level) == ga && group_at(e.to, level) == gb && qos.accepts(e))
            out.push_back(e);
    }
    return out;  // map iteration is already sorted by edge id
}

std::vector<std::pair<EdgeId, NodeId>> Network::intra_group_out(NodeId v) const {
    GroupId g = group_at(v, 1);
    std::vector<std::pair<EdgeId, NodeId>> out;
    for (const auto& [id, e] : edges_) {
        if (e.from == v && group_at(e.to, 1) == g) out.emplace_back(id, e.to);
    }
    return out;
}

namespace {

// Undirected connectivity over an abstract vertex set.
bool connected(const std::set<int>& verts, const std::vector<std::pair<int, int>>& links) {
    if (verts.size() <= 1) return true;
    std::map<int, std::vector<int>> adj;
    for (auto& [a, b] : links) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::set<int> seen;
    std::queue<int> q;
    q.push(*verts.begin());
    seen.insert(*verts.begin());
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int w : adj[u]) {
            if (verts.count(w) && !seen.count(w)) {
                seen.insert(w);
                q.push(w);
            }
        }
    }
    return seen.size() == verts.size();
}

}  // namespace

void Network::validate_and_index() {
    std::set<NodeId> node_set(nodes_.begin(), nodes_.end());
    if (node_set.size() != nodes_.size())
        throw TopologyError("duplicate node id in topology document");
    for (NodeId v : nodes_)
        if (v < 0) throw TopologyError("negative node id " + std::to_string(v));

    int H = hier_.depth;
    if (H < 1) throw TopologyError("hierarchy depth must be >= 1");
    if (static_cast<int>(hier_.groups.size()) != H)
        throw TopologyError("group table does not cover every level");

    // Group ids are globally unique; record level and parent.
    for (int h = 1; h <= H; ++h) {
        for (const auto& [g, members] : hier_.groups[h - 1]) {
            if (group_level_.count(g))
                throw TopologyError("group id " + std::to_string(g) + " used at two levels");
            group_level_[g] = h;
            max_group_id_ = std::max(max_group_id_, g);
            if (members.empty())
                throw TopologyError("group " + std::to_string(g) + " has no members");
        }
    }

    // Membership: nodes at level 1, child groups above; each member exactly once.
    std::map<int, GroupId> owner_of_node, owner_of_group;
    for (int h = 1; h <= H; ++h) {
        for (const auto& [g, members] : hier_.groups[h - 1]) {
            for (int m : members) {
                if (h == 1) {
                    if (!node_set.count(m))
                        throw TopologyError("group " + std::to_string(g) +
                                            " lists unknown node " + std::to_string(m));
                    if (owner_of_node.count(m))
                        throw TopologyError("node " + std::to_string(m) +
                                            " belongs to two level-1 groups");
                    owner_of_node[m] = g;
                } else {
                    auto it = group_level_.find(m);
                    if (it == group_level_.end() || it->second != h - 1)
                        throw TopologyError("group " + std::to_string(g) +
                                            " lists non-level-" + std::to_string(h - 1) +
                                            " member " + std::to_string(m));
                    if (owner_of_group.count(m))
                        throw TopologyError("group " + std::to_string(m) +
                                            " has two parents");
                    owner_of_group[m] = g;
                    parent_[m] = g;
                }
            }
        }
    }
    for (NodeId v : nodes_)
        if (!owner_of_node.count(v))
            throw TopologyError("node " + std::to_string(v) + " belongs to no level-1 group");
    for (int h = 1; h < H; ++h)
        for (const auto& [g, members] : hier_.groups[h - 1])
            if (!owner_of_group.count(g))
                throw TopologyError("group " + std::to_string(g) + " has no parent group");
    if (hier_.groups[H - 1].size() != 1)
        throw TopologyError("exactly one group is required at the top level");
    top_group_ = hier_.groups[H - 1].begin()->first;

    // Group vectors.
    for (NodeId v : nodes_) {
        GroupVector gv;
        GroupId g = owner_of_node[v];
        gv.levels.push_back(g);
        for (int h = 2; h <= H; ++h) {
            g = owner_of_group[g];
            gv.levels.push_back(g);
        }
        group_vectors_[v] = gv;
    }

    // Edges.
    for (const auto& [id, e] : edges_) {
        if (!node_set.count(e.from) || !node_set.count(e.to))
            throw TopologyError("edge " + std::to_string(id) + " references unknown node");
        if (e.from == e.to)
            throw TopologyError("edge " + std::to_string(id) + " is a self-loop");
        if (e.capacity <= 0)
            throw TopologyError("edge " + std::to_string(id) + " has non-positive capacity");
        if (e.loss < 0 || e.loss > 1)
            throw TopologyError("edge " + std::to_string(id) + " loss outside [0,1]");
    }

    // Leaders: one per group, and the leader node must sit inside the group.
    for (const auto& [g, level] : group_level_) {
        auto it = hier_.leaders.find(g);
        if (it == hier_.leaders.end())
            throw TopologyError("group " + std::to_string(g) + " has no leader");
        NodeId l = it->second;
        if (!node_set.count(l))
            throw TopologyError("leader " + std::to_string(l) + " of group " +
                                std::to_string(g) + " is not a node");
        if (group_vectors_.at(l).at_level(level) != g)
            throw TopologyError("leader " + std::to_string(l) + " is not inside group " +
                                std::to_string(g));
    }
    for (const auto& [g, l] : hier_.leaders)
        if (!group_level_.count(g))
            throw TopologyError("leader assignment for unknown group " + std::to_string(g));

    // Connectivity: members of every group must be connected (transitively)
    // by edges crossing its child groups (or nodes, at level 1).
    for (int h = 1; h <= H; ++h) {
        for (const auto& [g, members] : hier_.groups[h - 1]) {
            std::set<int> verts(members.begin(), members.end());
            std::vector<std::pair<int, int>> links;
            for (const auto& [id, e] : edges_) {
                int a, b;
                if (h == 1) {
                    a = e.from;
                    b = e.to;
                } else {
                    a = group_at(e.from, h - 1);
                    b = group_at(e.to, h - 1);
                }
                if (verts.count(a) && verts.count(b) && a != b) links.emplace_back(a, b);
            }
            if (!connected(verts, links))
                throw TopologyError("members of group " + std::to_string(g) +
                                    " are not connected");
        }
    }
}

Network Network::load_string(const std::string& doc) {
    json j;
    try {
        j = json::parse(doc);
    } catch (const json::exception& e) {
        throw TopologyError(std::string("topology parse error: ") + e.what());
    }
    Network net;
    try {
        net.hier_.depth = j.at("depth").get<int>();
        for (const auto& n : j.at("nodes")) net.nodes_.push_back(n.get<NodeId>());
        for (const auto& je : j.at("edges")) {
            Edge e;
            e.id = je.at("id").get<EdgeId>();
            e.from = je.at("from").get<NodeId>();
            e.to = je.at("to").get<NodeId>();
            e.capacity = je.at("capacity").get<double>();
            e.transmission_delay = je.value("delay", 0.0);
            e.loss = je.value("loss", 0.0);
            if (net.edges_.count(e.id))
                throw TopologyError("duplicate edge id " + std::to_string(e.id));
            net.edges_[e.id] = e;
        }
        net.hier_.groups.resize(net.hier_.depth);
        for (const auto& jg : j.at("groups")) {
            int level = jg.at("level").get<int>();
            if (level < 1 || level > net.hier_.depth)
                throw TopologyError("group level " + std::to_string(level) + " out of range");
            GroupId id = jg.at("id").get<GroupId>();
            net.hier_.groups[level - 1][id] = jg.at("members").get<std::vector<int>>();
            net.hier_.leaders[id] = jg.at("leader").get<NodeId>();
        }
    } catch (const json::exception& e) {
        throw TopologyError(std::string("topology parse error: ") + e.what());
    }
    net.validate_and_index();
    return net;
}

Network Network::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TopologyError("cannot open topology file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_string(ss.str());
}

}  // namespace hdqr
