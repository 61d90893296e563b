#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hdqr/common.hpp"

namespace hdqr {

struct Edge {
    EdgeId id = 0;
    NodeId from = 0;  // e[1]
    NodeId to = 0;    // e[2]
    double capacity = 0;            // flows per step
    double transmission_delay = 0;  // static, from the topology document
    double loss = 0;                // static loss probability
};

// Cluster identity of a node, index 0 = level 1 (lowest).
struct GroupVector {
    std::vector<GroupId> levels;

    int depth() const { return static_cast<int>(levels.size()); }
    GroupId at_level(int h) const { return levels.at(h - 1); }
    bool operator==(const GroupVector& o) const { return levels == o.levels; }
};

// Largest level h at which the two vectors differ; nullopt when identical.
std::optional<int> first_divergence(const GroupVector& a, const GroupVector& b);

struct Hierarchy {
    int depth = 0;
    // groups[h-1]: group id -> members (node ids at level 1, child group ids above)
    std::vector<std::map<GroupId, std::vector<int>>> groups;
    std::map<GroupId, NodeId> leaders;  // group id -> designated leader node
};

// Conjunctive predicate over static edge attributes; default accepts all.
struct QosFilter {
    std::optional<double> min_capacity;
    std::optional<double> max_delay;
    std::optional<double> max_loss;

    bool accepts(const Edge& e) const {
        if (min_capacity && e.capacity < *min_capacity) return false;
        if (max_delay && e.transmission_delay > *max_delay) return false;
        if (max_loss && e.loss > *max_loss) return false;
        return true;
    }
};

class TopologyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Immutable after load; safe for concurrent readers.
class Network {
public:
    static Network load_file(const std::string& path);
    static Network load_string(const std::string& doc);

    const std::vector<NodeId>& nodes() const { return nodes_; }
    const std::map<EdgeId, Edge>& edges() const { return edges_; }
    const Edge& edge(EdgeId id) const;
    const Hierarchy& hierarchy() const { return hier_; }
    int depth() const { return hier_.depth; }

    bool has_node(NodeId v) const { return group_vectors_.count(v) != 0; }
    const GroupVector& group_vector(NodeId v) const;
    GroupId group_at(NodeId v, int level) const { return group_vector(v).at_level(level); }
    NodeId leader_of(GroupId g) const;
    GroupId max_group_id() const { return max_group_id_; }

    // All edges with e[1] in group ga and e[2] in group gb at the given level,
    // passing the QoS filter, sorted by edge id. ga and gb must be distinct
    // sibling groups.
    std::vector<Edge> find_links(GroupId ga, GroupId gb, int level,
                                 const QosFilter& qos = {}) const;

    // Node members of a level-1 group.
    const std::vector<int>& level1_members(GroupId g) const;

    // Outgoing intra-group neighbors (edge, target) of a node, restricted to
    // its level-1 group, sorted by edge id.
    std::vector<std::pair<EdgeId, NodeId>> intra_group_out(NodeId v) const;

    GroupId top_group() const { return top_group_; }

private:
    Network() = default;
    void validate_and_index();

    std::vector<NodeId> nodes_;
    std::map<EdgeId, Edge> edges_;
    Hierarchy hier_;
    std::map<NodeId, GroupVector> group_vectors_;
    std::map<GroupId, int> group_level_;
    std::map<GroupId, GroupId> parent_;
    GroupId max_group_id_ = 0;
    GroupId top_group_ = 0;
};

}  // namespace hdqr
