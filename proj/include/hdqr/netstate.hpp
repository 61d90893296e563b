#pragma once

#include <functional>
#include <list>
#include <map>
#include <vector>

#include "hdqr/common.hpp"
#include "hdqr/topology.hpp"

namespace hdqr {

struct Flow {
    int id = 0;
    NodeId source = 0;
    NodeId destination = 0;
    long start = 0;
    int duration = 1;            // steps, >= 1
    std::vector<EdgeId> path;    // assigned at admission
};

struct LinkState {
    EdgeId edge = 0;
    int active_flows = 0;
    double utilization = 0;        // active_flows / capacity
    double transmission_delay = 0;
    double loss_probability = 0;
    double capacity = 0;
};

struct NodeState {
    NodeId node = 0;
    double queuing_delay = 0;
};

struct TrafficProfile {
    struct Pair {
        NodeId source = 0;
        NodeId destination = 0;
        double weight = 1.0;
    };
    std::vector<Pair> pairs;
    int duration_min = 6;
    int duration_max = 10;
    int requests_per_step = 1;
};

// Dynamic network state on a discrete step clock. Single writer; snapshots
// are value copies.
class NetState {
public:
    explicit NetState(const Network& net);

    long now() const { return t_; }

    // Oversubscription is permitted; utilization may exceed 1.
    void admit_flow(Flow flow);

    // t += 1, then retire flows with start + duration <= t.
    void advance();

    LinkState link(EdgeId id) const;
    std::vector<LinkState> snapshot_links(std::vector<EdgeId> edges) const;

    double queuing_delay(NodeId v) const;
    void set_node_delay_provider(std::function<double(NodeId)> p) { node_delay_ = std::move(p); }

    int active_flow_count(EdgeId id) const { return active_.at(id); }
    size_t live_flows() const { return flows_.size(); }
    const std::list<Flow>& flows() const { return flows_; }

private:
    const Network* net_;
    long t_ = 0;
    std::map<EdgeId, int> active_;
    std::list<Flow> flows_;
    std::function<double(NodeId)> node_delay_;
};

// Draws one flow request; path is assigned later by routing.
Flow generate_request(UniformSource& rng, const TrafficProfile& profile, long now, int id);

}  // namespace hdqr
