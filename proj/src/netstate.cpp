#include "hdqr/netstate.hpp"

#include <algorithm>

namespace hdqr {

NetState::NetState(const Network& net) : net_(&net) {
    for (const auto& [id, e] : net.edges()) active_[id] = 0;
}

void NetState::admit_flow(Flow flow) {
    if (flow.duration < 1) throw std::invalid_argument("flow duration must be >= 1");
    for (EdgeId id : flow.path) {
        auto it = active_.find(id);
        if (it == active_.end()) throw std::invalid_argument("flow path uses unknown edge");
        ++it->second;
    }
    flows_.push_back(std::move(flow));
}

void NetState::advance() {
    ++t_;
    for (auto it = flows_.begin(); it != flows_.end();) {
        if (it->start + it->duration <= t_) {
            for (EdgeId id : it->path) --active_.at(id);
            it = flows_.erase(it);
        } else {
            ++it;
        }
    }
}

LinkState NetState::link(EdgeId id) const {
    const Edge& e = net_->edge(id);
    LinkState ls;
    ls.edge = id;
    ls.active_flows = active_.at(id);
    ls.capacity = e.capacity;
    ls.utilization = ls.active_flows / e.capacity;
    ls.transmission_delay = e.transmission_delay;
    ls.loss_probability = e.loss;
    return ls;
}

std::vector<LinkState> NetState::snapshot_links(std::vector<EdgeId> edges) const {
    std::sort(edges.begin(), edges.end());
    std::vector<LinkState> out;
    out.reserve(edges.size());
    for (EdgeId id : edges) out.push_back(link(id));
    return out;
}

double NetState::queuing_delay(NodeId v) const {
    if (!net_->has_node(v)) throw std::invalid_argument("unknown node");
    return node_delay_ ? node_delay_(v) : 0.0;
}

Flow generate_request(UniformSource& rng, const TrafficProfile& profile, long now, int id) {
    if (profile.pairs.empty())
        throw std::invalid_argument("traffic profile has no source-destination pairs");
    if (profile.duration_min < 1 || profile.duration_max < profile.duration_min)
        throw std::invalid_argument("bad duration range");

    double total = 0;
    for (const auto& p : profile.pairs) total += p.weight;
    double mass = rng.next() * total;
    const TrafficProfile::Pair* chosen = &profile.pairs.back();
    for (const auto& p : profile.pairs) {
        if (mass < p.weight) {
            chosen = &p;
            break;
        }
        mass -= p.weight;
    }

    Flow f;
    f.id = id;
    f.source = chosen->source;
    f.destination = chosen->destination;
    f.start = now;
    int span = profile.duration_max - profile.duration_min + 1;
    f.duration = profile.duration_min + rng.next_int(span);
    return f;
}

}  // namespace hdqr
