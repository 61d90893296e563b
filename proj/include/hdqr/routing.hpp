#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hdqr/topology.hpp"

namespace hdqr {

struct LeaderDecision {
    NodeId leader = 0;
    GroupId deciding_group = 0;  // group whose leader made the call
    int level = 0;               // level of the chosen link
    int action = 0;              // index into the candidate set
    EdgeId edge = 0;
    long seq = -1;  // filled by the chooser (agent pending-queue handle)
};

struct Path {
    std::vector<EdgeId> edges;
    std::vector<LeaderDecision> decisions;
};

struct RouteResult {
    bool success = false;
    Path path;
    std::string failure;
};

// ChooseLink callback: given the deciding group, the divergence level, the
// endpoint group vectors and the candidate links (sorted by edge id),
// returns the chosen index and optionally a sequence handle for feedback.
struct ChooseContext {
    GroupId deciding_group = 0;
    NodeId leader = 0;
    int level = 0;
    const GroupVector* g1 = nullptr;
    const GroupVector* g2 = nullptr;
    const std::vector<Edge>* candidates = nullptr;
};
struct Choice {
    int action = 0;
    long seq = -1;
};
using ChooseLinkFn = std::function<Choice(const ChooseContext&)>;

// Recursive path assembly: scan levels top-down, delegate the first
// divergence to the responsible leader, recurse on both sides; identical
// vectors fall through to intra-group hop-count shortest path.
RouteResult route_request(const Network& net, NodeId source, NodeId destination,
                          const QosFilter& qos, const ChooseLinkFn& choose);

// Delivers the identical satisfaction signal to every involved leader.
void dispatch_feedback(const Path& path, double y,
                       const std::function<void(const LeaderDecision&, double)>& deliver);

// Hop-count shortest path within a level-1 group (directed); empty when
// from == to; nullopt when unreachable.
std::optional<std::vector<EdgeId>> intra_group_path(const Network& net, NodeId from,
                                                    NodeId to);

}  // namespace hdqr
