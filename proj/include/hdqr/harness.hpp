#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hdqr/agent.hpp"
#include "hdqr/netstate.hpp"
#include "hdqr/routing.hpp"

namespace hdqr {

inline constexpr const char* kVersion = "hdqr 0.1.0";

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Per-path source preference: first listed edge found on the path decides y.
struct PreferenceMap {
    struct EdgePreference {
        EdgeId edge = 0;
        double y = 1.0;
    };
    std::vector<EdgePreference> edges;
    double default_y = 1.0;

    double y_for(const std::vector<EdgeId>& path) const;
};

struct RunConfig {
    std::string topology_path;
    std::string out_dir;
    uint64_t seed = 1;
    long steps = 20000;
    bool ddqn = true;  // algorithm mode

    TrafficProfile traffic;
    AgentConfig agent;  // reward weights, learner hyperparameters, gamma, T, k
    long beta_horizon = 0;  // 0: derived from steps and traffic
    PreferenceMap preferences;

    std::vector<EdgeId> tracked_edges;  // empty: top-level candidate set
    GroupId tracked_group = 0;          // 0: top group
    bool replay_trace = false;

    static RunConfig load_file(const std::string& path);
    static RunConfig load_string(const std::string& doc);
    void validate() const;
    std::string to_json() const;
};

struct RunResult {
    std::filesystem::path dir;
    double total_discounted = 0;  // recency-discounted return of the tracked agent
    uint64_t trace_hash = 0;      // hash of the arrival sequence
    long route_failures = 0;
    long committed_transitions = 0;
    long learn_steps = 0;
};

// Phase 1: random link selection until each leader's memory holds M
// transitions; phase 2: the learning loop to the horizon. Writes
// manifest.json, metrics.csv, route_trace.csv, transitions.csv and a
// checkpoint of the tracked leader's online network into out_dir.
RunResult run_experiment(const RunConfig& config);

struct ComparisonRow {
    uint64_t seed = 0;
    double reward_ddqn = 0;
    double reward_dqn = 0;
};

// Runs both modes per seed on the identical traffic trace and writes
// comparison.csv under out_dir.
std::vector<ComparisonRow> compare_algorithms(const RunConfig& config,
                                              const std::vector<uint64_t>& seeds,
                                              const std::string& out_dir);

// Tidy per-figure data files from a finished run directory:
// fig_utilization.csv, fig_loss.csv (window-median downsampled),
// fig_reward.csv.
void emit_plots(const std::string& run_dir, int loss_window = 100);

}  // namespace hdqr
