#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <span>

#include "hdqr/netstate.hpp"
#include "hdqr/neural.hpp"
#include "hdqr/replay.hpp"
#include "hdqr/topology.hpp"

namespace hdqr {

struct RewardWeights {
    double w1 = 2.0;   // global (source satisfaction)
    double w2 = 10.0;  // utilization-threshold indicator
    double w3 = 0.0;   // queuing + transmission delay
    double w4 = 0.0;   // packet loss
    double w5 = 20.0;  // load balancing
    double util_threshold = 0.79;
};

// w2*1(u <= u_th) - w3*(q_l + d_e) - w4*p_e + w5*exp(-sum |u_e' - mean u|)
double local_reward(const RewardWeights& w, size_t chosen,
                    const std::vector<LinkState>& candidates, double leader_queuing_delay);

// w1 * y, y in [0,1]
double global_reward(const RewardWeights& w, double y);

struct EpsilonSchedule {
    double eps_min = 0.01;
    double eps_max = 1.0;
    double lambda = 0.01;

    double at(long t) const;
};

struct LeaderObservation {
    GroupVector g1, g2;      // request endpoints' group vectors
    double leader_delay = 0; // q_l(t)
    std::vector<LinkState> candidates;  // sorted by edge id
};

// Fixed-width encoding: partial group vectors g[k..h] normalized by the
// maximum group id, leader queuing delay, then (utilization, delay) per
// candidate slot; unused slots carry the sentinel -1.
constexpr double kMaskSentinel = -1.0;

int encoded_width(int k, int h, int max_candidates);
std::vector<double> encode_state(const LeaderObservation& obs, int k, int h,
                                 int max_candidates, GroupId max_group_id);

// Epsilon-greedy over the first n (live) outputs; masked actions are never
// selected; argmax ties break to the lowest index.
int select_action(const QNetwork& net, std::span<const double> s, int n, double eps,
                  UniformSource& rng);
int masked_argmax(std::span<const double> q, int n);

// Decisions awaiting the deferred global signal. An entry commits exactly
// once: at decision_clock + delay when its signal has arrived, or with the
// local reward alone once the fallback horizon passes.
class PendingGlobal {
public:
    struct Completed {
        Transition tr;
        long seq = 0;
        long decision_clock = 0;
        long commit_clock = 0;
        bool y_received = false;
        double y = 0;
        double r_local = 0;
    };

    PendingGlobal(long delay, long fallback_horizon);

    long add(long clock, std::vector<double> s, int a, int n);
    void set_local_reward(long seq, double r_local);
    // Fills s_next on every entry still lacking one.
    void attach_next_state(const std::vector<double>& s_next, int n_next);
    void deliver_signal(long seq, double y);  // duplicates: first wins

    std::vector<Completed> resolve(long clock, const RewardWeights& w);

    size_t pending_count() const { return entries_.size(); }
    uint64_t duplicate_signals() const { return duplicate_signals_; }
    long delay() const { return delay_; }

private:
    struct Entry {
        long decision_clock = 0;
        std::vector<double> s;
        int a = 0;
        int n = 0;
        double r_local = 0;
        std::optional<double> y;
        std::vector<double> s_next;
        int n_next = 0;
        bool has_next = false;
    };
    long delay_;
    long fallback_;
    long next_seq_ = 0;
    std::map<long, Entry> entries_;
    uint64_t duplicate_signals_ = 0;
};

struct AgentConfig {
    int level = 1;  // divergence level this agent decides at
    int k = 1;
    int max_candidates = 8;
    std::vector<int> hidden = {32, 32};
    double gamma = 0.9;
    RewardWeights weights;
    EpsilonSchedule eps;
    size_t memory_capacity = 1000;  // M
    size_t batch_size = 32;         // m
    long replay_period = 1;         // K
    long target_sync = 250;         // tau
    double per_alpha = 0.5;
    BetaSchedule beta;
    double min_priority = 0.01;  // eps'
    double learning_rate = 1e-3;
    double rms_decay = 0.9;
    double rms_stabilizer = 1e-7;
    double huber_threshold = 1.0;
    long feedback_delay = 1;          // T
    long feedback_horizon_mult = 10;  // fallback horizon = mult * max(T,1)
    bool ddqn = true;                 // false: DQN-mode target
    GroupId max_group_id = 1;
};

struct LearnDiag {
    bool learned = false;
    double loss = 0;
    double mean_abs_td = 0;
};

// One group leader's learning state: online/target nets, replay memory and
// the pending-reward queue. Random link selection until the memory holds M
// transitions, then the full DDQN loop.
class DdqnAgent {
public:
    DdqnAgent(GroupId group, NodeId leader, const AgentConfig& cfg, UniformSource init_rng);

    GroupId group() const { return group_; }
    NodeId leader() const { return leader_; }
    const AgentConfig& config() const { return cfg_; }
    int input_size() const { return online_.input_size(); }

    // Full per-decision pipeline: commit resolved transitions, sync/learn on
    // schedule, then select the action. Returns the chosen live index.
    int decide(const LeaderObservation& obs, long clock, UniformSource& explore_rng,
               UniformSource& sample_rng);

    long last_seq() const { return last_seq_; }
    void report_local_reward(double r_local) { pending_.set_local_reward(last_seq_, r_local); }
    void deliver_feedback(long seq, double y) { pending_.deliver_signal(seq, y); }

    LearnDiag learn_step(UniformSource& sample_rng);  // one prioritized replay pass

    bool learning_started() const { return learning_; }
    long learn_t() const { return learn_t_; }
    long decisions() const { return decisions_; }
    double current_epsilon() const { return learning_ ? cfg_.eps.at(learn_t_) : 1.0; }
    double current_beta() const { return cfg_.beta.at(learn_t_); }
    uint64_t skipped_learn_steps() const { return skipped_learn_; }

    const LearnDiag& last_diag() const { return diag_; }

    // Optional per-sample trace: writes "t,index,probability,weight" rows.
    void set_replay_trace(std::ostream* sink) { replay_trace_ = sink; }
    std::vector<PendingGlobal::Completed> take_committed();

    QNetwork& online() { return online_; }
    QNetwork& target() { return target_; }
    ReplayMemory& memory() { return memory_; }
    PendingGlobal& pending() { return pending_; }

private:
    void commit_resolved(long clock);

    GroupId group_;
    NodeId leader_;
    AgentConfig cfg_;
    QNetwork online_;
    QNetwork target_;
    RmsProp opt_;
    ReplayMemory memory_;
    PendingGlobal pending_;
    bool learning_ = false;
    long learn_t_ = 0;
    long decisions_ = 0;
    long last_seq_ = -1;
    uint64_t skipped_learn_ = 0;
    std::ostream* replay_trace_ = nullptr;
    LearnDiag diag_;
    std::vector<PendingGlobal::Completed> committed_;
};

}  // namespace hdqr
