#include "hdqr/agent.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace hdqr {

double local_reward(const RewardWeights& w, size_t chosen,
                    const std::vector<LinkState>& candidates, double leader_queuing_delay) {
    if (candidates.empty()) throw std::invalid_argument("local_reward: empty candidate set");
    if (chosen >= candidates.size())
        throw std::invalid_argument("local_reward: chosen index out of range");

    const LinkState& e = candidates[chosen];
    double mean = 0;
    for (const auto& c : candidates) mean += c.utilization;
    mean /= candidates.size();
    double dev = 0;
    for (const auto& c : candidates) dev += std::abs(c.utilization - mean);

    double r = 0;
    r += w.w2 * (e.utilization <= w.util_threshold ? 1.0 : 0.0);
    r -= w.w3 * (leader_queuing_delay + e.transmission_delay);
    r -= w.w4 * e.loss_probability;
    r += w.w5 * std::exp(-dev);
    return r;
}

double global_reward(const RewardWeights& w, double y) {
    if (y < 0 || y > 1) throw std::invalid_argument("global reward signal outside [0,1]");
    return w.w1 * y;
}

double EpsilonSchedule::at(long t) const {
    return eps_min + (eps_max - eps_min) * std::exp(-lambda * static_cast<double>(t));
}

int encoded_width(int k, int h, int max_candidates) {
    if (k < 1 || h < k) throw std::invalid_argument("encode_state: require 1 <= k <= h");
    return 2 * (h - k + 1) + 1 + 2 * max_candidates;
}

std::vector<double> encode_state(const LeaderObservation& obs, int k, int h,
                                 int max_candidates, GroupId max_group_id) {
    if (static_cast<int>(obs.candidates.size()) > max_candidates)
        throw std::invalid_argument("encode_state: too many candidate links");
    std::vector<double> s;
    s.reserve(encoded_width(k, h, max_candidates));
    double scale = max_group_id > 0 ? 1.0 / max_group_id : 1.0;
    for (int lvl = k; lvl <= h; ++lvl) s.push_back(obs.g1.at_level(lvl) * scale);
    for (int lvl = k; lvl <= h; ++lvl) s.push_back(obs.g2.at_level(lvl) * scale);
    s.push_back(obs.leader_delay);
    for (int i = 0; i < max_candidates; ++i) {
        if (i < static_cast<int>(obs.candidates.size())) {
            s.push_back(obs.candidates[i].utilization);
            s.push_back(obs.candidates[i].transmission_delay);
        } else {
            s.push_back(kMaskSentinel);
            s.push_back(kMaskSentinel);
        }
    }
    return s;
}

int masked_argmax(std::span<const double> q, int n) {
    if (n < 1 || n > static_cast<int>(q.size()))
        throw std::invalid_argument("masked_argmax: bad live count");
    int best = 0;
    for (int i = 1; i < n; ++i)
        if (q[i] > q[best]) best = i;
    return best;
}

int select_action(const QNetwork& net, std::span<const double> s, int n, double eps,
                  UniformSource& rng) {
    if (n < 1) throw std::invalid_argument("select_action: no live actions");
    if (n > net.num_actions()) throw std::invalid_argument("select_action: n exceeds outputs");
    double u = rng.next();
    if (u < eps) return rng.next_int(n);
    auto q = net.forward(s);
    return masked_argmax(q, n);
}

PendingGlobal::PendingGlobal(long delay, long fallback_horizon)
    : delay_(delay), fallback_(fallback_horizon) {
    if (delay < 0) throw std::invalid_argument("feedback delay must be >= 0");
    if (fallback_horizon < delay) throw std::invalid_argument("fallback horizon < delay");
}

long PendingGlobal::add(long clock, std::vector<double> s, int a, int n) {
    Entry e;
    e.decision_clock = clock;
    e.s = std::move(s);
    e.a = a;
    e.n = n;
    long seq = next_seq_++;
    entries_[seq] = std::move(e);
    return seq;
}

void PendingGlobal::set_local_reward(long seq, double r_local) {
    auto it = entries_.find(seq);
    if (it == entries_.end()) throw std::out_of_range("unknown pending decision");
    it->second.r_local = r_local;
}

void PendingGlobal::attach_next_state(const std::vector<double>& s_next, int n_next) {
    for (auto& [seq, e] : entries_) {
        if (!e.has_next) {
            e.s_next = s_next;
            e.n_next = n_next;
            e.has_next = true;
        }
    }
}

void PendingGlobal::deliver_signal(long seq, double y) {
    if (y < 0 || y > 1) throw std::invalid_argument("global signal outside [0,1]");
    auto it = entries_.find(seq);
    if (it == entries_.end()) return;  // already committed or unknown
    if (it->second.y) {
        ++duplicate_signals_;  // first wins
        return;
    }
    it->second.y = y;
}

std::vector<PendingGlobal::Completed> PendingGlobal::resolve(long clock,
                                                             const RewardWeights& w) {
    std::vector<Completed> out;
    for (auto it = entries_.begin(); it != entries_.end();) {
        Entry& e = it->second;
        bool signalled = e.y && clock >= e.decision_clock + delay_;
        bool expired = clock >= e.decision_clock + fallback_;
        if (!signalled && !expired) {
            ++it;
            continue;
        }
        Completed c;
        c.seq = it->first;
        c.decision_clock = e.decision_clock;
        c.commit_clock = clock;
        c.r_local = e.r_local;
        c.y_received = e.y.has_value();
        c.y = e.y.value_or(0.0);
        c.tr.s = std::move(e.s);
        c.tr.a = e.a;
        c.tr.n_actions = e.n;
        c.tr.r = e.r_local + (e.y ? global_reward(w, *e.y) : 0.0);
        if (e.has_next) {
            c.tr.s_next = std::move(e.s_next);
            c.tr.n_actions_next = e.n_next;
        } else {
            c.tr.s_next = c.tr.s;  // no later observation yet: self-transition
            c.tr.n_actions_next = e.n;
        }
        c.tr.terminal = false;
        out.push_back(std::move(c));
        it = entries_.erase(it);
    }
    return out;
}

DdqnAgent::DdqnAgent(GroupId group, NodeId leader, const AgentConfig& cfg,
                     UniformSource init_rng)
    : group_(group),
      leader_(leader),
      cfg_(cfg),
      online_(encoded_width(cfg.k, cfg.level, cfg.max_candidates), cfg.max_candidates,
              cfg.hidden),
      target_(encoded_width(cfg.k, cfg.level, cfg.max_candidates), cfg.max_candidates,
              cfg.hidden),
      opt_(online_, cfg.learning_rate, cfg.rms_decay, cfg.rms_stabilizer),
      memory_(cfg.memory_capacity, cfg.per_alpha, cfg.min_priority),
      pending_(cfg.feedback_delay,
               std::max<long>(1, cfg.feedback_delay) * cfg.feedback_horizon_mult) {
    online_.init_weights(init_rng);
    copy_parameters(online_, target_);
}

void DdqnAgent::commit_resolved(long clock) {
    for (auto& c : pending_.resolve(clock, cfg_.weights)) {
        memory_.store(c.tr);
        committed_.push_back(std::move(c));
    }
}

std::vector<PendingGlobal::Completed> DdqnAgent::take_committed() {
    return std::exchange(committed_, {});
}

int DdqnAgent::decide(const LeaderObservation& obs, long clock, UniformSource& explore_rng,
                      UniformSource& sample_rng) {
    diag_ = LearnDiag{};
    commit_resolved(clock);
    if (!learning_ && memory_.size() >= cfg_.memory_capacity) learning_ = true;

    if (learning_) {
        if (learn_t_ % cfg_.target_sync == 0) copy_parameters(online_, target_);
        if (learn_t_ % cfg_.replay_period == 0) {
            if (memory_.size() >= cfg_.batch_size) {
                diag_ = learn_step(sample_rng);
            } else {
                ++skipped_learn_;
            }
        }
    }

    int n = static_cast<int>(obs.candidates.size());
    auto s = encode_state(obs, cfg_.k, cfg_.level, cfg_.max_candidates, cfg_.max_group_id);
    pending_.attach_next_state(s, n);

    int a;
    if (!learning_) {
        a = explore_rng.next_int(n);  // warm-up: uniform random links
    } else {
        a = select_action(online_, s, n, cfg_.eps.at(learn_t_), explore_rng);
    }
    last_seq_ = pending_.add(clock, std::move(s), a, n);
    if (learning_) ++learn_t_;
    ++decisions_;
    return a;
}

LearnDiag DdqnAgent::learn_step(UniformSource& sample_rng) {
    LearnDiag diag;
    double beta = cfg_.beta.at(learn_t_);
    auto batch = memory_.sample(cfg_.batch_size, beta, sample_rng);
    if (replay_trace_) {
        for (const auto& e : batch.entries)
            *replay_trace_ << learn_t_ << ',' << e.index << ',' << e.probability << ','
                           << e.weight << '\n';
    }

    ParamSet delta;
    for (const auto& l : online_.layers()) delta.layers.emplace_back(l.in, l.out);

    double loss_sum = 0, abs_td_sum = 0;
    for (const auto& e : batch.entries) {
        const Transition& tr = e.transition;
        double y;
        if (tr.terminal) {
            y = tr.r;
        } else {
            int n_next = std::max(tr.n_actions_next, 1);
            auto q_target = target_.forward(tr.s_next);
            if (cfg_.ddqn) {
                auto q_online = online_.forward(tr.s_next);
                y = tr.r + cfg_.gamma * q_target[masked_argmax(q_online, n_next)];
            } else {
                y = tr.r + cfg_.gamma * q_target[masked_argmax(q_target, n_next)];
            }
        }
        double q_sa = online_.forward(tr.s)[tr.a];
        double td = y - q_sa;
        delta.add(online_.td_backward(tr.s, tr.a, y, e.weight, cfg_.huber_threshold));
        memory_.update_priority(e.index, td);
        loss_sum += huber_loss(td, cfg_.huber_threshold);
        abs_td_sum += std::abs(td);
    }
    opt_.apply(online_, delta);

    diag.learned = true;
    diag.loss = loss_sum / batch.entries.size();
    diag.mean_abs_td = abs_td_sum / batch.entries.size();
    return diag;
}

}  // namespace hdqr
