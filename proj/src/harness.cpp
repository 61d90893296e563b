#include "hdqr/harness.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include <json.hpp>

namespace hdqr {

namespace fs = std::filesystem;
using nlohmann::json;

double PreferenceMap::y_for(const std::vector<EdgeId>& path) const {
    for (const auto& p : edges) {
        if (std::find(path.begin(), path.end(), p.edge) != path.end()) return p.y;
    }
    return default_y;
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

uint64_t mix(uint64_t h, uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

}  // namespace

RunConfig RunConfig::load_string(const std::string& doc) {
    json j;
    try {
        j = json::parse(doc);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    RunConfig c;
    try {
        c.topology_path = j.at("topology").get<std::string>();
        c.seed = j.value("seed", uint64_t{1});
        c.steps = j.value("steps", long{20000});
        std::string algo = j.value("algo", std::string("ddqn"));
        if (algo != "ddqn" && algo != "dqn")
            throw ConfigError("algo must be 'ddqn' or 'dqn'");
        c.ddqn = algo == "ddqn";
        c.out_dir = j.value("out", std::string{});

        if (j.contains("traffic")) {
            const auto& jt = j["traffic"];
            for (const auto& jp : jt.value("pairs", json::array())) {
                TrafficProfile::Pair p;
                p.source = jp.at("source").get<NodeId>();
                p.destination = jp.at("destination").get<NodeId>();
                p.weight = jp.value("weight", 1.0);
                c.traffic.pairs.push_back(p);
            }
            c.traffic.duration_min = jt.value("duration_min", 6);
            c.traffic.duration_max = jt.value("duration_max", 10);
            c.traffic.requests_per_step = jt.value("requests_per_step", 1);
        }

        if (j.contains("weights")) {
            const auto& jw = j["weights"];
            c.agent.weights.w1 = jw.value("w1", 2.0);
            c.agent.weights.w2 = jw.value("w2", 10.0);
            c.agent.weights.w3 = jw.value("w3", 0.0);
            c.agent.weights.w4 = jw.value("w4", 0.0);
            c.agent.weights.w5 = jw.value("w5", 20.0);
            c.agent.weights.util_threshold = jw.value("utilization_threshold", 0.79);
        }

        if (j.contains("agent")) {
            const auto& ja = j["agent"];
            c.agent.memory_capacity = ja.value("memory_size", size_t{1000});
            c.agent.batch_size = ja.value("batch_size", size_t{32});
            c.agent.replay_period = ja.value("replay_period", long{1});
            c.agent.target_sync = ja.value("target_sync", long{250});
            c.agent.per_alpha = ja.value("per_alpha", 0.5);
            c.agent.beta.beta_start = ja.value("beta_start", 0.4);
            c.beta_horizon = ja.value("beta_horizon", long{0});
            c.agent.eps.eps_min = ja.value("eps_min", 0.01);
            c.agent.eps.eps_max = ja.value("eps_max", 1.0);
            c.agent.eps.lambda = ja.value("eps_lambda", 0.01);
            c.agent.min_priority = ja.value("min_priority", 0.01);
            c.agent.gamma = ja.value("gamma", 0.9);
            c.agent.learning_rate = ja.value("learning_rate", 1e-3);
            c.agent.rms_decay = ja.value("rms_decay", 0.9);
            c.agent.rms_stabilizer = ja.value("rms_stabilizer", 1e-7);
            c.agent.huber_threshold = ja.value("huber_threshold", 1.0);
            c.agent.feedback_delay = ja.value("feedback_delay", long{1});
            c.agent.feedback_horizon_mult = ja.value("feedback_horizon_mult", long{10});
            c.agent.k = ja.value("k", 1);
            c.agent.max_candidates = ja.value("max_candidates", 8);
            if (ja.contains("hidden")) c.agent.hidden = ja["hidden"].get<std::vector<int>>();
        }

        if (j.contains("preferences")) {
            const auto& jp = j["preferences"];
            c.preferences.default_y = jp.value("default_y", 1.0);
            for (const auto& je : jp.value("edges", json::array())) {
                PreferenceMap::EdgePreference p;
                p.edge = je.at("edge").get<EdgeId>();
                p.y = je.at("y").get<double>();
                c.preferences.edges.push_back(p);
            }
        }

        if (j.contains("tracked_edges"))
            c.tracked_edges = j["tracked_edges"].get<std::vector<EdgeId>>();
        c.tracked_group = j.value("tracked_group", 0);
        c.replay_trace = j.value("replay_trace", false);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    c.validate();
    return c;
}

RunConfig RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_string(ss.str());
}

void RunConfig::validate() const {
    if (topology_path.empty()) throw ConfigError("topology path missing");
    if (steps < 0) throw ConfigError("steps must be >= 0");
    if (traffic.pairs.empty()) throw ConfigError("traffic profile has no pairs");
    if (traffic.duration_min < 1 || traffic.duration_max < traffic.duration_min)
        throw ConfigError("bad flow duration range");
    if (traffic.requests_per_step < 1) throw ConfigError("requests_per_step must be >= 1");
    if (agent.memory_capacity == 0) throw ConfigError("memory_size must be positive");
    if (agent.batch_size == 0 || agent.batch_size > agent.memory_capacity)
        throw ConfigError("batch_size must be in [1, memory_size]");
    if (agent.replay_period < 1) throw ConfigError("replay_period must be >= 1");
    if (agent.target_sync < 1) throw ConfigError("target_sync must be >= 1");
    if (agent.per_alpha < 0) throw ConfigError("per_alpha must be >= 0");
    if (agent.min_priority <= 0) throw ConfigError("min_priority must be positive");
    if (agent.gamma < 0 || agent.gamma > 1) throw ConfigError("gamma outside [0,1]");
    if (agent.feedback_delay < 0) throw ConfigError("feedback_delay must be >= 0");
    if (agent.k < 1) throw ConfigError("k must be >= 1");
    if (agent.max_candidates < 1) throw ConfigError("max_candidates must be >= 1");
    auto& w = agent.weights;
    if (w.w1 < 0 || w.w2 < 0 || w.w3 < 0 || w.w4 < 0 || w.w5 < 0)
        throw ConfigError("reward weights must be non-negative");
    if (w.util_threshold <= 0 || w.util_threshold > 1)
        throw ConfigError("utilization threshold outside (0,1]");
    for (auto& p : preferences.edges)
        if (p.y < 0 || p.y > 1) throw ConfigError("preference y outside [0,1]");
    if (preferences.default_y < 0 || preferences.default_y > 1)
        throw ConfigError("default_y outside [0,1]");
}

std::string RunConfig::to_json() const {
    json j;
    j["topology"] = topology_path;
    j["out"] = out_dir;
    j["seed"] = seed;
    j["steps"] = steps;
    j["algo"] = ddqn ? "ddqn" : "dqn";
    json pairs = json::array();
    for (auto& p : traffic.pairs)
        pairs.push_back({{"source", p.source}, {"destination", p.destination}, {"weight", p.weight}});
    j["traffic"] = {{"pairs", pairs},
                    {"duration_min", traffic.duration_min},
                    {"duration_max", traffic.duration_max},
                    {"requests_per_step", traffic.requests_per_step}};
    j["weights"] = {{"w1", agent.weights.w1}, {"w2", agent.weights.w2},
                    {"w3", agent.weights.w3}, {"w4", agent.weights.w4},
                    {"w5", agent.weights.w5},
                    {"utilization_threshold", agent.weights.util_threshold}};
    j["agent"] = {{"memory_size", agent.memory_capacity},
                  {"batch_size", agent.batch_size},
                  {"replay_period", agent.replay_period},
                  {"target_sync", agent.target_sync},
                  {"per_alpha", agent.per_alpha},
                  {"beta_start", agent.beta.beta_start},
                  {"beta_horizon", beta_horizon},
                  {"eps_min", agent.eps.eps_min},
                  {"eps_max", agent.eps.eps_max},
                  {"eps_lambda", agent.eps.lambda},
                  {"min_priority", agent.min_priority},
                  {"gamma", agent.gamma},
                  {"learning_rate", agent.learning_rate},
                  {"rms_decay", agent.rms_decay},
                  {"rms_stabilizer", agent.rms_stabilizer},
                  {"huber_threshold", agent.huber_threshold},
                  {"feedback_delay", agent.feedback_delay},
                  {"feedback_horizon_mult", agent.feedback_horizon_mult},
                  {"k", agent.k},
                  {"max_candidates", agent.max_candidates},
                  {"hidden", agent.hidden}};
    json prefs = json::array();
    for (auto& p : preferences.edges) prefs.push_back({{"edge", p.edge}, {"y", p.y}});
    j["preferences"] = {{"default_y", preferences.default_y}, {"edges", prefs}};
    j["tracked_edges"] = tracked_edges;
    j["tracked_group"] = tracked_group;
    j["replay_trace"] = replay_trace;
    return j.dump(2);
}

RunResult run_experiment(const RunConfig& config) {
    config.validate();
    Network net = Network::load_file(config.topology_path);

    fs::path dir(config.out_dir.empty() ? "." : config.out_dir);
    fs::create_directories(dir);

    // One agent per group at level >= 2; the leader of a level-(h+1) group
    // decides divergences at level h.
    std::map<GroupId, std::unique_ptr<DdqnAgent>> agents;
    for (int h = 2; h <= net.depth(); ++h) {
        for (const auto& [g, members] : net.hierarchy().groups[h - 1]) {
            AgentConfig ac = config.agent;
            ac.level = h - 1;
            ac.max_group_id = net.max_group_id();
            ac.ddqn = config.ddqn;
            ac.beta.horizon =
                config.beta_horizon > 0
                    ? config.beta_horizon
                    : std::max<long>(1, config.steps * config.traffic.requests_per_step -
                                            static_cast<long>(ac.memory_capacity));
            agents[g] = std::make_unique<DdqnAgent>(
                g, net.leader_of(g), ac,
                named_stream(config.seed, "init-" + std::to_string(g)));
        }
    }

    GroupId tracked_group =
        config.tracked_group != 0 ? config.tracked_group : net.top_group();
    if (!agents.count(tracked_group))
        throw ConfigError("tracked group " + std::to_string(tracked_group) +
                          " has no deciding leader");
    DdqnAgent& tracked = *agents.at(tracked_group);

    std::vector<EdgeId> tracked_edges = config.tracked_edges;
    if (tracked_edges.empty()) {
        // default: candidate links between the first two children of the top group
        const auto& children = net.hierarchy().groups[net.depth() - 1].begin()->second;
        if (net.depth() >= 2 && children.size() >= 2) {
            for (const auto& e :
                 net.find_links(children[0], children[1], net.depth() - 1))
                tracked_edges.push_back(e.id);
        }
    }

    NetState state(net);
    UniformSource traffic_rng = named_stream(config.seed, "traffic");
    UniformSource explore_rng = named_stream(config.seed, "exploration");
    UniformSource replay_rng = named_stream(config.seed, "replay-sampling");

    std::ofstream metrics(dir / "metrics.csv");
    metrics << "t";
    for (EdgeId e : tracked_edges) metrics << ",util_" << e;
    metrics << ",loss,reward,reward_discounted,action,epsilon,beta\n";

    std::ofstream route_trace(dir / "route_trace.csv");
    route_trace << "request,source,destination,success,edges,decisions\n";

    std::ofstream transitions(dir / "transitions.csv");
    transitions << "commit_t,group,seq,decision_t,action,y_received,y,r_local,r\n";

    std::ofstream replay_trace;
    if (config.replay_trace) {
        replay_trace.open(dir / "replay_trace.csv");
        replay_trace << "t,index,probability,weight\n";
        tracked.set_replay_trace(&replay_trace);
    }

    RunResult result;
    result.dir = dir;
    uint64_t trace_hash = 1469598103934665603ULL;
    int next_flow_id = 0;
    double discounted = 0;

    for (long t = 0; t < config.steps; ++t) {
        std::vector<double> step_losses;
        std::string last_action;

        for (int r = 0; r < config.traffic.requests_per_step; ++r) {
            Flow flow = generate_request(traffic_rng, config.traffic, t, next_flow_id++);
            trace_hash = mix(trace_hash, static_cast<uint64_t>(flow.source));
            trace_hash = mix(trace_hash, static_cast<uint64_t>(flow.destination));
            trace_hash = mix(trace_hash, static_cast<uint64_t>(flow.duration));

            struct DecisionCtx {
                DdqnAgent* agent;
                long seq;
                int action;
                std::vector<EdgeId> candidate_edges;
            };
            std::vector<DecisionCtx> made;

            auto choose = [&](const ChooseContext& ctx) -> Choice {
                DdqnAgent& ag = *agents.at(ctx.deciding_group);
                LeaderObservation obs;
                obs.g1 = *ctx.g1;
                obs.g2 = *ctx.g2;
                obs.leader_delay = state.queuing_delay(ctx.leader);
                std::vector<EdgeId> cand_ids;
                for (const auto& e : *ctx.candidates) cand_ids.push_back(e.id);
                obs.candidates = state.snapshot_links(cand_ids);
                int a = ag.decide(obs, t, explore_rng, replay_rng);
                if (&ag == &tracked) {
                    const auto& d = ag.last_diag();
                    if (d.learned) step_losses.push_back(d.loss);
                    last_action = std::to_string(a);
                }
                made.push_back({&ag, ag.last_seq(), a, std::move(cand_ids)});
                return {a, ag.last_seq()};
            };

            RouteResult rr = route_request(net, flow.source, flow.destination, {}, choose);

            route_trace << flow.id << ',' << flow.source << ',' << flow.destination << ','
                        << (rr.success ? 1 : 0) << ',';
            if (rr.success) {
                for (size_t i = 0; i < rr.path.edges.size(); ++i)
                    route_trace << (i ? ";" : "") << rr.path.edges[i];
                route_trace << ',';
                for (size_t i = 0; i < rr.path.decisions.size(); ++i) {
                    const auto& d = rr.path.decisions[i];
                    route_trace << (i ? ";" : "") << d.deciding_group << ':' << d.level
                                << ':' << d.edge;
                }
            } else {
                route_trace << ',';
            }
            route_trace << '\n';

            if (!rr.success) {
                ++result.route_failures;
                continue;
            }

            flow.path = rr.path.edges;
            state.admit_flow(flow);

            // local rewards from the post-admission link states
            for (const auto& d : made) {
                auto snap = state.snapshot_links(d.candidate_edges);
                double rl = local_reward(config.agent.weights, d.action, snap,
                                         state.queuing_delay(d.agent->leader()));
                d.agent->pending().set_local_reward(d.seq, rl);
            }

            double y = config.preferences.y_for(rr.path.edges);
            dispatch_feedback(rr.path, y, [&](const LeaderDecision& d, double yy) {
                agents.at(d.deciding_group)->deliver_feedback(d.seq, yy);
            });
        }

        // drain committed transitions (trace + tracked-agent reward series)
        double step_reward = 0;
        bool any_reward = false;
        for (auto& [g, ag] : agents) {
            for (const auto& c : ag->take_committed()) {
                ++result.committed_transitions;
                transitions << c.commit_clock << ',' << g << ',' << c.seq << ','
                            << c.decision_clock << ',' << c.tr.a << ','
                            << (c.y_received ? 1 : 0) << ',' << fmt(c.y) << ','
                            << fmt(c.r_local) << ',' << fmt(c.tr.r) << '\n';
                if (ag.get() == &tracked) {
                    step_reward += c.tr.r;
                    any_reward = true;
                    discounted = config.agent.gamma * discounted + c.tr.r;
                }
            }
        }

        metrics << t;
        for (EdgeId e : tracked_edges) metrics << ',' << fmt(state.link(e).utilization);
        metrics << ',';
        if (!step_losses.empty()) {
            double s = 0;
            for (double l : step_losses) s += l;
            metrics << fmt(s / step_losses.size());
        }
        metrics << ',';
        if (any_reward) metrics << fmt(step_reward);
        metrics << ',' << fmt(discounted) << ',' << last_action << ','
                << fmt(tracked.current_epsilon()) << ',' << fmt(tracked.current_beta())
                << '\n';

        state.advance();
    }

    result.trace_hash = trace_hash;
    result.total_discounted = discounted;
    result.learn_steps = tracked.learn_t();

    // manifest: config echo + derived values
    json man = json::parse(config.to_json());
    man["version"] = kVersion;
    man["trace_hash"] = trace_hash;
    man["tracked_group_resolved"] = tracked_group;
    man["tracked_edges_resolved"] = tracked_edges;
    json ja = json::object();
    for (auto& [g, ag] : agents) {
        ja[std::to_string(g)] = {{"leader", ag->leader()},
                                 {"level", ag->config().level},
                                 {"input_size", ag->input_size()},
                                 {"decisions", ag->decisions()},
                                 {"learn_steps", ag->learn_t()},
                                 {"beta_horizon", ag->config().beta.horizon}};
    }
    man["agents"] = ja;
    man["route_failures"] = result.route_failures;
    man["committed_transitions"] = result.committed_transitions;
    man["total_discounted_reward"] = result.total_discounted;
    std::ofstream(dir / "manifest.json") << man.dump(2) << '\n';

    tracked.online().save((dir / "checkpoint.txt").string());
    return result;
}

std::vector<ComparisonRow> compare_algorithms(const RunConfig& config,
                                              const std::vector<uint64_t>& seeds,
                                              const std::string& out_dir) {
    if (seeds.empty()) throw ConfigError("compare: at least one seed required");
    fs::path dir(out_dir);
    fs::create_directories(dir);
    std::vector<ComparisonRow> rows;
    std::ofstream out(dir / "comparison.csv");
    out << "seed,reward_ddqn,reward_dqn,diff,ddqn_wins\n";
    for (uint64_t seed : seeds) {
        RunConfig cd = config;
        cd.seed = seed;
        cd.ddqn = true;
        cd.out_dir = (dir / ("seed-" + std::to_string(seed) + "-ddqn")).string();
        RunResult rd = run_experiment(cd);

        RunConfig cq = config;
        cq.seed = seed;
        cq.ddqn = false;
        cq.out_dir = (dir / ("seed-" + std::to_string(seed) + "-dqn")).string();
        RunResult rq = run_experiment(cq);

        if (rd.trace_hash != rq.trace_hash)
            throw std::runtime_error("paired runs consumed different traffic traces");

        ComparisonRow row{seed, rd.total_discounted, rq.total_discounted};
        rows.push_back(row);
        out << seed << ',' << fmt(row.reward_ddqn) << ',' << fmt(row.reward_dqn) << ','
            << fmt(row.reward_ddqn - row.reward_dqn) << ','
            << (row.reward_ddqn >= row.reward_dqn ? 1 : 0) << '\n';
    }
    return rows;
}

void emit_plots(const std::string& run_dir, int loss_window) {
    fs::path dir(run_dir);
    std::ifstream in(dir / "metrics.csv");
    if (!in) throw std::runtime_error("missing metrics.csv in " + run_dir);

    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("empty metrics.csv");
    std::vector<std::string> cols;
    {
        std::stringstream ss(header);
        std::string c;
        while (std::getline(ss, c, ',')) cols.push_back(c);
    }
    std::vector<size_t> util_cols;
    size_t loss_col = 0, rew_col = 0;
    for (size_t i = 0; i < cols.size(); ++i) {
        if (cols[i].rfind("util_", 0) == 0) util_cols.push_back(i);
        if (cols[i] == "loss") loss_col = i;
        if (cols[i] == "reward_discounted") rew_col = i;
    }

    std::ofstream futil(dir / "fig_utilization.csv");
    futil << "t";
    for (size_t i : util_cols) futil << ',' << cols[i];
    futil << '\n';
    std::ofstream frew(dir / "fig_reward.csv");
    frew << "t,reward_discounted\n";

    std::vector<std::pair<long, double>> losses;
    std::string line;
    long rowcount = 0;
    while (std::getline(in, line)) {
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) f.push_back(c);
        while (f.size() < cols.size()) f.push_back("");
        ++rowcount;
        futil << f[0];
        for (size_t i : util_cols) futil << ',' << f[i];
        futil << '\n';
        frew << f[0] << ',' << f[rew_col] << '\n';
        if (!f[loss_col].empty())
            losses.emplace_back(std::stol(f[0]), std::stod(f[loss_col]));
    }
    if (rowcount == 0) throw std::runtime_error("metrics.csv has no data rows");

    // window-median downsampling of the loss series
    std::ofstream floss(dir / "fig_loss.csv");
    floss << "t,loss_median\n";
    for (size_t i = 0; i < losses.size(); i += loss_window) {
        size_t end = std::min(losses.size(), i + loss_window);
        std::vector<double> w;
        for (size_t j = i; j < end; ++j) w.push_back(losses[j].second);
        std::sort(w.begin(), w.end());
        double med = w.size() % 2 ? w[w.size() / 2]
                                  : 0.5 * (w[w.size() / 2 - 1] + w[w.size() / 2]);
        floss << losses[end - 1].first << ',' << fmt(med) << '\n';
    }
}

}  // namespace hdqr
