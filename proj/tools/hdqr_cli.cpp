#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hdqr/harness.hpp"

using namespace hdqr;

namespace {

std::vector<uint64_t> parse_seeds(const std::string& s) {
    std::vector<uint64_t> seeds;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) seeds.push_back(std::stoull(tok));
    }
    return seeds;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hierarchical double-Q link-selection simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir, algo, seeds_str, run_dir;
    long steps = -1;
    uint64_t seed = 0;
    bool have_seed = false;
    int window = 100;

    auto* run = app.add_subcommand("run", "Run one experiment");
    run->add_option("--config", config_path, "config file")->required();
    run->add_option("--seed", seed, "master seed")->each([&](const std::string&) {
        have_seed = true;
    });
    run->add_option("--steps", steps, "step horizon override");
    run->add_option("--algo", algo, "ddqn|dqn");
    run->add_option("--out", out_dir, "output directory")->required();

    auto* cmp = app.add_subcommand("compare", "Paired DDQN-vs-DQN runs");
    cmp->add_option("--config", config_path, "config file")->required();
    cmp->add_option("--seeds", seeds_str, "comma-separated seeds")->required();
    cmp->add_option("--steps", steps, "step horizon override");
    cmp->add_option("--out", out_dir, "output directory")->required();

    auto* plot = app.add_subcommand("plot", "Emit per-figure data files");
    plot->add_option("--run", run_dir, "run directory")->required();
    plot->add_option("--window", window, "loss downsampling window");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(run)) {
            RunConfig cfg = RunConfig::load_file(config_path);
            if (have_seed) cfg.seed = seed;
            if (steps >= 0) cfg.steps = steps;
            if (!algo.empty()) {
                if (algo != "ddqn" && algo != "dqn") throw ConfigError("algo must be ddqn|dqn");
                cfg.ddqn = algo == "ddqn";
            }
            cfg.out_dir = out_dir;
            RunResult r = run_experiment(cfg);
            std::cout << "run complete: " << r.dir.string()
                      << " total_discounted=" << r.total_discounted
                      << " learn_steps=" << r.learn_steps
                      << " route_failures=" << r.route_failures << '\n';
        } else if (app.got_subcommand(cmp)) {
            RunConfig cfg = RunConfig::load_file(config_path);
            if (steps >= 0) cfg.steps = steps;
            auto seeds = parse_seeds(seeds_str);
            if (seeds.empty()) throw ConfigError("no seeds given");
            auto rows = compare_algorithms(cfg, seeds, out_dir);
            int wins = 0;
            for (const auto& r : rows) {
                std::cout << "seed " << r.seed << ": ddqn=" << r.reward_ddqn
                          << " dqn=" << r.reward_dqn << '\n';
                if (r.reward_ddqn >= r.reward_dqn) ++wins;
            }
            std::cout << "ddqn >= dqn in " << wins << "/" << rows.size() << " seeds\n";
        } else if (app.got_subcommand(plot)) {
            emit_plots(run_dir, window);
            std::cout << "plot data written to " << run_dir << '\n';
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const TopologyError& e) {
        std::cerr << "topology error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
