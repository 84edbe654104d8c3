#include <cstdio>
#include <exception>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "deeptop/harness.hpp"
#include "deeptop/oracle.hpp"

namespace {

using Overrides = std::map<std::string, std::string>;

// Shared training flags; every flag simply stages a config override.
void add_train_options(CLI::App* cmd, Overrides& over, std::string& config_path) {
    cmd->add_option("--config", config_path, "config file (key = value lines)");
    auto stage = [&over](const std::string& key) {
        return [&over, key](const std::string& value) { over[key] = value; };
    };
    cmd->add_option_function<std::string>("--timesteps", stage("timesteps"), "steps per run");
    cmd->add_option_function<std::string>("--runs", stage("runs"), "independent runs");
    cmd->add_option_function<std::string>("--seed", stage("seed"), "base seed");
    cmd->add_option_function<std::string>("--jobs", stage("jobs"), "parallel runs");
    cmd->add_option_function<std::string>("--out", stage("outdir"), "output directory");
    cmd->add_option_function<std::string>("--hidden", stage("hidden"),
                                          "hidden layer sizes, e.g. 128,128");
    cmd->add_option_function<std::string>("--actor-lr", stage("actor_lr"), "actor learning rate");
    cmd->add_option_function<std::string>("--critic-lr", stage("critic_lr"),
                                          "critic learning rate");
    cmd->add_option_function<std::string>("--gamma", stage("gamma"), "discount factor");
    cmd->add_option_function<std::string>("--epsilon", stage("epsilon"), "exploration rate");
    cmd->add_option_function<std::string>("--tau", stage("tau"), "target soft-update rate");
    cmd->add_option_function<std::string>("--batch", stage("batch"), "minibatch size");
    cmd->add_option_function<std::string>("--warmup", stage("warmup"), "random warmup steps");
    cmd->add_option_function<std::string>("--capacity", stage("capacity"), "replay capacity");
    cmd->add_option_function<std::string>("--policy", stage("policy"), "deeptop | random");
    cmd->add_option_function<std::vector<std::string>>(
           "--set",
           [&over](const std::vector<std::string>& pairs) {
               for (const std::string& kv : pairs) {
                   const auto eq = kv.find('=');
                   if (eq == std::string::npos)
                       throw CLI::ValidationError("--set expects key=value");
                   over[kv.substr(0, eq)] = kv.substr(eq + 1);
               }
           },
           "set any config key, e.g. --set ev.price_levels=21")
        ->take_all();
}

int run_training(const Overrides& over, const std::string& config_path) {
    const deeptop::ExperimentConfig cfg =
        config_path.empty() ? deeptop::make_config(over) : deeptop::load_config(config_path, over);
    deeptop::run_experiment(cfg);
    std::printf("wrote %d run(s) to %s\n", cfg.runs, cfg.outdir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"threshold-policy reinforcement learning toolkit"};
    app.require_subcommand(1);

    // train-mdp
    Overrides mdp_over;
    std::string mdp_config;
    auto* train_mdp = app.add_subcommand("train-mdp", "train on an MDP benchmark");
    train_mdp->add_option_function<std::string>(
        "--env", [&mdp_over](const std::string& v) { mdp_over["env"] = v; },
        "ev | inventory | mts");
    add_train_options(train_mdp, mdp_over, mdp_config);

    // train-rmab
    Overrides rmab_over;
    std::string rmab_config;
    auto* train_rmab = app.add_subcommand("train-rmab", "train restless-bandit index functions");
    train_rmab->add_option_function<std::string>(
        "--env", [&rmab_over](const std::string& v) { rmab_over["env"] = v; },
        "onedim | recovering");
    train_rmab->add_option_function<std::string>(
        "--arms", [&rmab_over](const std::string& v) { rmab_over["arms"] = v; }, "number of arms");
    train_rmab->add_option_function<std::string>(
        "--activate", [&rmab_over](const std::string& v) { rmab_over["activate"] = v; },
        "arms activated per step");
    train_rmab->add_option_function<std::string>(
        "--bound", [&rmab_over](const std::string& v) { rmab_over["bound"] = v; },
        "index bound M");
    add_train_options(train_rmab, rmab_over, rmab_config);

    // oracle
    auto* oracle = app.add_subcommand("oracle", "exact small-instance checks");
    oracle->require_subcommand(1);

    int check_specs = 100;
    std::uint64_t check_seed = 7;
    auto* check_mdp = oracle->add_subcommand("grad-check-mdp",
                                             "threshold gradient vs finite differences");
    check_mdp->add_option("--specs", check_specs, "random instances");
    check_mdp->add_option("--seed", check_seed, "generator seed");

    int arm_specs = 100;
    std::uint64_t arm_seed = 7;
    auto* check_rmab = oracle->add_subcommand("grad-check-rmab",
                                              "arm objective gradient vs finite differences");
    check_rmab->add_option("--specs", arm_specs, "random instances");
    check_rmab->add_option("--seed", arm_seed, "generator seed");

    std::string whittle_env = "onedim";
    double whittle_p = 0.5, whittle_q = -1.0, whittle_gamma = 0.99, whittle_bound = 1.0;
    int whittle_states = 100;
    std::string whittle_out;
    auto* whittle = oracle->add_subcommand("whittle", "index table by bisection");
    whittle->add_option("--env", whittle_env, "onedim");
    whittle->add_option("--p", whittle_p, "activation success probability");
    whittle->add_option("--q", whittle_q, "passive decay probability (default: p)");
    whittle->add_option("--gamma", whittle_gamma, "discount factor");
    whittle->add_option("--states", whittle_states, "chain length");
    whittle->add_option("--bound", whittle_bound, "search range [-M, +M]");
    whittle->add_option("--out", whittle_out, "CSV path (default: stdout)");

    // aggregate
    std::string agg_dir;
    auto* aggregate = app.add_subcommand("aggregate", "recompute aggregate.csv for a run directory");
    aggregate->add_option("dir", agg_dir, "directory with run_<i>.csv files")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_mdp->parsed()) return run_training(mdp_over, mdp_config);
        if (train_rmab->parsed()) {
            if (!rmab_over.count("env")) rmab_over["env"] = "onedim";
            return run_training(rmab_over, rmab_config);
        }
        if (check_mdp->parsed()) {
            const auto report = deeptop::mdp_gradient_check(check_specs, check_seed);
            std::printf("mdp-gradient-check specs=%d max_rel_err=%.3e tol=%.1e %s\n",
                        report.specs_checked, report.max_rel_err, report.rel_tol,
                        report.pass ? "PASS" : "FAIL");
            return report.pass ? 0 : 1;
        }
        if (check_rmab->parsed()) {
            const auto report = deeptop::arm_gradient_check(arm_specs, arm_seed);
            std::printf("rmab-gradient-check specs=%d max_rel_err=%.3e tol=%.1e %s\n",
                        report.specs_checked, report.max_rel_err, report.rel_tol,
                        report.pass ? "PASS" : "FAIL");
            return report.pass ? 0 : 1;
        }
        if (whittle->parsed()) {
            if (whittle_env != "onedim")
                throw std::runtime_error("whittle mode supports --env onedim");
            if (whittle_q < 0.0) whittle_q = whittle_p;
            const auto spec =
                deeptop::onedim_arm_spec(whittle_states, whittle_p, whittle_q, whittle_gamma);
            const auto indices = deeptop::whittle_all_states(spec, whittle_bound);
            std::string csv = "state,index\n";
            for (int s = 0; s < whittle_states; ++s) {
                if (!indices[s].crossed)
                    throw std::runtime_error("no single indifference point for state " +
                                             std::to_string(s));
                char buf[64];
                std::snprintf(buf, sizeof(buf), "%d,%.12g\n", s, indices[s].index);
                csv += buf;
            }
            if (whittle_out.empty()) {
                std::fputs(csv.c_str(), stdout);
            } else {
                FILE* f = std::fopen(whittle_out.c_str(), "wb");
                if (!f) throw std::runtime_error("cannot write " + whittle_out);
                std::fputs(csv.c_str(), f);
                std::fclose(f);
            }
            return 0;
        }
        if (aggregate->parsed()) {
            const int n = deeptop::aggregate_directory(agg_dir);
            std::printf("aggregated %d run(s) under %s\n", n, agg_dir.c_str());
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
