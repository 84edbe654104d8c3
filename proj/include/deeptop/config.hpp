#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "deeptop/envs_mdp.hpp"

namespace deeptop {

// Fully resolved experiment description. Defaults are the benchmark training
// constants; a config file and CLI flags override them key by key.
struct ExperimentConfig {
    std::string env = "ev";  // ev | inventory | mts | onedim | recovering
    std::string policy = "deeptop";  // deeptop | random
    long timesteps = 20000;
    int runs = 1;
    std::uint64_t seed = 1;
    int jobs = 1;
    std::string outdir = "out";

    std::vector<int> hidden = {128, 128};
    double actor_lr = 1e-4;
    double critic_lr = 1e-3;
    double gamma = 0.99;
    double epsilon = 0.05;
    double tau = 0.001;
    int batch = 64;
    int warmup = 1000;
    std::size_t capacity = 100000;

    // restless-bandit settings
    int arms = 10;
    int activate = 3;
    double bound = 0.0;  // 0: per-environment default (1 one-dim, 10 recovering)
    int onedim_states = 100;
    double onedim_p = 0.0;  // 0: evenly spaced over [0.2, 0.8]
    int recovering_zmax = 100;

    // environment constants
    EvParams ev;
    int ev_price_levels = 0;  // > 0 switches the EV price to a finite grid
    InventoryParams inventory;
    MtsParams mts;

    bool export_index = true;  // write learned per-arm index tables
    bool save_nets = false;    // write actor/critic checkpoints after training

    double resolved_bound() const {
        if (bound > 0.0) return bound;
        return env == "recovering" ? 10.0 : 1.0;
    }
    bool is_rmab() const { return env == "onedim" || env == "recovering"; }

    bool operator==(const ExperimentConfig&) const = default;
};

// key = value lines; '#' starts a comment. Unknown keys are rejected by name.
ExperimentConfig parse_config_lines(const std::vector<std::string>& lines,
                                    ExperimentConfig base);

// File values override defaults, then CLI overrides take precedence. When
// neither sets a seed, the DEEPTOP_SEED environment variable is consulted.
ExperimentConfig load_config(const std::string& path,
                             const std::map<std::string, std::string>& cli_overrides);

// In-memory variant used by the CLI when no config file was given.
ExperimentConfig make_config(const std::map<std::string, std::string>& cli_overrides);

// Canonical echo of every key; re-loading it reproduces the config exactly.
std::string config_to_text(const ExperimentConfig& cfg);
void save_config(const ExperimentConfig& cfg, const std::string& path);

}  // namespace deeptop
