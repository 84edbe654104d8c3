#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "deeptop/agent_mdp.hpp"
#include "deeptop/agent_rmab.hpp"
#include "deeptop/config.hpp"

namespace deeptop {

struct LogRow {
    int run = 0;
    long timestep = 0;
    double reward = 0.0;
    double avg_reward_100 = 0.0;
};

struct AggregateRow {
    long timestep = 0;
    double mean = 0.0;
    double std_dev = 0.0;  // population standard deviation across runs
};

struct RunResult {
    std::vector<LogRow> rows;
    // learned index tables (per arm, per state), filled on restless-bandit
    // training runs
    std::vector<std::vector<double>> arm_indices;
    int index_min_state = 0;
    // final networks of MDP training runs
    std::optional<MlpParams> actor;
    std::optional<MlpParams> critic;
};

// Environment construction from a resolved config. The seed covers every
// stream the environment owns.
std::unique_ptr<MdpEnvironment> make_mdp_environment(const ExperimentConfig& cfg,
                                                     std::uint64_t seed);
RmabEnv make_rmab_environment(const ExperimentConfig& cfg, std::uint64_t seed);

MdpAgentConfig mdp_agent_config(const ExperimentConfig& cfg);
RmabAgentConfig rmab_agent_config(const ExperimentConfig& cfg);

// One seeded training (or random-policy) run; run index r uses base seed + r.
RunResult run_single(const ExperimentConfig& cfg, int run_idx);

// All runs, parallel up to cfg.jobs; writes run_<r>.csv, learned index
// tables, aggregate.csv and the resolved config echo into cfg.outdir.
std::vector<RunResult> run_experiment(const ExperimentConfig& cfg);

// Per-timestep mean and population standard deviation of the trailing
// average reward across aligned runs.
std::vector<AggregateRow> aggregate_runs(const std::vector<std::vector<LogRow>>& runs);

void write_run_csv(const std::string& path, const std::vector<LogRow>& rows);
std::vector<LogRow> read_run_csv(const std::string& path);
void write_aggregate_csv(const std::string& path, const std::vector<AggregateRow>& rows);
void write_index_csv(const std::string& path, const std::vector<double>& index,
                     int min_state);

// Re-aggregates every run_<r>.csv found under dir; returns the run count.
int aggregate_directory(const std::string& dir);

}  // namespace deeptop
