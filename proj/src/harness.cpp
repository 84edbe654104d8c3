#include "deeptop/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <regex>
#include <stdexcept>
#include <thread>

namespace deeptop {

namespace fs = std::filesystem;

std::unique_ptr<MdpEnvironment> make_mdp_environment(const ExperimentConfig& cfg,
                                                     std::uint64_t seed) {
    if (cfg.env == "ev") {
        if (cfg.ev_price_levels > 0)
            return std::make_unique<QuantizedEvEnv>(cfg.ev, cfg.ev_price_levels, seed);
        return std::make_unique<EvEnv>(cfg.ev, seed);
    }
    if (cfg.env == "inventory") return std::make_unique<InventoryEnv>(cfg.inventory, seed);
    if (cfg.env == "mts") return std::make_unique<MtsEnv>(cfg.mts, seed);
    throw std::invalid_argument("not an MDP environment: " + cfg.env);
}

RmabEnv make_rmab_environment(const ExperimentConfig& cfg, std::uint64_t seed) {
    if (cfg.env == "onedim")
        return make_onedim_env(cfg.arms, cfg.activate, cfg.onedim_states, cfg.onedim_p, seed);
    if (cfg.env == "recovering")
        return make_recovering_env(cfg.arms, cfg.activate, cfg.recovering_zmax, seed);
    throw std::invalid_argument("not a restless-bandit environment: " + cfg.env);
}

MdpAgentConfig mdp_agent_config(const ExperimentConfig& cfg) {
    MdpAgentConfig a;
    a.hidden = cfg.hidden;
    a.actor_lr = cfg.actor_lr;
    a.critic_lr = cfg.critic_lr;
    a.gamma = cfg.gamma;
    a.epsilon = cfg.epsilon;
    a.tau = cfg.tau;
    a.batch = cfg.batch;
    a.warmup = cfg.warmup;
    a.capacity = cfg.capacity;
    return a;
}

RmabAgentConfig rmab_agent_config(const ExperimentConfig& cfg) {
    RmabAgentConfig a;
    a.hidden = cfg.hidden;
    a.actor_lr = cfg.actor_lr;
    a.critic_lr = cfg.critic_lr;
    a.gamma = cfg.gamma;
    a.epsilon = cfg.epsilon;
    a.tau = cfg.tau;
    a.batch = cfg.batch;
    a.warmup = cfg.warmup;
    a.capacity = cfg.capacity;
    a.bound = cfg.resolved_bound();
    return a;
}

namespace {

// exact trailing window: summed oldest-first so logs can be reproduced
// bit-for-bit from the instantaneous column
class TrailingMean {
public:
    double push(double reward) {
        window_.push_back(reward);
        if (window_.size() > 100) window_.pop_front();
        double sum = 0.0;
        for (double r : window_) sum += r;
        return sum / static_cast<double>(window_.size());
    }

private:
    std::deque<double> window_;
};

}  // namespace

RunResult run_single(const ExperimentConfig& cfg, int run_idx) {
    const std::uint64_t run_base = cfg.seed + static_cast<std::uint64_t>(run_idx);
    const std::uint64_t env_seed = mix_seed(run_base, 101);
    const std::uint64_t agent_seed = mix_seed(run_base, 202);
    const std::uint64_t policy_seed = mix_seed(run_base, 303);

    RunResult result;
    result.rows.reserve(cfg.timesteps);
    TrailingMean trailing;

    if (cfg.is_rmab()) {
        RmabEnv env = make_rmab_environment(cfg, env_seed);
        if (cfg.policy == "deeptop") {
            RmabAgent agent(env.arm_count(), rmab_agent_config(cfg), agent_seed);
            for (long t = 1; t <= cfg.timesteps; ++t) {
                const auto log = agent.train_step(env);
                result.rows.push_back({run_idx, t, log.total_reward, trailing.push(log.total_reward)});
            }
            result.index_min_state = env.arm(0).min_state();
            for (int i = 0; i < env.arm_count(); ++i)
                result.arm_indices.push_back(agent.index_table(i, env.arm(i)));
        } else {
            Rng prng(policy_seed);
            const std::vector<double> flat(env.arm_count(), 0.0);
            for (long t = 1; t <= cfg.timesteps; ++t) {
                const auto acts = select_arms(flat, env.budget(), 1.0, prng);
                const auto results = env.joint_step(acts);
                double total = 0.0;
                for (const auto& r : results) total += r.reward;
                result.rows.push_back({run_idx, t, total, trailing.push(total)});
            }
        }
        return result;
    }

    auto env = make_mdp_environment(cfg, env_seed);
    if (cfg.policy == "deeptop") {
        MdpAgent agent(env->vector_dim(), mdp_agent_config(cfg), agent_seed);
        for (long t = 1; t <= cfg.timesteps; ++t) {
            const auto log = agent.train_step(*env);
            result.rows.push_back({run_idx, t, log.reward, trailing.push(log.reward)});
        }
        result.actor = agent.actor();
        result.critic = agent.critic();
    } else {
        Rng prng(policy_seed);
        for (long t = 1; t <= cfg.timesteps; ++t) {
            const double reward = env->step(static_cast<int>(prng.uniform_int(2)));
            result.rows.push_back({run_idx, t, reward, trailing.push(reward)});
        }
    }
    return result;
}

std::vector<RunResult> run_experiment(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.outdir);
    save_config(cfg, (fs::path(cfg.outdir) / "config.txt").string());

    std::vector<RunResult> results(cfg.runs);
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&]() {
        while (true) {
            const int r = next.fetch_add(1);
            if (r >= cfg.runs) return;
            try {
                results[r] = run_single(cfg, r);
                const fs::path dir(cfg.outdir);
                write_run_csv((dir / ("run_" + std::to_string(r) + ".csv")).string(),
                              results[r].rows);
                if (cfg.export_index)
                    for (std::size_t i = 0; i < results[r].arm_indices.size(); ++i)
                        write_index_csv((dir / ("run_" + std::to_string(r) + "_arm" +
                                                std::to_string(i) + "_index.csv"))
                                            .string(),
                                        results[r].arm_indices[i], results[r].index_min_state);
                if (cfg.save_nets && results[r].actor) {
                    const std::string stem = "run_" + std::to_string(r);
                    save_checkpoint(*results[r].actor, (dir / (stem + "_actor.json")).string());
                    save_checkpoint(*results[r].critic, (dir / (stem + "_critic.json")).string());
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };

    const int n_threads = std::min(cfg.jobs, cfg.runs);
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<std::vector<LogRow>> logs;
    logs.reserve(results.size());
    for (const auto& r : results) logs.push_back(r.rows);
    write_aggregate_csv((fs::path(cfg.outdir) / "aggregate.csv").string(),
                        aggregate_runs(logs));
    return results;
}

std::vector<AggregateRow> aggregate_runs(const std::vector<std::vector<LogRow>>& runs) {
    if (runs.empty()) throw std::invalid_argument("aggregate_runs: no runs");
    const std::size_t n = runs.front().size();
    for (const auto& run : runs) {
        if (run.size() != n) throw std::invalid_argument("aggregate_runs: misaligned run lengths");
        for (std::size_t t = 0; t < n; ++t)
            if (run[t].timestep != runs.front()[t].timestep)
                throw std::invalid_argument("aggregate_runs: misaligned timesteps");
    }

    std::vector<AggregateRow> out(n);
    const double count = static_cast<double>(runs.size());
    for (std::size_t t = 0; t < n; ++t) {
        double mean = 0.0;
        for (const auto& run : runs) mean += run[t].avg_reward_100;
        mean /= count;
        double var = 0.0;
        for (const auto& run : runs) {
            const double d = run[t].avg_reward_100 - mean;
            var += d * d;
        }
        out[t] = {runs.front()[t].timestep, mean, std::sqrt(var / count)};
    }
    return out;
}

namespace {

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

std::string g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

void write_run_csv(const std::string& path, const std::vector<LogRow>& rows) {
    std::string content = "run,timestep,reward,avg_reward_100\n";
    for (const auto& row : rows) {
        content += std::to_string(row.run);
        content += ',';
        content += std::to_string(row.timestep);
        content += ',';
        content += g17(row.reward);
        content += ',';
        content += g17(row.avg_reward_100);
        content += '\n';
    }
    write_text(path, content);
}

std::vector<LogRow> read_run_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read run log: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "run,timestep,reward,avg_reward_100")
        throw std::runtime_error("unexpected run log header in " + path);
    std::vector<LogRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        LogRow row;
        char* end = nullptr;
        row.run = static_cast<int>(std::strtol(line.c_str(), &end, 10));
        row.timestep = std::strtol(end + 1, &end, 10);
        row.reward = std::strtod(end + 1, &end);
        row.avg_reward_100 = std::strtod(end + 1, &end);
        rows.push_back(row);
    }
    return rows;
}

void write_aggregate_csv(const std::string& path, const std::vector<AggregateRow>& rows) {
    std::string content = "timestep,mean,std\n";
    for (const auto& row : rows) {
        content += std::to_string(row.timestep);
        content += ',';
        content += g17(row.mean);
        content += ',';
        content += g17(row.std_dev);
        content += '\n';
    }
    write_text(path, content);
}

void write_index_csv(const std::string& path, const std::vector<double>& index,
                     int min_state) {
    std::string content = "state,index\n";
    for (std::size_t s = 0; s < index.size(); ++s) {
        content += std::to_string(min_state + static_cast<int>(s));
        content += ',';
        content += g17(index[s]);
        content += '\n';
    }
    write_text(path, content);
}

int aggregate_directory(const std::string& dir) {
    const std::regex pattern("run_([0-9]+)\\.csv");
    std::vector<std::pair<int, std::string>> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::smatch match;
        const std::string name = entry.path().filename().string();
        if (std::regex_match(name, match, pattern))
            files.emplace_back(std::stoi(match[1]), entry.path().string());
    }
    if (files.empty()) throw std::runtime_error("no run_<i>.csv files under " + dir);
    std::sort(files.begin(), files.end());

    std::vector<std::vector<LogRow>> logs;
    logs.reserve(files.size());
    for (const auto& [idx, path] : files) logs.push_back(read_run_csv(path));
    write_aggregate_csv((fs::path(dir) / "aggregate.csv").string(), aggregate_runs(logs));
    return static_cast<int>(files.size());
}

}  // namespace deeptop
