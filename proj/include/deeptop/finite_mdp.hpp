#pragma once

#include <cstddef>
#include <vector>

#include "deeptop/rng.hpp"

namespace deeptop {

// Explicit finite MDP with two actions, sparse rows.
struct FiniteMdp {
    struct Entry {
        int next = 0;
        double prob = 0.0;
    };
    int n_states = 0;
    double gamma = 0.99;
    // indexed [action][state]
    std::vector<std::vector<std::vector<Entry>>> transitions;
    std::vector<std::vector<double>> rewards;
};

// Q-value iteration to the given sup-norm tolerance.
std::vector<std::vector<double>> value_iteration(const FiniteMdp& mdp, double tol);

// Greedy action per state from a Q table (ties go to action 0).
std::vector<int> greedy_policy(const std::vector<std::vector<double>>& q);

// Long-run average reward of a fixed policy, estimated by simulation.
double simulate_policy_average_reward(const FiniteMdp& mdp, const std::vector<int>& policy,
                                      int start_state, long steps, Rng& rng);

}  // namespace deeptop
