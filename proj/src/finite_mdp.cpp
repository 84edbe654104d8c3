#include "deeptop/finite_mdp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace deeptop {

std::vector<std::vector<double>> value_iteration(const FiniteMdp& mdp, double tol) {
    const int n = mdp.n_states;
    std::vector<std::vector<double>> q(2, std::vector<double>(n, 0.0));
    std::vector<double> v(n, 0.0);

    double diff = tol + 1.0;
    while (diff > tol) {
        diff = 0.0;
        for (int s = 0; s < n; ++s) {
            for (int a = 0; a < 2; ++a) {
                double acc = mdp.rewards[a][s];
                for (const auto& e : mdp.transitions[a][s]) acc += mdp.gamma * e.prob * v[e.next];
                diff = std::max(diff, std::abs(acc - q[a][s]));
                q[a][s] = acc;
            }
        }
        for (int s = 0; s < n; ++s) v[s] = std::max(q[0][s], q[1][s]);
    }
    return q;
}

std::vector<int> greedy_policy(const std::vector<std::vector<double>>& q) {
    std::vector<int> policy(q[0].size());
    for (std::size_t s = 0; s < q[0].size(); ++s) policy[s] = q[1][s] > q[0][s] ? 1 : 0;
    return policy;
}

double simulate_policy_average_reward(const FiniteMdp& mdp, const std::vector<int>& policy,
                                      int start_state, long steps, Rng& rng) {
    if (steps <= 0) throw std::invalid_argument("simulate_policy_average_reward: steps must be positive");
    int s = start_state;
    double total = 0.0;
    for (long t = 0; t < steps; ++t) {
        const int a = policy[s];
        total += mdp.rewards[a][s];
        const double u = rng.uniform01();
        double cum = 0.0;
        int next = mdp.transitions[a][s].back().next;
        for (const auto& e : mdp.transitions[a][s]) {
            cum += e.prob;
            if (u < cum) {
                next = e.next;
                break;
            }
        }
        s = next;
    }
    return total / static_cast<double>(steps);
}

}  // namespace deeptop
