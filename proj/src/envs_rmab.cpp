#include "deeptop/envs_rmab.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace deeptop {

double onedim_reward(int s, int n_states) {
    if (s < 0 || s >= n_states) throw std::invalid_argument("onedim_reward: state out of range");
    const double top = n_states - 1;
    const double d = (s - top) / top;
    return 1.0 - d * d;
}

int onedim_next_state(int s, int action, bool success, int n_states) {
    if (!success) return s;
    if (action == 1) return std::min(s + 1, n_states - 1);
    return std::max(s - 1, 0);
}

std::vector<double> evenly_spaced_p(int n_arms) {
    if (n_arms < 2) throw std::invalid_argument("evenly_spaced_p: need at least 2 arms");
    std::vector<double> p(n_arms);
    for (int i = 0; i < n_arms; ++i)
        p[i] = 0.2 + i * 0.6 / (n_arms - 1);
    return p;
}

double recovering_reward(int z, double theta0, double theta1, int z_max) {
    if (z < 1 || z > z_max) throw std::invalid_argument("recovering_reward: waiting time out of range");
    return theta0 * (1.0 - std::exp(-theta1 * z));
}

const std::vector<RecoveringClass>& recovering_classes() {
    static const std::vector<RecoveringClass> classes = {
        {10.0, 0.2}, {8.5, 0.4}, {7.0, 0.6}, {5.5, 0.8}};
    return classes;
}

OneDimArm::OneDimArm(int n_states, double p, double q, std::uint64_t seed, int reward_states)
    : n_states_(n_states), reward_states_(reward_states), p_(p), q_(q), rng_(seed) {
    if (n_states < 2) throw std::invalid_argument("OneDimArm: need at least 2 states");
    if (n_states > reward_states)
        throw std::invalid_argument("OneDimArm: chain longer than the reward anchor");
}

double OneDimArm::step(int action) {
    const double reward = onedim_reward(state_, reward_states_);
    const bool success = rng_.bernoulli(action == 1 ? p_ : q_);
    state_ = onedim_next_state(state_, action, success, n_states_);
    return reward;
}

RecoveringArm::RecoveringArm(int z_max, RecoveringClass cls, int initial_z)
    : z_max_(z_max), cls_(cls), z_(initial_z) {
    if (z_max < 1 || initial_z < 1 || initial_z > z_max)
        throw std::invalid_argument("RecoveringArm: bad waiting time");
}

double RecoveringArm::step(int action) {
    if (action == 1) {
        const double reward = recovering_reward(z_, cls_.theta0, cls_.theta1, z_max_);
        z_ = 1;
        return reward;
    }
    z_ = std::min(z_ + 1, z_max_);
    return 0.0;
}

RmabEnv::RmabEnv(std::vector<std::unique_ptr<RmabArm>> arms, int activate_budget)
    : arms_(std::move(arms)), budget_(activate_budget) {
    if (arms_.empty()) throw std::invalid_argument("RmabEnv: need at least one arm");
    if (budget_ < 1 || budget_ > static_cast<int>(arms_.size()))
        throw std::invalid_argument("RmabEnv: activation budget out of range");
}

std::vector<int> RmabEnv::states() const {
    std::vector<int> s(arms_.size());
    for (std::size_t i = 0; i < arms_.size(); ++i) s[i] = arms_[i]->state();
    return s;
}

std::vector<double> RmabEnv::encoded_states() const {
    std::vector<double> s(arms_.size());
    for (std::size_t i = 0; i < arms_.size(); ++i) s[i] = arms_[i]->encoded_state();
    return s;
}

std::vector<ArmStepResult> RmabEnv::joint_step(const std::vector<int>& activations) {
    if (static_cast<int>(activations.size()) != budget_)
        throw std::invalid_argument("joint_step: activation set size != budget");
    std::vector<char> active(arms_.size(), 0);
    for (int idx : activations) {
        if (idx < 0 || idx >= static_cast<int>(arms_.size()))
            throw std::invalid_argument("joint_step: arm index out of range");
        if (active[idx]) throw std::invalid_argument("joint_step: duplicate arm index");
        active[idx] = 1;
    }
    std::vector<ArmStepResult> out(arms_.size());
    for (std::size_t i = 0; i < arms_.size(); ++i) {
        out[i].reward = arms_[i]->step(active[i] ? 1 : 0);
        out[i].next_state = arms_[i]->state();
    }
    return out;
}

RmabEnv make_onedim_env(int n_arms, int activate_budget, int n_states,
                        double p_override, std::uint64_t seed) {
    std::vector<double> p;
    if (p_override > 0.0) {
        p.assign(n_arms, p_override);
    } else {
        p = evenly_spaced_p(n_arms);
    }
    std::vector<std::unique_ptr<RmabArm>> arms;
    arms.reserve(n_arms);
    for (int i = 0; i < n_arms; ++i)
        arms.push_back(std::make_unique<OneDimArm>(n_states, p[i], p[i], mix_seed(seed, i)));
    return RmabEnv(std::move(arms), activate_budget);
}

RmabEnv make_recovering_env(int n_arms, int activate_budget, int z_max, std::uint64_t seed) {
    const auto& classes = recovering_classes();
    std::vector<std::unique_ptr<RmabArm>> arms;
    arms.reserve(n_arms);
    for (int i = 0; i < n_arms; ++i)
        arms.push_back(std::make_unique<RecoveringArm>(z_max, classes[i % classes.size()]));
    (void)seed;  // recovering arms are deterministic
    return RmabEnv(std::move(arms), activate_budget);
}

}  // namespace deeptop
