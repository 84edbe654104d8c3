#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "deeptop/rng.hpp"

namespace deeptop {

// --- One-dimensional birth-death arms ----------------------------------------

// Reward peaks at the top state: 1 - ((s - (n-1)) / (n-1))^2.
double onedim_reward(int s, int n_states);

// Success branch moves toward the boundary clamp; failure self-loops.
int onedim_next_state(int s, int action, bool success, int n_states);

// Activation success probabilities evenly spaced over [0.2, 0.8].
std::vector<double> evenly_spaced_p(int n_arms);

// --- Recovering arms -----------------------------------------------------------

// theta0 * (1 - exp(-theta1 * z)) for a waiting time z in 1..z_max.
double recovering_reward(int z, double theta0, double theta1, int z_max = 100);

struct RecoveringClass {
    double theta0;
    double theta1;
};

// The four reward classes, assigned to arms round-robin.
const std::vector<RecoveringClass>& recovering_classes();

// --- Arm interface and joint environment ----------------------------------------

class RmabArm {
public:
    virtual ~RmabArm() = default;
    virtual int state() const = 0;
    virtual double encoded_state() const = 0;  // scalar network input
    virtual double step(int action) = 0;
    virtual int state_count() const = 0;
    virtual int min_state() const { return 0; }
    virtual double encode(int s) const = 0;
};

// A chain shorter than reward_states is a truncation of the full benchmark
// arm: the ceiling moves down to n_states - 1 while the reward keeps its
// original anchor.
class OneDimArm : public RmabArm {
public:
    OneDimArm(int n_states, double p, double q, std::uint64_t seed,
              int reward_states = 100);

    int state() const override { return state_; }
    double encoded_state() const override { return encode(state_); }
    double step(int action) override;
    int state_count() const override { return n_states_; }
    double encode(int s) const override {
        return static_cast<double>(s) / (n_states_ - 1);
    }

    double p() const { return p_; }
    void set_state(int s) { state_ = s; }

private:
    int n_states_;
    int reward_states_;
    double p_;
    double q_;
    Rng rng_;
    int state_ = 0;
};

class RecoveringArm : public RmabArm {
public:
    RecoveringArm(int z_max, RecoveringClass cls, int initial_z = 1);

    int state() const override { return z_; }
    double encoded_state() const override { return encode(z_); }
    double step(int action) override;
    int state_count() const override { return z_max_; }
    int min_state() const override { return 1; }
    double encode(int s) const override {
        return static_cast<double>(s) / z_max_;
    }

    RecoveringClass reward_class() const { return cls_; }
    void set_state(int z) { z_ = z; }

private:
    int z_max_;
    RecoveringClass cls_;
    int z_ = 1;
};

struct ArmStepResult {
    double reward = 0.0;
    int next_state = 0;
};

// N independently evolving arms; exactly V are activated per step.
class RmabEnv {
public:
    RmabEnv(std::vector<std::unique_ptr<RmabArm>> arms, int activate_budget);

    int arm_count() const { return static_cast<int>(arms_.size()); }
    int budget() const { return budget_; }
    const RmabArm& arm(int i) const { return *arms_[i]; }
    RmabArm& arm(int i) { return *arms_[i]; }

    std::vector<int> states() const;
    std::vector<double> encoded_states() const;

    // Applies action 1 to the listed arms and 0 to the rest. The activation
    // set must contain exactly `budget` distinct valid indices.
    std::vector<ArmStepResult> joint_step(const std::vector<int>& activations);

private:
    std::vector<std::unique_ptr<RmabArm>> arms_;
    int budget_;
};

// Builders matching the benchmark configurations. A positive p_override
// gives every arm the same success probability.
RmabEnv make_onedim_env(int n_arms, int activate_budget, int n_states,
                        double p_override, std::uint64_t seed);
RmabEnv make_recovering_env(int n_arms, int activate_budget, int z_max,
                            std::uint64_t seed);

}  // namespace deeptop
