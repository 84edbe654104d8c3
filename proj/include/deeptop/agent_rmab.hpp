#pragma once

#include <cstdint>
#include <vector>

#include "deeptop/envs_rmab.hpp"
#include "deeptop/nn.hpp"
#include "deeptop/replay.hpp"
#include "deeptop/rng.hpp"

namespace deeptop {

struct RmabAgentConfig {
    std::vector<int> hidden = {128, 128};
    double actor_lr = 1e-4;
    double critic_lr = 1e-3;
    double gamma = 0.99;
    double epsilon = 0.05;
    double tau = 0.001;
    int batch = 64;
    int warmup = 1000;
    std::size_t capacity = 100000;
    double bound = 1.0;  // M: index values live in (-M, +M)
};

struct ArmTransition {
    double state = 0.0;  // encoded arm state
    int action = 0;
    double reward = 0.0;
    double next_state = 0.0;
};

// Per-arm actor/critic/target bundle learning an index function. The actor
// output is squashed to (-M, +M). Each learner owns its random stream, so
// its parameter trajectory depends only on its own data.
class ArmLearner {
public:
    ArmLearner(const RmabAgentConfig& cfg, std::uint64_t seed);

    // mu_i(s) in (-M, +M)
    double index_value(double encoded_state);

    // net-reward TD targets r - lambda * a + gamma * max_a' Q'_lambda(s', a')
    std::vector<double> td_targets(const std::vector<const ArmTransition*>& batch,
                                   const std::vector<double>& lambdas);

    Gradient critic_loss_gradient(const std::vector<const ArmTransition*>& batch,
                                  const std::vector<double>& lambdas);
    Gradient actor_objective_gradient(const std::vector<const ArmTransition*>& batch);

    // TD step at a batch of sampled activation costs; the net reward charges
    // the cost only on active samples.
    void critic_update(const std::vector<const ArmTransition*>& batch,
                       const std::vector<double>& lambdas);

    // Ascend the index objective estimate; the critic is evaluated at the
    // learner's own index value and stays frozen.
    void actor_update(const std::vector<const ArmTransition*>& batch);

    // sample minibatch + fresh costs, run both updates, soft-update target
    void train_from_memory();

    ReplayBuffer<ArmTransition>& memory() { return memory_; }
    const MlpParams& actor() const { return actor_; }
    const MlpParams& critic() const { return critic_; }
    const MlpParams& target_critic() const { return target_critic_; }
    void set_actor(const MlpParams& actor) { actor_ = actor; }
    void set_critic(const MlpParams& critic, const MlpParams& target);
    const RmabAgentConfig& config() const { return cfg_; }

private:
    RmabAgentConfig cfg_;
    Rng rng_;
    MlpParams actor_;
    MlpParams critic_;
    MlpParams target_critic_;
    AdamState actor_opt_;
    AdamState critic_opt_;
    ReplayBuffer<ArmTransition> memory_;

    Gradient actor_grad_;
    Gradient critic_grad_;
    MlpWorkspace ws_a_;
    MlpWorkspace ws_c_;
    MlpWorkspace ws_t_;
    MlpWorkspace scratch_;
};

// Index values for every learner/state pair.
std::vector<double> index_values(std::vector<ArmLearner>& learners,
                                 const std::vector<double>& encoded_states);

// Top-V set (ties to the lowest arm index), or a uniform random V-subset
// with probability epsilon. Returned indices are ascending.
std::vector<int> select_arms(const std::vector<double>& values, int budget,
                             double epsilon, Rng& rng);

// Joint trainer: greedy top-V over learned indices, then one independent
// update per arm.
class RmabAgent {
public:
    RmabAgent(int n_arms, const RmabAgentConfig& cfg, std::uint64_t seed);

    struct StepLog {
        double total_reward = 0.0;
        std::vector<int> activations;
    };

    StepLog train_step(RmabEnv& env);

    ArmLearner& learner(int i) { return learners_[i]; }
    int arm_count() const { return static_cast<int>(learners_.size()); }

    // learned index table over a finite arm state space
    std::vector<double> index_table(int arm, const RmabArm& model);

private:
    RmabAgentConfig cfg_;
    std::vector<ArmLearner> learners_;
    Rng select_rng_;
    long steps_done_ = 0;
};

}  // namespace deeptop
