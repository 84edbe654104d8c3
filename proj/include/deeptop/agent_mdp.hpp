#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "deeptop/envs_mdp.hpp"
#include "deeptop/nn.hpp"
#include "deeptop/replay.hpp"
#include "deeptop/rng.hpp"

namespace deeptop {

struct MdpAgentConfig {
    std::vector<int> hidden = {128, 128};
    double actor_lr = 1e-4;
    double critic_lr = 1e-3;
    double gamma = 0.99;
    double epsilon = 0.05;
    double tau = 0.001;
    int batch = 64;
    int warmup = 1000;
    std::size_t capacity = 100000;
};

// Actor learns the threshold function over vector states; the critic maps
// (scalar, vector) to both action values in one pass. A slower target critic
// backs the TD targets.
class MdpAgent {
public:
    MdpAgent(int vector_dim, const MdpAgentConfig& cfg, std::uint64_t seed);

    // mu(v)
    double threshold(const std::vector<double>& v);

    // epsilon-random, otherwise activate iff the threshold exceeds the scalar.
    int select_action(const ScalarVectorState& s);

    // TD targets r + gamma * max_a' Q'(s', a') from the frozen target critic.
    std::vector<double> td_targets(const std::vector<const Transition*>& batch);

    // Estimated gradient of the mean squared TD error.
    Gradient critic_loss_gradient(const std::vector<const Transition*>& batch);

    // Estimated gradient of the threshold objective: mean of
    // (Q(mu(v), v, 1) - Q(mu(v), v, 0)) * grad mu(v) over the batch.
    Gradient actor_objective_gradient(const std::vector<const Transition*>& batch);

    // One TD step on the squared error against the frozen target critic.
    void critic_update(const std::vector<const Transition*>& batch);

    // Ascend the batch estimate of the threshold objective gradient; the
    // critic is read but never modified here.
    void actor_update(const std::vector<const Transition*>& batch);

    struct StepLog {
        double reward = 0.0;
        int action = 0;
    };

    // Full loop body: act (randomly during warmup), store, and once the
    // memory reaches warmup size run critic, actor, then target soft update.
    StepLog train_step(MdpEnvironment& env);

    const MlpParams& actor() const { return actor_; }
    const MlpParams& critic() const { return critic_; }
    const MlpParams& target_critic() const { return target_critic_; }
    void set_actor(const MlpParams& actor) { actor_ = actor; }
    void set_critic(const MlpParams& critic, const MlpParams& target) {
        critic_ = critic;
        target_critic_ = target;
    }
    ReplayMemory& memory() { return memory_; }
    const MdpAgentConfig& config() const { return cfg_; }

    // test instrumentation: invoked with "critic", "actor", "soft_update"
    std::function<void(const char*)> phase_hook;

private:
    void note_phase(const char* phase) {
        if (phase_hook) phase_hook(phase);
    }

    MdpAgentConfig cfg_;
    Rng rng_;
    MlpParams actor_;
    MlpParams critic_;
    MlpParams target_critic_;
    AdamState actor_opt_;
    AdamState critic_opt_;
    ReplayMemory memory_;

    Gradient actor_grad_;
    Gradient critic_grad_;
    MlpWorkspace ws_a_;
    MlpWorkspace ws_c_;
    MlpWorkspace ws_t_;
    MlpWorkspace scratch_;
    std::vector<double> critic_in_;
};

}  // namespace deeptop
