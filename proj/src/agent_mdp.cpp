#include "deeptop/agent_mdp.hpp"

#include <algorithm>
#include <stdexcept>

namespace deeptop {

namespace {

std::vector<int> critic_sizes(int vector_dim, const std::vector<int>& hidden) {
    std::vector<int> sizes;
    sizes.push_back(1 + vector_dim);
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(2);
    return sizes;
}

std::vector<int> actor_sizes(int vector_dim, const std::vector<int>& hidden) {
    std::vector<int> sizes;
    sizes.push_back(vector_dim);
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(1);
    return sizes;
}

}  // namespace

MdpAgent::MdpAgent(int vector_dim, const MdpAgentConfig& cfg, std::uint64_t seed)
    : cfg_(cfg),
      rng_(mix_seed(seed, 0)),
      memory_(cfg.capacity) {
    Rng init_rng(mix_seed(seed, 1));
    actor_ = init_params(actor_sizes(vector_dim, cfg.hidden), init_rng);
    critic_ = init_params(critic_sizes(vector_dim, cfg.hidden), init_rng);
    target_critic_ = critic_;
    actor_opt_ = make_adam_state(actor_, cfg.actor_lr);
    critic_opt_ = make_adam_state(critic_, cfg.critic_lr);
    actor_grad_ = zeros_like(actor_);
    critic_grad_ = zeros_like(critic_);
}

double MdpAgent::threshold(const std::vector<double>& v) {
    return mlp_forward(actor_, v, ws_a_)[0];
}

int MdpAgent::select_action(const ScalarVectorState& s) {
    if (rng_.bernoulli(cfg_.epsilon)) return static_cast<int>(rng_.uniform_int(2));
    return threshold(s.v) > s.lambda ? 1 : 0;
}

std::vector<double> MdpAgent::td_targets(const std::vector<const Transition*>& batch) {
    std::vector<double> targets(batch.size());
    for (std::size_t k = 0; k < batch.size(); ++k) {
        const Transition* t = batch[k];
        critic_in_.assign(1, t->next_state.lambda);
        critic_in_.insert(critic_in_.end(), t->next_state.v.begin(), t->next_state.v.end());
        const auto& qn = mlp_forward(target_critic_, critic_in_, ws_t_);
        targets[k] = t->reward + cfg_.gamma * std::max(qn[0], qn[1]);
    }
    return targets;
}

Gradient MdpAgent::critic_loss_gradient(const std::vector<const Transition*>& batch) {
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    const std::vector<double> targets = td_targets(batch);
    Gradient grad = zeros_like(critic_);
    std::vector<double> out_grad(2);

    for (std::size_t k = 0; k < batch.size(); ++k) {
        const Transition* t = batch[k];
        critic_in_.assign(1, t->state.lambda);
        critic_in_.insert(critic_in_.end(), t->state.v.begin(), t->state.v.end());
        const auto& q = mlp_forward(critic_, critic_in_, ws_c_);

        out_grad[0] = out_grad[1] = 0.0;
        out_grad[t->action] = 2.0 * inv_b * (q[t->action] - targets[k]);
        mlp_backward_accumulate(critic_, ws_c_, out_grad, grad, scratch_);
    }
    return grad;
}

Gradient MdpAgent::actor_objective_gradient(const std::vector<const Transition*>& batch) {
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    Gradient grad = zeros_like(actor_);
    std::vector<double> out_grad(1);

    for (const Transition* t : batch) {
        const double mu = mlp_forward(actor_, t->state.v, ws_a_)[0];
        critic_in_.assign(1, mu);
        critic_in_.insert(critic_in_.end(), t->state.v.begin(), t->state.v.end());
        const auto& q = mlp_forward(critic_, critic_in_, ws_c_);
        const double gap = q[1] - q[0];

        out_grad[0] = gap * inv_b;
        mlp_backward_accumulate(actor_, ws_a_, out_grad, grad, scratch_);
    }
    return grad;
}

void MdpAgent::critic_update(const std::vector<const Transition*>& batch) {
    critic_grad_ = critic_loss_gradient(batch);
    adam_step(critic_, critic_opt_, critic_grad_, StepDirection::descend);
}

void MdpAgent::actor_update(const std::vector<const Transition*>& batch) {
    actor_grad_ = actor_objective_gradient(batch);
    adam_step(actor_, actor_opt_, actor_grad_, StepDirection::ascend);
}

MdpAgent::StepLog MdpAgent::train_step(MdpEnvironment& env) {
    const ScalarVectorState s = env.state();
    const bool warm = memory_.size() < static_cast<std::size_t>(cfg_.warmup);
    const int action = warm ? static_cast<int>(rng_.uniform_int(2)) : select_action(s);
    const double reward = env.step(action);
    memory_.push({s, action, reward, env.state()});

    if (memory_.size() >= static_cast<std::size_t>(cfg_.warmup)) {
        const auto batch = memory_.sample_minibatch(cfg_.batch, rng_);
        note_phase("critic");
        critic_update(batch);
        note_phase("actor");
        actor_update(batch);
        note_phase("soft_update");
        soft_update(target_critic_, critic_, cfg_.tau);
    }
    return {reward, action};
}

}  // namespace deeptop
