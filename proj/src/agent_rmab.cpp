#include "deeptop/agent_rmab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace deeptop {

ArmLearner::ArmLearner(const RmabAgentConfig& cfg, std::uint64_t seed)
    : cfg_(cfg), rng_(mix_seed(seed, 0)), memory_(cfg.capacity) {
    Rng init_rng(mix_seed(seed, 1));
    std::vector<int> actor_sizes{1};
    actor_sizes.insert(actor_sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    actor_sizes.push_back(1);
    std::vector<int> critic_sizes{2};
    critic_sizes.insert(critic_sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    critic_sizes.push_back(2);

    actor_ = init_params(actor_sizes, init_rng);
    critic_ = init_params(critic_sizes, init_rng);
    target_critic_ = critic_;
    actor_opt_ = make_adam_state(actor_, cfg.actor_lr);
    critic_opt_ = make_adam_state(critic_, cfg.critic_lr);
    actor_grad_ = zeros_like(actor_);
    critic_grad_ = zeros_like(critic_);
}

double ArmLearner::index_value(double encoded_state) {
    const double raw = mlp_forward(actor_, {encoded_state}, ws_a_)[0];
    return cfg_.bound * std::tanh(raw);
}

void ArmLearner::set_critic(const MlpParams& critic, const MlpParams& target) {
    critic_ = critic;
    target_critic_ = target;
}

std::vector<double> ArmLearner::td_targets(const std::vector<const ArmTransition*>& batch,
                                           const std::vector<double>& lambdas) {
    if (batch.size() != lambdas.size())
        throw std::invalid_argument("td_targets: batch and cost draws must align");
    std::vector<double> targets(batch.size());
    std::vector<double> in(2);
    for (std::size_t k = 0; k < batch.size(); ++k) {
        const ArmTransition* t = batch[k];
        const double lambda = lambdas[k];
        if (lambda < -cfg_.bound || lambda > cfg_.bound)
            throw std::invalid_argument("td_targets: cost draw outside [-M, +M]");
        in[0] = lambda;
        in[1] = t->next_state;
        const auto& qn = mlp_forward(target_critic_, in, ws_t_);
        targets[k] = t->reward - lambda * t->action + cfg_.gamma * std::max(qn[0], qn[1]);
    }
    return targets;
}

Gradient ArmLearner::critic_loss_gradient(const std::vector<const ArmTransition*>& batch,
                                          const std::vector<double>& lambdas) {
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    const std::vector<double> targets = td_targets(batch, lambdas);
    Gradient grad = zeros_like(critic_);
    std::vector<double> in(2), out_grad(2);

    for (std::size_t k = 0; k < batch.size(); ++k) {
        const ArmTransition* t = batch[k];
        in[0] = lambdas[k];
        in[1] = t->state;
        const auto& q = mlp_forward(critic_, in, ws_c_);
        out_grad[0] = out_grad[1] = 0.0;
        out_grad[t->action] = 2.0 * inv_b * (q[t->action] - targets[k]);
        mlp_backward_accumulate(critic_, ws_c_, out_grad, grad, scratch_);
    }
    return grad;
}

Gradient ArmLearner::actor_objective_gradient(const std::vector<const ArmTransition*>& batch) {
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    Gradient grad = zeros_like(actor_);
    std::vector<double> in(2), out_grad(1);

    for (const ArmTransition* t : batch) {
        const double raw = mlp_forward(actor_, {t->state}, ws_a_)[0];
        const double th = std::tanh(raw);
        const double mu = cfg_.bound * th;

        in[0] = mu;
        in[1] = t->state;
        const auto& q = mlp_forward(critic_, in, ws_c_);
        const double gap = q[1] - q[0];

        // chain through the saturating output
        out_grad[0] = gap * inv_b * cfg_.bound * (1.0 - th * th);
        mlp_backward_accumulate(actor_, ws_a_, out_grad, grad, scratch_);
    }
    return grad;
}

void ArmLearner::critic_update(const std::vector<const ArmTransition*>& batch,
                               const std::vector<double>& lambdas) {
    critic_grad_ = critic_loss_gradient(batch, lambdas);
    adam_step(critic_, critic_opt_, critic_grad_, StepDirection::descend);
}

void ArmLearner::actor_update(const std::vector<const ArmTransition*>& batch) {
    actor_grad_ = actor_objective_gradient(batch);
    adam_step(actor_, actor_opt_, actor_grad_, StepDirection::ascend);
}

void ArmLearner::train_from_memory() {
    const auto batch = memory_.sample_minibatch(cfg_.batch, rng_);
    std::vector<double> lambdas(batch.size());
    for (double& l : lambdas) l = rng_.uniform(-cfg_.bound, cfg_.bound);
    critic_update(batch, lambdas);
    actor_update(batch);
    soft_update(target_critic_, critic_, cfg_.tau);
}

std::vector<double> index_values(std::vector<ArmLearner>& learners,
                                 const std::vector<double>& encoded_states) {
    if (learners.size() != encoded_states.size())
        throw std::invalid_argument("index_values: learners and states must align");
    std::vector<double> values(learners.size());
    for (std::size_t i = 0; i < learners.size(); ++i)
        values[i] = learners[i].index_value(encoded_states[i]);
    return values;
}

std::vector<int> select_arms(const std::vector<double>& values, int budget,
                             double epsilon, Rng& rng) {
    const int n = static_cast<int>(values.size());
    if (budget > n) throw std::invalid_argument("select_arms: budget exceeds arm count");

    std::vector<int> chosen;
    if (rng.bernoulli(epsilon)) {
        // uniform random V-subset via partial Fisher-Yates
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        for (int i = 0; i < budget; ++i) {
            const int j = i + static_cast<int>(rng.uniform_int(n - i));
            std::swap(order[i], order[j]);
        }
        chosen.assign(order.begin(), order.begin() + budget);
    } else {
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (values[a] != values[b]) return values[a] > values[b];
            return a < b;
        });
        chosen.assign(order.begin(), order.begin() + budget);
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

RmabAgent::RmabAgent(int n_arms, const RmabAgentConfig& cfg, std::uint64_t seed)
    : cfg_(cfg), select_rng_(mix_seed(seed, 1000)) {
    learners_.reserve(n_arms);
    for (int i = 0; i < n_arms; ++i) learners_.emplace_back(cfg, mix_seed(seed, i));
}

RmabAgent::StepLog RmabAgent::train_step(RmabEnv& env) {
    const auto encoded = env.encoded_states();
    const bool warm = steps_done_ < cfg_.warmup;

    std::vector<int> activations;
    if (warm) {
        activations = select_arms(std::vector<double>(encoded.size(), 0.0), env.budget(),
                                  1.0, select_rng_);
    } else {
        const auto values = index_values(learners_, encoded);
        activations = select_arms(values, env.budget(), cfg_.epsilon, select_rng_);
    }

    const auto results = env.joint_step(activations);
    StepLog log;
    log.activations = activations;
    std::vector<char> active(encoded.size(), 0);
    for (int idx : activations) active[idx] = 1;
    for (std::size_t i = 0; i < encoded.size(); ++i) {
        log.total_reward += results[i].reward;
        learners_[i].memory().push(
            {encoded[i], active[i] ? 1 : 0, results[i].reward, env.arm(static_cast<int>(i)).encoded_state()});
    }

    ++steps_done_;
    if (steps_done_ >= cfg_.warmup) {
        for (auto& learner : learners_) learner.train_from_memory();
    }
    return log;
}

std::vector<double> RmabAgent::index_table(int arm, const RmabArm& model) {
    std::vector<double> table;
    const int n = model.state_count();
    table.reserve(n);
    const int lo = model.min_state();
    for (int s = lo; s < lo + n; ++s)
        table.push_back(learners_[arm].index_value(model.encode(s)));
    return table;
}

}  // namespace deeptop
