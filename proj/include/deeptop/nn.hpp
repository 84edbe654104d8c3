#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "deeptop/rng.hpp"

namespace deeptop {

// One dense layer: row-major weights [out x in] and a bias per output.
struct DenseLayer {
    int in = 0;
    int out = 0;
    std::vector<double> w;  // out * in, row-major
    std::vector<double> b;  // out
};

// Feed-forward network with rectified-linear hidden layers and an identity
// output layer. Plain data; copy freely.
struct MlpParams {
    std::vector<DenseLayer> layers;

    int input_size() const { return layers.empty() ? 0 : layers.front().in; }
    int output_size() const { return layers.empty() ? 0 : layers.back().out; }
    std::size_t param_count() const;
};

// Gradient of a scalar objective with respect to every weight and bias;
// shape always mirrors the MlpParams it was produced from.
using Gradient = MlpParams;

enum class StepDirection { ascend, descend };

// Adam moments and constants for one network.
struct AdamState {
    MlpParams first_moment;
    MlpParams second_moment;
    long step_count = 0;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Scratch buffers reused across forward/backward calls so the training loop
// does not allocate per sample.
struct MlpWorkspace {
    std::vector<std::vector<double>> pre;  // pre-activation per layer
    std::vector<std::vector<double>> act;  // act[0] = input, act[k] = layer k output
    std::vector<double> delta;
    std::vector<double> delta_prev;
};

// Weights and biases uniform on [-1/sqrt(fan_in), +1/sqrt(fan_in)].
MlpParams init_params(const std::vector<int>& layer_sizes, Rng& rng);

// Same layer shapes, every entry zero.
MlpParams zeros_like(const MlpParams& params);

bool same_shape(const MlpParams& a, const MlpParams& b);

// Forward pass; returns the output activations held in the workspace.
const std::vector<double>& mlp_forward(const MlpParams& params,
                                       const std::vector<double>& input,
                                       MlpWorkspace& ws);

// Convenience forward that owns its workspace.
std::vector<double> mlp_forward(const MlpParams& params,
                                const std::vector<double>& input);

// Accumulates d(output . output_grad)/d(params) into grad, which must have
// the same shape as params. Requires a workspace filled by mlp_forward.
// Rectified-linear subgradient at exactly zero is zero.
void mlp_backward_accumulate(const MlpParams& params, const MlpWorkspace& ws,
                             const std::vector<double>& output_grad,
                             Gradient& grad, MlpWorkspace& scratch);

// One-shot exact gradient of (output . output_grad) w.r.t. every parameter.
Gradient mlp_backward(const MlpParams& params, const std::vector<double>& input,
                      const std::vector<double>& output_grad);

AdamState make_adam_state(const MlpParams& params, double learning_rate);

// Standard Adam recurrence, bias correction applied once per call.
// ascend adds the step, descend subtracts it.
void adam_step(MlpParams& params, AdamState& state, const Gradient& grad,
               StepDirection direction);

// target <- tau * source + (1 - tau) * target, elementwise. tau = 0 is a
// no-op, tau = 1 copies source.
void soft_update(MlpParams& target, const MlpParams& source, double tau);

// Versioned checkpoint ("DEEPTOP-NN-1"): layer sizes followed by row-major
// weights and biases, stored as JSON.
void save_checkpoint(const MlpParams& params, const std::string& path);
MlpParams load_checkpoint(const std::string& path);

}  // namespace deeptop
