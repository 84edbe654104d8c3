#include "deeptop/nn.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace deeptop {

std::size_t MlpParams::param_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers) n += layer.w.size() + layer.b.size();
    return n;
}

MlpParams init_params(const std::vector<int>& layer_sizes, Rng& rng) {
    if (layer_sizes.size() < 2)
        throw std::invalid_argument("init_params: need at least two layer sizes");
    for (int s : layer_sizes)
        if (s <= 0) throw std::invalid_argument("init_params: layer sizes must be positive");

    MlpParams params;
    params.layers.resize(layer_sizes.size() - 1);
    for (std::size_t k = 0; k + 1 < layer_sizes.size(); ++k) {
        DenseLayer& layer = params.layers[k];
        layer.in = layer_sizes[k];
        layer.out = layer_sizes[k + 1];
        layer.w.resize(static_cast<std::size_t>(layer.out) * layer.in);
        layer.b.resize(layer.out);
        const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
        for (double& x : layer.w) x = rng.uniform(-bound, bound);
        for (double& x : layer.b) x = rng.uniform(-bound, bound);
    }
    return params;
}

MlpParams zeros_like(const MlpParams& params) {
    MlpParams z = params;
    for (auto& layer : z.layers) {
        std::fill(layer.w.begin(), layer.w.end(), 0.0);
        std::fill(layer.b.begin(), layer.b.end(), 0.0);
    }
    return z;
}

bool same_shape(const MlpParams& a, const MlpParams& b) {
    if (a.layers.size() != b.layers.size()) return false;
    for (std::size_t k = 0; k < a.layers.size(); ++k)
        if (a.layers[k].in != b.layers[k].in || a.layers[k].out != b.layers[k].out)
            return false;
    return true;
}

const std::vector<double>& mlp_forward(const MlpParams& params,
                                       const std::vector<double>& input,
                                       MlpWorkspace& ws) {
    const std::size_t L = params.layers.size();
    if (L == 0) throw std::invalid_argument("mlp_forward: empty network");
    if (static_cast<int>(input.size()) != params.layers.front().in)
        throw std::invalid_argument("mlp_forward: input size mismatch");

    ws.pre.resize(L);
    ws.act.resize(L + 1);
    ws.act[0] = input;

    for (std::size_t k = 0; k < L; ++k) {
        const DenseLayer& layer = params.layers[k];
        const std::vector<double>& x = ws.act[k];
        std::vector<double>& pre = ws.pre[k];
        pre.assign(layer.out, 0.0);
        for (int o = 0; o < layer.out; ++o) {
            const double* row = layer.w.data() + static_cast<std::size_t>(o) * layer.in;
            double acc = layer.b[o];
            for (int i = 0; i < layer.in; ++i) acc += row[i] * x[i];
            pre[o] = acc;
        }
        std::vector<double>& act = ws.act[k + 1];
        act.resize(layer.out);
        if (k + 1 < L) {
            for (int o = 0; o < layer.out; ++o) act[o] = pre[o] > 0.0 ? pre[o] : 0.0;
        } else {
            act = pre;  // identity output
        }
    }
    return ws.act[L];
}

std::vector<double> mlp_forward(const MlpParams& params,
                                const std::vector<double>& input) {
    MlpWorkspace ws;
    return mlp_forward(params, input, ws);
}

void mlp_backward_accumulate(const MlpParams& params, const MlpWorkspace& ws,
                             const std::vector<double>& output_grad,
                             Gradient& grad, MlpWorkspace& scratch) {
    const std::size_t L = params.layers.size();
    if (static_cast<int>(output_grad.size()) != params.layers.back().out)
        throw std::invalid_argument("mlp_backward: output_grad size mismatch");
    if (!same_shape(params, grad))
        throw std::invalid_argument("mlp_backward: gradient shape mismatch");

    std::vector<double>& delta = scratch.delta;
    std::vector<double>& delta_prev = scratch.delta_prev;
    delta = output_grad;

    for (std::size_t k = L; k-- > 0;) {
        const DenseLayer& layer = params.layers[k];
        DenseLayer& g = grad.layers[k];
        const std::vector<double>& x = ws.act[k];

        for (int o = 0; o < layer.out; ++o) {
            const double d = delta[o];
            if (d == 0.0) continue;
            g.b[o] += d;
            double* grow = g.w.data() + static_cast<std::size_t>(o) * layer.in;
            for (int i = 0; i < layer.in; ++i) grow[i] += d * x[i];
        }
        if (k == 0) break;

        delta_prev.assign(layer.in, 0.0);
        for (int o = 0; o < layer.out; ++o) {
            const double d = delta[o];
            if (d == 0.0) continue;
            const double* row = layer.w.data() + static_cast<std::size_t>(o) * layer.in;
            for (int i = 0; i < layer.in; ++i) delta_prev[i] += d * row[i];
        }
        // rectified-linear derivative; subgradient 0 at the kink
        const std::vector<double>& pre = ws.pre[k - 1];
        for (int i = 0; i < layer.in; ++i)
            if (pre[i] <= 0.0) delta_prev[i] = 0.0;
        delta.swap(delta_prev);
    }
}

Gradient mlp_backward(const MlpParams& params, const std::vector<double>& input,
                      const std::vector<double>& output_grad) {
    MlpWorkspace ws;
    mlp_forward(params, input, ws);
    Gradient grad = zeros_like(params);
    MlpWorkspace scratch;
    mlp_backward_accumulate(params, ws, output_grad, grad, scratch);
    return grad;
}

AdamState make_adam_state(const MlpParams& params, double learning_rate) {
    AdamState state;
    state.first_moment = zeros_like(params);
    state.second_moment = zeros_like(params);
    state.learning_rate = learning_rate;
    return state;
}

void adam_step(MlpParams& params, AdamState& state, const Gradient& grad,
               StepDirection direction) {
    if (!same_shape(params, grad) || !same_shape(params, state.first_moment))
        throw std::invalid_argument("adam_step: shape mismatch");

    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double bc1 = 1.0 - std::pow(state.beta1, t);
    const double bc2 = 1.0 - std::pow(state.beta2, t);
    const double sign = direction == StepDirection::descend ? -1.0 : 1.0;

    for (std::size_t k = 0; k < params.layers.size(); ++k) {
        auto update = [&](std::vector<double>& p, const std::vector<double>& g,
                          std::vector<double>& m, std::vector<double>& v) {
            for (std::size_t j = 0; j < p.size(); ++j) {
                m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
                v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
                const double mhat = m[j] / bc1;
                const double vhat = v[j] / bc2;
                p[j] += sign * state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
            }
        };
        update(params.layers[k].w, grad.layers[k].w, state.first_moment.layers[k].w,
               state.second_moment.layers[k].w);
        update(params.layers[k].b, grad.layers[k].b, state.first_moment.layers[k].b,
               state.second_moment.layers[k].b);
    }
}

void soft_update(MlpParams& target, const MlpParams& source, double tau) {
    if (!same_shape(target, source))
        throw std::invalid_argument("soft_update: shape mismatch");
    if (tau < 0.0 || tau > 1.0)
        throw std::invalid_argument("soft_update: tau outside [0, 1]");
    for (std::size_t k = 0; k < target.layers.size(); ++k) {
        auto blend = [tau](std::vector<double>& t, const std::vector<double>& s) {
            for (std::size_t j = 0; j < t.size(); ++j)
                t[j] = tau * s[j] + (1.0 - tau) * t[j];
        };
        blend(target.layers[k].w, source.layers[k].w);
        blend(target.layers[k].b, source.layers[k].b);
    }
}

namespace {
constexpr const char* kCheckpointMagic = "DEEPTOP-NN-1";
}

void save_checkpoint(const MlpParams& params, const std::string& path) {
    nlohmann::json doc;
    doc["format"] = kCheckpointMagic;
    std::vector<int> sizes;
    sizes.push_back(params.input_size());
    for (const auto& layer : params.layers) sizes.push_back(layer.out);
    doc["layer_sizes"] = sizes;
    auto& layers = doc["layers"] = nlohmann::json::array();
    for (const auto& layer : params.layers)
        layers.push_back({{"weights", layer.w}, {"bias", layer.b}});

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out << doc.dump();
}

MlpParams load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
    nlohmann::json doc = nlohmann::json::parse(in);
    if (!doc.contains("format") || doc["format"] != kCheckpointMagic)
        throw std::runtime_error("checkpoint format mismatch, expected " +
                                 std::string(kCheckpointMagic));

    const auto sizes = doc["layer_sizes"].get<std::vector<int>>();
    if (sizes.size() < 2) throw std::runtime_error("checkpoint: bad layer sizes");

    MlpParams params;
    const auto& layers = doc["layers"];
    if (layers.size() + 1 != sizes.size())
        throw std::runtime_error("checkpoint: layer count mismatch");
    params.layers.resize(layers.size());
    for (std::size_t k = 0; k < layers.size(); ++k) {
        DenseLayer& layer = params.layers[k];
        layer.in = sizes[k];
        layer.out = sizes[k + 1];
        layer.w = layers[k]["weights"].get<std::vector<double>>();
        layer.b = layers[k]["bias"].get<std::vector<double>>();
        if (layer.w.size() != static_cast<std::size_t>(layer.in) * layer.out ||
            layer.b.size() != static_cast<std::size_t>(layer.out))
            throw std::runtime_error("checkpoint: tensor size mismatch");
    }
    return params;
}

}  // namespace deeptop
