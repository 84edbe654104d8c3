#pragma once

// Test-side finite-difference oracle for the backprop implementation. Kept
// independent of mlp_backward: only forward evaluations are used.

#include <cmath>
#include <vector>

#include "deeptop/nn.hpp"
#include "deeptop/rng.hpp"

namespace deeptop::testing {

struct NnGradCheckResult {
    int nets_checked = 0;
    double max_rel_err = 0.0;
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// true when any hidden pre-activation sits within `margin` of the
// rectified-linear kink
inline bool near_kink(const MlpParams& params, const std::vector<double>& input,
                      double margin) {
    MlpWorkspace ws;
    mlp_forward(params, input, ws);
    for (std::size_t k = 0; k + 1 < params.layers.size(); ++k)
        for (double pre : ws.pre[k])
            if (std::abs(pre) < margin) return true;
    return false;
}

inline NnGradCheckResult run_nn_gradient_check(int n_nets, std::uint64_t seed,
                                               double h = 1e-6) {
    Rng rng(seed);
    NnGradCheckResult result;
    while (result.nets_checked < n_nets) {
        const int in = 1 + static_cast<int>(rng.uniform_int(3));
        const int hid = 2 + static_cast<int>(rng.uniform_int(4));
        const int out = 1 + static_cast<int>(rng.uniform_int(2));
        MlpParams params = init_params({in, hid, out}, rng);

        std::vector<double> input(in), out_grad(out);
        for (double& x : input) x = rng.uniform(-1.5, 1.5);
        for (double& g : out_grad) g = rng.uniform(-1.0, 1.0);
        if (near_kink(params, input, 1e-4)) continue;

        const Gradient grad = mlp_backward(params, input, out_grad);
        for (std::size_t layer = 0; layer < params.layers.size(); ++layer) {
            auto check_tensor = [&](std::vector<double>& tensor,
                                    const std::vector<double>& analytic) {
                for (std::size_t j = 0; j < tensor.size(); ++j) {
                    const double saved = tensor[j];
                    tensor[j] = saved + h;
                    const double up = dot(mlp_forward(params, input), out_grad);
                    tensor[j] = saved - h;
                    const double down = dot(mlp_forward(params, input), out_grad);
                    tensor[j] = saved;
                    const double fd = (up - down) / (2.0 * h);
                    const double scale =
                        std::max({std::abs(fd), std::abs(analytic[j]), 1e-8});
                    result.max_rel_err =
                        std::max(result.max_rel_err, std::abs(fd - analytic[j]) / scale);
                }
            };
            check_tensor(params.layers[layer].w, grad.layers[layer].w);
            check_tensor(params.layers[layer].b, grad.layers[layer].b);
        }
        ++result.nets_checked;
    }
    return result;
}

}  // namespace deeptop::testing
