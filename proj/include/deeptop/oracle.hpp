#pragma once

#include <optional>
#include <string>
#include <vector>

#include "deeptop/rng.hpp"

namespace deeptop {

// One threshold per vector state (or per arm state). The gradient results
// assume the entries are pairwise distinct.
using ThresholdVector = std::vector<double>;

// --- Exact MDP test family ----------------------------------------------------

// Small tabular family on which the threshold objective is computable in
// closed form: the scalar state is i.i.d. uniform on [-M, +M] each step,
// the vector state follows a finite chain, and expected rewards are affine
// in the scalar state.
struct UniformLambdaSpec {
    int n_vec = 0;
    double bound = 1.0;  // M
    double gamma = 0.9;
    std::vector<std::vector<std::vector<double>>> transition;  // [a][v][v']
    std::vector<std::vector<double>> reward_const;             // [a][v]
    std::vector<std::vector<double>> reward_slope;             // [a][v]

    double reward(double lambda, int v, int a) const {
        return reward_const[a][v] + reward_slope[a][v] * lambda;
    }
    void validate() const;
};

// Value of a threshold policy: per-state scalar-averaged values W(v) plus an
// affine evaluator for Q(lambda, v, a).
struct ThresholdPolicyValue {
    std::vector<double> w;
    std::vector<std::vector<double>> q_const;  // [a][v]
    std::vector<std::vector<double>> q_slope;  // [a][v]

    double q(double lambda, int v, int a) const {
        return q_const[a][v] + q_slope[a][v] * lambda;
    }
};

ThresholdPolicyValue policy_eval_threshold(const UniformLambdaSpec& spec,
                                           const ThresholdVector& mu);

// Integral of the policy's action value over the scalar range, summed over
// vector states; equals 2M * sum_v W(v).
double objective_k(const UniformLambdaSpec& spec, const ThresholdVector& mu);

// Discounted vector-state visit mass from a uniform start (sums to 1/(1-gamma)).
std::vector<double> discounted_visit_mass(const UniformLambdaSpec& spec,
                                          const ThresholdVector& mu);

// Per-threshold derivative of objective_k, in closed form.
std::vector<double> exact_threshold_gradient(const UniformLambdaSpec& spec,
                                             const ThresholdVector& mu);

// --- Exact single-arm machinery -------------------------------------------------

struct ArmSpec {
    int n_states = 0;
    double gamma = 0.9;
    double bound = 1.0;  // M
    std::vector<std::vector<std::vector<double>>> transition;  // [a][s][s']
    std::vector<std::vector<double>> reward;                   // [a][s]
    void validate() const;
};

// Optimal action values under net reward r - lambda * a, to sup-norm `tol`.
// A warm start reuses a previous solution as the initial table.
std::vector<std::vector<double>> arm_value_iteration(
    const ArmSpec& spec, double lambda, double tol = 1e-10,
    const std::vector<std::vector<double>>* warm_start = nullptr);

struct WhittleResult {
    double index = 0.0;
    bool crossed = false;  // false: no single sign change found on [-M, +M]
};

// Activation cost at which activating and resting the state are indifferent,
// found by a 512-point bracketing scan plus bisection.
WhittleResult whittle_bisection(const ArmSpec& spec, int state, double bound,
                                double tol = 1e-8);

// All states at once, sharing the scan and warm-started value iteration.
std::vector<WhittleResult> whittle_all_states(const ArmSpec& spec, double bound,
                                              double tol = 1e-8);

struct ArmObjectiveResult {
    double objective = 0.0;
    std::vector<double> gradient;
};

// Exact objective for a per-state threshold vector on one arm (piecewise
// quadratic in the thresholds) together with its derivative.
ArmObjectiveResult arm_objective_and_gradient(const ArmSpec& spec, const ThresholdVector& mu);

// Fixed-policy evaluation at activation cost lambda; value is affine in
// lambda for a fixed active set: V = value_const + lambda * value_slope.
struct ArmPolicyValue {
    std::vector<double> value_const;
    std::vector<double> value_slope;
};
ArmPolicyValue arm_policy_eval(const ArmSpec& spec, const std::vector<int>& active);

// --- Random instances and gradient cross-checks ---------------------------------

UniformLambdaSpec random_uniform_lambda_spec(Rng& rng, int n_vec, double gamma, double bound);
ArmSpec random_arm_spec(Rng& rng, int n_states, double gamma, double bound);
ThresholdVector random_distinct_thresholds(Rng& rng, int n, double bound, double min_gap);

struct GradCheckReport {
    int specs_checked = 0;
    double max_rel_err = 0.0;        // over components with magnitude >= 1e-5
    double max_small_abs_err = 0.0;  // absolute error over near-zero components
    double rel_tol = 1e-3;
    double abs_tol = 1e-8;
    bool pass = false;
};

// Central finite differences of the objective versus the closed-form
// gradient, over randomly generated instances. Components whose magnitude
// falls below 1e-5 are held to the absolute tolerance instead.
GradCheckReport mdp_gradient_check(int n_specs, std::uint64_t seed, double h = 1e-5,
                                double rel_tol = 1e-3);
GradCheckReport arm_gradient_check(int n_specs, std::uint64_t seed, double h = 1e-5,
                                double rel_tol = 1e-3);

// Stationarity of the arm objective at the bisection indices: returns the
// sup-norm of the gradient over random indexable arms.
struct StationarityReport {
    int arms_checked = 0;
    double max_grad_norm = 0.0;
    bool pass = false;
};
StationarityReport whittle_stationarity_check(int n_arms, int n_states, std::uint64_t seed,
                                              double tol = 1e-6);

// Benchmark arm models in tabular form, for grading learned indices.
// n_states below reward_states truncates the chain without rescaling rewards.
ArmSpec onedim_arm_spec(int n_states, double p, double q, double gamma,
                        int reward_states = 100);
ArmSpec recovering_arm_spec(int z_max, double theta0, double theta1, double gamma);

// Dense linear solve (Gaussian elimination, partial pivoting).
std::vector<double> linear_solve(std::vector<std::vector<double>> a, std::vector<double> b);

}  // namespace deeptop
