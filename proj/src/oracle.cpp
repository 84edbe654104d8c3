#include "deeptop/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "deeptop/envs_rmab.hpp"

namespace deeptop {

namespace {

void check_rows(const std::vector<std::vector<std::vector<double>>>& transition) {
    for (const auto& per_action : transition)
        for (const auto& row : per_action) {
            const double sum = std::accumulate(row.begin(), row.end(), 0.0);
            if (std::abs(sum - 1.0) > 1e-12)
                throw std::invalid_argument("transition row does not sum to 1");
        }
}

void check_distinct(const ThresholdVector& mu) {
    for (std::size_t i = 0; i < mu.size(); ++i)
        for (std::size_t j = i + 1; j < mu.size(); ++j)
            if (mu[i] == mu[j])
                throw std::invalid_argument("thresholds must be pairwise distinct");
}

double clamp(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

}  // namespace

std::vector<double> linear_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < 1e-300)
            throw std::runtime_error("linear_solve: singular system");
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
    return x;
}

// --- MDP family -----------------------------------------------------------------

void UniformLambdaSpec::validate() const {
    if (n_vec <= 0) throw std::invalid_argument("spec: need at least one vector state");
    if (gamma < 0.0 || gamma >= 1.0) throw std::invalid_argument("spec: gamma outside [0,1)");
    if (bound <= 0.0) throw std::invalid_argument("spec: bound must be positive");
    check_rows(transition);
}

namespace {

// Probability that the scalar draw falls below the threshold.
double activation_prob(double mu_v, double bound) {
    return clamp((mu_v + bound) / (2.0 * bound), 0.0, 1.0);
}

// Markov chain on vector states induced by scalar-averaging the policy.
std::vector<std::vector<double>> policy_chain(const UniformLambdaSpec& spec,
                                              const ThresholdVector& mu) {
    std::vector<std::vector<double>> p(spec.n_vec, std::vector<double>(spec.n_vec));
    for (int v = 0; v < spec.n_vec; ++v) {
        const double qa = activation_prob(mu[v], spec.bound);
        for (int w = 0; w < spec.n_vec; ++w)
            p[v][w] = qa * spec.transition[1][v][w] + (1.0 - qa) * spec.transition[0][v][w];
    }
    return p;
}

}  // namespace

ThresholdPolicyValue policy_eval_threshold(const UniformLambdaSpec& spec,
                                           const ThresholdVector& mu) {
    spec.validate();
    if (static_cast<int>(mu.size()) != spec.n_vec)
        throw std::invalid_argument("policy_eval_threshold: threshold count mismatch");

    const double m = spec.bound;
    const auto chain = policy_chain(spec, mu);

    // scalar-averaged one-step reward of the policy, split at the threshold
    std::vector<double> b(spec.n_vec);
    for (int v = 0; v < spec.n_vec; ++v) {
        const double t = clamp(mu[v], -m, m);
        const double active = spec.reward_const[1][v] * (t + m) +
                              spec.reward_slope[1][v] * (t * t - m * m) / 2.0;
        const double passive = spec.reward_const[0][v] * (m - t) +
                               spec.reward_slope[0][v] * (m * m - t * t) / 2.0;
        b[v] = (active + passive) / (2.0 * m);
    }

    std::vector<std::vector<double>> a(spec.n_vec, std::vector<double>(spec.n_vec));
    for (int v = 0; v < spec.n_vec; ++v)
        for (int w = 0; w < spec.n_vec; ++w)
            a[v][w] = (v == w ? 1.0 : 0.0) - spec.gamma * chain[v][w];

    ThresholdPolicyValue out;
    out.w = linear_solve(std::move(a), std::move(b));
    out.q_const.assign(2, std::vector<double>(spec.n_vec));
    out.q_slope.assign(2, std::vector<double>(spec.n_vec));
    for (int act = 0; act < 2; ++act)
        for (int v = 0; v < spec.n_vec; ++v) {
            double cont = 0.0;
            for (int w = 0; w < spec.n_vec; ++w)
                cont += spec.transition[act][v][w] * out.w[w];
            out.q_const[act][v] = spec.reward_const[act][v] + spec.gamma * cont;
            out.q_slope[act][v] = spec.reward_slope[act][v];
        }
    return out;
}

double objective_k(const UniformLambdaSpec& spec, const ThresholdVector& mu) {
    const ThresholdPolicyValue val = policy_eval_threshold(spec, mu);
    const double m = spec.bound;
    double k = 0.0;
    for (int v = 0; v < spec.n_vec; ++v) {
        const double t = clamp(mu[v], -m, m);
        k += val.q_const[1][v] * (t + m) + val.q_slope[1][v] * (t * t - m * m) / 2.0;
        k += val.q_const[0][v] * (m - t) + val.q_slope[0][v] * (m * m - t * t) / 2.0;
    }
    return k;
}

std::vector<double> discounted_visit_mass(const UniformLambdaSpec& spec,
                                          const ThresholdVector& mu) {
    const auto chain = policy_chain(spec, mu);
    // d = d1 + gamma * chain^T d, with a uniform start
    std::vector<std::vector<double>> a(spec.n_vec, std::vector<double>(spec.n_vec));
    for (int v = 0; v < spec.n_vec; ++v)
        for (int w = 0; w < spec.n_vec; ++w)
            a[v][w] = (v == w ? 1.0 : 0.0) - spec.gamma * chain[w][v];
    std::vector<double> d1(spec.n_vec, 1.0 / spec.n_vec);
    return linear_solve(std::move(a), std::move(d1));
}

std::vector<double> exact_threshold_gradient(const UniformLambdaSpec& spec,
                                        const ThresholdVector& mu) {
    check_distinct(mu);
    const ThresholdPolicyValue val = policy_eval_threshold(spec, mu);
    const std::vector<double> mass = discounted_visit_mass(spec, mu);
    std::vector<double> grad(spec.n_vec);
    for (int v = 0; v < spec.n_vec; ++v) {
        const double gap = val.q(mu[v], v, 1) - val.q(mu[v], v, 0);
        grad[v] = spec.n_vec * mass[v] * gap;
    }
    return grad;
}

// --- Arm machinery -----------------------------------------------------------------

void ArmSpec::validate() const {
    if (n_states <= 0) throw std::invalid_argument("arm: need at least one state");
    if (gamma < 0.0 || gamma >= 1.0) throw std::invalid_argument("arm: gamma outside [0,1)");
    check_rows(transition);
}

std::vector<std::vector<double>> arm_value_iteration(
    const ArmSpec& spec, double lambda, double tol,
    const std::vector<std::vector<double>>* warm_start) {
    spec.validate();
    const int n = spec.n_states;
    std::vector<std::vector<double>> q =
        warm_start ? *warm_start : std::vector<std::vector<double>>(2, std::vector<double>(n, 0.0));
    std::vector<double> v(n);
    for (int s = 0; s < n; ++s) v[s] = std::max(q[0][s], q[1][s]);

    double diff = tol + 1.0;
    while (diff > tol) {
        diff = 0.0;
        for (int a = 0; a < 2; ++a) {
            const double cost = a == 1 ? lambda : 0.0;
            for (int s = 0; s < n; ++s) {
                double acc = spec.reward[a][s] - cost;
                const auto& row = spec.transition[a][s];
                double cont = 0.0;
                for (int t = 0; t < n; ++t) cont += row[t] * v[t];
                acc += spec.gamma * cont;
                diff = std::max(diff, std::abs(acc - q[a][s]));
                q[a][s] = acc;
            }
        }
        for (int s = 0; s < n; ++s) v[s] = std::max(q[0][s], q[1][s]);
    }
    return q;
}

namespace {

double action_gap(const std::vector<std::vector<double>>& q, int s) {
    return q[1][s] - q[0][s];
}

constexpr int kScanPoints = 512;

}  // namespace

std::vector<WhittleResult> whittle_all_states(const ArmSpec& spec, double bound, double tol) {
    const int n = spec.n_states;
    std::vector<WhittleResult> out(n);

    // shared scan: gap sign per state on a lambda grid
    std::vector<double> grid(kScanPoints + 1);
    for (int i = 0; i <= kScanPoints; ++i)
        grid[i] = -bound + 2.0 * bound * i / kScanPoints;

    std::vector<std::vector<double>> gaps(n, std::vector<double>(kScanPoints + 1));
    std::vector<std::vector<double>> q(2, std::vector<double>(n, 0.0));
    for (int i = 0; i <= kScanPoints; ++i) {
        q = arm_value_iteration(spec, grid[i], tol * 1e-2, &q);
        for (int s = 0; s < n; ++s) gaps[s][i] = action_gap(q, s);
    }

    for (int s = 0; s < n; ++s) {
        int crossings = 0;
        int bracket = -1;
        for (int i = 0; i < kScanPoints; ++i) {
            if (gaps[s][i] > 0.0 && gaps[s][i + 1] <= 0.0) {
                ++crossings;
                bracket = i;
            } else if (gaps[s][i] <= 0.0 && gaps[s][i + 1] > 0.0) {
                ++crossings;
            }
        }
        if (crossings != 1 || bracket < 0) {
            out[s].crossed = false;
            continue;
        }
        double lo = grid[bracket], hi = grid[bracket + 1];
        std::vector<std::vector<double>> qb = q;
        double mid = 0.5 * (lo + hi);
        while (hi - lo > 1e-13) {
            mid = 0.5 * (lo + hi);
            qb = arm_value_iteration(spec, mid, tol * 1e-2, &qb);
            const double g = action_gap(qb, s);
            if (std::abs(g) <= tol) break;
            if (g > 0.0)
                lo = mid;
            else
                hi = mid;
        }
        out[s].index = mid;
        out[s].crossed = true;
    }
    return out;
}

WhittleResult whittle_bisection(const ArmSpec& spec, int state, double bound, double tol) {
    if (state < 0 || state >= spec.n_states)
        throw std::invalid_argument("whittle_bisection: state out of range");
    return whittle_all_states(spec, bound, tol)[state];
}

ArmPolicyValue arm_policy_eval(const ArmSpec& spec, const std::vector<int>& active) {
    const int n = spec.n_states;
    std::vector<std::vector<double>> a(n, std::vector<double>(n));
    std::vector<double> r(n), act(n);
    for (int s = 0; s < n; ++s) {
        const int pa = active[s];
        r[s] = spec.reward[pa][s];
        act[s] = -static_cast<double>(pa);
        for (int t = 0; t < n; ++t)
            a[s][t] = (s == t ? 1.0 : 0.0) - spec.gamma * spec.transition[pa][s][t];
    }
    ArmPolicyValue out;
    out.value_const = linear_solve(a, r);
    out.value_slope = linear_solve(std::move(a), std::move(act));
    return out;
}

namespace {

std::vector<int> threshold_actions(const ThresholdVector& mu, double lambda) {
    std::vector<int> a(mu.size());
    for (std::size_t s = 0; s < mu.size(); ++s) a[s] = mu[s] > lambda ? 1 : 0;
    return a;
}

// Discounted visit mass of a fixed policy from a uniform start.
std::vector<double> arm_visit_mass(const ArmSpec& spec, const std::vector<int>& active) {
    const int n = spec.n_states;
    std::vector<std::vector<double>> a(n, std::vector<double>(n));
    for (int s = 0; s < n; ++s)
        for (int t = 0; t < n; ++t)
            a[s][t] = (s == t ? 1.0 : 0.0) - spec.gamma * spec.transition[active[t]][t][s];
    std::vector<double> d1(n, 1.0 / n);
    return linear_solve(std::move(a), std::move(d1));
}

}  // namespace

ArmObjectiveResult arm_objective_and_gradient(const ArmSpec& spec, const ThresholdVector& mu) {
    spec.validate();
    if (static_cast<int>(mu.size()) != spec.n_states)
        throw std::invalid_argument("arm objective: threshold count mismatch");
    check_distinct(mu);

    const double m = spec.bound;
    const int n = spec.n_states;

    // interval breakpoints, descending from +M to -M
    std::vector<double> cuts;
    cuts.push_back(m);
    std::vector<double> sorted = mu;
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    for (double t : sorted)
        if (t > -m && t < m) cuts.push_back(t);
    cuts.push_back(-m);

    ArmObjectiveResult out;
    out.gradient.assign(n, 0.0);

    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double hi = cuts[i], lo = cuts[i + 1];
        if (hi <= lo) continue;
        const auto actions = threshold_actions(mu, 0.5 * (hi + lo));
        const ArmPolicyValue val = arm_policy_eval(spec, actions);
        for (int s = 0; s < n; ++s) {
            out.objective += val.value_const[s] * (hi - lo) +
                             val.value_slope[s] * (hi * hi - lo * lo) / 2.0;
        }
    }

    for (int s = 0; s < n; ++s) {
        if (mu[s] <= -m || mu[s] >= m) continue;  // threshold outside the range: flat

        // policy at lambda = mu[s]: s itself is passive (strict comparison)
        auto passive_actions = threshold_actions(mu, mu[s]);
        auto active_actions = passive_actions;
        active_actions[s] = 1;

        const ArmPolicyValue val = arm_policy_eval(spec, passive_actions);
        auto value_at = [&](int t) {
            return val.value_const[t] + mu[s] * val.value_slope[t];
        };
        double cont1 = 0.0, cont0 = 0.0;
        for (int t = 0; t < n; ++t) {
            cont1 += spec.transition[1][s][t] * value_at(t);
            cont0 += spec.transition[0][s][t] * value_at(t);
        }
        const double gap = (spec.reward[1][s] - mu[s] + spec.gamma * cont1) -
                           (spec.reward[0][s] + spec.gamma * cont0);

        const std::vector<double> mass = arm_visit_mass(spec, active_actions);
        out.gradient[s] = n * mass[s] * gap;
    }
    return out;
}

// --- Random instances and checks ------------------------------------------------------

UniformLambdaSpec random_uniform_lambda_spec(Rng& rng, int n_vec, double gamma, double bound) {
    UniformLambdaSpec spec;
    spec.n_vec = n_vec;
    spec.gamma = gamma;
    spec.bound = bound;
    spec.transition.assign(2, std::vector<std::vector<double>>(n_vec, std::vector<double>(n_vec)));
    spec.reward_const.assign(2, std::vector<double>(n_vec));
    spec.reward_slope.assign(2, std::vector<double>(n_vec));
    for (int a = 0; a < 2; ++a)
        for (int v = 0; v < n_vec; ++v) {
            double sum = 0.0;
            for (int w = 0; w < n_vec; ++w) {
                spec.transition[a][v][w] = 0.05 + rng.uniform01();
                sum += spec.transition[a][v][w];
            }
            for (int w = 0; w < n_vec; ++w) spec.transition[a][v][w] /= sum;
            spec.reward_const[a][v] = rng.uniform(-1.0, 1.0);
            spec.reward_slope[a][v] = rng.uniform(-1.0, 1.0);
        }
    return spec;
}

ArmSpec random_arm_spec(Rng& rng, int n_states, double gamma, double bound) {
    ArmSpec spec;
    spec.n_states = n_states;
    spec.gamma = gamma;
    spec.bound = bound;
    spec.transition.assign(2, std::vector<std::vector<double>>(n_states, std::vector<double>(n_states)));
    spec.reward.assign(2, std::vector<double>(n_states));
    for (int a = 0; a < 2; ++a)
        for (int s = 0; s < n_states; ++s) {
            double sum = 0.0;
            for (int t = 0; t < n_states; ++t) {
                spec.transition[a][s][t] = 0.05 + rng.uniform01();
                sum += spec.transition[a][s][t];
            }
            for (int t = 0; t < n_states; ++t) spec.transition[a][s][t] /= sum;
            spec.reward[a][s] = rng.uniform(-1.0, 1.0);
        }
    return spec;
}

ThresholdVector random_distinct_thresholds(Rng& rng, int n, double bound, double min_gap) {
    ThresholdVector mu(n);
    bool ok = false;
    while (!ok) {
        for (int i = 0; i < n; ++i) mu[i] = rng.uniform(-0.95 * bound, 0.95 * bound);
        ok = true;
        for (int i = 0; i < n && ok; ++i)
            for (int j = i + 1; j < n; ++j)
                if (std::abs(mu[i] - mu[j]) < min_gap) {
                    ok = false;
                    break;
                }
    }
    return mu;
}

namespace {

void record_component(GradCheckReport& report, double exact, double fd) {
    const double mag = std::max(std::abs(exact), std::abs(fd));
    if (mag < 1e-5) {
        report.max_small_abs_err = std::max(report.max_small_abs_err, std::abs(exact - fd));
    } else {
        report.max_rel_err = std::max(report.max_rel_err, std::abs(exact - fd) / mag);
    }
}

void finish_report(GradCheckReport& report, double rel_tol) {
    report.rel_tol = rel_tol;
    report.pass = report.max_rel_err <= rel_tol && report.max_small_abs_err <= report.abs_tol;
}

}  // namespace

GradCheckReport mdp_gradient_check(int n_specs, std::uint64_t seed, double h, double rel_tol) {
    Rng rng(seed);
    GradCheckReport report;
    for (int k = 0; k < n_specs; ++k) {
        const int n_vec = 2 + static_cast<int>(rng.uniform_int(3));  // 2..4
        UniformLambdaSpec spec = random_uniform_lambda_spec(rng, n_vec, 0.9, 1.0);
        ThresholdVector mu = random_distinct_thresholds(rng, n_vec, spec.bound, 1e-3);

        const auto grad = exact_threshold_gradient(spec, mu);
        for (int v = 0; v < n_vec; ++v) {
            ThresholdVector up = mu, down = mu;
            up[v] += h;
            down[v] -= h;
            const double fd = (objective_k(spec, up) - objective_k(spec, down)) / (2.0 * h);
            record_component(report, grad[v], fd);
        }
        ++report.specs_checked;
    }
    finish_report(report, rel_tol);
    return report;
}

GradCheckReport arm_gradient_check(int n_specs, std::uint64_t seed, double h, double rel_tol) {
    Rng rng(seed);
    GradCheckReport report;
    for (int k = 0; k < n_specs; ++k) {
        const int n_states = 2 + static_cast<int>(rng.uniform_int(3));  // 2..4
        ArmSpec spec = random_arm_spec(rng, n_states, 0.9, 1.0);
        ThresholdVector mu = random_distinct_thresholds(rng, n_states, spec.bound, 1e-3);

        const auto res = arm_objective_and_gradient(spec, mu);
        for (int s = 0; s < n_states; ++s) {
            ThresholdVector up = mu, down = mu;
            up[s] += h;
            down[s] -= h;
            const double fd = (arm_objective_and_gradient(spec, up).objective -
                               arm_objective_and_gradient(spec, down).objective) /
                              (2.0 * h);
            record_component(report, res.gradient[s], fd);
        }
        ++report.specs_checked;
    }
    finish_report(report, rel_tol);
    return report;
}

StationarityReport whittle_stationarity_check(int n_arms, int n_states, std::uint64_t seed,
                                              double tol) {
    Rng rng(seed);
    StationarityReport report;
    const double bound = 12.0;  // wide enough for rewards in [0, 1] at gamma = 0.9
    int attempts = 0;
    while (report.arms_checked < n_arms && attempts < n_arms * 50) {
        ++attempts;
        ArmSpec spec = random_arm_spec(rng, n_states, 0.9, bound);
        for (int a = 0; a < 2; ++a)
            for (int s = 0; s < n_states; ++s) spec.reward[a][s] = rng.uniform01();

        const auto indices = whittle_all_states(spec, bound);
        ThresholdVector mu(n_states);
        bool usable = true;
        for (int s = 0; s < n_states; ++s) {
            if (!indices[s].crossed) usable = false;
            mu[s] = indices[s].index;
        }
        for (int i = 0; i < n_states && usable; ++i)
            for (int j = i + 1; j < n_states; ++j)
                if (std::abs(mu[i] - mu[j]) < 1e-6) usable = false;
        if (!usable) continue;

        const auto res = arm_objective_and_gradient(spec, mu);
        for (double g : res.gradient)
            report.max_grad_norm = std::max(report.max_grad_norm, std::abs(g));
        ++report.arms_checked;
    }
    report.pass = report.arms_checked == n_arms && report.max_grad_norm <= tol;
    return report;
}

ArmSpec onedim_arm_spec(int n_states, double p, double q, double gamma, int reward_states) {
    if (n_states > reward_states)
        throw std::invalid_argument("onedim_arm_spec: chain longer than the reward anchor");
    ArmSpec spec;
    spec.n_states = n_states;
    spec.gamma = gamma;
    spec.bound = 1.0;
    spec.transition.assign(2, std::vector<std::vector<double>>(n_states, std::vector<double>(n_states, 0.0)));
    spec.reward.assign(2, std::vector<double>(n_states));
    for (int s = 0; s < n_states; ++s) {
        const int up = std::min(s + 1, n_states - 1);
        const int down = std::max(s - 1, 0);
        spec.transition[1][s][up] += p;
        spec.transition[1][s][s] += 1.0 - p;
        spec.transition[0][s][down] += q;
        spec.transition[0][s][s] += 1.0 - q;
        spec.reward[0][s] = spec.reward[1][s] = onedim_reward(s, reward_states);
    }
    return spec;
}

ArmSpec recovering_arm_spec(int z_max, double theta0, double theta1, double gamma) {
    ArmSpec spec;
    spec.n_states = z_max;  // state i holds waiting time i + 1
    spec.gamma = gamma;
    spec.bound = 10.0;
    spec.transition.assign(2, std::vector<std::vector<double>>(z_max, std::vector<double>(z_max, 0.0)));
    spec.reward.assign(2, std::vector<double>(z_max));
    for (int i = 0; i < z_max; ++i) {
        spec.transition[1][i][0] = 1.0;
        spec.transition[0][i][std::min(i + 1, z_max - 1)] = 1.0;
        spec.reward[1][i] = recovering_reward(i + 1, theta0, theta1, z_max);
        spec.reward[0][i] = 0.0;
    }
    return spec;
}

}  // namespace deeptop
