#include "deeptop/envs_mdp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace deeptop {

double ou_step(double x, double theta, double mu, double sigma, double noise) {
    return x + theta * (mu - x) + sigma * noise;
}

// --- EV charging -------------------------------------------------------------

EvEnv::EvEnv(const EvParams& params, std::uint64_t seed) : params_(params), rng_(seed) {
    price_ = params_.ou_mu;
    charge_ = 1 + static_cast<int>(rng_.uniform_int(params_.c_max));
    deadline_ = 1 + static_cast<int>(rng_.uniform_int(params_.d_max));
}

ScalarVectorState EvEnv::state() const {
    return {price_,
            {static_cast<double>(charge_) / params_.c_max,
             static_cast<double>(deadline_) / params_.d_max}};
}

void EvEnv::set_state(double price, int charge, int deadline) {
    price_ = price;
    charge_ = charge;
    deadline_ = deadline;
}

double EvEnv::step(int action) {
    double reward = 0.0;
    if (action == 1 && charge_ > 0) {
        reward += 1.0 - price_;
        charge_ -= 1;
    }
    deadline_ -= 1;
    if (deadline_ == 0) {
        if (charge_ > 0) reward -= params_.penalty_coef * charge_ * charge_;
        charge_ = 1 + static_cast<int>(rng_.uniform_int(params_.c_max));
        deadline_ = 1 + static_cast<int>(rng_.uniform_int(params_.d_max));
    }
    price_ = ou_step(price_, params_.ou_theta, params_.ou_mu, params_.ou_sigma, rng_.normal());
    return reward;
}

// --- Quantized-price EV charging ----------------------------------------------

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

QuantizedEvEnv::QuantizedEvEnv(const EvParams& params, int price_levels, std::uint64_t seed)
    : params_(params), rng_(seed) {
    if (price_levels < 2) throw std::invalid_argument("QuantizedEvEnv: need at least 2 price levels");

    const double decay = 1.0 - params_.ou_theta;
    const double stationary_sd =
        params_.ou_sigma / std::sqrt(1.0 - decay * decay);
    const double span = 3.0 * stationary_sd;
    grid_.resize(price_levels);
    for (int i = 0; i < price_levels; ++i)
        grid_[i] = params_.ou_mu - span + 2.0 * span * i / (price_levels - 1);

    // cell boundaries are midpoints; outer cells absorb the tails
    std::vector<double> bounds(price_levels + 1);
    bounds[0] = -1e300;
    bounds[price_levels] = 1e300;
    for (int i = 1; i < price_levels; ++i) bounds[i] = 0.5 * (grid_[i - 1] + grid_[i]);

    row_cdf_.assign(price_levels, std::vector<double>(price_levels, 0.0));
    for (int i = 0; i < price_levels; ++i) {
        const double mean = params_.ou_mu + decay * (grid_[i] - params_.ou_mu);
        double cum = 0.0;
        for (int j = 0; j < price_levels; ++j) {
            const double hi = normal_cdf((bounds[j + 1] - mean) / params_.ou_sigma);
            const double lo = normal_cdf((bounds[j] - mean) / params_.ou_sigma);
            cum += hi - lo;
            row_cdf_[i][j] = cum;
        }
        row_cdf_[i][price_levels - 1] = 1.0;
    }

    price_idx_ = price_levels / 2;
    charge_ = 1 + static_cast<int>(rng_.uniform_int(params_.c_max));
    deadline_ = 1 + static_cast<int>(rng_.uniform_int(params_.d_max));
}

ScalarVectorState QuantizedEvEnv::state() const {
    return {grid_[price_idx_],
            {static_cast<double>(charge_) / params_.c_max,
             static_cast<double>(deadline_) / params_.d_max}};
}

double QuantizedEvEnv::reward_and_advance_vehicle(int action) {
    double reward = 0.0;
    if (action == 1 && charge_ > 0) {
        reward += 1.0 - grid_[price_idx_];
        charge_ -= 1;
    }
    deadline_ -= 1;
    if (deadline_ == 0 && charge_ > 0) reward -= params_.penalty_coef * charge_ * charge_;
    return reward;
}

double QuantizedEvEnv::step(int action) {
    const double reward = reward_and_advance_vehicle(action);
    if (deadline_ == 0) {
        charge_ = 1 + static_cast<int>(rng_.uniform_int(params_.c_max));
        deadline_ = 1 + static_cast<int>(rng_.uniform_int(params_.d_max));
    }
    const double u = rng_.uniform01();
    const auto& cdf = row_cdf_[price_idx_];
    price_idx_ = static_cast<int>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    return reward;
}

int QuantizedEvEnv::state_index() const {
    const int cs = params_.c_max + 1;
    return (price_idx_ * cs + charge_) * params_.d_max + (deadline_ - 1);
}

int QuantizedEvEnv::state_count() const {
    return static_cast<int>(grid_.size()) * (params_.c_max + 1) * params_.d_max;
}

FiniteMdp QuantizedEvEnv::to_finite_mdp(double gamma) const {
    const int levels = static_cast<int>(grid_.size());
    const int cs = params_.c_max + 1;
    const int n = state_count();
    const int respawn = params_.c_max * params_.d_max;

    FiniteMdp mdp;
    mdp.n_states = n;
    mdp.gamma = gamma;
    mdp.transitions.assign(2, std::vector<std::vector<FiniteMdp::Entry>>(n));
    mdp.rewards.assign(2, std::vector<double>(n, 0.0));

    std::vector<std::vector<double>> price_prob(levels, std::vector<double>(levels));
    for (int i = 0; i < levels; ++i) {
        double prev = 0.0;
        for (int j = 0; j < levels; ++j) {
            price_prob[i][j] = row_cdf_[i][j] - prev;
            prev = row_cdf_[i][j];
        }
    }

    for (int p = 0; p < levels; ++p) {
        for (int c = 0; c < cs; ++c) {
            for (int d = 1; d <= params_.d_max; ++d) {
                const int s = (p * cs + c) * params_.d_max + (d - 1);
                for (int a = 0; a < 2; ++a) {
                    int c_next = c;
                    double reward = 0.0;
                    if (a == 1 && c > 0) {
                        reward += 1.0 - grid_[p];
                        c_next = c - 1;
                    }
                    const int d_next = d - 1;
                    if (d_next == 0 && c_next > 0)
                        reward -= params_.penalty_coef * c_next * c_next;
                    mdp.rewards[a][s] = reward;

                    auto& row = mdp.transitions[a][s];
                    if (d_next >= 1) {
                        row.reserve(levels);
                        for (int pn = 0; pn < levels; ++pn) {
                            const int sn = (pn * cs + c_next) * params_.d_max + (d_next - 1);
                            row.push_back({sn, price_prob[p][pn]});
                        }
                    } else {
                        row.reserve(static_cast<std::size_t>(levels) * respawn);
                        const double w = 1.0 / respawn;
                        for (int pn = 0; pn < levels; ++pn) {
                            const double pp = price_prob[p][pn] * w;
                            for (int cn = 1; cn <= params_.c_max; ++cn)
                                for (int dn = 1; dn <= params_.d_max; ++dn)
                                    row.push_back({(pn * cs + cn) * params_.d_max + (dn - 1), pp});
                        }
                    }
                }
            }
        }
    }
    return mdp;
}

// --- Inventory management ------------------------------------------------------

double inventory_demand_rate(int season, const InventoryParams& params) {
    if (season < 0 || season >= params.seasons)
        throw std::invalid_argument("inventory_demand_rate: season out of range");
    return std::sin(season * M_PI / params.seasons) * params.demand_scale;
}

InventoryOutcome inventory_apply(int inventory, int season, int action, long demand,
                                 const InventoryParams& params) {
    const long sold = std::min<long>(inventory, demand);
    InventoryOutcome out;
    out.reward = params.unit_price * sold - params.holding_cost * (inventory - sold);
    out.next_inventory = static_cast<int>(
        std::min<long>(inventory - sold + static_cast<long>(params.order_size) * action,
                       params.capacity));
    out.next_season = (season + 1) % params.seasons;
    return out;
}

InventoryEnv::InventoryEnv(const InventoryParams& params, std::uint64_t seed)
    : params_(params), rng_(seed) {}

ScalarVectorState InventoryEnv::state() const {
    ScalarVectorState s;
    s.lambda = static_cast<double>(inventory_) / params_.capacity;
    s.v.assign(params_.seasons, 0.0);
    s.v[season_] = 1.0;
    return s;
}

void InventoryEnv::set_state(int inventory, int season) {
    inventory_ = inventory;
    season_ = season;
}

double InventoryEnv::step(int action) {
    const long demand = rng_.poisson(inventory_demand_rate(season_, params_));
    const InventoryOutcome out = inventory_apply(inventory_, season_, action, demand, params_);
    inventory_ = out.next_inventory;
    season_ = out.next_season;
    return out.reward;
}

// --- Make-to-stock production ---------------------------------------------------

double mts_class_reward(int customer_class, const MtsParams& params) {
    if (customer_class < 1 || customer_class > params.classes)
        throw std::invalid_argument("mts_class_reward: class out of range");
    if (params.classes == 1) return params.r_max;
    return params.r_max -
           (customer_class - 1) * (params.r_max - params.r_min) / (params.classes - 1);
}

MtsOutcome mts_apply(int queue, int customer_class, int action, int completions,
                     const MtsParams& params) {
    const int cap = params.servers + params.buffer;
    MtsOutcome out;
    const double holding = -params.holding_coef * static_cast<double>(queue) * queue;
    int q = queue;
    if (action == 1 && queue < cap) {
        out.reward = mts_class_reward(customer_class, params) + holding;
        q += 1;
    } else {
        out.reward = holding;
    }
    out.next_queue = q - std::min(completions, std::min(q, params.servers));
    return out;
}

MtsEnv::MtsEnv(const MtsParams& params, std::uint64_t seed) : params_(params), rng_(seed) {
    class_ = 1 + static_cast<int>(rng_.uniform_int(params_.classes));
}

ScalarVectorState MtsEnv::state() const {
    return {static_cast<double>(queue_) / (params_.servers + params_.buffer),
            {mts_class_reward(class_, params_) / params_.r_max}};
}

void MtsEnv::set_state(int queue, int customer_class) {
    queue_ = queue;
    class_ = customer_class;
}

double MtsEnv::step(int action) {
    const int cap = params_.servers + params_.buffer;
    const int queue_after = (action == 1 && queue_ < cap) ? queue_ + 1 : queue_;
    const int busy = std::min(queue_after, params_.servers);
    int completions = 0;
    for (int i = 0; i < busy; ++i)
        if (rng_.bernoulli(params_.completion_prob)) ++completions;
    const MtsOutcome out = mts_apply(queue_, class_, action, completions, params_);
    queue_ = out.next_queue;
    class_ = 1 + static_cast<int>(rng_.uniform_int(params_.classes));
    return out.reward;
}

}  // namespace deeptop
