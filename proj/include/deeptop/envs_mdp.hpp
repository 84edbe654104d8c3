#pragma once

#include <memory>
#include <string>
#include <vector>

#include "deeptop/finite_mdp.hpp"
#include "deeptop/replay.hpp"
#include "deeptop/rng.hpp"

namespace deeptop {

// Discrete-time Ornstein-Uhlenbeck update with unit time step.
double ou_step(double x, double theta, double mu, double sigma, double noise);

// Common step interface for the MDP benchmarks. Each environment owns its
// random stream; trajectories are a pure function of the construction seed.
class MdpEnvironment {
public:
    virtual ~MdpEnvironment() = default;
    virtual ScalarVectorState state() const = 0;
    virtual double step(int action) = 0;
    virtual int vector_dim() const = 0;
};

// --- EV charging -----------------------------------------------------------

struct EvParams {
    int c_max = 8;
    int d_max = 12;
    double ou_theta = 0.15;
    double ou_mu = 0.0;
    double ou_sigma = 0.2;
    double penalty_coef = 0.2;
    bool operator==(const EvParams&) const = default;
};

// Scalar state is the electricity price; the vector state is the remaining
// charge and the time to deadline of the EV in the spot.
class EvEnv : public MdpEnvironment {
public:
    EvEnv(const EvParams& params, std::uint64_t seed);

    ScalarVectorState state() const override;
    double step(int action) override;
    int vector_dim() const override { return 2; }

    double price() const { return price_; }
    int charge_remaining() const { return charge_; }
    int time_to_deadline() const { return deadline_; }
    void set_state(double price, int charge, int deadline);

private:
    EvParams params_;
    Rng rng_;
    double price_ = 0.0;
    int charge_ = 0;
    int deadline_ = 0;
};

// --- EV charging on a quantized price grid ----------------------------------

// Same charging dynamics, but the price follows a finite Markov chain on a
// grid spanning +-3 stationary deviations of the OU process. Small enough
// that the optimal policy is computable by value iteration.
class QuantizedEvEnv : public MdpEnvironment {
public:
    QuantizedEvEnv(const EvParams& params, int price_levels, std::uint64_t seed);

    ScalarVectorState state() const override;
    double step(int action) override;
    int vector_dim() const override { return 2; }

    const std::vector<double>& grid() const { return grid_; }
    int state_index() const;  // flattened (price level, charge, deadline)
    int state_count() const;

    // Exact model of this environment, for value iteration.
    FiniteMdp to_finite_mdp(double gamma) const;

private:
    double reward_and_advance_vehicle(int action);

    EvParams params_;
    Rng rng_;
    std::vector<double> grid_;
    std::vector<std::vector<double>> row_cdf_;  // price transition CDF rows
    int price_idx_ = 0;
    int charge_ = 0;
    int deadline_ = 0;
};

// --- Inventory management ---------------------------------------------------

struct InventoryParams {
    int capacity = 1000;
    int order_size = 500;
    double unit_price = 20.0;
    double holding_cost = 1.0;
    int seasons = 10;
    double demand_scale = 300.0;
    bool operator==(const InventoryParams&) const = default;
};

// Poisson mean for a season index.
double inventory_demand_rate(int season, const InventoryParams& params);

struct InventoryOutcome {
    double reward = 0.0;
    int next_inventory = 0;
    int next_season = 0;
};

// Deterministic part of the inventory step given a realized demand.
InventoryOutcome inventory_apply(int inventory, int season, int action, long demand,
                                 const InventoryParams& params);

// Scalar state is the (scaled) inventory level; the vector state one-hot
// encodes the shopping season. Ordered goods arrive one step later.
class InventoryEnv : public MdpEnvironment {
public:
    InventoryEnv(const InventoryParams& params, std::uint64_t seed);

    ScalarVectorState state() const override;
    double step(int action) override;
    int vector_dim() const override { return params_.seasons; }

    int inventory() const { return inventory_; }
    int season() const { return season_; }
    void set_state(int inventory, int season);

private:
    InventoryParams params_;
    Rng rng_;
    int inventory_ = 0;
    int season_ = 0;
};

// --- Make-to-stock production -----------------------------------------------

struct MtsParams {
    int servers = 50;       // m
    int buffer = 50;        // S
    int classes = 50;       // W
    double completion_prob = 0.25;
    double r_max = 200.0;
    double r_min = 10.0;
    double holding_coef = 0.1;
    bool operator==(const MtsParams&) const = default;
};

// Class rewards evenly spaced from r_max down to r_min.
double mts_class_reward(int customer_class, const MtsParams& params);

struct MtsOutcome {
    double reward = 0.0;
    int next_queue = 0;
};

// Deterministic part of the make-to-stock step given realized completions.
MtsOutcome mts_apply(int queue, int customer_class, int action, int completions,
                     const MtsParams& params);

// Scalar state is the (scaled) number of accepted unfinished orders; the
// vector state carries the next arriving order's class reward.
class MtsEnv : public MdpEnvironment {
public:
    MtsEnv(const MtsParams& params, std::uint64_t seed);

    ScalarVectorState state() const override;
    double step(int action) override;
    int vector_dim() const override { return 1; }

    int queue_length() const { return queue_; }
    int customer_class() const { return class_; }
    void set_state(int queue, int customer_class);

private:
    MtsParams params_;
    Rng rng_;
    int queue_ = 0;
    int class_ = 1;
};

}  // namespace deeptop
