// Average-reward dynamic program equivalent to the feedback capacity.
//
// State z = p(x_{t-1} = 0 | y^{t-1}); action delta = z * p(x_t = 1 | x_{t-1} = 0)
// constrained to [0, z]; disturbance is the channel output. The reward per
// step is (1 - eps) H_b(delta).
#pragma once

#include "rllfbc/capacity.hpp"
#include "rllfbc/channel.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

namespace rllfbc {

/// Next belief state: 1 on y = 0, 1 - delta on an erasure, 0 on y = 1.
/// Throws std::invalid_argument unless 0 <= delta <= z <= 1.
double system_update(double z, double delta, Symbol w);

/// Probabilities of the outputs {0, ?, 1}: [(1-delta)(1-eps), eps, delta(1-eps)].
std::array<double, 3> disturbance_distribution(double z, double delta, ErasureProb eps);

double reward(double delta, ErasureProb eps);

/// Samples of h on the uniform grid z_i = i / (n - 1), with the maximizing
/// action recorded per grid point.
struct ValueFunction {
    std::vector<double> values;
    std::vector<double> policy;

    explicit ValueFunction(std::size_t grid_size = 2);

    std::size_t grid_size() const noexcept { return values.size(); }
    double z_at(std::size_t i) const noexcept { return static_cast<double>(i) / static_cast<double>(grid_size() - 1); }
    /// Linear interpolation of h at x in [0,1].
    double interpolate(double x) const;
};

/// One application of the DP operator.
///
/// (Th)(z) = max_{0 <= delta <= z} (1-eps) H_b(delta) + (1-delta)(1-eps) h(1)
///                                 + eps h(1-delta) + delta (1-eps) h(0).
///
/// delta ranges over the same grid as z, so 1 - delta is itself a grid point
/// and the interpolation of h(1 - delta) is exact. The bracketed objective
/// does not depend on z, so the constrained maximum is a running maximum;
/// ties keep the smallest delta.
ValueFunction bellman_operator(const ValueFunction& h, ErasureProb eps);

struct ValueIterationResult {
    ValueFunction h;
    /// Midpoint of [min, max] of h_K - h_{K-1}.
    double rho_estimate = 0.0;
    double increment_min = 0.0;
    double increment_max = 0.0;
};

ValueIterationResult value_iteration(ErasureProb eps, std::size_t grid_size, std::size_t iterations);

/// Closed-form relative value function solving the Bellman equation.
double optimal_value_function(ErasureProb eps, double z);

/// Optimal stationary action min(z, p_eps).
double optimal_policy(ErasureProb eps, double z);

struct BellmanCheck {
    double max_abs_residual = 0.0;
    double residual_at_zero = 0.0;
    /// Largest |argmax - min(z, p_eps)| over the grid, in units of grid steps.
    double max_policy_deviation_steps = 0.0;
};

/// Re-maximizes the operator with the closed-form h* plugged in and compares
/// against h* + rho* at every grid point.
BellmanCheck bellman_check(ErasureProb eps, std::size_t grid_size);

double bellman_residual(ErasureProb eps, std::size_t grid_size);

struct DpSimulation {
    double average_reward = 0.0;
    std::size_t steps = 0;
    std::size_t burn_in = 0;
    /// Exact visited states after burn-in, with visit counts.
    std::map<double, std::uint64_t> histogram;
    /// Visited states (after burn-in) outside {0, 1 - p_eps, 1}.
    std::uint64_t off_support_visits = 0;
    /// z_0 .. z_steps; filled only when requested.
    std::vector<double> trajectory;
};

constexpr std::size_t kDpBurnIn = 2;

/// Closed-loop run from z_0 = 0 under optimal_policy. The disturbance is drawn
/// from disturbance_distribution with one uniform draw per step.
DpSimulation simulate_dp(ErasureProb eps, std::size_t steps, std::uint64_t seed, bool keep_trajectory = false);

}  // namespace rllfbc
