#include "rllfbc/dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace rllfbc {

namespace {

void require_action(double z, double delta) {
    if (!(z >= 0.0 && z <= 1.0)) throw std::invalid_argument("DP state must lie in [0,1]");
    if (!(delta >= 0.0 && delta <= z)) throw std::invalid_argument("action must satisfy 0 <= delta <= z");
}

// Running maximum of objective[j] over j <= i, smallest index on ties.
ValueFunction running_max(const std::vector<double>& objective) {
    ValueFunction out(objective.size());
    std::size_t best = 0;
    for (std::size_t i = 0; i < objective.size(); ++i) {
        if (objective[i] > objective[best]) best = i;
        out.values[i] = objective[best];
        out.policy[i] = out.z_at(best);
    }
    return out;
}

}  // namespace

double system_update(double z, double delta, Symbol w) {
    require_action(z, delta);
    switch (w) {
        case Symbol::Zero: return 1.0;
        case Symbol::Erasure: return 1.0 - delta;
        case Symbol::One: return 0.0;
    }
    return 0.0;
}

std::array<double, 3> disturbance_distribution(double z, double delta, ErasureProb eps) {
    require_action(z, delta);
    const double eb = eps.complement();
    return {(1.0 - delta) * eb, eps.value(), delta * eb};
}

double reward(double delta, ErasureProb eps) { return eps.complement() * binary_entropy(delta); }

ValueFunction::ValueFunction(std::size_t grid_size) : values(grid_size, 0.0), policy(grid_size, 0.0) {
    if (grid_size < 2) throw std::invalid_argument("value function grid needs at least 2 points");
}

double ValueFunction::interpolate(double x) const {
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("interpolation point outside [0,1]");
    const double pos = x * static_cast<double>(grid_size() - 1);
    const auto i = std::min(static_cast<std::size_t>(pos), grid_size() - 2);
    const double frac = pos - static_cast<double>(i);
    return values[i] + frac * (values[i + 1] - values[i]);
}

ValueFunction bellman_operator(const ValueFunction& h, ErasureProb eps) {
    const std::size_t n = h.grid_size();
    const double eb = eps.complement();
    const double e = eps.value();
    const double h0 = h.values.front();
    const double h1 = h.values.back();
    std::vector<double> objective(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double delta = h.z_at(j);
        objective[j] = eb * binary_entropy(delta) + (1.0 - delta) * eb * h1 + e * h.values[n - 1 - j] + delta * eb * h0;
    }
    return running_max(objective);
}

ValueIterationResult value_iteration(ErasureProb eps, std::size_t grid_size, std::size_t iterations) {
    if (iterations < 1) throw std::invalid_argument("value iteration needs at least one iteration");
    ValueIterationResult r{ValueFunction(grid_size)};
    ValueFunction previous = r.h;
    for (std::size_t k = 0; k < iterations; ++k) {
        previous = std::move(r.h);
        r.h = bellman_operator(previous, eps);
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < grid_size; ++i) {
        const double d = r.h.values[i] - previous.values[i];
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    r.increment_min = lo;
    r.increment_max = hi;
    r.rho_estimate = 0.5 * (lo + hi);
    return r;
}

double optimal_value_function(ErasureProb eps, double z) {
    if (!(z >= 0.0 && z <= 1.0)) throw std::invalid_argument("DP state must lie in [0,1]");
    const auto cap = feedback_capacity(eps);
    if (cap.degenerate) throw std::domain_error("optimal_value_function requires eps < 1");
    const double rho = cap.capacity_bits;
    if (z <= cap.p_star) return eps.complement() * (binary_entropy(z) - z * rho);
    return rho;
}

double optimal_policy(ErasureProb eps, double z) {
    if (!(z >= 0.0 && z <= 1.0)) throw std::invalid_argument("DP state must lie in [0,1]");
    return std::min(z, feedback_capacity(eps).p_star);
}

BellmanCheck bellman_check(ErasureProb eps, std::size_t grid_size) {
    const auto cap = feedback_capacity(eps);
    if (cap.degenerate) throw std::domain_error("bellman_check requires eps < 1");
    const double rho = cap.capacity_bits;
    const double p = cap.p_star;
    const double eb = eps.complement();
    const double e = eps.value();

    ValueFunction grid(grid_size);
    std::vector<double> objective(grid_size);
    auto h_star = [&](double z) { return z <= p ? eb * (binary_entropy(z) - z * rho) : rho; };
    const double h0 = h_star(0.0);
    const double h1 = h_star(1.0);
    for (std::size_t j = 0; j < grid_size; ++j) {
        const double delta = grid.z_at(j);
        objective[j] = eb * binary_entropy(delta) + (1.0 - delta) * eb * h1 + e * h_star(1.0 - delta) + delta * eb * h0;
    }
    const ValueFunction th = running_max(objective);

    BellmanCheck check;
    const double step = 1.0 / static_cast<double>(grid_size - 1);
    for (std::size_t i = 0; i < grid_size; ++i) {
        const double z = th.z_at(i);
        const double residual = std::abs(th.values[i] - h_star(z) - rho);
        check.max_abs_residual = std::max(check.max_abs_residual, residual);
        if (i == 0) check.residual_at_zero = residual;
        const double deviation = std::abs(th.policy[i] - std::min(z, p)) / step;
        check.max_policy_deviation_steps = std::max(check.max_policy_deviation_steps, deviation);
    }
    return check;
}

double bellman_residual(ErasureProb eps, std::size_t grid_size) { return bellman_check(eps, grid_size).max_abs_residual; }

DpSimulation simulate_dp(ErasureProb eps, std::size_t steps, std::uint64_t seed, bool keep_trajectory) {
    if (steps < 1) throw std::invalid_argument("simulate_dp needs at least one step");
    const double p = feedback_capacity(eps).p_star;
    std::mt19937_64 rng(seed);

    DpSimulation sim;
    sim.steps = steps;
    sim.burn_in = kDpBurnIn;
    if (keep_trajectory) sim.trajectory.reserve(steps + 1);

    double z = 0.0;
    double total = 0.0;
    for (std::size_t t = 0; t < steps; ++t) {
        if (keep_trajectory) sim.trajectory.push_back(z);
        if (t >= kDpBurnIn) {
            ++sim.histogram[z];
            if (z != 0.0 && z != 1.0 && z != 1.0 - p) ++sim.off_support_visits;
        }
        const double delta = std::min(z, p);
        const auto dist = disturbance_distribution(z, delta, eps);
        const double u = uniform01(rng);
        // Zero-probability outcomes can never be drawn, even if the masses
        // do not sum to exactly 1 in floating point.
        const Symbol w = u < dist[2] ? Symbol::One : (u < dist[2] + dist[1] ? Symbol::Erasure : Symbol::Zero);
        total += reward(delta, eps);
        z = system_update(z, delta, w);
    }
    if (keep_trajectory) sim.trajectory.push_back(z);
    sim.average_reward = total / static_cast<double>(steps);
    return sim;
}

}  // namespace rllfbc
