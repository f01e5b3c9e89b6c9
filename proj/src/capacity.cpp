#include "rllfbc/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rllfbc {

namespace {

void require_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::domain_error(std::string(what) + " must lie in [0,1], got " + std::to_string(p));
    }
}

double plogp(double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; }

// Stand-in epsilon used to report the limiting maximizer at eps = 1.
constexpr double kNearTotalErasure = 1.0 - 1e-9;

}  // namespace

ErasureProb::ErasureProb(double epsilon) : epsilon_(epsilon) {
    require_probability(epsilon, "erasure probability");
}

double binary_entropy(double p) {
    require_probability(p, "binary entropy argument");
    return plogp(p) + plogp(1.0 - p);
}

double ternary_entropy(double a1, double a2, double a3) {
    require_probability(a1, "ternary entropy argument");
    require_probability(a2, "ternary entropy argument");
    require_probability(a3, "ternary entropy argument");
    if (std::abs(a1 + a2 + a3 - 1.0) > 1e-12) {
        throw std::domain_error("ternary entropy arguments must sum to 1");
    }
    return plogp(a1) + plogp(a2) + plogp(a3);
}

double capacity_objective(ErasureProb eps, double p) {
    require_probability(p, "input parameter p");
    if (eps.is_total()) return 0.0;
    return binary_entropy(p) / (p + eps.inverse_complement());
}

double stationarity_residual(ErasureProb eps, double p) {
    const double k = eps.inverse_complement();
    return k * std::log(p) - (1.0 + k) * std::log1p(-p);
}

double optimal_p(ErasureProb eps) {
    if (eps.is_total()) {
        throw std::domain_error("optimal_p is undefined at eps = 1");
    }
    double lo = 1e-15;
    double hi = 0.5;
    // Bisect down to adjacent doubles; the residual is then within a few ulps.
    for (;;) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (stationarity_residual(eps, mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return std::abs(stationarity_residual(eps, lo)) <= std::abs(stationarity_residual(eps, hi)) ? lo : hi;
}

CapacityResult feedback_capacity(ErasureProb eps) {
    CapacityResult r;
    r.epsilon = eps.value();
    if (eps.is_total()) {
        r.p_star = optimal_p(ErasureProb(kNearTotalErasure));
        r.capacity_bits = 0.0;
        r.degenerate = true;
        return r;
    }
    r.p_star = optimal_p(eps);
    r.capacity_bits = capacity_objective(eps, r.p_star);
    return r;
}

double capacity_alt_form(ErasureProb eps) {
    const double p = optimal_p(eps);
    return -std::log2(p) / (1.0 + eps.inverse_complement());
}

MarkovChainSummary noncausal_chain(ErasureProb eps, double p) {
    if (eps.is_total()) {
        throw std::domain_error("noncausal_chain requires eps < 1");
    }
    require_probability(p, "input parameter p");
    const double eb = eps.complement();
    MarkovChainSummary s;
    s.transition = {{{eps.value() + eb * (1.0 - p), eb * p}, {1.0, 0.0}}};
    const double norm = 1.0 + eb * p;
    s.stationary = {1.0 / norm, eb * p / norm};
    s.entropy_rate_bound = eb * binary_entropy(p) * s.stationary[0];
    return s;
}

double noncausal_max(ErasureProb eps) {
    if (eps.is_total()) return 0.0;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    auto f = [&](double p) { return noncausal_chain(eps, p).entropy_rate_bound; };
    double a = 0.0, b = 0.5;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > 1e-12) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return std::max({fc, fd, f(0.5 * (a + b))});
}

double noncausal_grid_max(ErasureProb eps, int grid_points) {
    if (grid_points < 2) throw std::invalid_argument("grid_points must be >= 2");
    if (eps.is_total()) return 0.0;
    double best = 0.0;
    for (int i = 0; i < grid_points; ++i) {
        const double p = static_cast<double>(i) / (grid_points - 1);
        best = std::max(best, noncausal_chain(eps, p).entropy_rate_bound);
    }
    return best;
}

}  // namespace rllfbc
