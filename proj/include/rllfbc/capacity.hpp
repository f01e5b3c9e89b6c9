// Feedback capacity of the binary erasure channel under the (1,inf)-RLL
// input constraint (no two consecutive ones), together with the optimizing
// input parameter and the non-causal erasure-knowledge bound.
#pragma once

#include <array>

namespace rllfbc {

/// Erasure probability of the channel, validated to lie in [0, 1].
class ErasureProb {
public:
    explicit ErasureProb(double epsilon);

    double value() const noexcept { return epsilon_; }
    /// 1 - epsilon.
    double complement() const noexcept { return 1.0 - epsilon_; }
    /// 1 / (1 - epsilon); infinite at epsilon = 1.
    double inverse_complement() const noexcept { return 1.0 / (1.0 - epsilon_); }
    bool is_total() const noexcept { return epsilon_ == 1.0; }

    friend bool operator==(ErasureProb, ErasureProb) = default;

private:
    double epsilon_;
};

/// H_b(p) in bits, with 0 log 0 = 0. Throws std::domain_error outside [0,1].
double binary_entropy(double p);

/// Entropy of a three-point distribution in bits. The arguments must each be
/// in [0,1] and sum to 1 within 1e-12.
double ternary_entropy(double a1, double a2, double a3);

/// H_b(p) / (p + 1/(1-eps)). At eps = 1 the denominator diverges and the
/// limit 0 is returned.
double capacity_objective(ErasureProb eps, double p);

/// The unique maximizer of capacity_objective in (0, 1/2]. It solves
/// p^(1/(1-eps)) = (1-p)^(1+1/(1-eps)); found by bisection on the log form,
/// which is strictly increasing in p. Throws std::domain_error at eps = 1.
double optimal_p(ErasureProb eps);

/// Log-form stationarity residual (1/(1-eps)) ln p - (1 + 1/(1-eps)) ln(1-p).
/// Zero exactly at optimal_p(eps).
double stationarity_residual(ErasureProb eps, double p);

struct CapacityResult {
    double epsilon = 0.0;
    double p_star = 0.0;
    double capacity_bits = 0.0;
    /// Set at eps = 1, where p_star is a numerical limit rather than a maximizer.
    bool degenerate = false;
};

/// Feedback capacity in bits per channel use for any eps in [0,1].
CapacityResult feedback_capacity(ErasureProb eps);

/// -log2(p_eps) / (1 + 1/(1-eps)); algebraically equal to the capacity.
double capacity_alt_form(ErasureProb eps);

/// Two-state chain of the channel input when erasures are known ahead of time.
struct MarkovChainSummary {
    std::array<std::array<double, 2>, 2> transition{};
    std::array<double, 2> stationary{};
    double entropy_rate_bound = 0.0;
};

MarkovChainSummary noncausal_chain(ErasureProb eps, double p);

/// Maximum of noncausal_chain(eps, p).entropy_rate_bound over p in [0, 1/2],
/// located by golden-section search (independent of the bisection in
/// optimal_p). Returns 0 at eps = 1.
double noncausal_max(ErasureProb eps);

/// Brute-force variant of noncausal_max over a uniform grid on p in [0, 1].
double noncausal_grid_max(ErasureProb eps, int grid_points);

}  // namespace rllfbc
