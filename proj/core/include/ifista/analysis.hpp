#pragma once

// Closed-form bounds for the sequence lemmas behind the convergence proofs,
// brute-force extremal oracles for them, and diagnostics over solver traces.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ifista {

struct SolverTrace;

// Discrete Bihari-LaSalle ---------------------------------------------------
//
// mu_k <= sigma_k + sum_{i<=k} lambda_i sqrt(mu_i) with sigma increasing gives
//     max_{i<=k} sqrt(mu_i) <= L/2 + sqrt(L^2/4 + sigma_k) <= L + sqrt(sigma_k),
// where L = sum_{i<=k} lambda_i.

struct BihariBound {
    std::vector<double> tight;
    std::vector<double> loose;
};

/// Throws std::invalid_argument for negative entries, decreasing sigma or size mismatch.
BihariBound bihari_bound(std::span<const double> lambdas, std::span<const double> sigmas);

/// Largest sequence satisfying the hypothesis with equality at every k.
std::vector<double> bihari_extremal(std::span<const double> lambdas, std::span<const double> sigmas);

// Square-root recurrence ----------------------------------------------------
//
// alpha_{k+1} <= alpha_k + lambda_k sqrt(alpha_{k+1}) + xi_k gives, for each k,
//     alpha_{k+1} <= (10/9)(alpha_0 + sum_{i<=k} xi_i) + (sum_{i<=k} lambda_i)^2
//     max_{i<=k+1} sqrt(alpha_i) <= sum_{i<=k} lambda_i + sqrt(alpha_0 + sum_{i<=k} xi_i).
// The 10/9 form fails already for one step (alpha_0 = 1, lambda_0 = 1, xi_0 = 0
// allows alpha_1 = ((1 + sqrt 5) / 2)^2 > 10/9 + 1). Squaring the tight
// Bihari-LaSalle bound gives the valid form
//     alpha_{k+1} <= 2 (alpha_0 + sum_{i<=k} xi_i) + (sum_{i<=k} lambda_i)^2,
// where 2 is the smallest constant that works with a unit coefficient on the
// squared sum.

struct RecurrenceBound {
    std::vector<double> value;        // 10/9 form, entry k for alpha_{k+1}
    std::vector<double> value_valid;  // constant-2 form, entry k for alpha_{k+1}
    std::vector<double> max_sqrt;     // entry k bounds max_{i<=k+1} sqrt(alpha_i)
};

RecurrenceBound recurrence_bound(double alpha0, std::span<const double> lambdas, std::span<const double> xis);

/// alpha_0, alpha_1, ... with equality in the recurrence (larger root each step).
std::vector<double> recurrence_extremal(double alpha0, std::span<const double> lambdas,
                                        std::span<const double> xis);

/// Same bound obtained through the Bihari form with mu_k = alpha_{k+1} and
/// sigma_k = alpha_0 + sum_{i<=k} xi_i; entry k bounds max_{i<=k} sqrt(alpha_{i+1}).
std::vector<double> recurrence_bound_via_bihari(double alpha0, std::span<const double> lambdas,
                                                std::span<const double> xis);

// Weighted-average representation --------------------------------------------
//
// With b_k = a_{k+1} + lambda_k (a_{k+1} - a_k), mu_0 = 1 and
// mu_{k+1} = mu_k (1 + lambda_k) / lambda_{k+1}:
//     a_{k+1} = (mu_0 lambda_0 a_0 + sum_{i<=k} mu_i b_i) / (mu_0 lambda_0 + sum_{i<=k} mu_i).

/// Weights mu_0 .. mu_{n-1} for lambdas of length n.
std::vector<double> cesaro_weights(std::span<const double> lambdas);

/// Returns a_0 .. a_K for bs of length K (lambdas needs at least K entries).
std::vector<double> cesaro_reconstruct(double a0, std::span<const double> lambdas, std::span<const double> bs);

/// b_k = a_{k+1} + lambda_k (a_{k+1} - a_k).
std::vector<double> cesaro_perturbation(std::span<const double> a, std::span<const double> lambdas);

/// Direct forward solve a_{k+1} = (b_k + lambda_k a_k) / (1 + lambda_k).
std::vector<double> cesaro_unroll(double a0, std::span<const double> lambdas, std::span<const double> bs);

// Summable drift -------------------------------------------------------------

struct DriftReport {
    bool hypothesis_ok = true;                      // alpha_{k+1} - alpha_k <= eps_k
    std::optional<std::size_t> first_violation;
    bool is_quasi_monotone = false;                 // u_k = alpha_k + sum_{i>=k} eps_i nonincreasing
    double tail_oscillation = 0.0;                  // max - min of alpha over the last quarter
    std::vector<double> u;
};

/// alphas of length N, epsilons of length >= N - 1. Tolerance applies to both
/// the hypothesis check and the monotonicity of u, relative to max(1, |.|).
DriftReport summable_drift_converges(std::span<const double> alphas, std::span<const double> epsilons,
                                     double tol = 1e-12);

// Rate fitting ---------------------------------------------------------------

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;      // RMS of log residuals
    std::size_t points = 0;
    std::size_t clipped = 0;    // values below 1e-16 replaced by 1e-16
};

inline constexpr double kRateFloor = 1e-16;

/// Geometric grid of about per_decade points per decade on [k_min, k_max].
std::vector<std::size_t> log_grid(std::size_t k_min, std::size_t k_max, int per_decade = 32);

/// Least-squares line through (log k, log values[k]) on the geometric grid.
/// values is indexed by k. Throws std::invalid_argument when k_min < 1,
/// k_max <= k_min, the window exceeds the data, or fewer than 10 usable points remain.
RateFit rate_fit(std::span<const double> values, std::size_t k_min, std::size_t k_max, int per_decade = 32);

/// Fit of the F_gap column.
RateFit rate_fit(const SolverTrace& trace, std::size_t k_min, std::size_t k_max);

// Schedule feasibility -------------------------------------------------------

struct Feasibility {
    bool iterate_convergence_guaranteed = false;  // stochastic step and error exponents
    double predicted_rate_exponent = 0.0;         // 2 alpha - q
    double log_power = 0.0;                       // r
    bool deterministic_condition = false;         // p > 1 + alpha
    bool weak_condition = false;                  // p > 1/2 + alpha
    std::string reason;
};

/// Throws std::invalid_argument when alpha is outside (0, 1] or p, q, r < 0.
Feasibility schedule_feasibility(double alpha, double p, double q, double r);

}  // namespace ifista
