#pragma once

// Inexact FISTA, inexact stochastic FISTA and the proximal-gradient baseline.
//
// Iteration k (x_0 = y_0):
//     x_{k+1} ~_{delta_k} prox_{gamma_k g}(y_k - gamma_k (grad f(y_k) + b_k))
//     y_{k+1} = x_{k+1} + (t_k - 1) / t_{k+1} (x_{k+1} - x_k)
// with v_0 = x_0, v_{k+1} = x_k + t_k (x_{k+1} - x_k) and energy
//     E_k = 2 gamma_k t_{k-1}^2 (F(x_k) - F_*) + ||v_k - x_*||^2,  t_{-1} = 0.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ifista/inexact.hpp"
#include "ifista/params.hpp"
#include "ifista/problems.hpp"

namespace ifista {

/// How the (delta1, delta2) pair entering the bound is chosen.
///   conservative: delta1 = delta2 = delta_k (weak mode: delta1 = delta_k, delta2 = 0)
///   certified:    taken from the certificate when it carries a decomposition
enum class BoundMode { conservative, certified };
std::string to_string(BoundMode mode);

struct DeterministicConfig {
    double gamma = 0.0;  // 0 < gamma <= 1/L
    ParamSequence params{ParamFamily::critical()};
    ErrorSchedule delta;
    GradientErrorSchedule b;
    DirectionRule prox_direction = DirectionRule::seeded_random;
    bool weak = false;
    BoundMode bound_mode = BoundMode::conservative;
    std::size_t max_iters = 1000;
    std::uint64_t seed = 0;
    std::optional<Vector> x0;
    bool store_points = false;
    std::int64_t inner_cap = 1'000'000;
};

/// gamma_k = gamma / (k^q (1 + log k)^r) for k >= 1, gamma_0 = gamma, capped at
/// 1/L and made nonincreasing by a running minimum.
struct StepSchedule {
    double gamma = 0.0;
    double q = 0.0;
    double r = 0.0;

    void validate() const;
    /// gamma_0 .. gamma_{count-1}.
    std::vector<double> values(std::size_t count, double lipschitz) const;
};

struct StochasticConfig {
    StepSchedule step;
    ParamSequence params{ParamFamily::critical()};
    ErrorSchedule delta;
    StochasticOracleSpec noise;
    DirectionRule prox_direction = DirectionRule::seeded_random;
    bool weak = false;
    BoundMode bound_mode = BoundMode::conservative;
    std::size_t max_iters = 1000;
    std::size_t replications = 1;
    std::uint64_t seed = 0;  // master seed
    unsigned workers = 0;    // 0 uses the hardware concurrency
    std::optional<Vector> x0;
    bool store_points = false;
    std::int64_t inner_cap = 1'000'000;
};

struct TraceRow {
    std::size_t k = 0;
    double t = 0.0;          // t_k
    double gamma = 0.0;      // gamma_k
    double delta = 0.0;      // delta_k
    double b_norm = 0.0;     // ||b_k||, realized noise norm in the stochastic case
    double F_gap = kNaN;     // F(x_k) - F_*
    double energy = kNaN;    // E_k
    double bound_rhs = kNaN; // theorem bound at k, NaN at k = 0
    double cert_excess = 0.0;
    double x_dist = kNaN;    // ||x_k - x_*||
    double hypothesis = 0.0; // gamma_k t_{k-1}^2
    double delta1 = 0.0;     // pair used by the bound at step k
    double delta2 = 0.0;
    std::int64_t inner_iterations = 0;
};

struct SolverTrace {
    std::vector<TraceRow> rows;
    Vector final_x;
    std::vector<Vector> x, y, v;  // x_k, y_k, v_k when points are stored
    bool has_reference = false;
    double initial_dist2 = kNaN;  // ||x_0 - x_*||^2
};

struct AggregateRow {
    std::size_t k = 0;
    double mean_gap = 0.0;
    double se_gap = 0.0;
    double bound_rhs = kNaN;
    double max_energy = kNaN;
    double hypothesis = 0.0;
};

struct StochasticResult {
    std::vector<SolverTrace> replications;
    std::vector<AggregateRow> aggregate;
};

/// Throws std::invalid_argument on bad configuration, DivergenceError when
/// the iterates blow up, and InnerSolverCapError from dual-mode prox steps.
SolverTrace run_inexact_fista(const CompositeProblem& problem, DeterministicConfig config);
StochasticResult run_stochastic_fista(const CompositeProblem& problem, StochasticConfig config);

/// x_{k+1} = prox(x_k - gamma (grad f(x_k) + b_k)) with the same inexactness
/// machinery; t_k = 1 is reported in the trace. config.params is ignored.
SolverTrace run_proximal_gradient(const CompositeProblem& problem, DeterministicConfig config);

double energy(double gamma_k, double t_prev, double F_gap, const Vector& v_k, const Vector& x_star);

struct DeterministicBoundInputs {
    double initial_dist2 = 0.0;  // ||x_0 - x_*||^2
    double gamma = 0.0;
    std::span<const double> t;       // t_0 .. t_{k-1}
    std::span<const double> delta1;  // i < k
    std::span<const double> delta2;
    std::span<const double> b_norm;
};

/// (1 / (2 gamma t_{k-1}^2)) [ (10/9)(||x_0 - x_*||^2 + sum t_i^2 delta1_i^2)
///                             + 4 (sum t_i delta2_i + gamma sum t_i ||b_i||)^2 ].
/// Throws std::invalid_argument for k = 0.
double theorem_bound_deterministic(std::size_t k, const DeterministicBoundInputs& in);

struct StochasticBoundInputs {
    double initial_dist2 = 0.0;
    double sigma = 0.0;
    std::span<const double> gamma;   // gamma_0 .. gamma_k
    std::span<const double> t;       // t_0 .. t_{k-1}
    std::span<const double> delta;   // i < k
    std::span<const double> delta1;
    std::span<const double> delta2;
};

/// (1 / (2 gamma_k t_{k-1}^2)) [ (10/9)(||x_0 - x_*||^2
///     + sum (2 gamma_i t_i^2 delta_i sigma + 2 sigma^2 gamma_i^2 t_i^2 + t_i^2 delta1_i^2))
///     + 4 (sum t_i delta2_i)^2 ].
double theorem_bound_stochastic(std::size_t k, const StochasticBoundInputs& in);

/// sup_{K/2 <= k <= K} ||x_k - x_K|| over stored iterates.
double tail_oscillation(const SolverTrace& trace, std::size_t K);

}  // namespace ifista
