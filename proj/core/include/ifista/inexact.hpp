#pragma once

// Certified inexact proximity steps, gradient-error injection and stochastic
// gradient oracles.
//
// A point z is a delta-approximation of prox_{gamma g}(y) when
//     gamma g(z) + 1/2 ||z - y||^2 <= min (gamma g + 1/2 ||. - y||^2) + delta^2 / 2.
// Such a point admits (delta1, delta2, e) with delta1^2 + delta2^2 <= delta^2,
// ||e|| <= delta2 and y + e - z in the (delta1^2 / 2)-subdifferential of gamma g at z.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ifista/problems.hpp"
#include "ifista/random.hpp"
#include "ifista/types.hpp"

namespace ifista {

enum class ProxMode { exact, perturbation, dual_gap };
std::string to_string(ProxMode mode);

struct Decomposition {
    double delta1 = 0.0;
    double delta2 = 0.0;
    Vector e;
};

struct ProxCertificate {
    double delta = 0.0;
    double objective_excess_bound = 0.0;
    ProxMode mode = ProxMode::exact;
    std::optional<Decomposition> decomposition;
    /// Certified bound on the Fenchel-Young gap of gamma g at (z, y - z); present
    /// whenever the point also satisfies the e = 0 criterion.
    std::optional<double> weak_gap;
    std::int64_t inner_iterations = 0;
};

struct ProxOutput {
    Vector z;
    ProxCertificate cert;
    Vector dual;  // final dual iterate in dual_gap mode, for warm starts
};

enum class DirectionRule { seeded_random, fixed_unit, adversarial };
std::string to_string(DirectionRule rule);
DirectionRule direction_rule_from_string(const std::string& s);

struct PerturbOptions {
    DirectionRule direction = DirectionRule::seeded_random;
    std::uint64_t seed = 0;
    std::uint64_t index = 0;  // call index, selects the direction draw
    bool weak = false;        // require the e = 0 criterion instead
    int bisection_steps = 60;
};

/// Pushes the exact prox p along a unit direction as far as the delta
/// criterion allows (bisection on the step length in [0, delta]).
/// delta = 0 returns p unchanged.
ProxOutput inexact_prox_perturb(const NonsmoothPart& g, const Vector& y, double gamma, double delta,
                                const PerturbOptions& options = {});

/// Runs the problem's dual solver until the primal-dual gap is <= delta^2 / 2.
/// Throws InnerSolverCapError when the cap is reached first.
ProxOutput inexact_prox_dual(const NonsmoothPart& g, const Vector& y, double gamma, double delta,
                             const Vector* warm_start = nullptr,
                             std::int64_t max_iterations = 1'000'000);

/// Magnitude rule c / (k + 1)^p, or an explicit list.
struct ErrorSchedule {
    double c = 0.0;
    double p = 0.0;
    std::vector<double> values;

    static ErrorSchedule zero() { return {}; }
    static ErrorSchedule power(double c, double p);
    static ErrorSchedule list(std::vector<double> values);

    bool is_zero() const;
    /// Throws std::out_of_range past the end of an explicit list.
    double at(std::size_t k) const;
    void validate() const;
};

enum class ErrorDirection { fixed_unit, seeded };

struct GradientErrorSchedule {
    ErrorSchedule magnitude;
    ErrorDirection direction = ErrorDirection::seeded;
    std::uint64_t seed = 0;
};

/// b_k with ||b_k|| equal to the scheduled magnitude.
Vector gradient_error(const GradientErrorSchedule& schedule, std::size_t k, Index n);

enum class NoiseFamily { sphere, gaussian_iid };
std::string to_string(NoiseFamily family);

struct StochasticOracleSpec {
    double sigma = 0.0;
    NoiseFamily family = NoiseFamily::sphere;
};

/// grad f(x) plus zero-mean noise with E||noise||^2 = sigma^2.
/// sigma = 0 returns the exact gradient without drawing from the stream.
Vector stochastic_grad(const StochasticOracleSpec& spec, const SmoothPart& f, const Vector& x, Rng& rng);
void stochastic_grad(const StochasticOracleSpec& spec, const SmoothPart& f, const Vector& x, Rng& rng,
                     Vector& out);

}  // namespace ifista
