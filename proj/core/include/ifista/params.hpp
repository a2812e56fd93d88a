#pragma once

// Acceleration parameters t_k for FISTA-type schemes.
//
// A sequence is admissible when t_0 = 1 and, for k >= 1,
//     t_k >= 1  and  t_k^2 - t_k <= t_{k-1}^2,
// equivalently 1 <= t_k <= phi(t_{k-1}) with phi(t) = (1 + sqrt(1 + 4 t^2)) / 2.
// The momentum coefficient is beta_{k+1} = (t_k - 1) / t_{k+1}.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ifista {

struct ParamFamily {
    enum class Kind { constant_one, linear, critical, power };
    enum class PowerBase { linear_half, critical };

    Kind kind = Kind::critical;
    double a = 2.0;       // linear: t_k = (k + a) / a, a >= 2
    double alpha = 1.0;   // power: t_k = s_k^alpha, 0 < alpha <= 1
    PowerBase base = PowerBase::critical;

    static ParamFamily constant_one();
    static ParamFamily linear(double a);
    static ParamFamily critical();
    static ParamFamily power(double alpha, PowerBase base = PowerBase::critical);

    /// Throws std::invalid_argument when a < 2 (linear) or alpha outside (0, 1] (power).
    void validate() const;

    /// Growth exponent of t_k ~ k^exponent (0 for constant_one).
    double growth_exponent() const;

    friend bool operator==(const ParamFamily&, const ParamFamily&) = default;
};

std::string to_string(ParamFamily::Kind kind);
std::string to_string(ParamFamily::PowerBase base);

/// phi(t) = (1 + sqrt(1 + 4 t^2)) / 2, the largest admissible successor of t.
/// Throws std::domain_error for t < 1.
double phi(double t);
long double phi(long double t);

/// beta = (t_k - 1) / t_next.
double beta(double t_k, double t_next);

/// Lazily extended admissible sequence t_0 = 1, t_1, ...
///
/// Values are generated in long double; double accessors round once. The
/// convention t_{-1} = 0 is exposed through t_before().
class ParamSequence {
public:
    explicit ParamSequence(ParamFamily family = ParamFamily::critical());

    /// Explicit finite list (must start at 1). Reading past the end throws
    /// std::out_of_range.
    static ParamSequence from_values(std::vector<double> values);

    const ParamFamily& family() const noexcept { return family_; }
    bool is_explicit() const noexcept { return explicit_; }

    /// Number of generated values.
    std::size_t size() const noexcept { return values_.size(); }

    /// Appends t_{size()} and returns it.
    double next_t();

    /// t_k, generating as needed.
    double t(std::size_t k);
    long double precise(std::size_t k);

    /// t_{k-1} with the convention t_{-1} = 0.
    double t_before(std::size_t k);

    double beta_next(std::size_t k) { return beta(t(k), t(k + 1)); }

    /// Makes sure t_0..t_k exist and returns them as doubles.
    std::vector<double> prefix(std::size_t count);

private:
    long double generate(std::size_t k) const;

    ParamFamily family_;
    bool explicit_ = false;
    std::vector<long double> values_;
    std::vector<long double> base_;  // s_k for power(alpha, critical)
};

struct AdmissibilityReport {
    bool ok = true;
    std::optional<std::size_t> first_violation;
    std::string reason;
};

inline constexpr double kAdmissibilityTol = 1e-12;

/// Checks t_0 = 1, t_k >= 1 and t_k^2 - t_k <= t_{k-1}^2 for every k >= 1.
/// The quadratic test is relative: residual <= tol * max(1, t_{k-1}^2).
AdmissibilityReport validate_admissible(std::span<const double> prefix,
                                        double tol = kAdmissibilityTol);

}  // namespace ifista
