#include "ifista/params.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ifista {

ParamFamily ParamFamily::constant_one()
{
    ParamFamily f;
    f.kind = Kind::constant_one;
    return f;
}

ParamFamily ParamFamily::linear(double a)
{
    ParamFamily f;
    f.kind = Kind::linear;
    f.a = a;
    f.validate();
    return f;
}

ParamFamily ParamFamily::critical()
{
    return ParamFamily{};
}

ParamFamily ParamFamily::power(double alpha, PowerBase base)
{
    ParamFamily f;
    f.kind = Kind::power;
    f.alpha = alpha;
    f.base = base;
    f.validate();
    return f;
}

void ParamFamily::validate() const
{
    if (kind == Kind::linear && !(a >= 2.0 && std::isfinite(a)))
        throw std::invalid_argument("linear family requires a >= 2");
    if (kind == Kind::power && !(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("power family requires 0 < alpha <= 1");
}

double ParamFamily::growth_exponent() const
{
    switch (kind) {
    case Kind::constant_one: return 0.0;
    case Kind::linear:
    case Kind::critical: return 1.0;
    case Kind::power: return alpha;
    }
    return 0.0;
}

std::string to_string(ParamFamily::Kind kind)
{
    switch (kind) {
    case ParamFamily::Kind::constant_one: return "constant_one";
    case ParamFamily::Kind::linear: return "linear";
    case ParamFamily::Kind::critical: return "critical";
    case ParamFamily::Kind::power: return "power";
    }
    return "?";
}

std::string to_string(ParamFamily::PowerBase base)
{
    return base == ParamFamily::PowerBase::linear_half ? "linear_half" : "critical";
}

long double phi(long double t)
{
    if (!(t >= 1.0L)) throw std::domain_error("phi: argument must be >= 1");
    return (1.0L + std::sqrt(1.0L + 4.0L * t * t)) / 2.0L;
}

double phi(double t)
{
    if (!(t >= 1.0)) throw std::domain_error("phi: argument must be >= 1");
    return (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0;
}

double beta(double t_k, double t_next)
{
    return (t_k - 1.0) / t_next;
}

ParamSequence::ParamSequence(ParamFamily family) : family_(family)
{
    family_.validate();
    values_.push_back(1.0L);
    base_.push_back(1.0L);
}

ParamSequence ParamSequence::from_values(std::vector<double> values)
{
    if (values.empty()) throw std::invalid_argument("explicit parameter list is empty");
    if (values.front() != 1.0) throw std::invalid_argument("explicit parameter list must start with t_0 = 1");
    ParamSequence seq;
    seq.explicit_ = true;
    seq.values_.assign(values.begin(), values.end());
    seq.base_.clear();
    return seq;
}

long double ParamSequence::generate(std::size_t k) const
{
    const auto kk = static_cast<long double>(k);
    switch (family_.kind) {
    case ParamFamily::Kind::constant_one: return 1.0L;
    case ParamFamily::Kind::linear: return (kk + family_.a) / family_.a;
    case ParamFamily::Kind::critical: return phi(values_[k - 1]);
    case ParamFamily::Kind::power:
        if (family_.base == ParamFamily::PowerBase::linear_half)
            return std::pow((kk + 2.0L) / 2.0L, static_cast<long double>(family_.alpha));
        // base_ already holds s_k here
        return std::pow(base_[k], static_cast<long double>(family_.alpha));
    }
    return 1.0L;
}

double ParamSequence::next_t()
{
    const std::size_t k = values_.size();
    if (explicit_)
        throw std::out_of_range("explicit parameter list exhausted at k = " + std::to_string(k));
    if (family_.kind == ParamFamily::Kind::power && family_.base == ParamFamily::PowerBase::critical)
        base_.push_back(phi(base_.back()));
    values_.push_back(generate(k));
    return static_cast<double>(values_.back());
}

long double ParamSequence::precise(std::size_t k)
{
    while (values_.size() <= k) next_t();
    return values_[k];
}

double ParamSequence::t(std::size_t k)
{
    return static_cast<double>(precise(k));
}

double ParamSequence::t_before(std::size_t k)
{
    return k == 0 ? 0.0 : t(k - 1);
}

std::vector<double> ParamSequence::prefix(std::size_t count)
{
    if (count > 0) precise(count - 1);
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) out.push_back(static_cast<double>(values_[k]));
    return out;
}

AdmissibilityReport validate_admissible(std::span<const double> prefix, double tol)
{
    if (prefix.empty()) throw std::invalid_argument("validate_admissible: empty prefix");

    AdmissibilityReport report;
    auto fail = [&](std::size_t k, std::string why) {
        report.ok = false;
        report.first_violation = k;
        report.reason = std::move(why);
        return report;
    };

    if (!(std::abs(prefix[0] - 1.0) <= tol)) return fail(0, "t_0 must equal 1");

    for (std::size_t k = 1; k < prefix.size(); ++k) {
        const long double tk = prefix[k];
        const long double prev = prefix[k - 1];
        if (!std::isfinite(prefix[k])) return fail(k, "t_k is not finite");
        if (tk < 1.0L - tol) return fail(k, "t_k < 1");
        const long double residual = tk * tk - tk - prev * prev;
        const long double scale = std::max(1.0L, prev * prev);
        if (residual > tol * scale) {
            std::ostringstream os;
            os << "t_k^2 - t_k exceeds t_{k-1}^2 by " << static_cast<double>(residual);
            return fail(k, os.str());
        }
    }
    return report;
}

}  // namespace ifista
