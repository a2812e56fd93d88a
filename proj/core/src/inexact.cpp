#include "ifista/inexact.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ifista {

std::string to_string(ProxMode mode)
{
    switch (mode) {
    case ProxMode::exact: return "exact";
    case ProxMode::perturbation: return "perturbation";
    case ProxMode::dual_gap: return "dual_gap";
    }
    return "?";
}

std::string to_string(DirectionRule rule)
{
    switch (rule) {
    case DirectionRule::seeded_random: return "seeded_random";
    case DirectionRule::fixed_unit: return "fixed_unit";
    case DirectionRule::adversarial: return "adversarial";
    }
    return "?";
}

DirectionRule direction_rule_from_string(const std::string& s)
{
    if (s == "seeded_random" || s == "seeded") return DirectionRule::seeded_random;
    if (s == "fixed_unit") return DirectionRule::fixed_unit;
    if (s == "adversarial") return DirectionRule::adversarial;
    throw std::invalid_argument("unknown direction rule '" + s + "'");
}

std::string to_string(NoiseFamily family)
{
    return family == NoiseFamily::sphere ? "sphere" : "gaussian_iid";
}

namespace {

Vector fixed_unit(Index n)
{
    return Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
}

ProxOutput exact_output(Vector p, double delta)
{
    ProxOutput out;
    out.cert.delta = delta;
    out.cert.mode = ProxMode::exact;
    out.cert.decomposition = Decomposition{0.0, 0.0, Vector::Zero(p.size())};
    out.cert.weak_gap = 0.0;
    out.z = std::move(p);
    return out;
}

}  // namespace

ProxOutput inexact_prox_perturb(const NonsmoothPart& g, const Vector& y, double gamma, double delta,
                                const PerturbOptions& options)
{
    if (!g.has_exact_prox()) throw std::invalid_argument("perturbation mode needs a closed-form prox");
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    if (!(delta >= 0.0)) throw std::invalid_argument("delta must be nonnegative");

    Vector p = g.prox(y, gamma);
    if (delta == 0.0) return exact_output(std::move(p), delta);

    const Index n = y.size();
    const Vector w = y - p;  // subgradient of gamma g at p
    Vector u;
    switch (options.direction) {
    case DirectionRule::seeded_random: {
        auto rng = make_rng(options.seed, Stream::prox_direction, options.index);
        u = random_unit(n, rng);
        break;
    }
    case DirectionRule::fixed_unit: u = fixed_unit(n); break;
    case DirectionRule::adversarial: {
        const double nw = w.norm();
        u = nw > 0.0 ? Vector(-w / nw) : fixed_unit(n);
        break;
    }
    }

    const double threshold = 0.5 * delta * delta;
    const double slope = -u.dot(w);
    // gamma g(p + eta u) + 1/2 ||p + eta u - y||^2 minus the same at p
    auto excess = [&](double eta) {
        const Vector z = p + eta * u;
        const double dg = g.value_difference(z, p);
        if (!std::isfinite(dg)) return kInf;
        return gamma * dg + eta * slope + 0.5 * eta * eta;
    };
    auto weak_gap = [&](double eta) {
        const Vector z = p + eta * u;
        const auto gap = g.fenchel_young_gap(z, y - z, gamma);
        return gap ? *gap : kInf;
    };
    auto accept = [&](double eta) {
        return options.weak ? weak_gap(eta) <= threshold : excess(eta) <= threshold;
    };

    double eta = 0.0;
    if (accept(delta)) {
        eta = delta;
    } else {
        double lo = 0.0, hi = delta;
        for (int i = 0; i < options.bisection_steps; ++i) {
            const double mid = 0.5 * (lo + hi);
            if (accept(mid))
                lo = mid;
            else
                hi = mid;
        }
        eta = lo;
    }
    if (eta == 0.0) return exact_output(std::move(p), delta);

    ProxOutput out;
    out.z = p + eta * u;
    auto& cert = out.cert;
    cert.delta = delta;
    cert.mode = ProxMode::perturbation;
    const double ex = std::max(0.0, excess(eta));
    cert.objective_excess_bound = ex;

    if (options.weak) {
        const double wg = std::max(0.0, weak_gap(eta));
        cert.weak_gap = wg;
        cert.decomposition = Decomposition{std::sqrt(2.0 * wg), 0.0, Vector::Zero(n)};
    } else {
        // e = z - p keeps y + e - z = w, an exact subgradient at p, hence an
        // approximate one at z with error gamma g(z) - gamma g(p) - <w, z - p>.
        const double d2 = eta;
        const double eps = std::max(0.0, gamma * g.value_difference(out.z, p) - eta * u.dot(w));
        cert.decomposition = Decomposition{std::sqrt(2.0 * eps), d2, out.z - p};
    }
    return out;
}

ProxOutput inexact_prox_dual(const NonsmoothPart& g, const Vector& y, double gamma, double delta,
                             const Vector* warm_start, std::int64_t max_iterations)
{
    const DualProxSolver* solver = g.dual_solver();
    if (!solver) throw std::invalid_argument("dual mode needs a dual prox solver");
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    if (!(delta >= 0.0)) throw std::invalid_argument("delta must be nonnegative");

    auto res = solver->solve(y, gamma, 0.5 * delta * delta, warm_start, max_iterations);
    ProxOutput out;
    out.z = std::move(res.z);
    out.dual = std::move(res.u);
    auto& cert = out.cert;
    cert.delta = delta;
    cert.mode = ProxMode::dual_gap;
    cert.objective_excess_bound = std::max(0.0, res.gap);
    // The gap is the Fenchel-Young gap at (z, y - z), so e = 0 is certified.
    cert.weak_gap = cert.objective_excess_bound;
    cert.decomposition = Decomposition{std::sqrt(2.0 * cert.objective_excess_bound), 0.0,
                                       Vector::Zero(y.size())};
    cert.inner_iterations = res.iterations;
    return out;
}

// ---------------------------------------------------------------------------

ErrorSchedule ErrorSchedule::power(double c, double p)
{
    ErrorSchedule s;
    s.c = c;
    s.p = p;
    s.validate();
    return s;
}

ErrorSchedule ErrorSchedule::list(std::vector<double> values)
{
    ErrorSchedule s;
    s.values = std::move(values);
    s.validate();
    return s;
}

void ErrorSchedule::validate() const
{
    if (!(c >= 0.0) || !std::isfinite(c)) throw std::invalid_argument("error schedule: c must be >= 0");
    if (!(p >= 0.0) || !std::isfinite(p)) throw std::invalid_argument("error schedule: p must be >= 0");
    for (double v : values)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("error schedule: list entries must be finite and >= 0");
}

bool ErrorSchedule::is_zero() const
{
    if (!values.empty()) return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
    return c == 0.0;
}

double ErrorSchedule::at(std::size_t k) const
{
    if (!values.empty()) {
        if (k >= values.size()) throw std::out_of_range("explicit error list exhausted at k = " + std::to_string(k));
        return values[k];
    }
    if (c == 0.0) return 0.0;
    return c / std::pow(static_cast<double>(k) + 1.0, p);
}

Vector gradient_error(const GradientErrorSchedule& schedule, std::size_t k, Index n)
{
    const double m = schedule.magnitude.at(k);
    if (m == 0.0) return Vector::Zero(n);
    if (schedule.direction == ErrorDirection::fixed_unit) return m * fixed_unit(n);
    auto rng = make_rng(schedule.seed, Stream::gradient_error, k);
    return m * random_unit(n, rng);
}

void stochastic_grad(const StochasticOracleSpec& spec, const SmoothPart& f, const Vector& x, Rng& rng,
                     Vector& out)
{
    f.gradient(x, out);
    if (spec.sigma == 0.0) return;
    const Index n = x.size();
    if (spec.family == NoiseFamily::sphere) {
        out += spec.sigma * random_unit(n, rng);
    } else {
        out += (spec.sigma / std::sqrt(static_cast<double>(n))) * random_gaussian(n, rng);
    }
}

Vector stochastic_grad(const StochasticOracleSpec& spec, const SmoothPart& f, const Vector& x, Rng& rng)
{
    Vector out(x.size());
    stochastic_grad(spec, f, x, rng, out);
    return out;
}

}  // namespace ifista
