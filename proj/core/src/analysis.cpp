#include "ifista/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ifista/solvers.hpp"

namespace ifista {

namespace {

void require_nonnegative(std::span<const double> xs, const char* what)
{
    for (double x : xs)
        if (!(x >= 0.0)) throw std::invalid_argument(std::string(what) + " entries must be >= 0");
}

// Larger root of s^2 - b s - c = 0 for b, c >= 0.
double larger_root(double b, double c)
{
    return 0.5 * (b + std::sqrt(b * b + 4.0 * c));
}

}  // namespace

BihariBound bihari_bound(std::span<const double> lambdas, std::span<const double> sigmas)
{
    if (lambdas.size() != sigmas.size()) throw std::invalid_argument("bihari: lambdas and sigmas differ in length");
    require_nonnegative(lambdas, "lambda");
    require_nonnegative(sigmas, "sigma");
    for (std::size_t k = 1; k < sigmas.size(); ++k)
        if (sigmas[k] < sigmas[k - 1]) throw std::invalid_argument("bihari: sigma must be increasing");

    BihariBound out;
    out.tight.reserve(lambdas.size());
    out.loose.reserve(lambdas.size());
    double L = 0.0;
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        L += lambdas[k];
        const double h = 0.5 * L;
        out.tight.push_back(h + std::sqrt(h * h + sigmas[k]));
        out.loose.push_back(L + std::sqrt(sigmas[k]));
    }
    return out;
}

std::vector<double> bihari_extremal(std::span<const double> lambdas, std::span<const double> sigmas)
{
    if (lambdas.size() != sigmas.size()) throw std::invalid_argument("bihari: lambdas and sigmas differ in length");
    std::vector<double> mu;
    mu.reserve(lambdas.size());
    double acc = 0.0;  // sum_{i<k} lambda_i sqrt(mu_i)
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        const double s = larger_root(lambdas[k], sigmas[k] + acc);
        mu.push_back(s * s);
        acc += lambdas[k] * s;
    }
    return mu;
}

RecurrenceBound recurrence_bound(double alpha0, std::span<const double> lambdas, std::span<const double> xis)
{
    if (lambdas.size() != xis.size()) throw std::invalid_argument("recurrence: lambdas and xis differ in length");
    if (!(alpha0 >= 0.0)) throw std::invalid_argument("recurrence: alpha0 must be >= 0");
    require_nonnegative(lambdas, "lambda");
    require_nonnegative(xis, "xi");
    RecurrenceBound out;
    double L = 0.0, X = alpha0;
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        L += lambdas[k];
        X += xis[k];
        out.value.push_back((10.0 / 9.0) * X + L * L);
        out.value_valid.push_back(2.0 * X + L * L);
        out.max_sqrt.push_back(L + std::sqrt(X));
    }
    return out;
}

std::vector<double> recurrence_extremal(double alpha0, std::span<const double> lambdas,
                                        std::span<const double> xis)
{
    if (lambdas.size() != xis.size()) throw std::invalid_argument("recurrence: lambdas and xis differ in length");
    std::vector<double> alpha{alpha0};
    alpha.reserve(lambdas.size() + 1);
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        const double s = larger_root(lambdas[k], alpha.back() + xis[k]);
        alpha.push_back(s * s);
    }
    return alpha;
}

std::vector<double> recurrence_bound_via_bihari(double alpha0, std::span<const double> lambdas,
                                                std::span<const double> xis)
{
    if (lambdas.size() != xis.size()) throw std::invalid_argument("recurrence: lambdas and xis differ in length");
    std::vector<double> sigmas;
    sigmas.reserve(xis.size());
    double X = alpha0;
    for (double xi : xis) sigmas.push_back(X += xi);
    return bihari_bound(lambdas, sigmas).tight;
}

std::vector<double> cesaro_weights(std::span<const double> lambdas)
{
    for (double l : lambdas)
        if (!(l > 0.0)) throw std::invalid_argument("cesaro: lambda entries must be positive");
    std::vector<double> mu;
    if (lambdas.empty()) return mu;
    mu.reserve(lambdas.size());
    mu.push_back(1.0);
    for (std::size_t k = 0; k + 1 < lambdas.size(); ++k) mu.push_back(mu[k] * (1.0 + lambdas[k]) / lambdas[k + 1]);
    return mu;
}

std::vector<double> cesaro_reconstruct(double a0, std::span<const double> lambdas, std::span<const double> bs)
{
    if (lambdas.size() < bs.size()) throw std::invalid_argument("cesaro: need one lambda per b");
    const auto mu = cesaro_weights(lambdas.first(bs.size()));
    std::vector<double> a{a0};
    a.reserve(bs.size() + 1);
    if (bs.empty()) return a;
    double num = mu[0] * lambdas[0] * a0;
    double den = mu[0] * lambdas[0];
    for (std::size_t k = 0; k < bs.size(); ++k) {
        num += mu[k] * bs[k];
        den += mu[k];
        a.push_back(num / den);
    }
    return a;
}

std::vector<double> cesaro_perturbation(std::span<const double> a, std::span<const double> lambdas)
{
    if (a.empty() || lambdas.size() + 1 < a.size())
        throw std::invalid_argument("cesaro: need one lambda per step of a");
    std::vector<double> b;
    b.reserve(a.size() - 1);
    for (std::size_t k = 0; k + 1 < a.size(); ++k) b.push_back(a[k + 1] + lambdas[k] * (a[k + 1] - a[k]));
    return b;
}

std::vector<double> cesaro_unroll(double a0, std::span<const double> lambdas, std::span<const double> bs)
{
    if (lambdas.size() < bs.size()) throw std::invalid_argument("cesaro: need one lambda per b");
    std::vector<double> a{a0};
    for (std::size_t k = 0; k < bs.size(); ++k) {
        if (!(lambdas[k] > 0.0)) throw std::invalid_argument("cesaro: lambda entries must be positive");
        a.push_back((bs[k] + lambdas[k] * a[k]) / (1.0 + lambdas[k]));
    }
    return a;
}

DriftReport summable_drift_converges(std::span<const double> alphas, std::span<const double> epsilons, double tol)
{
    if (alphas.empty()) throw std::invalid_argument("drift: empty alpha sequence");
    const std::size_t N = alphas.size();
    if (epsilons.size() + 1 < N) throw std::invalid_argument("drift: need an epsilon for every step");
    require_nonnegative(epsilons.first(N - 1), "epsilon");

    DriftReport rep;
    for (std::size_t k = 0; k + 1 < N; ++k) {
        const double drift = alphas[k + 1] - alphas[k];
        if (drift > epsilons[k] + tol * std::max(1.0, std::abs(alphas[k]))) {
            rep.hypothesis_ok = false;
            rep.first_violation = k;
            return rep;
        }
    }

    rep.u.assign(N, 0.0);
    long double tail = 0.0L;
    for (std::size_t i = epsilons.size(); i-- > N - 1;) tail += epsilons[i];
    for (std::size_t k = N; k-- > 0;) {
        rep.u[k] = static_cast<double>(static_cast<long double>(alphas[k]) + tail);
        if (k > 0) tail += epsilons[k - 1];
    }
    rep.is_quasi_monotone = true;
    for (std::size_t k = 0; k + 1 < N; ++k)
        if (rep.u[k + 1] > rep.u[k] + tol * std::max(1.0, std::abs(rep.u[k]))) {
            rep.is_quasi_monotone = false;
            break;
        }

    const std::size_t start = N - std::max<std::size_t>(1, N / 4);
    const auto [lo, hi] = std::minmax_element(alphas.begin() + static_cast<std::ptrdiff_t>(start), alphas.end());
    rep.tail_oscillation = *hi - *lo;
    return rep;
}

std::vector<std::size_t> log_grid(std::size_t k_min, std::size_t k_max, int per_decade)
{
    if (k_min < 1 || k_max < k_min) throw std::invalid_argument("log_grid: need 1 <= k_min <= k_max");
    if (per_decade < 1) throw std::invalid_argument("log_grid: per_decade must be >= 1");
    std::vector<std::size_t> ks;
    const double lmin = std::log10(static_cast<double>(k_min));
    const double lmax = std::log10(static_cast<double>(k_max));
    const auto steps = static_cast<long>(std::floor((lmax - lmin) * per_decade + 1e-9));
    for (long j = 0; j <= steps; ++j) {
        const auto k = static_cast<std::size_t>(std::llround(std::pow(10.0, lmin + static_cast<double>(j) / per_decade)));
        const std::size_t kc = std::clamp(k, k_min, k_max);
        if (ks.empty() || ks.back() != kc) ks.push_back(kc);
    }
    if (ks.back() != k_max) ks.push_back(k_max);
    return ks;
}

RateFit rate_fit(std::span<const double> values, std::size_t k_min, std::size_t k_max, int per_decade)
{
    if (k_min < 1) throw std::invalid_argument("rate_fit: k_min must be >= 1");
    if (k_max <= k_min) throw std::invalid_argument("rate_fit: k_max must exceed k_min");
    if (k_max >= values.size()) throw std::invalid_argument("rate_fit: window exceeds the data");

    RateFit fit;
    std::vector<double> xs, ys;
    for (std::size_t k : log_grid(k_min, k_max, per_decade)) {
        double v = values[k];
        if (!std::isfinite(v)) continue;
        if (v < kRateFloor) {
            v = kRateFloor;
            ++fit.clipped;
        }
        xs.push_back(std::log(static_cast<double>(k)));
        ys.push_back(std::log(v));
    }
    fit.points = xs.size();
    if (fit.points < 10) throw std::invalid_argument("rate_fit: fewer than 10 usable points");

    const double n = static_cast<double>(fit.points);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
        rss += r * r;
    }
    fit.residual = std::sqrt(rss / n);
    return fit;
}

RateFit rate_fit(const SolverTrace& trace, std::size_t k_min, std::size_t k_max)
{
    std::vector<double> gaps;
    gaps.reserve(trace.rows.size());
    for (const auto& r : trace.rows) gaps.push_back(r.F_gap);
    return rate_fit(gaps, k_min, k_max);
}

Feasibility schedule_feasibility(double alpha, double p, double q, double r)
{
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("feasibility: alpha must lie in (0, 1]");
    if (!(p >= 0.0) || !(q >= 0.0) || !(r >= 0.0)) throw std::invalid_argument("feasibility: p, q, r must be >= 0");

    Feasibility out;
    out.predicted_rate_exponent = 2.0 * alpha - q;
    out.log_power = r;
    out.deterministic_condition = p > 1.0 + alpha;
    out.weak_condition = p > 0.5 + alpha;

    const double lo = alpha + 0.5, hi = 2.0 * alpha;
    const bool open_window = lo < q && q < hi;
    const bool edge_window = lo <= q && q < hi && r > 0.5;
    const bool step_ok = open_window || edge_window;
    out.iterate_convergence_guaranteed = step_ok && out.deterministic_condition;

    std::ostringstream os;
    if (!step_ok) {
        if (q >= hi)
            os << "q >= 2*alpha";
        else if (q < lo)
            os << "q < alpha + 1/2";
        else
            os << "q = alpha + 1/2 requires r > 1/2";
    }
    if (!out.deterministic_condition) os << (step_ok ? "" : "; ") << "p <= alpha + 1";
    out.reason = os.str();
    return out;
}

}  // namespace ifista
