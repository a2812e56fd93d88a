#include "ifista/solvers.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ifista {

std::string to_string(BoundMode mode)
{
    return mode == BoundMode::conservative ? "conservative" : "certified";
}

double energy(double gamma_k, double t_prev, double F_gap, const Vector& v_k, const Vector& x_star)
{
    return 2.0 * gamma_k * t_prev * t_prev * F_gap + (v_k - x_star).squaredNorm();
}

void StepSchedule::validate() const
{
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be positive");
    if (!(q >= 0.0)) throw std::invalid_argument("step schedule: q must be >= 0");
    if (!(r >= 0.0)) throw std::invalid_argument("step schedule: r must be >= 0");
}

std::vector<double> StepSchedule::values(std::size_t count, double lipschitz) const
{
    validate();
    const double cap = 1.0 / lipschitz;
    std::vector<double> out;
    out.reserve(count);
    double running = std::min(gamma, cap);
    for (std::size_t k = 0; k < count; ++k) {
        double g = gamma;
        if (k >= 1 && (q != 0.0 || r != 0.0)) {
            const double kk = static_cast<double>(k);
            g = gamma / (std::pow(kk, q) * std::pow(1.0 + std::log(kk), r));
        }
        running = std::min({running, g, cap});
        out.push_back(running);
    }
    return out;
}

namespace {

constexpr double kStepSlack = 1e-12;

void check_gamma(double gamma, double L)
{
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be positive");
    if (gamma > (1.0 / L) * (1.0 + kStepSlack)) {
        std::ostringstream os;
        os.precision(17);
        os << "step size gamma = " << gamma << " exceeds 1/L = " << 1.0 / L
           << " (the step-size constraint requires 0 < gamma <= 1/L)";
        throw std::invalid_argument(os.str());
    }
}

struct ProxSettings {
    ErrorSchedule delta;
    DirectionRule direction;
    bool weak;
    BoundMode bound_mode;
    std::uint64_t seed;
    std::int64_t inner_cap;
};

// Performs one prox step and returns the certificate; keeps the dual warm start.
class ProxEngine {
public:
    ProxEngine(const CompositeProblem& problem, const ProxSettings& s) : problem_(problem), s_(s) {}

    ProxOutput step(const Vector& arg, double gamma, double delta, std::size_t k)
    {
        if (problem_.has_exact_prox()) {
            PerturbOptions opt;
            opt.direction = s_.direction;
            opt.seed = s_.seed;
            opt.index = k;
            opt.weak = s_.weak;
            return inexact_prox_perturb(*problem_.g, arg, gamma, delta, opt);
        }
        auto out = inexact_prox_dual(*problem_.g, arg, gamma, delta, warm_.size() ? &warm_ : nullptr,
                                     s_.inner_cap);
        warm_ = out.dual;
        return out;
    }

    std::pair<double, double> bound_pair(const ProxCertificate& cert, double delta) const
    {
        if (s_.bound_mode == BoundMode::certified && cert.decomposition)
            return {cert.decomposition->delta1, cert.decomposition->delta2};
        if (s_.weak) return {delta, 0.0};
        return {delta, delta};
    }

private:
    const CompositeProblem& problem_;
    ProxSettings s_;
    Vector warm_;
};

class DivergenceGuard {
public:
    explicit DivergenceGuard(double F_star) : F_star_(F_star) {}

    void check(std::size_t k, const Vector& x, double F_gap)
    {
        if (!x.allFinite()) throw DivergenceError("non-finite iterate at k = " + std::to_string(k), k);
        if (std::isnan(F_gap)) {
            if (has_ref_) throw DivergenceError("objective gap is NaN at k = " + std::to_string(k), k);
            return;
        }
        has_ref_ = true;
        if (k == 0) {
            threshold_ = 1e6 * std::max(F_gap, 1e-12 * std::max(1.0, std::abs(F_star_)));
            return;
        }
        if (!(F_gap <= threshold_)) {
            if (++streak_ >= 100) {
                std::ostringstream os;
                os << "divergence guard: F(x_k) - F_* exceeded 1e6 times its initial value for 100 "
                      "consecutive iterations (k = "
                   << k << ")";
                throw DivergenceError(os.str(), k);
            }
        } else {
            streak_ = 0;
        }
    }

private:
    double F_star_;
    bool has_ref_ = false;
    double threshold_ = kInf;
    int streak_ = 0;
};

struct CoreSetup {
    std::size_t max_iters;
    bool store_points;
    bool stochastic;
    double sigma;
    bool accelerated;
};

// GradFn: (k, y, out) -> realized ||b_k||; StepFn: k -> gamma_k.
template <class GradFn, class StepFn>
SolverTrace run_core(const CompositeProblem& problem, ParamSequence& params, const ProxSettings& ps,
                     const CoreSetup& setup, const std::optional<Vector>& x0_opt, GradFn&& gradient_at,
                     StepFn&& gamma_at)
{
    const Index n = problem.dim();
    Vector x = x0_opt ? *x0_opt : Vector(Vector::Zero(n));
    if (x.size() != n) throw std::invalid_argument("x0 has the wrong dimension");

    SolverTrace trace;
    trace.has_reference = problem.reference.has_value();
    const Vector* xs = trace.has_reference ? &problem.reference->x_star : nullptr;
    const double F_star = trace.has_reference ? problem.reference->F_star : 0.0;
    if (xs) trace.initial_dist2 = (x - *xs).squaredNorm();

    Vector y = x, v = x, x_next(n), grad(n), arg(n);
    ProxEngine engine(problem, ps);
    DivergenceGuard guard(F_star);

    // Running sums over i < k.
    double s_delta1 = 0.0;     // sum t_i^2 delta1_i^2
    double s_delta2 = 0.0;     // sum t_i delta2_i
    double s_b = 0.0;          // sum t_i ||b_i||
    double s_stoch = 0.0;      // sum (2 gamma_i t_i^2 delta_i sigma + 2 sigma^2 gamma_i^2 t_i^2 + t_i^2 delta1_i^2)

    trace.rows.reserve(setup.max_iters);
    if (setup.store_points) {
        trace.x.reserve(setup.max_iters + 1);
        trace.y.reserve(setup.max_iters + 1);
        trace.v.reserve(setup.max_iters + 1);
    }

    for (std::size_t k = 0; k < setup.max_iters; ++k) {
        TraceRow row;
        row.k = k;
        row.t = setup.accelerated ? params.t(k) : 1.0;
        const double t_prev = setup.accelerated ? params.t_before(k) : (k == 0 ? 0.0 : 1.0);
        row.gamma = gamma_at(k);
        row.delta = ps.delta.at(k);
        row.hypothesis = row.gamma * t_prev * t_prev;

        if (xs) {
            row.F_gap = problem.gap(x);
            row.energy = energy(row.gamma, t_prev, row.F_gap, v, *xs);
            row.x_dist = (x - *xs).norm();
            if (k >= 1) {
                const double scale = 1.0 / (2.0 * row.gamma * t_prev * t_prev);
                if (setup.stochastic) {
                    row.bound_rhs = scale * ((10.0 / 9.0) * (trace.initial_dist2 + s_stoch)
                                             + 4.0 * s_delta2 * s_delta2);
                } else {
                    const double lin = s_delta2 + row.gamma * s_b;
                    row.bound_rhs = scale * ((10.0 / 9.0) * (trace.initial_dist2 + s_delta1)
                                             + 4.0 * lin * lin);
                }
            }
        }
        guard.check(k, x, row.F_gap);

        if (setup.store_points) {
            trace.x.push_back(x);
            trace.y.push_back(y);
            trace.v.push_back(v);
        }

        row.b_norm = gradient_at(k, y, grad);
        arg = y - row.gamma * grad;
        ProxOutput px = engine.step(arg, row.gamma, row.delta, k);
        x_next = std::move(px.z);
        row.cert_excess = px.cert.objective_excess_bound;
        row.inner_iterations = px.cert.inner_iterations;
        std::tie(row.delta1, row.delta2) = engine.bound_pair(px.cert, row.delta);

        const double t2 = row.t * row.t;
        s_delta1 += t2 * row.delta1 * row.delta1;
        s_delta2 += row.t * row.delta2;
        s_b += row.t * row.b_norm;
        s_stoch += 2.0 * row.gamma * t2 * row.delta * setup.sigma
                   + 2.0 * setup.sigma * setup.sigma * row.gamma * row.gamma * t2
                   + t2 * row.delta1 * row.delta1;

        v = x + row.t * (x_next - x);
        if (setup.accelerated) {
            const double b = beta(row.t, params.t(k + 1));
            y = x_next + b * (x_next - x);
        } else {
            y = x_next;
        }
        x.swap(x_next);
        trace.rows.push_back(row);
    }

    if (!x.allFinite()) throw DivergenceError("non-finite final iterate", setup.max_iters);
    if (setup.store_points) {
        trace.x.push_back(x);
        trace.y.push_back(y);
        trace.v.push_back(v);
    }
    trace.final_x = x;
    return trace;
}

ProxSettings settings_from(const DeterministicConfig& c)
{
    return {c.delta, c.prox_direction, c.weak, c.bound_mode, c.seed, c.inner_cap};
}

void check_prox_capable(const CompositeProblem& problem)
{
    if (!problem.has_exact_prox() && !problem.has_dual_solver())
        throw std::invalid_argument("problem has neither a closed-form prox nor a dual solver");
}

}  // namespace

SolverTrace run_inexact_fista(const CompositeProblem& problem, DeterministicConfig config)
{
    check_prox_capable(problem);
    check_gamma(config.gamma, problem.lipschitz());
    config.delta.validate();
    config.b.magnitude.validate();
    const Index n = problem.dim();
    const auto& f = *problem.f;
    const double gamma = config.gamma;
    const auto& bs = config.b;
    auto grad_fn = [&](std::size_t k, const Vector& y, Vector& out) {
        f.gradient(y, out);
        const double m = bs.magnitude.at(k);
        if (m == 0.0) return 0.0;
        out += gradient_error(bs, k, n);
        return m;
    };
    auto step_fn = [gamma](std::size_t) { return gamma; };
    CoreSetup setup{config.max_iters, config.store_points, false, 0.0, true};
    return run_core(problem, config.params, settings_from(config), setup, config.x0, grad_fn, step_fn);
}

SolverTrace run_proximal_gradient(const CompositeProblem& problem, DeterministicConfig config)
{
    check_prox_capable(problem);
    check_gamma(config.gamma, problem.lipschitz());
    config.delta.validate();
    config.b.magnitude.validate();

    const Index n = problem.dim();
    const auto& f = *problem.f;
    const double gamma = config.gamma;
    Vector x = config.x0 ? *config.x0 : Vector(Vector::Zero(n));
    if (x.size() != n) throw std::invalid_argument("x0 has the wrong dimension");

    SolverTrace trace;
    trace.has_reference = problem.reference.has_value();
    const Vector* xs = trace.has_reference ? &problem.reference->x_star : nullptr;
    if (xs) trace.initial_dist2 = (x - *xs).squaredNorm();
    ProxEngine engine(problem, settings_from(config));
    DivergenceGuard guard(xs ? problem.reference->F_star : 0.0);
    Vector grad(n), v = x;
    double s_delta1 = 0.0, s_delta2 = 0.0, s_b = 0.0;

    for (std::size_t k = 0; k < config.max_iters; ++k) {
        TraceRow row;
        row.k = k;
        row.t = 1.0;
        row.gamma = gamma;
        row.delta = config.delta.at(k);
        const double t_prev = k == 0 ? 0.0 : 1.0;
        row.hypothesis = gamma * t_prev * t_prev;
        if (xs) {
            row.F_gap = problem.gap(x);
            row.energy = energy(gamma, t_prev, row.F_gap, v, *xs);
            row.x_dist = (x - *xs).norm();
            if (k >= 1) {
                const double lin = s_delta2 + gamma * s_b;
                row.bound_rhs = (1.0 / (2.0 * gamma)) * ((10.0 / 9.0) * (trace.initial_dist2 + s_delta1)
                                                         + 4.0 * lin * lin);
            }
        }
        guard.check(k, x, row.F_gap);
        if (config.store_points) {
            trace.x.push_back(x);
            trace.y.push_back(x);
            trace.v.push_back(v);
        }

        f.gradient(x, grad);
        const double m = config.b.magnitude.at(k);
        if (m != 0.0) grad += gradient_error(config.b, k, n);
        row.b_norm = m;
        ProxOutput px = engine.step(x - gamma * grad, gamma, row.delta, k);
        row.cert_excess = px.cert.objective_excess_bound;
        row.inner_iterations = px.cert.inner_iterations;
        std::tie(row.delta1, row.delta2) = engine.bound_pair(px.cert, row.delta);
        s_delta1 += row.delta1 * row.delta1;
        s_delta2 += row.delta2;
        s_b += row.b_norm;
        x = std::move(px.z);
        v = x;
        trace.rows.push_back(row);
    }
    if (!x.allFinite()) throw DivergenceError("non-finite final iterate", config.max_iters);
    if (config.store_points) {
        trace.x.push_back(x);
        trace.y.push_back(x);
        trace.v.push_back(v);
    }
    trace.final_x = x;
    return trace;
}

StochasticResult run_stochastic_fista(const CompositeProblem& problem, StochasticConfig config)
{
    check_prox_capable(problem);
    config.step.validate();
    check_gamma(config.step.gamma, problem.lipschitz());
    config.delta.validate();
    if (!(config.noise.sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
    if (config.replications < 1) throw std::invalid_argument("replications must be >= 1");

    const std::vector<double> gammas = config.step.values(config.max_iters, problem.lipschitz());
    const ProxSettings ps{config.delta, config.prox_direction, config.weak, config.bound_mode, config.seed,
                          config.inner_cap};
    const CoreSetup setup{config.max_iters, config.store_points, true, config.noise.sigma, true};
    const auto& f = *problem.f;
    const Index n = problem.dim();

    // Extend once so replications copy a fully generated sequence.
    config.params.t(config.max_iters);

    StochasticResult result;
    result.replications.resize(config.replications);
    std::vector<std::exception_ptr> errors(config.replications);

    auto run_one = [&](std::size_t rep) {
        try {
            ParamSequence params = config.params;
            Rng rng = make_rng(config.seed, Stream::noise, rep);
            Vector noiseless(n);
            auto grad_fn = [&](std::size_t, const Vector& y, Vector& out) {
                stochastic_grad(config.noise, f, y, rng, out);
                if (config.noise.sigma == 0.0) return 0.0;
                f.gradient(y, noiseless);
                return (out - noiseless).norm();
            };
            auto step_fn = [&](std::size_t k) { return gammas[k]; };
            result.replications[rep] = run_core(problem, params, ps, setup, config.x0, grad_fn, step_fn);
        } catch (...) {
            errors[rep] = std::current_exception();
        }
    };

    unsigned workers = config.workers ? config.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, config.replications));
    if (workers <= 1) {
        for (std::size_t rep = 0; rep < config.replications; ++rep) run_one(rep);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t rep; (rep = next.fetch_add(1)) < config.replications;) run_one(rep);
            });
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    const std::size_t R = config.replications;
    result.aggregate.resize(config.max_iters);
    for (std::size_t k = 0; k < config.max_iters; ++k) {
        AggregateRow& a = result.aggregate[k];
        a.k = k;
        const auto& first = result.replications[0].rows[k];
        a.hypothesis = first.hypothesis;
        double sum = 0.0;
        for (const auto& tr : result.replications) sum += tr.rows[k].F_gap;
        a.mean_gap = sum / static_cast<double>(R);
        double ss = 0.0;
        for (const auto& tr : result.replications) {
            const double d = tr.rows[k].F_gap - a.mean_gap;
            ss += d * d;
        }
        a.se_gap = R > 1 ? std::sqrt(ss / static_cast<double>(R - 1) / static_cast<double>(R)) : 0.0;
        double bound = first.bound_rhs, emax = first.energy;
        for (const auto& tr : result.replications) {
            bound = std::max(bound, tr.rows[k].bound_rhs);
            emax = std::max(emax, tr.rows[k].energy);
        }
        a.bound_rhs = bound;
        a.max_energy = emax;
    }
    return result;
}

double theorem_bound_deterministic(std::size_t k, const DeterministicBoundInputs& in)
{
    if (k == 0) throw std::invalid_argument("theorem bound is undefined at k = 0");
    if (in.t.size() < k || in.delta1.size() < k || in.delta2.size() < k || in.b_norm.size() < k)
        throw std::invalid_argument("theorem bound: inputs shorter than k");
    double s1 = 0.0, s2 = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        s1 += in.t[i] * in.t[i] * in.delta1[i] * in.delta1[i];
        s2 += in.t[i] * in.delta2[i];
        sb += in.t[i] * in.b_norm[i];
    }
    const double tp = in.t[k - 1];
    const double lin = s2 + in.gamma * sb;
    return (1.0 / (2.0 * in.gamma * tp * tp)) * ((10.0 / 9.0) * (in.initial_dist2 + s1) + 4.0 * lin * lin);
}

double theorem_bound_stochastic(std::size_t k, const StochasticBoundInputs& in)
{
    if (k == 0) throw std::invalid_argument("theorem bound is undefined at k = 0");
    if (in.gamma.size() < k + 1 || in.t.size() < k || in.delta.size() < k || in.delta1.size() < k
        || in.delta2.size() < k)
        throw std::invalid_argument("theorem bound: inputs shorter than k");
    const double s = in.sigma;
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double t2 = in.t[i] * in.t[i];
        s1 += 2.0 * in.gamma[i] * t2 * in.delta[i] * s + 2.0 * s * s * in.gamma[i] * in.gamma[i] * t2
              + t2 * in.delta1[i] * in.delta1[i];
        s2 += in.t[i] * in.delta2[i];
    }
    const double tp = in.t[k - 1];
    return (1.0 / (2.0 * in.gamma[k] * tp * tp)) * ((10.0 / 9.0) * (in.initial_dist2 + s1) + 4.0 * s2 * s2);
}

double tail_oscillation(const SolverTrace& trace, std::size_t K)
{
    if (K >= trace.x.size()) throw std::out_of_range("tail_oscillation: iterate K not stored");
    double sup = 0.0;
    for (std::size_t k = K / 2; k <= K; ++k) sup = std::max(sup, (trace.x[k] - trace.x[K]).norm());
    return sup;
}

}  // namespace ifista
