#include "ifista/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ifista/params.hpp"
#include "ifista/random.hpp"

namespace ifista {

std::string to_string(Provenance p)
{
    return p == Provenance::analytic ? "analytic" : "high_precision_run";
}

void NonsmoothPart::prox(const Vector&, double, Vector&) const
{
    throw std::logic_error(name() + ": no closed-form prox");
}

double CompositeProblem::gap(const Vector& x) const
{
    if (!reference) throw std::logic_error("gap requires a reference solution");
    const Vector& xs = reference->x_star;
    return f->value_difference(x, xs) + g->value_difference(x, xs)
           + (objective(xs) - reference->F_star);
}

// ---------------------------------------------------------------------------

DiagonalQuadratic::DiagonalQuadratic(Vector a, Vector c) : a_(std::move(a)), c_(std::move(c))
{
    if (a_.size() != c_.size()) throw std::invalid_argument("curvature and center sizes differ");
    if (c_.size() < 1) throw std::invalid_argument("dimension must be >= 1");
    for (Index i = 0; i < a_.size(); ++i)
        if (!(a_[i] > 0.0) || !std::isfinite(a_[i]))
            throw std::invalid_argument("curvature entries must be positive");
    a2_ = a_.cwiseProduct(a_);
    L_ = a2_.maxCoeff();
}

double DiagonalQuadratic::value(const Vector& x) const
{
    return 0.5 * a_.cwiseProduct(x - c_).squaredNorm();
}

double DiagonalQuadratic::value_difference(const Vector& x, const Vector& p) const
{
    // a^2 (x - c)^2 - a^2 (p - c)^2 = a^2 (x - p)(x + p - 2c)
    double s = 0.0;
    for (Index i = 0; i < c_.size(); ++i)
        s += a2_[i] * (x[i] - p[i]) * ((x[i] - c_[i]) + (p[i] - c_[i]));
    return 0.5 * s;
}

void DiagonalQuadratic::gradient(const Vector& x, Vector& out) const
{
    out = a2_.cwiseProduct(x - c_);
}

LeastSquares::LeastSquares(Matrix A, Vector b) : A_(std::move(A)), b_(std::move(b))
{
    if (A_.rows() != b_.size()) throw std::invalid_argument("A and b sizes differ");
    if (A_.rows() < 1 || A_.cols() < 1) throw std::invalid_argument("empty design matrix");
    if (A_.cwiseAbs().maxCoeff() == 0.0) throw std::invalid_argument("design matrix is zero");
    const auto pw = largest_eigenvalue_gram(A_);
    L_ = pw.value * (1.0 + pw.relative_error);
}

double LeastSquares::value(const Vector& x) const
{
    return 0.5 * (A_ * x - b_).squaredNorm();
}

double LeastSquares::value_difference(const Vector& x, const Vector& p) const
{
    const Vector ad = A_ * (x - p);
    const Vector s = (A_ * x - b_) + (A_ * p - b_);
    return 0.5 * ad.dot(s);
}

void LeastSquares::gradient(const Vector& x, Vector& out) const
{
    out.noalias() = A_.transpose() * (A_ * x - b_);
}

PowerIterationResult largest_eigenvalue_gram(const Matrix& A, double rel_tol, int max_iterations,
                                             std::uint64_t seed)
{
    auto rng = make_rng(seed, Stream::problem_data, 0x9017);
    Vector v = random_unit(A.cols(), rng);
    PowerIterationResult res;
    for (int it = 1; it <= max_iterations; ++it) {
        const Vector w = A.transpose() * (A * v);
        const double mu = v.dot(w);
        const double resid = (w - mu * v).norm();
        res.iterations = it;
        res.value = mu;
        if (!(mu > 0.0)) throw std::invalid_argument("Gram matrix has no positive eigenvalue");
        res.relative_error = resid / mu;
        if (res.relative_error <= rel_tol) break;
        v = w / w.norm();
    }
    return res;
}

// ---------------------------------------------------------------------------

void ZeroFunction::prox(const Vector& y, double, Vector& out) const
{
    out = y;
}

std::optional<double> ZeroFunction::fenchel_young_gap(const Vector&, const Vector& w, double) const
{
    return w.cwiseAbs().maxCoeff() == 0.0 ? 0.0 : kInf;
}

L1Norm::L1Norm(double lambda) : lambda_(lambda)
{
    if (!(lambda > 0.0)) throw std::invalid_argument("l1 weight must be positive");
}

double L1Norm::value(const Vector& x) const
{
    return lambda_ * x.lpNorm<1>();
}

double L1Norm::value_difference(const Vector& z, const Vector& p) const
{
    double s = 0.0;
    for (Index i = 0; i < z.size(); ++i) s += std::abs(z[i]) - std::abs(p[i]);
    return lambda_ * s;
}

void L1Norm::prox(const Vector& y, double gamma, Vector& out) const
{
    const double th = gamma * lambda_;
    out.resize(y.size());
    for (Index i = 0; i < y.size(); ++i) {
        const double a = std::abs(y[i]) - th;
        out[i] = a > 0.0 ? std::copysign(a, y[i]) : 0.0;
    }
}

std::optional<double> L1Norm::fenchel_young_gap(const Vector& z, const Vector& w, double gamma) const
{
    const double th = gamma * lambda_;
    // w = y - prox(y) can land one rounding step outside [-th, th]
    const double slack = th * 4.0 * std::numeric_limits<double>::epsilon();
    double s = 0.0;
    for (Index i = 0; i < z.size(); ++i) {
        if (std::abs(w[i]) > th + slack) return kInf;
        s += th * std::abs(z[i]) - z[i] * w[i];
    }
    return std::max(s, 0.0);
}

BoxIndicator::BoxIndicator(Vector lower, Vector upper) : lo_(std::move(lower)), hi_(std::move(upper))
{
    if (lo_.size() != hi_.size()) throw std::invalid_argument("box bound sizes differ");
    for (Index i = 0; i < lo_.size(); ++i)
        if (!(lo_[i] <= hi_[i])) throw std::invalid_argument("empty box: lower > upper");
}

double BoxIndicator::value(const Vector& x) const
{
    for (Index i = 0; i < x.size(); ++i)
        if (!(x[i] >= lo_[i] && x[i] <= hi_[i])) return kInf;
    return 0.0;
}

double BoxIndicator::value_difference(const Vector& z, const Vector&) const
{
    return value(z);
}

void BoxIndicator::prox(const Vector& y, double, Vector& out) const
{
    out = y.cwiseMax(lo_).cwiseMin(hi_);
}

std::optional<double> BoxIndicator::fenchel_young_gap(const Vector& z, const Vector& w, double) const
{
    if (value(z) == kInf) return kInf;
    double s = 0.0;
    for (Index i = 0; i < z.size(); ++i) {
        if (w[i] > 0.0) {
            if (hi_[i] == kInf) return kInf;
            s += (hi_[i] - z[i]) * w[i];
        } else if (w[i] < 0.0) {
            if (lo_[i] == -kInf) return kInf;
            s += (lo_[i] - z[i]) * w[i];
        }
    }
    return s;
}

// ---------------------------------------------------------------------------

Vector tv_forward_difference(const Vector& x)
{
    const Index n = x.size();
    if (n < 2) return Vector(0);
    return x.tail(n - 1) - x.head(n - 1);
}

Vector tv_adjoint(const Vector& u, Index n)
{
    Vector out = Vector::Zero(n);
    for (Index i = 0; i + 1 < n; ++i) {
        out[i] -= u[i];
        out[i + 1] += u[i];
    }
    return out;
}

namespace {

double tv_gap(const Vector& dz, const Vector& u, double th)
{
    double s = 0.0;
    for (Index i = 0; i < dz.size(); ++i) s += th * std::abs(dz[i]) - dz[i] * u[i];
    return s;
}

}  // namespace

double TvDualSolver::gap_at(const Vector& y, double gamma, const Vector& u) const
{
    const double th = gamma * lambda_;
    const Vector uc = u.cwiseMax(-th).cwiseMin(th);
    const Vector z = y - tv_adjoint(uc, y.size());
    return tv_gap(tv_forward_difference(z), uc, th);
}

DualSolveResult TvDualSolver::solve(const Vector& y, double gamma, double target_gap,
                                    const Vector* warm_start, std::int64_t max_iterations) const
{
    const Index n = y.size();
    const double th = gamma * lambda_;
    DualSolveResult res;
    res.u = (warm_start && warm_start->size() == n - 1) ? Vector(warm_start->cwiseMax(-th).cwiseMin(th))
                                                        : Vector(Vector::Zero(n - 1));
    Vector z(n), dz(n - 1);
    double best = kInf;
    for (std::int64_t it = 0;; ++it) {
        z = y;
        for (Index i = 0; i + 1 < n; ++i) {
            z[i] += res.u[i];
            z[i + 1] -= res.u[i];
        }
        for (Index i = 0; i + 1 < n; ++i) dz[i] = z[i + 1] - z[i];
        const double gap = tv_gap(dz, res.u, th);
        best = std::min(best, gap);
        if (gap <= target_gap) {
            res.z = z;
            res.gap = gap;
            res.iterations = it;
            return res;
        }
        if (it >= max_iterations) {
            std::ostringstream os;
            os << "tv dual solver reached " << max_iterations << " iterations; best gap " << best
               << " > target " << target_gap;
            throw InnerSolverCapError(os.str(), best, static_cast<std::size_t>(it));
        }
        for (Index i = 0; i + 1 < n; ++i) res.u[i] = std::clamp(res.u[i] + 0.25 * dz[i], -th, th);
    }
}

TotalVariation1D::TotalVariation1D(double lambda) : lambda_(lambda), solver_(lambda)
{
    if (!(lambda > 0.0)) throw std::invalid_argument("tv weight must be positive");
}

double TotalVariation1D::value(const Vector& x) const
{
    return lambda_ * tv_forward_difference(x).lpNorm<1>();
}

double TotalVariation1D::value_difference(const Vector& z, const Vector& p) const
{
    double s = 0.0;
    for (Index i = 0; i + 1 < z.size(); ++i) s += std::abs(z[i + 1] - z[i]) - std::abs(p[i + 1] - p[i]);
    return lambda_ * s;
}

Vector tv1d_prox_direct(const Vector& y, double lambda)
{
    const Index width = y.size();
    Vector out(width);
    if (width == 0) return out;
    if (lambda <= 0.0) return y;
    Index k = 0, k0 = 0, kplus = 0, kminus = 0;
    double umin = lambda, umax = -lambda;
    double vmin = y[0] - lambda, vmax = y[0] + lambda;
    const double twolambda = 2.0 * lambda;
    const double minlambda = -lambda;
    for (;;) {
        while (k == width - 1) {
            if (umin < 0.0) {
                do out[k0++] = vmin; while (k0 <= kminus);
                k = kminus = k0;
                vmin = y[k];
                umin = lambda;
                umax = vmin + umin - vmax;
            } else if (umax > 0.0) {
                do out[k0++] = vmax; while (k0 <= kplus);
                k = kplus = k0;
                vmax = y[k];
                umax = minlambda;
                umin = vmax + umax - vmin;
            } else {
                vmin += umin / static_cast<double>(k - k0 + 1);
                do out[k0++] = vmin; while (k0 <= k);
                return out;
            }
        }
        if ((umin += y[k + 1] - vmin) < minlambda) {
            do out[k0++] = vmin; while (k0 <= kminus);
            k = kplus = kminus = k0;
            vmin = y[k];
            vmax = vmin + twolambda;
            umin = lambda;
            umax = minlambda;
        } else if ((umax += y[k + 1] - vmax) > lambda) {
            do out[k0++] = vmax; while (k0 <= kplus);
            k = kplus = kminus = k0;
            vmax = y[k];
            vmin = vmax - twolambda;
            umin = lambda;
            umax = minlambda;
        } else {
            ++k;
            if (umin >= lambda) {
                kminus = k;
                vmin += (umin - lambda) / static_cast<double>(kminus - k0 + 1);
                umin = lambda;
            }
            if (umax <= minlambda) {
                kplus = k;
                vmax += (umax + lambda) / static_cast<double>(kplus - k0 + 1);
                umax = minlambda;
            }
        }
    }
}

Vector tight_prox(const NonsmoothPart& g, const Vector& y, double gamma, Vector* warm_start)
{
    if (g.has_exact_prox()) return g.prox(y, gamma);
    if (const auto* tv = dynamic_cast<const TotalVariation1D*>(&g))
        return tv1d_prox_direct(y, gamma * tv->lambda());
    const DualProxSolver* solver = g.dual_solver();
    if (!solver) throw std::logic_error(g.name() + ": no prox available");
    auto r = solver->solve(y, gamma, 1e-24 * std::max(1.0, y.squaredNorm()), warm_start);
    if (warm_start) *warm_start = r.u;
    return r.z;
}

// ---------------------------------------------------------------------------

CompositeProblem make_quadratic(Index n, const Vector& c, const std::optional<Vector>& curvature)
{
    if (n < 1) throw std::invalid_argument("quadratic: n must be >= 1");
    if (c.size() != n) throw std::invalid_argument("quadratic: c must have n entries");
    Vector a = curvature ? *curvature : Vector(Vector::Ones(n));
    if (a.size() != n) throw std::invalid_argument("quadratic: curvature must have n entries");
    CompositeProblem p;
    p.name = "quadratic";
    p.f = std::make_shared<DiagonalQuadratic>(std::move(a), c);
    p.g = std::make_shared<ZeroFunction>();
    p.reference = ReferenceSolution{c, 0.0, Provenance::analytic, 0.0, 0};
    return p;
}

CompositeProblem make_box_qp(Index n, const Vector& c, const Vector& lower, const Vector& upper,
                             const std::optional<Vector>& curvature)
{
    if (n < 1) throw std::invalid_argument("box_qp: n must be >= 1");
    if (c.size() != n || lower.size() != n || upper.size() != n)
        throw std::invalid_argument("box_qp: c, lower and upper must have n entries");
    Vector a = curvature ? *curvature : Vector(Vector::Ones(n));
    if (a.size() != n) throw std::invalid_argument("box_qp: curvature must have n entries");
    auto g = std::make_shared<BoxIndicator>(lower, upper);
    auto f = std::make_shared<DiagonalQuadratic>(std::move(a), c);
    CompositeProblem p;
    p.name = "box_qp";
    Vector xs = g->prox(c, 1.0);
    const double Fs = f->value(xs);
    p.f = f;
    p.g = g;
    p.reference = ReferenceSolution{std::move(xs), Fs, Provenance::analytic, 0.0, 0};
    return p;
}

Vector log_spaced_curvature(Index n, double decades)
{
    if (n < 1) throw std::invalid_argument("curvature: n must be >= 1");
    if (!(decades >= 0.0)) throw std::invalid_argument("curvature: decades must be >= 0");
    Vector a(n);
    for (Index i = 0; i < n; ++i) {
        const double frac = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        a[i] = std::pow(10.0, -0.5 * decades * frac);
    }
    return a;
}

namespace {

Matrix gaussian_design(Index m, Index n, Rng& rng)
{
    std::normal_distribution<double> nd;
    Matrix A(m, n);
    const double s = 1.0 / std::sqrt(static_cast<double>(m));
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < m; ++i) A(i, j) = s * nd(rng);
    return A;
}

}  // namespace

CompositeProblem make_lasso(const LassoSpec& spec)
{
    if (spec.m < 1 || spec.n < 1) throw std::invalid_argument("lasso: m and n must be >= 1");
    if (!(spec.lambda > 0.0)) throw std::invalid_argument("lasso: lambda must be positive");
    if (!(spec.column_decades >= 0.0)) throw std::invalid_argument("lasso: column_decades must be >= 0");
    auto rng = make_rng(spec.seed, Stream::problem_data);
    Matrix A = gaussian_design(spec.m, spec.n, rng);
    if (spec.column_decades > 0.0) {
        const Vector s = log_spaced_curvature(spec.n, spec.column_decades);
        for (Index j = 0; j < spec.n; ++j) A.col(j) *= s[j];
    }

    std::normal_distribution<double> nd;
    Vector x_true = Vector::Zero(spec.n);
    const Index nnz = std::max<Index>(1, static_cast<Index>(std::llround(spec.sparsity * spec.n)));
    std::vector<Index> idx(static_cast<std::size_t>(spec.n));
    for (Index i = 0; i < spec.n; ++i) idx[static_cast<std::size_t>(i)] = i;
    for (Index i = 0; i < nnz && i < spec.n; ++i) {
        std::uniform_int_distribution<Index> pick(i, spec.n - 1);
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
        x_true[idx[static_cast<std::size_t>(i)]] = nd(rng);
    }
    Vector b = A * x_true;
    for (Index i = 0; i < spec.m; ++i) b[i] += spec.noise * nd(rng);

    CompositeProblem p;
    p.name = "lasso";
    p.f = std::make_shared<LeastSquares>(std::move(A), std::move(b));
    p.g = std::make_shared<L1Norm>(spec.lambda);
    return p;
}

CompositeProblem make_tv1d(const Tv1dSpec& spec)
{
    if (spec.n < 2) throw std::invalid_argument("tv1d: n must be >= 2");
    if (spec.m < 1) throw std::invalid_argument("tv1d: m must be >= 1");
    if (!(spec.lambda > 0.0)) throw std::invalid_argument("tv1d: lambda must be positive");
    auto rng = make_rng(spec.seed, Stream::problem_data);
    Matrix A = gaussian_design(spec.m, spec.n, rng);

    std::normal_distribution<double> nd;
    Vector x_true(spec.n);
    const Index pieces = std::min<Index>(5, spec.n);
    for (Index s = 0; s < pieces; ++s) {
        const double level = nd(rng);
        const Index begin = s * spec.n / pieces, end = (s + 1) * spec.n / pieces;
        for (Index i = begin; i < end; ++i) x_true[i] = level;
    }
    Vector b = A * x_true;
    for (Index i = 0; i < spec.m; ++i) b[i] += spec.noise * nd(rng);

    CompositeProblem p;
    p.name = "tv1d";
    p.f = std::make_shared<LeastSquares>(std::move(A), std::move(b));
    p.g = std::make_shared<TotalVariation1D>(spec.lambda);
    return p;
}

// ---------------------------------------------------------------------------

ReferenceSolution reference_optimum(const CompositeProblem& problem, const ReferenceOptions& options)
{
    if (problem.reference && problem.reference->provenance == Provenance::analytic)
        return *problem.reference;
    if (!problem.has_exact_prox() && !problem.has_dual_solver())
        throw std::invalid_argument("reference_optimum: problem has neither prox nor dual solver");

    const Index n = problem.dim();
    const double gamma = 1.0 / problem.lipschitz();
    const auto& f = *problem.f;
    const auto& g = *problem.g;

    Vector x = Vector::Zero(n), x_prev = x, y = x, grad(n), best = x;
    Vector warm;
    double best_F = problem.objective(x);
    ParamSequence t(ParamFamily::critical());
    std::int64_t it = 0;

    for (; it < options.accelerated_iterations && it < options.max_iterations; ++it) {
        f.gradient(y, grad);
        x_prev = x;
        x = tight_prox(g, y - gamma * grad, gamma, &warm);
        const double b = beta(t.t(static_cast<std::size_t>(it)), t.t(static_cast<std::size_t>(it) + 1));
        y = x + b * (x - x_prev);
        const double F = problem.objective(x);
        if (!std::isfinite(F)) throw ReferenceError("reference run produced a non-finite objective");
        if (F < best_F) {
            best_F = F;
            best = x;
        }
    }

    x = best;
    double F_prev = best_F;
    double change = kInf;
    for (; it < options.max_iterations; ++it) {
        f.gradient(x, grad);
        x = tight_prox(g, x - gamma * grad, gamma, &warm);
        const double F = problem.objective(x);
        if (!std::isfinite(F)) throw ReferenceError("reference polish produced a non-finite objective");
        change = std::abs(F_prev - F) / std::max(1.0, std::abs(F));
        if (F < best_F) {
            best_F = F;
            best = x;
        }
        F_prev = F;
        if (change <= options.tol) break;
    }
    if (!(change <= options.tol)) {
        std::ostringstream os;
        os << "reference run did not reach tolerance " << options.tol << " within "
           << options.max_iterations << " iterations (last relative change " << change << ")";
        throw ReferenceError(os.str());
    }

    ReferenceSolution ref;
    ref.x_star = best;
    ref.F_star = problem.objective(best);
    ref.provenance = Provenance::high_precision_run;
    ref.tolerance = change;
    ref.iterations = it + 1;
    return ref;
}

}  // namespace ifista
