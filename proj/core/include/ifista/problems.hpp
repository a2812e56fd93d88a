#pragma once

// Composite problems F = f + g in finite-dimensional Euclidean space.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "ifista/types.hpp"

namespace ifista {

/// Smooth convex part f with L-Lipschitz gradient.
class SmoothPart {
public:
    virtual ~SmoothPart() = default;
    virtual Index dim() const = 0;
    virtual double value(const Vector& x) const = 0;
    virtual void gradient(const Vector& x, Vector& out) const = 0;
    virtual double lipschitz() const = 0;

    /// f(x) - f(p), evaluated in a form that avoids cancellation when possible.
    virtual double value_difference(const Vector& x, const Vector& p) const
    {
        return value(x) - value(p);
    }

    Vector gradient(const Vector& x) const
    {
        Vector g(dim());
        gradient(x, g);
        return g;
    }
};

struct DualSolveResult {
    Vector z;         // primal point recovered from the dual iterate
    Vector u;         // dual iterate
    double gap = kInf;
    std::int64_t iterations = 0;
};

/// Gap-certified iterative solver for prox_{gamma g}(y).
class DualProxSolver {
public:
    virtual ~DualProxSolver() = default;

    /// Runs until the primal-dual gap is <= target_gap. On reaching the cap,
    /// throws InnerSolverCapError carrying the best gap seen.
    virtual DualSolveResult solve(const Vector& y, double gamma, double target_gap,
                                  const Vector* warm_start = nullptr,
                                  std::int64_t max_iterations = 1'000'000) const = 0;

    /// Primal-dual gap of the Moreau problem at a given dual point.
    virtual double gap_at(const Vector& y, double gamma, const Vector& u) const = 0;
};

/// Nonsmooth convex part g, possibly extended-valued.
class NonsmoothPart {
public:
    virtual ~NonsmoothPart() = default;

    /// g(x); +inf outside the domain.
    virtual double value(const Vector& x) const = 0;

    /// g(z) - g(p) accumulated termwise. Infinite when z leaves the domain.
    virtual double value_difference(const Vector& z, const Vector& p) const
    {
        return value(z) - value(p);
    }

    virtual bool has_exact_prox() const { return false; }
    virtual void prox(const Vector& y, double gamma, Vector& out) const;

    Vector prox(const Vector& y, double gamma) const
    {
        Vector out(y.size());
        prox(y, gamma, out);
        return out;
    }

    /// gamma g(z) + (gamma g)^*(w) - <z, w>, which is >= 0 and vanishes iff
    /// w lies in the subdifferential of gamma g at z. Infinite when w is outside
    /// the conjugate's domain. Returns nullopt when the conjugate is not available.
    virtual std::optional<double> fenchel_young_gap(const Vector& z, const Vector& w,
                                                    double gamma) const
    {
        (void)z, (void)w, (void)gamma;
        return std::nullopt;
    }

    /// Gap-certified inner solver for problems without a closed-form prox.
    virtual const DualProxSolver* dual_solver() const { return nullptr; }

    virtual std::string name() const = 0;
};

enum class Provenance { analytic, high_precision_run };
std::string to_string(Provenance p);

struct ReferenceSolution {
    Vector x_star;
    double F_star = 0.0;
    Provenance provenance = Provenance::analytic;
    double tolerance = 0.0;  // achieved relative change at termination
    std::int64_t iterations = 0;
};

struct CompositeProblem {
    std::string name;
    std::shared_ptr<const SmoothPart> f;
    std::shared_ptr<const NonsmoothPart> g;
    std::optional<ReferenceSolution> reference;

    Index dim() const { return f->dim(); }
    double lipschitz() const { return f->lipschitz(); }
    double objective(const Vector& x) const { return f->value(x) + g->value(x); }
    bool has_exact_prox() const { return g->has_exact_prox(); }
    bool has_dual_solver() const { return g->dual_solver() != nullptr; }

    /// F(x) - F(x_star) evaluated with smooth and nonsmooth differences taken
    /// separately. Requires a reference.
    double gap(const Vector& x) const;
};

// Smooth parts ------------------------------------------------------------

/// f(x) = 1/2 || a .* (x - c) ||^2.
class DiagonalQuadratic final : public SmoothPart {
public:
    DiagonalQuadratic(Vector a, Vector c);
    Index dim() const override { return c_.size(); }
    double value(const Vector& x) const override;
    double value_difference(const Vector& x, const Vector& p) const override;
    using SmoothPart::gradient;
    void gradient(const Vector& x, Vector& out) const override;
    double lipschitz() const override { return L_; }
    const Vector& curvature() const { return a_; }
    const Vector& center() const { return c_; }

private:
    Vector a_, a2_, c_;
    double L_;
};

/// f(x) = 1/2 || A x - b ||^2.
class LeastSquares final : public SmoothPart {
public:
    LeastSquares(Matrix A, Vector b);
    Index dim() const override { return A_.cols(); }
    double value(const Vector& x) const override;
    double value_difference(const Vector& x, const Vector& p) const override;
    using SmoothPart::gradient;
    void gradient(const Vector& x, Vector& out) const override;
    double lipschitz() const override { return L_; }
    const Matrix& A() const { return A_; }
    const Vector& b() const { return b_; }

private:
    Matrix A_;
    Vector b_;
    double L_;
};

struct PowerIterationResult {
    double value = 0.0;
    double relative_error = kInf;
    int iterations = 0;
};

/// Largest eigenvalue of A^T A by power iteration. Stops when the residual
/// based error bound falls below rel_tol relative to the estimate.
PowerIterationResult largest_eigenvalue_gram(const Matrix& A, double rel_tol = 1e-10,
                                             int max_iterations = 10'000,
                                             std::uint64_t seed = 0);

// Nonsmooth parts ---------------------------------------------------------

class ZeroFunction final : public NonsmoothPart {
public:
    double value(const Vector&) const override { return 0.0; }
    double value_difference(const Vector&, const Vector&) const override { return 0.0; }
    bool has_exact_prox() const override { return true; }
    using NonsmoothPart::prox;
    void prox(const Vector& y, double gamma, Vector& out) const override;
    std::optional<double> fenchel_young_gap(const Vector& z, const Vector& w,
                                            double gamma) const override;
    std::string name() const override { return "zero"; }
};

/// g(x) = lambda ||x||_1.
class L1Norm final : public NonsmoothPart {
public:
    explicit L1Norm(double lambda);
    double lambda() const { return lambda_; }
    double value(const Vector& x) const override;
    double value_difference(const Vector& z, const Vector& p) const override;
    bool has_exact_prox() const override { return true; }
    using NonsmoothPart::prox;
    void prox(const Vector& y, double gamma, Vector& out) const override;
    std::optional<double> fenchel_young_gap(const Vector& z, const Vector& w,
                                            double gamma) const override;
    std::string name() const override { return "l1"; }

private:
    double lambda_;
};

/// Indicator of the box [lower, upper].
class BoxIndicator final : public NonsmoothPart {
public:
    BoxIndicator(Vector lower, Vector upper);
    const Vector& lower() const { return lo_; }
    const Vector& upper() const { return hi_; }
    double value(const Vector& x) const override;
    double value_difference(const Vector& z, const Vector& p) const override;
    bool has_exact_prox() const override { return true; }
    using NonsmoothPart::prox;
    void prox(const Vector& y, double gamma, Vector& out) const override;
    std::optional<double> fenchel_young_gap(const Vector& z, const Vector& w,
                                            double gamma) const override;
    std::string name() const override { return "box"; }

private:
    Vector lo_, hi_;
};

/// Projected gradient ascent on the dual of the 1-D total-variation prox.
class TvDualSolver final : public DualProxSolver {
public:
    explicit TvDualSolver(double lambda) : lambda_(lambda) {}
    DualSolveResult solve(const Vector& y, double gamma, double target_gap,
                          const Vector* warm_start = nullptr,
                          std::int64_t max_iterations = 1'000'000) const override;
    double gap_at(const Vector& y, double gamma, const Vector& u) const override;

private:
    double lambda_;
};

/// g(x) = lambda sum_i |x_{i+1} - x_i|.
class TotalVariation1D final : public NonsmoothPart {
public:
    explicit TotalVariation1D(double lambda);
    double lambda() const { return lambda_; }
    double value(const Vector& x) const override;
    double value_difference(const Vector& z, const Vector& p) const override;
    const DualProxSolver* dual_solver() const override { return &solver_; }
    std::string name() const override { return "tv1d"; }

private:
    double lambda_;
    TvDualSolver solver_;
};

/// Exact prox of gamma * lambda * TV by the taut-string direct algorithm.
/// Used for reference runs and as an independent oracle.
Vector tv1d_prox_direct(const Vector& y, double threshold);

/// D x with (D x)_i = x_{i+1} - x_i, and its adjoint.
Vector tv_forward_difference(const Vector& x);
Vector tv_adjoint(const Vector& u, Index n);

// Factories ---------------------------------------------------------------

/// Diagonal quadratic with g = 0. When curvature is absent the identity is used.
CompositeProblem make_quadratic(Index n, const Vector& c,
                                const std::optional<Vector>& curvature = std::nullopt);

CompositeProblem make_box_qp(Index n, const Vector& c, const Vector& lower, const Vector& upper,
                             const std::optional<Vector>& curvature = std::nullopt);

/// Curvature entries log-spaced so that a_i^2 ranges over [10^-decades, 1].
Vector log_spaced_curvature(Index n, double decades);

struct LassoSpec {
    Index m = 100;
    Index n = 50;
    std::uint64_t seed = 0;
    double lambda = 0.1;
    double noise = 0.1;
    double sparsity = 0.2;       // fraction of nonzeros in the planted signal
    double column_decades = 0.0; // column scaling spread, 0 keeps the Gaussian design
};

/// f = 1/2 ||A x - b||^2 with a seeded Gaussian design, g = lambda ||x||_1.
/// No reference is attached; see reference_optimum.
CompositeProblem make_lasso(const LassoSpec& spec);

struct Tv1dSpec {
    Index m = 60;
    Index n = 50;
    std::uint64_t seed = 0;
    double lambda = 0.1;
    double noise = 0.1;
};

/// f = 1/2 ||A x - b||^2 with a piecewise-constant planted signal, g = lambda TV(x).
CompositeProblem make_tv1d(const Tv1dSpec& spec);

struct ReferenceOptions {
    double tol = 1e-12;
    std::int64_t accelerated_iterations = 20'000;
    std::int64_t max_iterations = 1'000'000;
};

/// Trusted minimizer. Analytic problems return their closed form; others run
/// exact FISTA then proximal-gradient polishing until successive objective
/// values differ by at most tol * max(1, |F|). Throws ReferenceError otherwise.
ReferenceSolution reference_optimum(const CompositeProblem& problem,
                                    const ReferenceOptions& options = {});

/// Exact or tightly solved prox used by reference runs.
Vector tight_prox(const NonsmoothPart& g, const Vector& y, double gamma,
                  Vector* warm_start = nullptr);

}  // namespace ifista
