#include <cmath>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include <ifista/solvers.hpp>

#include "support/instances.hpp"

using namespace ifista;

namespace {

DeterministicConfig exact_config(const CompositeProblem& p, std::size_t iters)
{
    DeterministicConfig cfg;
    cfg.gamma = 1.0 / p.lipschitz();
    cfg.max_iters = iters;
    return cfg;
}

void expect_same_trace(const SolverTrace& a, const SolverTrace& b)
{
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
        EXPECT_EQ(a.rows[k].F_gap, b.rows[k].F_gap) << "k = " << k;
        EXPECT_EQ(a.rows[k].energy, b.rows[k].energy) << "k = " << k;
    }
    EXPECT_EQ(a.final_x, b.final_x);
}

}  // namespace

TEST(InexactFista, ConstantOneIsMonotoneGradientDescent)
{
    auto rng = make_rng(31, Stream::problem_data);
    const auto p = make_quadratic(30, random_gaussian(30, rng), log_spaced_curvature(30, 4.0));
    auto cfg = exact_config(p, 500);
    cfg.params = ParamSequence(ParamFamily::constant_one());
    const auto tr = run_inexact_fista(p, cfg);
    ASSERT_EQ(tr.rows.size(), 500u);
    for (std::size_t k = 1; k < tr.rows.size(); ++k) EXPECT_LE(tr.rows[k].F_gap, tr.rows[k - 1].F_gap);
}

TEST(InexactFista, ExactRunMeetsClassicalRate)
{
    const auto p = testbed::standard_box_qp();
    const auto cfg = exact_config(p, 10'001);
    const auto tr = run_inexact_fista(p, cfg);
    for (const auto& row : tr.rows) {
        const double kk = static_cast<double>(row.k) + 1.0;
        EXPECT_LE(row.F_gap, 2.0 * tr.initial_dist2 / (cfg.gamma * kk * kk)) << "k = " << row.k;
    }
}

TEST(InexactFista, ExactEnergyIsNonincreasing)
{
    const auto p = testbed::standard_box_qp();
    const auto tr = run_inexact_fista(p, exact_config(p, 2000));
    EXPECT_DOUBLE_EQ(tr.rows[0].energy, tr.initial_dist2);
    for (std::size_t k = 1; k < tr.rows.size(); ++k)
        EXPECT_LE(tr.rows[k].energy, tr.rows[k - 1].energy * (1 + 1e-12) + 1e-15) << "k = " << k;
}

TEST(InexactFista, ErrorsStayBelowBound)
{
    const auto p = testbed::standard_lasso();
    auto cfg = exact_config(p, 3000);
    cfg.delta = ErrorSchedule::power(1.0, 2.5);
    cfg.b = {ErrorSchedule::power(1.0, 2.5), ErrorDirection::seeded, 3};
    for (auto mode : {BoundMode::conservative, BoundMode::certified}) {
        cfg.bound_mode = mode;
        const auto tr = run_inexact_fista(p, cfg);
        for (std::size_t k = 1; k < tr.rows.size(); ++k)
            EXPECT_LE(tr.rows[k].F_gap, tr.rows[k].bound_rhs) << "k = " << k << " " << to_string(mode);
    }
}

TEST(InexactFista, WeakDualModeOnTv)
{
    const auto p = testbed::standard_tv();
    auto cfg = exact_config(p, 2000);
    cfg.delta = ErrorSchedule::power(1.0, 1.6);
    cfg.weak = true;
    const auto tr = run_inexact_fista(p, cfg);
    for (std::size_t k = 1; k < tr.rows.size(); ++k) {
        EXPECT_LE(tr.rows[k].F_gap, tr.rows[k].bound_rhs) << "k = " << k;
        EXPECT_EQ(tr.rows[k].delta2, 0.0);
    }
}

TEST(InexactFista, StepAboveInverseLipschitzRejected)
{
    const auto p = testbed::standard_box_qp();
    auto cfg = exact_config(p, 10);
    cfg.gamma = 1.5 / p.lipschitz();
    EXPECT_THROW(run_inexact_fista(p, cfg), std::invalid_argument);
    cfg.gamma = 0.0;
    EXPECT_THROW(run_inexact_fista(p, cfg), std::invalid_argument);
}

TEST(InexactFista, DivergenceGuard)
{
    const auto p = testbed::standard_lasso();
    auto cfg = exact_config(p, 1000);
    cfg.b = {ErrorSchedule::power(1e8, 0.0), ErrorDirection::fixed_unit, 0};
    EXPECT_THROW(run_inexact_fista(p, cfg), DivergenceError);
}

TEST(InexactFista, InnerCapPropagates)
{
    const auto p = testbed::standard_tv();
    auto cfg = exact_config(p, 50);
    cfg.delta = ErrorSchedule::power(1e-9, 3.0);
    cfg.inner_cap = 5;
    EXPECT_THROW(run_inexact_fista(p, cfg), InnerSolverCapError);
}

TEST(InexactFista, StoredPointsAndAuxiliarySequence)
{
    const auto p = testbed::standard_box_qp();
    auto cfg = exact_config(p, 100);
    cfg.store_points = true;
    ParamSequence t(ParamFamily::critical());
    const auto tr = run_inexact_fista(p, cfg);
    ASSERT_EQ(tr.x.size(), 101u);
    EXPECT_EQ(tr.v[0], tr.x[0]);
    for (std::size_t k = 0; k < 100; ++k) {
        const Vector v = tr.x[k] + t.t(k) * (tr.x[k + 1] - tr.x[k]);
        EXPECT_LE((v - tr.v[k + 1]).norm(), 1e-12 * (1 + v.norm()));
    }
}

TEST(Baseline, MatchesConstantOneFista)
{
    const auto p = testbed::standard_lasso();
    auto cfg = exact_config(p, 300);
    cfg.delta = ErrorSchedule::power(1e-2, 2.0);
    const auto base = run_proximal_gradient(p, cfg);
    cfg.params = ParamSequence(ParamFamily::constant_one());
    expect_same_trace(base, run_inexact_fista(p, cfg));
    for (const auto& row : base.rows) EXPECT_EQ(row.t, 1.0);
}

TEST(Stochastic, NoiselessReducesToDeterministic)
{
    const auto p = testbed::standard_box_qp();
    StochasticConfig sc;
    sc.step = {1.0 / p.lipschitz(), 0.0, 0.0};
    sc.max_iters = 500;
    sc.replications = 2;
    sc.delta = ErrorSchedule::power(1e-2, 2.5);
    const auto res = run_stochastic_fista(p, sc);
    auto dc = exact_config(p, 500);
    dc.delta = sc.delta;
    const auto det = run_inexact_fista(p, dc);
    for (const auto& rep : res.replications) expect_same_trace(rep, det);
}

TEST(Stochastic, ReplicationDeterminism)
{
    const auto p = testbed::standard_box_qp();
    StochasticConfig sc;
    sc.step = {1.0 / p.lipschitz(), 1.5, 0.5};
    sc.noise = {0.1, NoiseFamily::sphere};
    sc.max_iters = 300;
    sc.replications = 6;
    sc.seed = 77;
    sc.workers = 1;
    const auto a = run_stochastic_fista(p, sc);
    sc.workers = 4;
    const auto b = run_stochastic_fista(p, sc);
    ASSERT_EQ(a.aggregate.size(), b.aggregate.size());
    for (std::size_t k = 0; k < a.aggregate.size(); ++k) {
        EXPECT_EQ(a.aggregate[k].mean_gap, b.aggregate[k].mean_gap);
        EXPECT_EQ(a.aggregate[k].se_gap, b.aggregate[k].se_gap);
    }
    EXPECT_NE(a.replications[0].final_x, a.replications[1].final_x);
}

TEST(Stochastic, MeanGapBelowExpectationBound)
{
    const auto p = testbed::standard_box_qp();
    StochasticConfig sc;
    sc.step = {1.0 / p.lipschitz(), 1.5, 0.5};
    sc.noise = {0.1, NoiseFamily::sphere};
    sc.delta = ErrorSchedule::power(1e-2, 2.5);
    sc.max_iters = 1000;
    sc.replications = 64;
    sc.seed = 5;
    const auto res = run_stochastic_fista(p, sc);
    for (std::size_t k = 1; k < res.aggregate.size(); ++k) {
        const auto& row = res.aggregate[k];
        EXPECT_LE(row.mean_gap - 3.0 * row.se_gap, row.bound_rhs) << "k = " << k;
    }
}

TEST(StepSchedule, NonincreasingAndCapped)
{
    StepSchedule s{2.0, 1.5, 0.5};
    const auto g = s.values(1000, 1.0);
    EXPECT_EQ(g[0], 1.0);
    for (std::size_t k = 1; k < g.size(); ++k) EXPECT_LE(g[k], g[k - 1]);
    EXPECT_NEAR(g[100], 2.0 / (std::pow(100.0, 1.5) * std::sqrt(1.0 + std::log(100.0))), 1e-15);
    EXPECT_THROW((StepSchedule{-1.0, 0.0, 0.0}.validate()), std::invalid_argument);
}

TEST(Energy, InitialValueAndStationaryStart)
{
    auto rng = make_rng(32, Stream::problem_data);
    const Vector c = random_gaussian(10, rng);
    const auto p = make_quadratic(10, c, log_spaced_curvature(10, 2.0));
    auto cfg = exact_config(p, 50);
    const auto tr = run_inexact_fista(p, cfg);
    EXPECT_EQ(tr.rows[0].energy, c.squaredNorm());

    cfg.x0 = c;
    const auto still = run_inexact_fista(p, cfg);
    for (const auto& row : still.rows) EXPECT_EQ(row.energy, 0.0);

    const Vector v = Vector::Ones(3), xs = Vector::Zero(3);
    EXPECT_DOUBLE_EQ(energy(0.5, 2.0, 0.25, v, xs), 2 * 0.5 * 4.0 * 0.25 + 3.0);
}

TEST(TheoremBound, ZeroErrors)
{
    const std::vector<double> t = {1.0, 1.6, 2.1}, z = {0.0, 0.0, 0.0};
    DeterministicBoundInputs in{2.0, 0.5, t, z, z, z};
    EXPECT_DOUBLE_EQ(theorem_bound_deterministic(3, in), (10.0 / 9.0) * 2.0 / (2 * 0.5 * 2.1 * 2.1));
    in.initial_dist2 = 0.0;
    EXPECT_EQ(theorem_bound_deterministic(3, in), 0.0);
    EXPECT_THROW(theorem_bound_deterministic(0, in), std::invalid_argument);
}

TEST(TheoremBound, HandComputedFirstStep)
{
    const double R = 0.7, gamma = 0.25, d1 = 0.03, d2 = 0.02, b = 0.1;
    const std::vector<double> t = {1.0}, v1 = {d1}, v2 = {d2}, vb = {b};
    const DeterministicBoundInputs in{R, gamma, t, v1, v2, vb};
    // (1/(2*0.25)) [ (10/9)(0.7 + 0.0009) + 4 (0.02 + 0.025)^2 ]
    const double expected = 2.0 * ((10.0 / 9.0) * 0.7009 + 4.0 * 0.045 * 0.045);
    EXPECT_NEAR(theorem_bound_deterministic(1, in), expected, 1e-14);
}

TEST(TheoremBound, StochasticReducesToDeterministic)
{
    const std::vector<double> t = {1.0, 1.6, 2.1}, z = {0.0, 0.0, 0.0}, g = {0.5, 0.5, 0.5, 0.5};
    const std::vector<double> d1 = {0.1, 0.05, 0.02}, d2 = {0.03, 0.01, 0.0};
    const StochasticBoundInputs s{1.3, 0.0, g, t, z, d1, d2};
    const DeterministicBoundInputs d{1.3, 0.5, t, d1, d2, z};
    EXPECT_DOUBLE_EQ(theorem_bound_stochastic(3, s), theorem_bound_deterministic(3, d));
}

TEST(TheoremBound, StochasticHandComputedFirstStep)
{
    const std::vector<double> t = {1.0}, g = {0.5, 0.4}, delta = {0.1}, d1 = {0.06}, d2 = {0.08};
    const StochasticBoundInputs s{2.0, 0.3, g, t, delta, d1, d2};
    const double inner = 2.0 + 2 * 0.5 * 0.1 * 0.3 + 2 * 0.09 * 0.25 + 0.0036;
    const double expected = ((10.0 / 9.0) * inner + 4 * 0.0064) / (2 * 0.4);
    EXPECT_NEAR(theorem_bound_stochastic(1, s), expected, 1e-14);
}

TEST(TailOscillation, ShrinksForExactRun)
{
    const auto p = testbed::standard_box_qp();
    auto cfg = exact_config(p, 2001);
    cfg.store_points = true;
    const auto tr = run_inexact_fista(p, cfg);
    EXPECT_LT(tail_oscillation(tr, 2000), tail_oscillation(tr, 200));
}
