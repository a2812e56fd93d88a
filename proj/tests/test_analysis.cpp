#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include <ifista/analysis.hpp>
#include <ifista/random.hpp>
#include <ifista/solvers.hpp>

#include "support/instances.hpp"

using namespace ifista;

TEST(Bihari, NoCouplingGivesSqrtSigma)
{
    const std::vector<double> l = {0, 0, 0}, s = {1, 4, 9};
    const auto b = bihari_bound(l, s);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_DOUBLE_EQ(b.tight[k], std::sqrt(s[k]));
        EXPECT_DOUBLE_EQ(b.loose[k], std::sqrt(s[k]));
    }
}

TEST(Bihari, LooseFormExample)
{
    const std::vector<double> l = {1, 1, 1}, s = {0, 0, 0};
    EXPECT_DOUBLE_EQ(bihari_bound(l, s).loose[2], 3.0);
}

TEST(Bihari, ExtremalSequencesRespectBound)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::uint64_t i = 0; i < 200; ++i) {
        auto rng = make_rng(41, Stream::lemma_instances, i);
        std::vector<double> l(50), s(50);
        double acc = u(rng);
        for (std::size_t k = 0; k < 50; ++k) {
            l[k] = 0.5 * u(rng);
            acc += u(rng);
            s[k] = acc;
        }
        const auto mu = bihari_extremal(l, s);
        const auto b = bihari_bound(l, s);
        double m = 0.0;
        for (std::size_t k = 0; k < 50; ++k) {
            m = std::max(m, std::sqrt(mu[k]));
            EXPECT_LE(m, b.tight[k] * (1 + 1e-12));
            EXPECT_LE(b.tight[k], b.loose[k]);
        }
    }
}

TEST(Bihari, RejectsBadInput)
{
    const std::vector<double> l = {1, -1}, s = {1, 2}, dec = {2, 1}, ok = {1, 1};
    EXPECT_THROW(bihari_bound(l, s), std::invalid_argument);
    EXPECT_THROW(bihari_bound(ok, dec), std::invalid_argument);
}

TEST(Recurrence, ErrorFreeDecrease)
{
    const std::vector<double> z(5, 0.0);
    const auto b = recurrence_bound(3.0, z, z);
    const auto a = recurrence_extremal(3.0, z, z);
    for (std::size_t k = 0; k < 5; ++k) {
        EXPECT_DOUBLE_EQ(b.value[k], (10.0 / 9.0) * 3.0);
        EXPECT_LE(a[k + 1], 3.0);
    }
}

TEST(Recurrence, ClosedFormExample)
{
    const std::vector<double> l(10, 0.1), x(10, 0.0);
    EXPECT_NEAR(recurrence_bound(1.0, l, x).value[9], 10.0 / 9.0 + 1.0, 1e-14);
    EXPECT_NEAR(recurrence_bound(1.0, l, x).value_valid[9], 3.0, 1e-14);
}

TEST(Recurrence, TenNinthsFormFailsOnOneStep)
{
    // alpha_1 = alpha_0 + sqrt(alpha_1) with alpha_0 = 1 gives the squared golden ratio
    const std::vector<double> l = {1.0}, x = {0.0};
    const auto a = recurrence_extremal(1.0, l, x);
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    EXPECT_NEAR(a[1], golden * golden, 1e-14);
    const auto b = recurrence_bound(1.0, l, x);
    EXPECT_GT(a[1], b.value[0]);
    EXPECT_LE(a[1], b.value_valid[0]);
    EXPECT_LE(std::sqrt(a[1]), b.max_sqrt[0] + 1e-15);
}

TEST(Recurrence, ValidFormsHoldOnRandomInstances)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::uint64_t i = 0; i < 300; ++i) {
        auto rng = make_rng(42, Stream::lemma_instances, i);
        const std::size_t n = 1 + i % 80;
        std::vector<double> l(n), x(n);
        for (std::size_t k = 0; k < n; ++k) {
            l[k] = u(rng);
            x[k] = 0.1 * u(rng);
        }
        const double a0 = 2.0 * u(rng);
        const auto a = recurrence_extremal(a0, l, x);
        const auto b = recurrence_bound(a0, l, x);
        const auto c = recurrence_bound_via_bihari(a0, l, x);
        double m = std::sqrt(a0), m_shift = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            m = std::max(m, std::sqrt(a[k + 1]));
            m_shift = std::max(m_shift, std::sqrt(a[k + 1]));
            EXPECT_LE(a[k + 1], b.value_valid[k] * (1 + 1e-12));
            EXPECT_LE(m, b.max_sqrt[k] * (1 + 1e-12));
            EXPECT_LE(m_shift, c[k] * (1 + 1e-12));
        }
    }
}

TEST(Cesaro, ConstantInputConverges)
{
    const std::size_t n = 2000;
    std::vector<double> l(n), b(n, 3.0);
    for (std::size_t k = 0; k < n; ++k) l[k] = static_cast<double>(k + 1);
    const auto a = cesaro_reconstruct(-5.0, l, b);
    EXPECT_NEAR(a.back(), 3.0, 1e-2);
    EXPECT_LT(std::abs(a.back() - 3.0), std::abs(a[10] - 3.0));
}

TEST(Cesaro, RoundTripLinearWeights)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto rng = make_rng(43, Stream::lemma_instances);
    const std::size_t n = 200;
    std::vector<double> a(n), l(n);
    a[0] = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (k) a[k] = u(rng);
        l[k] = static_cast<double>(k + 1);
    }
    const auto b = cesaro_perturbation(a, l);
    const auto back = cesaro_reconstruct(0.0, l, b);
    const auto fwd = cesaro_unroll(0.0, l, b);
    for (std::size_t k = 0; k < n; ++k) {
        EXPECT_NEAR(back[k], a[k], 1e-10);
        EXPECT_NEAR(fwd[k], a[k], 1e-10);
    }
}

TEST(Cesaro, RoundTripWithSummableReciprocals)
{
    const std::size_t n = 40;
    std::vector<double> a(n), l(n);
    for (std::size_t k = 0; k < n; ++k) {
        a[k] = k % 2 ? 1.0 : -1.0;  // does not converge
        l[k] = std::ldexp(1.0, static_cast<int>(k));
    }
    const auto back = cesaro_reconstruct(a[0], l, cesaro_perturbation(a, l));
    for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(back[k], a[k], 1e-10);
}

TEST(Drift, ZeroEpsilon)
{
    const std::vector<double> a = {5, 4, 4, 2, 1}, e(4, 0.0);
    const auto r = summable_drift_converges(a, e);
    EXPECT_TRUE(r.hypothesis_ok);
    EXPECT_TRUE(r.is_quasi_monotone);
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_DOUBLE_EQ(r.u[k], a[k]);
}

TEST(Drift, AlternatingHarmonicSquares)
{
    const std::size_t n = 5000;
    std::vector<double> a(n), e(n);
    a[0] = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double kk = static_cast<double>(k + 1);
        e[k] = 1.0 / (kk * kk);
        if (k + 1 < n) a[k + 1] = a[k] + (k % 2 ? -1.0 : 1.0) / (kk * kk);
    }
    const auto r = summable_drift_converges(a, e);
    EXPECT_TRUE(r.hypothesis_ok);
    EXPECT_TRUE(r.is_quasi_monotone);
    EXPECT_LT(r.tail_oscillation, 1e-6);
}

TEST(Drift, DetectsHypothesisViolation)
{
    const std::vector<double> a = {1.0, 1.5, 1.2}, e = {0.1, 0.1};
    const auto r = summable_drift_converges(a, e);
    EXPECT_FALSE(r.hypothesis_ok);
    EXPECT_EQ(r.first_violation.value(), 0u);
}

TEST(RateFit, ExactPowerLaw)
{
    std::vector<double> r(10'001);
    r[0] = 1.0;
    for (std::size_t k = 1; k < r.size(); ++k) r[k] = 1.0 / (static_cast<double>(k) * static_cast<double>(k));
    const auto fit = rate_fit(r, 100, 10'000);
    EXPECT_NEAR(fit.slope, -2.0, 1e-6);
    EXPECT_NEAR(fit.intercept, 0.0, 1e-6);
    EXPECT_EQ(fit.clipped, 0u);
}

TEST(RateFit, ClipsZerosAndValidatesWindow)
{
    std::vector<double> r(200, 0.0);
    const auto fit = rate_fit(r, 10, 199);
    EXPECT_EQ(fit.clipped, fit.points);
    EXPECT_THROW(rate_fit(r, 0, 100), std::invalid_argument);
    EXPECT_THROW(rate_fit(r, 50, 40), std::invalid_argument);
    EXPECT_THROW(rate_fit(r, 10, 200), std::invalid_argument);
}

TEST(RateFit, ExactFistaOnLasso)
{
    const auto p = testbed::slow_lasso();
    DeterministicConfig cfg;
    cfg.gamma = 1.0 / p.lipschitz();
    cfg.max_iters = 10'001;
    const auto fit = rate_fit(run_inexact_fista(p, cfg), 100, 10'000);
    EXPECT_EQ(fit.clipped, 0u);
    EXPECT_LE(fit.slope, -1.9);
}

TEST(RateFit, HalfPowerFamily)
{
    const auto p = testbed::slow_lasso();
    DeterministicConfig cfg;
    cfg.gamma = 1.0 / p.lipschitz();
    cfg.params = ParamSequence(ParamFamily::power(0.5));
    cfg.max_iters = 10'001;
    const auto fit = rate_fit(run_inexact_fista(p, cfg), 100, 10'000);
    EXPECT_LE(fit.slope, -0.9);
}

TEST(Feasibility, StochasticConditions)
{
    const auto strict = schedule_feasibility(1.0, 3.0, 1.75, 0.0);
    EXPECT_TRUE(strict.iterate_convergence_guaranteed);
    EXPECT_DOUBLE_EQ(strict.predicted_rate_exponent, 0.25);

    // boundary q = alpha + 1/2 needs r > 1/2
    EXPECT_FALSE(schedule_feasibility(1.0, 3.0, 1.5, 0.5).iterate_convergence_guaranteed);
    EXPECT_TRUE(schedule_feasibility(1.0, 3.0, 1.5, 0.75).iterate_convergence_guaranteed);
    const auto half = schedule_feasibility(1.0, 3.0, 1.5, 0.5);
    EXPECT_DOUBLE_EQ(half.predicted_rate_exponent, 0.5);
    EXPECT_DOUBLE_EQ(half.log_power, 0.5);

    EXPECT_FALSE(schedule_feasibility(1.0, 3.0, 2.0, 1.0).iterate_convergence_guaranteed);
    EXPECT_FALSE(schedule_feasibility(1.0, 1.9, 1.75, 0.0).iterate_convergence_guaranteed);
}

TEST(Feasibility, DeterministicConditions)
{
    EXPECT_TRUE(schedule_feasibility(0.5, 1.6, 0.0, 0.0).deterministic_condition);
    EXPECT_FALSE(schedule_feasibility(1.0, 1.5, 0.0, 0.0).deterministic_condition);
    EXPECT_TRUE(schedule_feasibility(1.0, 1.6, 0.0, 0.0).weak_condition);
    EXPECT_FALSE(schedule_feasibility(1.0, 1.4, 0.0, 0.0).weak_condition);
    EXPECT_THROW(schedule_feasibility(0.0, 2.0, 0.0, 0.0), std::invalid_argument);
    EXPECT_THROW(schedule_feasibility(1.0, -1.0, 0.0, 0.0), std::invalid_argument);
}
