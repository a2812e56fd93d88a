#include "ifista_app/suites.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include <ifista/analysis.hpp>
#include <ifista/inexact.hpp>
#include <ifista/problems.hpp>
#include <ifista/random.hpp>

namespace ifista::app {

namespace {

void record(SuiteCheck& c, double excess)
{
    c.worst = std::max(c.worst, excess);
    if (excess > c.tolerance) ++c.failures;
}

}  // namespace

std::vector<SuiteCheck> run_lemma_suite(std::uint64_t seed, std::size_t instances)
{
    SuiteCheck bihari{"bihari_lasalle_tight", instances, 0, -kInf, 1e-9};
    SuiteCheck bihari_order{"bihari_lasalle_tight_le_loose", instances, 0, -kInf, 0.0};
    SuiteCheck rec{"recurrence_10_9_form", instances, 0, -kInf, 1e-9};
    SuiteCheck rec_valid{"recurrence_constant_2_form", instances, 0, -kInf, 1e-9};
    SuiteCheck rec_sqrt{"recurrence_max_sqrt", instances, 0, -kInf, 1e-9};
    SuiteCheck rec_cross{"recurrence_via_bihari", instances, 0, -kInf, 1e-9};
    SuiteCheck cesaro{"weighted_average_round_trip", instances / 2, 0, 0.0, 1e-10};

    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t inst = 0; inst < instances; ++inst) {
        auto rng = make_rng(seed, Stream::lemma_instances, inst);
        const int n = std::uniform_int_distribution<int>(1, 200)(rng);
        const double lscale = std::pow(10.0, -3.0 + 3.0 * u(rng));
        std::vector<double> lambdas(n), sigmas(n), xis(n);
        double s = 2.0 * u(rng);
        for (int i = 0; i < n; ++i) {
            lambdas[i] = u(rng) < 0.2 ? 0.0 : lscale * u(rng);
            s += u(rng) < 0.3 ? 0.0 : u(rng);
            sigmas[i] = s;
            xis[i] = u(rng) < 0.3 ? 0.0 : 0.1 * u(rng);
        }

        const auto mu = bihari_extremal(lambdas, sigmas);
        const auto bb = bihari_bound(lambdas, sigmas);
        double run_max = 0.0, worst_b = -kInf, worst_order = -kInf;
        for (int k = 0; k < n; ++k) {
            run_max = std::max(run_max, std::sqrt(mu[k]));
            worst_b = std::max(worst_b, run_max - bb.tight[k]);
            worst_order = std::max(worst_order, bb.tight[k] - bb.loose[k]);
        }
        record(bihari, worst_b);
        record(bihari_order, worst_order);

        const double a0 = 3.0 * u(rng);
        const auto alpha = recurrence_extremal(a0, lambdas, xis);
        const auto rb = recurrence_bound(a0, lambdas, xis);
        const auto cross = recurrence_bound_via_bihari(a0, lambdas, xis);
        double amax = std::sqrt(alpha[0]), amax_shift = 0.0;
        double w1 = -kInf, w2 = -kInf, w3 = -kInf, w4 = -kInf;
        for (int k = 0; k < n; ++k) {
            w1 = std::max(w1, alpha[k + 1] - rb.value[k]);
            w2 = std::max(w2, alpha[k + 1] - rb.value_valid[k]);
            amax = std::max(amax, std::sqrt(alpha[k + 1]));
            amax_shift = std::max(amax_shift, std::sqrt(alpha[k + 1]));
            w3 = std::max(w3, amax - rb.max_sqrt[k]);
            w4 = std::max(w4, amax_shift - cross[k]);
        }
        record(rec, w1);
        record(rec_valid, w2);
        record(rec_sqrt, w3);
        record(rec_cross, w4);
    }

    for (std::size_t inst = 0; inst < cesaro.instances; ++inst) {
        auto rng = make_rng(seed + 1, Stream::lemma_instances, inst);
        const int n = std::uniform_int_distribution<int>(2, 150)(rng);
        std::vector<double> a(n), lambdas(n);
        for (int i = 0; i < n; ++i) {
            a[i] = 4.0 * u(rng) - 2.0;
            lambdas[i] = inst % 2 ? i + 1.0 : std::pow(10.0, 2.0 * u(rng) - 1.0);
        }
        const auto rec_a = cesaro_reconstruct(a[0], lambdas, cesaro_perturbation(a, lambdas));
        double scale = 0.0, err = 0.0;
        for (int i = 0; i < n; ++i) {
            scale = std::max(scale, std::abs(a[i]));
            err = std::max(err, std::abs(rec_a[i] - a[i]));
        }
        record(cesaro, err / scale);
    }
    return {bihari, bihari_order, rec, rec_valid, rec_sqrt, rec_cross, cesaro};
}

std::vector<SuiteCheck> run_prox_cert_suite(std::uint64_t seed, std::size_t calls_per_mode)
{
    SuiteCheck pert_excess{"perturbation_excess", calls_per_mode, 0, -kInf, 1e-12};
    SuiteCheck pert_dist{"perturbation_distance", calls_per_mode, 0, -kInf, 1e-10};
    SuiteCheck pert_dec{"perturbation_decomposition", calls_per_mode, 0, -kInf, 1e-12};
    SuiteCheck dual_excess{"dual_gap_excess", calls_per_mode, 0, -kInf, 1e-12};
    SuiteCheck dual_dist{"dual_gap_distance", calls_per_mode, 0, -kInf, 1e-10};
    SuiteCheck dual_cert{"dual_gap_certificate", calls_per_mode, 0, -kInf, 0.0};

    const std::vector<std::shared_ptr<NonsmoothPart>> closed_form = {
        std::make_shared<ZeroFunction>(), std::make_shared<L1Norm>(0.7),
        std::make_shared<BoxIndicator>(Vector::Constant(30, -0.5), Vector::Constant(30, 1.5))};
    std::uniform_real_distribution<double> u(0.0, 1.0);

    for (std::size_t i = 0; i < calls_per_mode; ++i) {
        auto rng = make_rng(seed, Stream::prox_battery, i);
        const auto& g = *closed_form[i % closed_form.size()];
        const Vector y = 2.0 * random_gaussian(30, rng);
        const double gamma = 0.1 + 2.0 * u(rng);
        const double delta = std::pow(10.0, -4.0 + 4.0 * u(rng));
        PerturbOptions opt;
        opt.direction = static_cast<DirectionRule>(i % 3);
        opt.seed = seed;
        opt.index = i;
        opt.weak = i % 7 == 0;
        const auto out = inexact_prox_perturb(g, y, gamma, delta, opt);
        const Vector p = g.prox(y, gamma);
        const double excess = gamma * (g.value(out.z) - g.value(p)) + 0.5 * (out.z - y).squaredNorm()
                              - 0.5 * (p - y).squaredNorm();
        record(pert_excess, excess - 0.5 * delta * delta);
        record(pert_dist, (out.z - p).norm() - delta);
        if (const auto& d = out.cert.decomposition)
            record(pert_dec, std::max(d->delta1 * d->delta1 + d->delta2 * d->delta2 - delta * delta,
                                      d->e.norm() - d->delta2));
        else
            record(pert_dec, 0.0);
    }

    for (std::size_t i = 0; i < calls_per_mode; ++i) {
        auto rng = make_rng(seed + 1, Stream::prox_battery, i);
        const Index n = std::uniform_int_distribution<Index>(2, 100)(rng);
        const TotalVariation1D g(0.2 + u(rng));
        const Vector y = random_gaussian(n, rng);
        const double gamma = 0.1 + 2.0 * u(rng);
        const double delta = std::pow(10.0, -4.0 + 4.0 * u(rng));
        const auto out = inexact_prox_dual(g, y, gamma, delta);
        const Vector p = tv1d_prox_direct(y, gamma * g.lambda());
        const double excess = gamma * (g.value(out.z) - g.value(p)) + 0.5 * (out.z - y).squaredNorm()
                              - 0.5 * (p - y).squaredNorm();
        record(dual_excess, excess - 0.5 * delta * delta);
        record(dual_dist, (out.z - p).norm() - delta);
        record(dual_cert, out.cert.objective_excess_bound - 0.5 * delta * delta);
    }
    return {pert_excess, pert_dist, pert_dec, dual_excess, dual_dist, dual_cert};
}

}  // namespace ifista::app
