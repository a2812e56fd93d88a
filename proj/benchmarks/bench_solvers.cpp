#include <benchmark/benchmark.h>

#include <ifista/analysis.hpp>
#include <ifista/inexact.hpp>
#include <ifista/params.hpp>
#include <ifista/problems.hpp>
#include <ifista/random.hpp>
#include <ifista/solvers.hpp>

using namespace ifista;

namespace {

CompositeProblem lasso_with_reference()
{
    LassoSpec spec;
    spec.seed = 7;
    auto p = make_lasso(spec);
    p.reference = reference_optimum(p);
    return p;
}

CompositeProblem box_qp(Index n)
{
    auto rng = make_rng(2024, Stream::problem_data);
    return make_box_qp(n, random_uniform(n, -2.0, 2.0, rng), Vector::Constant(n, -1.0), Vector::Constant(n, 1.0),
                       log_spaced_curvature(n, 1.0));
}

}  // namespace

static void BM_ExactFistaBoxQp(benchmark::State& state)
{
    const auto p = box_qp(state.range(0));
    DeterministicConfig cfg;
    cfg.gamma = 1.0 / p.lipschitz();
    cfg.max_iters = 1000;
    for (auto _ : state) benchmark::DoNotOptimize(run_inexact_fista(p, cfg).final_x.data());
    state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_ExactFistaBoxQp)->Arg(20)->Arg(200)->Arg(2000);

static void BM_InexactFistaLasso(benchmark::State& state)
{
    const auto p = lasso_with_reference();
    DeterministicConfig cfg;
    cfg.gamma = 1.0 / p.lipschitz();
    cfg.max_iters = 1000;
    cfg.delta = ErrorSchedule::power(1e-2, 2.5);
    cfg.b = {ErrorSchedule::power(1e-2, 2.5), ErrorDirection::seeded, 99};
    for (auto _ : state) benchmark::DoNotOptimize(run_inexact_fista(p, cfg).final_x.data());
    state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_InexactFistaLasso);

static void BM_WeakFistaTv(benchmark::State& state)
{
    Tv1dSpec spec;
    spec.seed = 11;
    auto p = make_tv1d(spec);
    p.reference = reference_optimum(p);
    DeterministicConfig cfg;
    cfg.gamma = 1.0 / p.lipschitz();
    cfg.max_iters = 1000;
    cfg.delta = ErrorSchedule::power(1.0, 1.6);
    cfg.weak = true;
    for (auto _ : state) benchmark::DoNotOptimize(run_inexact_fista(p, cfg).final_x.data());
    state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_WeakFistaTv);

static void BM_StochasticFista(benchmark::State& state)
{
    const auto p = box_qp(20);
    StochasticConfig cfg;
    cfg.step = {1.0 / p.lipschitz(), 1.5, 0.5};
    cfg.noise = {0.1, NoiseFamily::sphere};
    cfg.max_iters = 1000;
    cfg.replications = 32;
    cfg.workers = static_cast<unsigned>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(run_stochastic_fista(p, cfg).aggregate.data());
}
BENCHMARK(BM_StochasticFista)->Arg(1)->Arg(4)->UseRealTime();

static void BM_PerturbProx(benchmark::State& state)
{
    L1Norm g(0.7);
    auto rng = make_rng(1, Stream::prox_battery);
    const Vector y = 2.0 * random_gaussian(state.range(0), rng);
    PerturbOptions opt;
    for (auto _ : state) {
        ++opt.index;
        benchmark::DoNotOptimize(inexact_prox_perturb(g, y, 1.0, 1e-3, opt).z.data());
    }
}
BENCHMARK(BM_PerturbProx)->Arg(50)->Arg(1000);

static void BM_TvDualProx(benchmark::State& state)
{
    TotalVariation1D g(0.3);
    auto rng = make_rng(2, Stream::prox_battery);
    const Vector y = random_gaussian(state.range(0), rng);
    for (auto _ : state) benchmark::DoNotOptimize(inexact_prox_dual(g, y, 1.0, 1e-3).z.data());
}
BENCHMARK(BM_TvDualProx)->Arg(50)->Arg(500);

static void BM_TvDirectProx(benchmark::State& state)
{
    auto rng = make_rng(3, Stream::prox_battery);
    const Vector y = random_gaussian(state.range(0), rng);
    for (auto _ : state) benchmark::DoNotOptimize(tv1d_prox_direct(y, 0.3).data());
}
BENCHMARK(BM_TvDirectProx)->Arg(50)->Arg(500);

static void BM_CriticalParams(benchmark::State& state)
{
    for (auto _ : state) {
        ParamSequence seq(ParamFamily::critical());
        benchmark::DoNotOptimize(seq.prefix(10'001).data());
    }
}
BENCHMARK(BM_CriticalParams);

static void BM_RecurrenceOracle(benchmark::State& state)
{
    std::vector<double> l(200, 0.05), x(200, 0.01);
    for (auto _ : state) {
        benchmark::DoNotOptimize(recurrence_extremal(1.0, l, x).data());
        benchmark::DoNotOptimize(recurrence_bound(1.0, l, x).value.data());
    }
}
BENCHMARK(BM_RecurrenceOracle);
BENCHMARK_MAIN();
