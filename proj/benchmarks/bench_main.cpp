#include <random>

#include <benchmark/benchmark.h>

#include "support.hpp"

#include "assoclearn/simulation.hpp"
#include "assoclearn/solver.hpp"

using namespace assoclearn;

namespace {

struct Fixture {
    ResponseLayout layout = ResponseLayout::build({2, 2, 2, 3}, 4);
    BasisSet basis{layout};
    SimulatedData data;

    explicit Fixture(int n) : data(make(n)) {}

    SimulatedData make(int n) {
        SimConfig cfg;
        cfg.n_grid = {n};
        cfg.n_test = 200;
        return simulate(cfg, basis, 2, 10, n, 0);
    }
};

void BM_LossGradient(benchmark::State& state) {
    const Fixture fx(static_cast<int>(state.range(0)));
    const Objective obj(fx.basis, fx.data.train, ModelFamily::Multinomial);
    const Eigen::MatrixXd beta = fx.data.beta_star.stacked() * 0.5;
    Eigen::MatrixXd g;
    for (auto _ : state) benchmark::DoNotOptimize(obj.evaluate(beta, &g).value);
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LossGradient)->Arg(500)->Arg(2000)->Arg(10000);

void BM_ProxGroup(benchmark::State& state) {
    const auto layout = ResponseLayout::build({2, 2, 2, 3}, 4);
    const GroupStructure gs(layout, PredictorPartition::local(10), PenaltyMode::GroupLasso);
    std::mt19937_64 rng(1);
    const Eigen::MatrixXd z = testsupport::random_matrix(layout.total_dim(), 10, rng, 0.3);
    const auto t = thresholds(gs, 0.05);
    for (auto _ : state) benchmark::DoNotOptimize(prox_group(z, t, gs));
}
BENCHMARK(BM_ProxGroup);

void BM_ProxOverlap(benchmark::State& state) {
    const auto layout = ResponseLayout::build({2, 2, 2, 3}, 4);
    const GroupStructure gs(layout, PredictorPartition::local(10), PenaltyMode::OverlappingHierarchical);
    std::mt19937_64 rng(2);
    const Eigen::MatrixXd z = testsupport::random_matrix(layout.total_dim(), 10, rng, 0.3);
    const auto t = thresholds(gs, 0.01 * static_cast<double>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(prox_overlap(z, t, gs).beta);
}
BENCHMARK(BM_ProxOverlap)->Arg(1)->Arg(5)->Arg(20);

void BM_Fit(benchmark::State& state) {
    const Fixture fx(2000);
    const auto mode = state.range(0) ? PenaltyMode::OverlappingHierarchical : PenaltyMode::GroupLasso;
    const GroupStructure gs(fx.layout, PredictorPartition::local(10), mode);
    SolverConfig cfg;
    cfg.tol = 1e-7;
    const double lam = 0.05 * lambda_max(fx.data.train, fx.basis, gs, cfg);
    for (auto _ : state) benchmark::DoNotOptimize(fit(fx.data.train, fx.basis, gs, cfg, lam).iterations);
}
BENCHMARK(BM_Fit)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Path(benchmark::State& state) {
    const Fixture fx(1000);
    const GroupStructure gs(fx.layout, PredictorPartition::local(10), PenaltyMode::GroupLasso);
    SolverConfig cfg;
    cfg.tol = 1e-7;
    cfg.path = {15, 1e-3, 0};
    const bool warm = state.range(0) != 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_path(fx.data.train, fx.basis, gs, cfg, &fx.data.valid, warm).total_iterations);
    }
    state.SetLabel(warm ? "warm" : "cold");
}
BENCHMARK(BM_Path)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
