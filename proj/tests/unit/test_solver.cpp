#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"

#include "assoclearn/solver.hpp"

using namespace assoclearn;

namespace {

struct Problem {
    ResponseLayout layout;
    BasisSet basis;
    Dataset data;

    Problem(std::vector<int> J, int n, int p, std::uint64_t seed, ModelFamily family = ModelFamily::Multinomial)
        : layout(ResponseLayout::build(J, static_cast<int>(J.size()))), basis(layout) {
        std::mt19937_64 rng(seed);
        data = testsupport::random_dataset(layout, n, p, rng, family);
    }
};

/// Plain gradient descent with step 1/L, run far past convergence.
double gradient_descent_reference(const Problem& pr) {
    const Objective obj(pr.basis, pr.data, ModelFamily::Multinomial);
    const double L = lipschitz_bound(pr.data);
    Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(pr.layout.total_dim(), pr.data.p());
    Eigen::MatrixXd g;
    double value = 0.0;
    for (int it = 0; it < 200000; ++it) {
        value = obj.evaluate(beta, &g).value;
        g.row(0).setZero();
        if (g.norm() < 1e-11) break;
        beta -= g / L;
    }
    return value;
}

bool monotone(const std::vector<double>& trace) {
    for (std::size_t i = 1; i < trace.size(); ++i) {
        if (trace[i] > trace[i - 1] + 1e-12) return false;
    }
    return true;
}

} // namespace

TEST_CASE("unpenalized fit reaches the gradient-descent optimum") {
    const Problem pr({2, 3}, 400, 3, 101);
    const GroupStructure gs(pr.layout, PredictorPartition::local(3), PenaltyMode::GroupLasso);
    SolverConfig cfg;
    cfg.tol = 1e-12;
    cfg.max_iter = 20000;
    const auto res = fit(pr.data, pr.basis, gs, cfg, 0.0);
    CHECK(res.converged);
    CHECK(std::abs(res.objective() - gradient_descent_reference(pr)) <= 1e-8);
    CHECK(monotone(res.objective_trace));
    CHECK(res.beta.effect_rows(0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("KKT conditions hold along random penalty levels") {
    std::mt19937_64 rng(103);
    std::uniform_real_distribution<double> frac(0.02, 0.9);
    for (PenaltyMode mode : {PenaltyMode::GroupLasso, PenaltyMode::OverlappingHierarchical}) {
        for (ModelFamily family : {ModelFamily::Multinomial, ModelFamily::Poisson}) {
            const Problem pr({2, 2, 3}, 200, 4, 107, family);
            const GroupStructure gs(pr.layout, PredictorPartition({1, 3}), mode);
            SolverConfig cfg;
            cfg.family = family;
            cfg.tol = 1e-13;
            cfg.max_iter = 50000;
            const double lmax = lambda_max(pr.data, pr.basis, gs, cfg);
            for (int rep = 0; rep < 3; ++rep) {
                const double lam = lmax * frac(rng);
                const auto res = fit(pr.data, pr.basis, gs, cfg, lam);
                CHECK(res.converged);
                CHECK(kkt_residual(res.beta, pr.basis, pr.data, gs, family, lam) <= 1e-6);
                CHECK(monotone(res.objective_trace));
            }
        }
    }
}

TEST_CASE("lambda_max empties the penalized support") {
    for (ModelFamily family : {ModelFamily::Multinomial, ModelFamily::Poisson}) {
        const Problem pr({2, 3}, 150, 3, 109, family);
        for (PenaltyMode mode : {PenaltyMode::GroupLasso, PenaltyMode::OverlappingHierarchical}) {
            const GroupStructure gs(pr.layout, PredictorPartition::local(3), mode);
            SolverConfig cfg;
            cfg.family = family;
            const double lmax = lambda_max(pr.data, pr.basis, gs, cfg);
            CHECK(lmax > 0.0);
            for (const auto& [e, j] : fit(pr.data, pr.basis, gs, cfg, lmax * 1.0001).support) CHECK(e == 0);
            if (mode == PenaltyMode::GroupLasso) {
                bool penalized = false;
                for (const auto& [e, j] : fit(pr.data, pr.basis, gs, cfg, lmax * 0.9).support) penalized = penalized || e != 0;
                CHECK(penalized);
            }
        }
    }
}

TEST_CASE("warm and cold paths agree") {
    const Problem pr({2, 2, 2}, 200, 3, 113);
    const Problem valid({2, 2, 2}, 200, 3, 127);
    const GroupStructure gs(pr.layout, PredictorPartition::local(3), PenaltyMode::OverlappingHierarchical);
    SolverConfig cfg;
    cfg.path = {8, 1e-2, 0};
    cfg.tol = 1e-10;
    const auto warm = fit_path(pr.data, pr.basis, gs, cfg, &valid.data, true);
    const auto cold = fit_path(pr.data, pr.basis, gs, cfg, &valid.data, false);
    REQUIRE(warm.fits.size() == 8);
    REQUIRE(cold.fits.size() == 8);
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(warm.lambdas[i] == cold.lambdas[i]);
        CHECK(std::abs(warm.fits[i].objective() - cold.fits[i].objective()) <= 1e-6);
    }
    CHECK(warm.lambdas.front() > warm.lambdas.back());
    CHECK(warm.lambdas.back() == doctest::Approx(warm.lambdas.front() * 1e-2));
    REQUIRE(warm.selected);
    for (const auto& f : warm.fits) CHECK(*warm.fits[*warm.selected].validation_cross_entropy <= *f.validation_cross_entropy);
}

TEST_CASE("patience stops the path early") {
    const Problem pr({2, 2}, 60, 6, 131);
    const Problem valid({2, 2}, 60, 6, 137);
    const GroupStructure gs(pr.layout, PredictorPartition::local(6), PenaltyMode::GroupLasso);
    SolverConfig cfg;
    cfg.path = {40, 1e-4, 2};
    const auto path = fit_path(pr.data, pr.basis, gs, cfg, &valid.data);
    CHECK(path.fits.size() < 40);
    CHECK(path.lambdas.size() == path.fits.size());
}

TEST_CASE("fits are reproducible and thread-count independent") {
    const Problem pr({2, 3, 2}, 3000, 4, 139);
    const GroupStructure gs(pr.layout, PredictorPartition::local(4), PenaltyMode::OverlappingHierarchical);
    SolverConfig cfg;
    cfg.threads = 1;
    const double lam = 0.2 * lambda_max(pr.data, pr.basis, gs, cfg);
    const auto a = fit(pr.data, pr.basis, gs, cfg, lam);
    const auto b = fit(pr.data, pr.basis, gs, cfg, lam);
    cfg.threads = 3;
    const auto c = fit(pr.data, pr.basis, gs, cfg, lam);
    CHECK(a.beta.stacked() == b.beta.stacked());
    CHECK(a.beta.stacked() == c.beta.stacked());
    CHECK(a.iterations == c.iterations);
}

TEST_CASE("configuration validation") {
    const Problem pr({2, 2}, 20, 2, 149);
    const GroupStructure gs(pr.layout, PredictorPartition::local(2), PenaltyMode::GroupLasso);
    SolverConfig cfg;
    CHECK_THROWS_AS(fit(pr.data, pr.basis, gs, cfg), InputError);
    cfg.lambda = -1.0;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    cfg.lambda = 0.1;
    cfg.tol = 0.0;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    cfg.tol = 1e-8;
    cfg.backtrack = 1.0;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    cfg.backtrack = 2.0;
    cfg.path.ratio = 2.0;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    const auto grid = lambda_grid(1.0, PathSpec{3, 1e-2, 0});
    REQUIRE(grid.size() == 3);
    CHECK(grid[1] == doctest::Approx(0.1));
}
