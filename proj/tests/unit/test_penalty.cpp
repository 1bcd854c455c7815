#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"

#include "assoclearn/penalty.hpp"

using namespace assoclearn;

namespace {

std::vector<double> random_thresholds(const GroupStructure& gs, std::mt19937_64& rng, double hi) {
    std::uniform_real_distribution<double> u(0.0, hi);
    std::vector<double> t(static_cast<std::size_t>(gs.num_groups()), 0.0);
    for (int g = 0; g < gs.num_groups(); ++g) {
        if (gs.exists(g) && !gs.layout().effects()[gs.effect_of(g)].is_overall()) t[g] = u(rng);
    }
    return t;
}

} // namespace

TEST_CASE("default weights") {
    const auto layout = ResponseLayout::build({2, 3}, 2);
    const GroupStructure gs(layout, PredictorPartition({1, 3}), PenaltyMode::GroupLasso);
    CHECK(gs.weight(gs.group_index(0, 0)) == 0.0);
    CHECK(gs.weight(gs.group_index(0, 1)) == 0.0);
    CHECK(gs.weight(gs.group_index(1, 0)) == doctest::Approx(1.0));
    CHECK(gs.weight(gs.group_index(2, 1)) == doctest::Approx(std::sqrt(6.0)));
    CHECK(gs.weight(gs.group_index(3, 1)) == doctest::Approx(std::sqrt(6.0)));
    CHECK(default_weights(gs) == gs.weights());
}

TEST_CASE("hierarchical member sets are supersets") {
    const auto layout = ResponseLayout::build({2, 2, 2}, 3);
    const GroupStructure gs(layout, PredictorPartition::local(2), PenaltyMode::OverlappingHierarchical);
    // {1} covers {1}, {1,2}, {1,3}, {1,2,3}
    CHECK(gs.members(1) == std::vector<int>{1, 4, 5, 7});
    CHECK(gs.members(7) == std::vector<int>{7});
    CHECK_FALSE(gs.exists(gs.group_index(0, 1)));
    CHECK(gs.exists(gs.group_index(4, 1)));
    const GroupStructure gl(layout, PredictorPartition::local(2), PenaltyMode::GroupLasso);
    CHECK(gl.members(1) == std::vector<int>{1});
}

TEST_CASE("omega sums weighted group norms") {
    const auto layout = ResponseLayout::build({2, 2}, 2);
    GroupStructure gs(layout, PredictorPartition::global(1), PenaltyMode::OverlappingHierarchical);
    gs.set_all_weights(1.0);
    Eigen::MatrixXd beta(4, 1);
    beta << 5, 3, 0, 4;
    // ‖(3,4)‖ + ‖(0,4)‖ + ‖4‖
    CHECK(omega(beta, gs) == doctest::Approx(13.0));
    CHECK_THROWS_AS(gs.set_weight(1, -1.0), InputError);
}

TEST_CASE("group prox matches closed-form soft thresholding") {
    std::mt19937_64 rng(41);
    int blocks = 0;
    while (blocks < 1000) {
        const auto layout = testsupport::random_layout(rng, 3, 4);
        const GroupStructure gs(layout, PredictorPartition({1, 2}), PenaltyMode::GroupLasso);
        const Eigen::MatrixXd z = testsupport::random_matrix(layout.total_dim(), 3, rng);
        const auto t = random_thresholds(gs, rng, 2.0);
        const Eigen::MatrixXd out = prox_group(z, t, gs);
        for (int g = 0; g < gs.num_groups(); ++g, ++blocks) {
            const int e = gs.effect_of(g), j = gs.block_of(g);
            const auto zb = z.block(layout.offset(e), gs.partition().offset(j), layout.dim(e), gs.partition().size(j));
            const auto ob = out.block(layout.offset(e), gs.partition().offset(j), layout.dim(e), gs.partition().size(j));
            const double nrm = zb.norm();
            const Eigen::MatrixXd expected = nrm > t[g] ? Eigen::MatrixXd((1.0 - t[g] / nrm) * zb) : Eigen::MatrixXd::Zero(zb.rows(), zb.cols());
            CHECK((ob - expected).cwiseAbs().maxCoeff() <= 1e-12);
        }
        CHECK(group_optimality_residual(z, out, t, gs) <= 1e-8);
    }
}

TEST_CASE("overlap prox on a fixed instance matches a conic solver") {
    const auto layout = ResponseLayout::build({2, 2, 2}, 3);
    const GroupStructure gs(layout, PredictorPartition::local(1), PenaltyMode::OverlappingHierarchical);
    Eigen::MatrixXd z(8, 1);
    z << 0, 0.9, -0.4, 0.25, 0.6, -0.05, 0.35, -0.8;
    std::vector<double> t(static_cast<std::size_t>(gs.num_groups()), 0.3);
    t[0] = 0.0;
    const auto res = prox_overlap(z, t, gs);
    Eigen::VectorXd expected(8);
    expected << 0, 0.60352035766, -0.146795748332, 0, 0.0932799273292, 0, 0, 0;
    CHECK(res.converged);
    CHECK((res.beta.col(0) - expected).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(res.beta(3, 0) == 0.0);
    CHECK(res.beta(7, 0) == 0.0);
    CHECK(overlap_optimality_residual(z, res.beta, res.duals, t, gs) <= 1e-8);
}

TEST_CASE("overlap prox matches the dual reference on random instances") {
    std::mt19937_64 rng(43);
    std::uniform_int_distribution<int> jd(2, 3);
    for (int rep = 0; rep < 20; ++rep) {
        const auto layout = ResponseLayout::build({jd(rng), jd(rng), jd(rng)}, 3);
        const GroupStructure gs(layout, PredictorPartition({1, 2}), PenaltyMode::OverlappingHierarchical);
        const Eigen::MatrixXd z = testsupport::random_matrix(layout.total_dim(), 3, rng);
        const auto t = random_thresholds(gs, rng, 1.0);
        const auto res = prox_overlap(z, t, gs);
        const Eigen::MatrixXd ref = testsupport::overlap_prox_oracle(z, t, gs);
        CHECK(res.converged);
        CHECK((res.beta - ref).cwiseAbs().maxCoeff() <= 1e-6);
        CHECK(overlap_optimality_residual(z, res.beta, res.duals, t, gs) <= 1e-8);
    }
}

TEST_CASE("overlap prox zeroes a group only together with its supersets") {
    std::mt19937_64 rng(47);
    const auto layout = ResponseLayout::build({2, 3, 2}, 3);
    const GroupStructure gs(layout, PredictorPartition::local(2), PenaltyMode::OverlappingHierarchical);
    for (int rep = 0; rep < 20; ++rep) {
        const Eigen::MatrixXd z = testsupport::random_matrix(layout.total_dim(), 2, rng);
        const auto t = random_thresholds(gs, rng, 1.5);
        const auto res = prox_overlap(z, t, gs);
        for (int g = 0; g < gs.num_groups(); ++g) {
            if (!gs.exists(g) || gs.group_norm(res.beta, g) > 0.0) continue;
            for (int f : gs.members(gs.effect_of(g))) CHECK(res.beta.block(layout.offset(f), gs.block_of(g), layout.dim(f), 1).norm() == 0.0);
        }
    }
}

TEST_CASE("prox limits and warm starts") {
    std::mt19937_64 rng(53);
    const auto layout = ResponseLayout::build({2, 2, 3}, 3);
    const GroupStructure gs(layout, PredictorPartition::local(2), PenaltyMode::OverlappingHierarchical);
    const Eigen::MatrixXd z = testsupport::random_matrix(layout.total_dim(), 2, rng);

    const std::vector<double> zero(static_cast<std::size_t>(gs.num_groups()), 0.0);
    CHECK((prox_overlap(z, zero, gs).beta - z).cwiseAbs().maxCoeff() == 0.0);

    const auto big = thresholds(gs, 1e6);
    const auto killed = prox_overlap(z, big, gs).beta;
    CHECK(killed.middleRows(1, layout.total_dim() - 1).norm() == 0.0);
    CHECK(killed.row(0) == z.row(0));

    const auto t = random_thresholds(gs, rng, 0.8);
    const auto cold = prox_overlap(z, t, gs);
    const auto warm = prox_overlap(z, t, gs, &cold.duals);
    CHECK((cold.beta - warm.beta).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(warm.passes <= cold.passes);

    Eigen::MatrixXd out;
    OverlapDuals duals;
    out = prox(z, 0.2, gs, &duals);
    CHECK(overlap_optimality_residual(z, out, duals, thresholds(gs, 0.2), gs) <= 1e-8);
}

TEST_CASE("threshold validation") {
    const auto layout = ResponseLayout::build({2, 2}, 2);
    const GroupStructure gs(layout, PredictorPartition::local(1), PenaltyMode::GroupLasso);
    const Eigen::MatrixXd z = Eigen::MatrixXd::Ones(4, 1);
    CHECK_THROWS_AS(prox_group(z, std::vector<double>{0.1}, gs), InputError);
    CHECK_THROWS_AS(prox_group(z, std::vector<double>{0, -1, 0, 0}, gs), InputError);
    CHECK_THROWS_AS(prox_overlap(z, std::vector<double>{0, 0, 0, 0}, gs), InputError);
    CHECK(parse_penalty_mode("overlap") == PenaltyMode::OverlappingHierarchical);
    CHECK(parse_penalty_mode("group") == PenaltyMode::GroupLasso);
}
