#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"

#include "assoclearn/basis.hpp"

using namespace assoclearn;

TEST_CASE("helmert complement for m = 3") {
    const Eigen::MatrixXd U = helmert_complement(3);
    REQUIRE(U.rows() == 3);
    REQUIRE(U.cols() == 2);
    const double a = 1.0 / std::sqrt(2.0), b = 1.0 / std::sqrt(6.0);
    CHECK(U(0, 0) == doctest::Approx(a));
    CHECK(U(1, 0) == doctest::Approx(-a));
    CHECK(U(2, 0) == doctest::Approx(0.0));
    CHECK(U(0, 1) == doctest::Approx(b));
    CHECK(U(1, 1) == doctest::Approx(b));
    CHECK(U(2, 1) == doctest::Approx(-2.0 * b));
}

TEST_CASE("completions are orthonormal and orthogonal to ones") {
    for (int m = 2; m <= 6; ++m) {
        for (const Completion& c : {Completion(helmert_complement), rotated_helmert(11)}) {
            const Eigen::MatrixXd U = c(m);
            CHECK((U.transpose() * U - Eigen::MatrixXd::Identity(m - 1, m - 1)).cwiseAbs().maxCoeff() < 1e-13);
            CHECK((U.transpose() * Eigen::VectorXd::Ones(m)).cwiseAbs().maxCoeff() < 1e-13);
        }
    }
}

TEST_CASE("H for the first main effect of (2,3)") {
    const auto layout = ResponseLayout::build({2, 3}, 2);
    const Effect k(std::vector<int>{0});
    const Eigen::MatrixXd H = basis_matrix(layout, k);
    REQUIRE(H.cols() == 1);
    const double v = 0.408248290463863;
    for (int i = 0; i < 6; ++i) CHECK(H(i, 0) == doctest::Approx(i % 2 == 0 ? v : -v).epsilon(1e-14));
}

TEST_CASE("kronecker of small matrices") {
    Eigen::MatrixXd a(2, 1), b(1, 2);
    a << 1, 2;
    b << 3, 4;
    Eigen::MatrixXd expected(2, 2);
    expected << 3, 4, 6, 8;
    CHECK(kronecker(a, b) == expected);
}

TEST_CASE("stacked basis is orthogonal and resolves the identity") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 25; ++rep) {
        const auto layout = testsupport::random_layout(rng, 5, 4);
        const BasisSet basis(layout);
        const Eigen::MatrixXd& H = basis.H();
        REQUIRE(H.cols() == layout.card());
        const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(layout.card(), layout.card());
        CHECK((H.transpose() * H - I).cwiseAbs().maxCoeff() <= 1e-12);
        Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(layout.card(), layout.card());
        for (int e = 0; e < layout.num_effects(); ++e) sum += basis.H_k(e) * basis.H_k(e).transpose();
        CHECK((sum - I).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("truncated basis is a partial isometry") {
    const auto layout = ResponseLayout::build({2, 3, 2}, 1);
    const BasisSet basis(layout);
    const Eigen::MatrixXd& H = basis.H();
    CHECK(H.cols() == 5);
    CHECK((H.transpose() * H - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::MatrixXd P = H * H.transpose();
    CHECK((P * P - P).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((P - Eigen::MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff() > 0.1);
}

TEST_CASE("theta and beta round trip when d = q") {
    std::mt19937_64 rng(5);
    const auto layout = ResponseLayout::build({3, 2, 2}, 3);
    const BasisSet basis(layout);
    const auto part = PredictorPartition({2, 1});
    const Eigen::MatrixXd theta = testsupport::random_matrix(layout.card(), 3, rng);
    const auto beta = beta_from_theta(basis, theta, part);
    CHECK((theta_from_beta(basis, beta) - theta).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("rejects completions that are not orthonormal") {
    const auto layout = ResponseLayout::build({3, 2}, 2);
    const Completion bad = [](int m) { return Eigen::MatrixXd::Ones(m, m - 1); };
    CHECK_THROWS(BasisSet(layout, bad));
}

TEST_CASE("corner basis spans the same space") {
    std::mt19937_64 rng(9);
    const auto layout = ResponseLayout::build({2, 3}, 2);
    const BasisSet basis(layout);
    const Eigen::MatrixXd C = corner_basis(layout, CornerReference::First);
    REQUIRE(C.rows() == 6);
    REQUIRE(C.cols() == 6);
    const Eigen::MatrixXd theta = testsupport::random_matrix(6, 2, rng);
    const Eigen::MatrixXd coef = coefficients_in_basis(C, theta);
    CHECK((C * coef - theta).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((C.transpose() * C - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() > 0.5);
}
