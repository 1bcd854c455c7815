#pragma once

#include <cmath>
#include <functional>
#include <random>

#include <Eigen/Dense>

#include "assoclearn/basis.hpp"
#include "assoclearn/likelihood.hpp"
#include "assoclearn/penalty.hpp"

namespace testsupport {

using assoclearn::BasisSet;
using assoclearn::CoefficientBlocks;
using assoclearn::Dataset;
using assoclearn::GroupStructure;
using assoclearn::ModelFamily;
using assoclearn::ResponseLayout;

inline Eigen::MatrixXd random_matrix(int rows, int cols, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    Eigen::MatrixXd m(rows, cols);
    for (int j = 0; j < cols; ++j) {
        for (int i = 0; i < rows; ++i) m(i, j) = normal(rng);
    }
    return m;
}

inline ResponseLayout random_layout(std::mt19937_64& rng, int max_q, int max_J, int d = -1) {
    std::uniform_int_distribution<int> qd(1, max_q);
    std::uniform_int_distribution<int> jd(2, max_J);
    const int q = qd(rng);
    std::vector<int> J(static_cast<std::size_t>(q));
    for (int& j : J) j = jd(rng);
    return ResponseLayout::build(J, d < 0 ? q : std::min(d, q));
}

/// Intercept plus Gaussian predictors; one categorical draw per row (multinomial) or small
/// Poisson counts.
inline Dataset random_dataset(const ResponseLayout& layout, int n, int p, std::mt19937_64& rng,
                              ModelFamily family = ModelFamily::Multinomial) {
    Eigen::MatrixXd X = random_matrix(n, p, rng);
    X.col(0).setOnes();
    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(n, layout.card());
    std::uniform_int_distribution<int> cat(0, layout.card() - 1);
    std::poisson_distribution<int> counts(0.8);
    for (int i = 0; i < n; ++i) {
        if (family == ModelFamily::Multinomial) {
            Y(i, cat(rng)) = 1.0;
        } else {
            for (int j = 0; j < layout.card(); ++j) Y(i, j) = counts(rng);
        }
    }
    return Dataset::make(X, Y);
}

/// Termwise loss: θ assembled effect by effect, log-sum-exp taken directly.
inline double brute_force_loss(const CoefficientBlocks& beta, const ResponseLayout& layout, const Dataset& data,
                               ModelFamily family) {
    Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(layout.card(), beta.num_predictors());
    for (int e = 0; e < layout.num_effects(); ++e) {
        const Eigen::MatrixXd Hk = assoclearn::basis_matrix(layout, layout.effects()[e]);
        theta += Hk * beta.effect_rows(e);
    }
    double total = 0.0;
    for (int i = 0; i < data.n(); ++i) {
        const Eigen::VectorXd eta = theta * data.X.row(i).transpose();
        double linear = 0.0;
        double expsum = 0.0;
        double ni = 0.0;
        for (int j = 0; j < layout.card(); ++j) {
            linear += data.Y(i, j) * eta(j);
            expsum += std::exp(eta(j));
            ni += data.Y(i, j);
        }
        total += family == ModelFamily::Multinomial ? -linear + ni * std::log(expsum) : -linear + expsum;
    }
    return total / data.n();
}

/// Central differences of f at every coordinate.
inline Eigen::MatrixXd finite_difference(const std::function<double(const Eigen::MatrixXd&)>& f,
                                         const Eigen::MatrixXd& at, double h) {
    Eigen::MatrixXd g(at.rows(), at.cols());
    Eigen::MatrixXd probe = at;
    for (Eigen::Index i = 0; i < at.size(); ++i) {
        const double keep = probe(i);
        probe(i) = keep + h;
        const double up = f(probe);
        probe(i) = keep - h;
        const double down = f(probe);
        probe(i) = keep;
        g(i) = (up - down) / (2.0 * h);
    }
    return g;
}

/// Reference overlapping prox by accelerated projected gradient on the dual
///   min_ξ ½‖z − Σ_g A_gᵀ ξ_g‖²  s.t. ‖ξ_g‖ ≤ t_g,
/// with adaptive restart. Independent of the block-coordinate solver under test.
inline Eigen::MatrixXd overlap_prox_oracle(const Eigen::MatrixXd& z, const std::vector<double>& t,
                                           const GroupStructure& gs, int max_iter = 400000) {
    const auto& layout = gs.layout();
    const auto& part = gs.partition();
    struct Group {
        std::vector<int> rows;
        int col0;
        int cols;
        double radius;
    };
    std::vector<Group> groups;
    Eigen::MatrixXd cover = Eigen::MatrixXd::Zero(z.rows(), z.cols());
    for (int g = 0; g < gs.num_groups(); ++g) {
        if (!gs.exists(g) || t[g] <= 0.0) continue;
        Group grp{{}, part.offset(gs.block_of(g)), part.size(gs.block_of(g)), t[g]};
        for (int f : gs.members(gs.effect_of(g))) {
            for (int r = 0; r < layout.dim(f); ++r) grp.rows.push_back(layout.offset(f) + r);
        }
        for (int r : grp.rows) cover.block(r, grp.col0, 1, grp.cols).array() += 1.0;
        groups.push_back(std::move(grp));
    }
    const double L = std::max(1.0, cover.maxCoeff());
    const std::size_t G = groups.size();
    auto primal = [&](const std::vector<Eigen::MatrixXd>& xi) {
        Eigen::MatrixXd b = z;
        for (std::size_t g = 0; g < G; ++g) {
            for (std::size_t r = 0; r < groups[g].rows.size(); ++r) {
                b.block(groups[g].rows[r], groups[g].col0, 1, groups[g].cols) -= xi[g].row(static_cast<Eigen::Index>(r));
            }
        }
        return b;
    };
    auto dual_value = [&](const std::vector<Eigen::MatrixXd>& xi) { return 0.5 * primal(xi).squaredNorm(); };
    std::vector<Eigen::MatrixXd> xi(G), y(G), prev(G);
    for (std::size_t g = 0; g < G; ++g) {
        xi[g] = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(groups[g].rows.size()), groups[g].cols);
        y[g] = xi[g];
    }
    double tk = 1.0;
    double last = dual_value(xi);
    for (int it = 0; it < max_iter; ++it) {
        const Eigen::MatrixXd b = primal(y);
        double change = 0.0;
        for (std::size_t g = 0; g < G; ++g) {
            prev[g] = xi[g];
            Eigen::MatrixXd step = y[g];
            for (std::size_t r = 0; r < groups[g].rows.size(); ++r) {
                step.row(static_cast<Eigen::Index>(r)) +=
                    b.block(groups[g].rows[r], groups[g].col0, 1, groups[g].cols) / L;
            }
            const double nrm = step.norm();
            if (nrm > groups[g].radius) step *= groups[g].radius / nrm;
            xi[g] = step;
            change = std::max(change, (xi[g] - prev[g]).cwiseAbs().maxCoeff());
        }
        const double value = dual_value(xi);
        const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
        if (value > last) {
            tk = 1.0;
            for (std::size_t g = 0; g < G; ++g) y[g] = xi[g];
        } else {
            for (std::size_t g = 0; g < G; ++g) y[g] = xi[g] + ((tk - 1.0) / tn) * (xi[g] - prev[g]);
            tk = tn;
        }
        last = value;
        if (change < 1e-15) break;
    }
    Eigen::MatrixXd b = primal(xi);
    // Entries whose covering group sits strictly inside its ball are zero at the optimum.
    for (std::size_t g = 0; g < G; ++g) {
        double sq = 0.0;
        for (int r : groups[g].rows) sq += b.block(r, groups[g].col0, 1, groups[g].cols).squaredNorm();
        if (xi[g].norm() < groups[g].radius * (1.0 - 1e-9) && std::sqrt(sq) < 1e-7) {
            for (int r : groups[g].rows) b.block(r, groups[g].col0, 1, groups[g].cols).setZero();
        }
    }
    return b;
}

} // namespace testsupport
