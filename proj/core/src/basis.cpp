#include "assoclearn/basis.hpp"

#include <cmath>
#include <random>
#include <string>

namespace assoclearn {

Eigen::MatrixXd helmert_complement(int m) {
    if (m < 2) throw InputError("orthonormal completion needs m >= 2, got " + std::to_string(m));
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(m, m - 1);
    for (int c = 1; c < m; ++c) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(c) * (c + 1));
        u.col(c - 1).head(c).setConstant(scale);
        u(c, c - 1) = -static_cast<double>(c) * scale;
    }
    return u;
}

Completion rotated_helmert(std::uint64_t seed) {
    return [seed](int m) {
        Eigen::MatrixXd u = helmert_complement(m);
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(m) * 0x9E3779B97F4A7C15ULL);
        std::normal_distribution<double> normal;
        Eigen::MatrixXd g(m - 1, m - 1);
        for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = normal(rng);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
        Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m - 1, m - 1);
        return Eigen::MatrixXd(u * q);
    };
}

Eigen::MatrixXd kronecker(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

namespace {

Eigen::MatrixXd checked_completion(const Completion& completion, int m) {
    Eigen::MatrixXd u = completion(m);
    if (u.rows() != m || u.cols() != m - 1) {
        throw InputError("completion for m=" + std::to_string(m) + " has wrong shape");
    }
    Eigen::MatrixXd full(m, m);
    full.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(m)));
    full.rightCols(m - 1) = u;
    const double err =
        (full.transpose() * full - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff();
    if (err > 1e-10) {
        throw InputError("completion for m=" + std::to_string(m) + " is not orthonormal");
    }
    return u;
}

// Kronecker chain V_q ⊗ ... ⊗ V_1 built from the first factor outward.
template <class Factor>
Eigen::MatrixXd kron_chain(const ResponseLayout& layout, Effect k, Factor&& factor) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Ones(1, 1);
    for (int i = 0; i < layout.num_responses(); ++i) {
        h = kronecker(factor(i, k.contains(i)), h);
    }
    return h;
}

} // namespace

Eigen::MatrixXd basis_matrix(const ResponseLayout& layout, Effect k, const Completion& completion) {
    if (layout.index_of(k) < 0) throw InputError("effect " + k.to_string() + " not in layout");
    return kron_chain(layout, k, [&](int i, bool in_effect) -> Eigen::MatrixXd {
        const int m = layout.categories()[i];
        if (in_effect) return checked_completion(completion, m);
        return Eigen::MatrixXd::Constant(m, 1, 1.0 / std::sqrt(static_cast<double>(m)));
    });
}

BasisSet::BasisSet(ResponseLayout layout, const Completion& completion)
    : layout_(std::move(layout)), stacked_(layout_.card(), layout_.total_dim()) {
    for (int e = 0; e < layout_.num_effects(); ++e) {
        stacked_.middleCols(layout_.offset(e), layout_.dim(e)) =
            basis_matrix(layout_, layout_.effects()[e], completion);
    }
}

Eigen::MatrixXd theta_from_beta(const BasisSet& basis, const CoefficientBlocks& beta) {
    if (!(beta.layout() == basis.layout())) throw InputError("coefficient layout mismatch");
    return basis.H() * beta.stacked();
}

CoefficientBlocks beta_from_theta(const BasisSet& basis, const Eigen::MatrixXd& theta,
                                  const PredictorPartition& partition) {
    if (theta.rows() != basis.layout().card() || theta.cols() != partition.total()) {
        throw InputError("theta has wrong dimensions");
    }
    return CoefficientBlocks(basis.layout(), partition, basis.H().transpose() * theta);
}

Eigen::MatrixXd corner_basis(const ResponseLayout& layout, CornerReference reference) {
    Eigen::MatrixXd out(layout.card(), layout.total_dim());
    for (int e = 0; e < layout.num_effects(); ++e) {
        out.middleCols(layout.offset(e), layout.dim(e)) =
            kron_chain(layout, layout.effects()[e], [&](int i, bool in_effect) -> Eigen::MatrixXd {
                const int m = layout.categories()[i];
                if (!in_effect) return Eigen::MatrixXd::Ones(m, 1);
                const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(m, m);
                return reference == CornerReference::First ? id.rightCols(m - 1)
                                                           : id.leftCols(m - 1);
            });
    }
    return out;
}

Eigen::MatrixXd coefficients_in_basis(const Eigen::MatrixXd& basis, const Eigen::MatrixXd& theta) {
    return basis.colPivHouseholderQr().solve(theta);
}

} // namespace assoclearn
