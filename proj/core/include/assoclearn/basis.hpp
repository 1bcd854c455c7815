#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Dense>

#include "assoclearn/coefficients.hpp"
#include "assoclearn/layout.hpp"

namespace assoclearn {

/// Produces an m × (m-1) matrix U with [m^{-1/2} 1, U] orthogonal.
using Completion = std::function<Eigen::MatrixXd(int m)>;

/// Helmert-style completion: column c (1-based) is (1,...,1,-c,0,...)/sqrt(c(c+1)).
Eigen::MatrixXd helmert_complement(int m);

/// Helmert completion rotated by a seeded random orthogonal (m-1)×(m-1) matrix.
Completion rotated_helmert(std::uint64_t seed);

/// H_k = V_q ⊗ ... ⊗ V_1 with V_i = U_{J_i} for i in k and J_i^{-1/2} 1 otherwise.
Eigen::MatrixXd basis_matrix(const ResponseLayout& layout, Effect k,
                             const Completion& completion = helmert_complement);

Eigen::MatrixXd kronecker(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// The orthonormal bases {H_k} for a layout and their horizontal stack H.
/// Immutable after construction.
class BasisSet {
public:
    explicit BasisSet(ResponseLayout layout, const Completion& completion = helmert_complement);

    const ResponseLayout& layout() const { return layout_; }
    const Eigen::MatrixXd& H() const { return stacked_; }
    auto H_k(int effect_index) const {
        return stacked_.middleCols(layout_.offset(effect_index), layout_.dim(effect_index));
    }

private:
    ResponseLayout layout_;
    Eigen::MatrixXd stacked_;
};

/// θ = Hβ, a |J| × p matrix.
Eigen::MatrixXd theta_from_beta(const BasisSet& basis, const CoefficientBlocks& beta);

/// β = Hᵀθ. Exact inverse of theta_from_beta when d = q; otherwise the projection coefficients.
CoefficientBlocks beta_from_theta(const BasisSet& basis, const Eigen::MatrixXd& theta,
                                  const PredictorPartition& partition);

/// Reference level dropped by a corner-constraint (log-linear) parameterization.
enum class CornerReference { First, Last };

/// Non-orthogonal corner-constraint basis: V_i = [e_2..e_m] (First) or [e_1..e_{m-1}] (Last)
/// for i in k, and the unnormalized ones vector otherwise.
Eigen::MatrixXd corner_basis(const ResponseLayout& layout, CornerReference reference);

/// Coefficients of θ in an arbitrary full-column-rank basis (least squares).
Eigen::MatrixXd coefficients_in_basis(const Eigen::MatrixXd& basis, const Eigen::MatrixXd& theta);

} // namespace assoclearn
