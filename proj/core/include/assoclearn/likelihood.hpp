#pragma once

#include <string>

#include <Eigen/Dense>

#include "assoclearn/basis.hpp"
#include "assoclearn/coefficients.hpp"

namespace assoclearn {

enum class ModelFamily { Multinomial, Poisson };

std::string to_string(ModelFamily family);
ModelFamily parse_family(const std::string& name);

/// P_V: the centering projector for Multinomial, identity for Poisson.
Eigen::MatrixXd identifiability_projector(ModelFamily family, int card);

/// Predictors X (n × p), counts Y (n × |J|, vec_J order) and trial totals n_i.
struct Dataset {
    Eigen::MatrixXd X;
    Eigen::MatrixXd Y;
    Eigen::VectorXd trials;

    /// Validates finiteness, nonnegative integral counts and computes n_i.
    static Dataset make(Eigen::MatrixXd X, Eigen::MatrixXd Y);

    int n() const { return static_cast<int>(X.rows()); }
    int p() const { return static_cast<int>(X.cols()); }

    /// Throws InputError if Y does not match the layout or n_i = 0 under Multinomial.
    void validate_for(ModelFamily family, const ResponseLayout& layout) const;
};

/// Category probabilities in vec_J order.
using ProbabilityVector = Eigen::VectorXd;

/// Exponent arguments above this are clamped and the evaluation flagged as diverged.
inline constexpr double kExpCap = 700.0;

struct LossEvaluation {
    double value = 0.0;
    bool diverged = false;
};

/// Loss and gradient evaluator on the stacked β matrix. The sample sum is split into fixed
/// chunks reduced in a fixed order, so results do not depend on the thread count.
class Objective {
public:
    Objective(const BasisSet& basis, const Dataset& data, ModelFamily family, int threads = 1);

    ModelFamily family() const { return family_; }
    const BasisSet& basis() const { return basis_; }
    const Dataset& data() const { return data_; }

    /// Loss at β; if grad is non-null it receives the gradient (same shape as β).
    LossEvaluation evaluate(const Eigen::MatrixXd& beta, Eigen::MatrixXd* grad = nullptr) const;

private:
    const BasisSet& basis_;
    const Dataset& data_;
    ModelFamily family_;
    int threads_;
    Eigen::MatrixXd xt_;
    Eigen::MatrixXd yt_;
};

/// n⁻¹ Σ_i [−⟨y_i, θx_i⟩ + n_i log⟨1, exp(θx_i)⟩], θ = Hβ.
double mult_loss(const CoefficientBlocks& beta, const BasisSet& basis, const Dataset& data);

/// n⁻¹ Σ_i [−⟨y_i, θx_i⟩ + ⟨1, exp(θx_i)⟩]. Throws std::overflow_error past the exponent cap.
double pois_loss(const CoefficientBlocks& beta, const BasisSet& basis, const Dataset& data);

double loss(const CoefficientBlocks& beta, const BasisSet& basis, const Dataset& data,
            ModelFamily family);

/// Hᵀ[n⁻¹ Σ_i (m_i − y_i) x_iᵀ] with m_i = n_i softmax(θx_i) or exp(θx_i).
CoefficientBlocks gradient(const CoefficientBlocks& beta, const BasisSet& basis,
                           const Dataset& data, ModelFamily family);

/// softmax(θx). Both families map to category probabilities this way.
ProbabilityVector predict_probs(const CoefficientBlocks& beta, const BasisSet& basis,
                                const Eigen::VectorXd& x);

/// softmax of each row of η (n × |J|), computed with a per-row max shift.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& eta);

/// Probabilities for every row of X (n × |J|).
Eigen::MatrixXd predict_probs_matrix(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& X);

/// Mean of −Σ_j y_ij log π_ij over rows.
double cross_entropy(const Eigen::MatrixXd& probs, const Eigen::MatrixXd& Y);

/// Multinomial curvature bound (2n)⁻¹ λ_max(Xᵀ diag(n_i) X); equals (2n)⁻¹λ_max(XᵀX) when n_i = 1.
double lipschitz_bound(const Dataset& data);

} // namespace assoclearn
