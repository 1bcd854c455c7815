#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "assoclearn/coefficients.hpp"

namespace assoclearn {

enum class PenaltyMode { GroupLasso, OverlappingHierarchical };

std::string to_string(PenaltyMode mode);
PenaltyMode parse_penalty_mode(const std::string& name);

/// The group set G = K × [t] with weights, and for the hierarchical mode the member sets
/// M(k, j) = {(k', j) : k ⊆ k'}. Group g = effect * t + block.
class GroupStructure {
public:
    /// Weights default to √(|k|_J p_j), with 0 for the overall effect.
    GroupStructure(ResponseLayout layout, PredictorPartition partition, PenaltyMode mode);

    const ResponseLayout& layout() const { return layout_; }
    const PredictorPartition& partition() const { return partition_; }
    PenaltyMode mode() const { return mode_; }

    int num_groups() const { return layout_.num_effects() * partition_.num_blocks(); }
    int group_index(int effect, int block) const { return effect * partition_.num_blocks() + block; }
    int effect_of(int group) const { return group / partition_.num_blocks(); }
    int block_of(int group) const { return group % partition_.num_blocks(); }

    double weight(int group) const { return weights_[group]; }
    const std::vector<double>& weights() const { return weights_; }
    /// Rejects negative or non-finite weights.
    void set_weight(int group, double w);
    void set_all_weights(double w);

    /// False for groups rooted at {0} in the hierarchical mode (they would cover everything).
    bool exists(int group) const;
    /// Exists and carries a positive weight.
    bool penalized(int group) const { return exists(group) && weights_[group] > 0.0; }

    /// Effect indices covered by a group rooted at `effect`: {effect} for the group lasso,
    /// all supersets (including itself) for the hierarchical mode.
    const std::vector<int>& members(int effect) const { return members_[effect]; }

    /// Existing groups, larger member sets first; the sweep order of the overlap prox.
    const std::vector<int>& sweep_order() const { return sweep_order_; }

    /// Euclidean norm of β restricted to the members of a group.
    double group_norm(const Eigen::MatrixXd& beta, int group) const;

private:
    ResponseLayout layout_;
    PredictorPartition partition_;
    PenaltyMode mode_;
    std::vector<double> weights_;
    std::vector<std::vector<int>> members_;
    std::vector<int> sweep_order_;
};

/// w_{k,j} = √(|k|_J · p_j), w_{{0},j} = 0.
std::vector<double> default_weights(const GroupStructure& gs);

/// Σ_g w_g ‖β_{M(g)}‖.
double omega(const Eigen::MatrixXd& beta, const GroupStructure& gs);
double omega(const CoefficientBlocks& beta, const GroupStructure& gs);

/// Blockwise soft thresholding max(1 − t_g/‖z_g‖, 0) z_g. One threshold per group.
Eigen::MatrixXd prox_group(const Eigen::MatrixXd& z, std::span<const double> thresholds,
                           const GroupStructure& gs);
CoefficientBlocks prox_group(const CoefficientBlocks& z, std::span<const double> thresholds,
                             const GroupStructure& gs);

/// Dual variables ξ_g of the overlap prox, one (|M(g)| rows × p_j) matrix per group.
struct OverlapDuals {
    std::vector<Eigen::MatrixXd> xi;
    bool empty() const { return xi.empty(); }
};

struct OverlapProxResult {
    Eigen::MatrixXd beta;
    OverlapDuals duals;
    int passes = 0;
    bool converged = false;
};

struct OverlapProxOptions {
    double tol = 1e-10;
    int max_passes = 10000;
    /// Groups within snap·max(1, t) of their ball are finished with an exact zero.
    double snap = 5e-9;
};

/// argmin ½‖β − z‖² + Σ_g t_g ‖β_{M(g)}‖ by cyclic block-coordinate ascent on the dual.
/// `warm` (optional) seeds the duals; they are projected onto the new balls first.
OverlapProxResult prox_overlap(const Eigen::MatrixXd& z, std::span<const double> thresholds,
                               const GroupStructure& gs, const OverlapDuals* warm = nullptr,
                               const OverlapProxOptions& options = {});

/// Certificate for prox_overlap: max violation of z − β = Σ ξ_g, ‖ξ_g‖ ≤ t_g and
/// ξ_g = t_g β_{M(g)}/‖β_{M(g)}‖ on groups with β_{M(g)} ≠ 0.
double overlap_optimality_residual(const Eigen::MatrixXd& z, const Eigen::MatrixXd& beta,
                                   const OverlapDuals& duals, std::span<const double> thresholds,
                                   const GroupStructure& gs);

/// Blockwise subgradient violation of z − β ∈ ∂(Σ t_g‖β_g‖)(β) for the group lasso.
double group_optimality_residual(const Eigen::MatrixXd& z, const Eigen::MatrixXd& beta,
                                 std::span<const double> thresholds, const GroupStructure& gs);

/// Prox of scale·Ω in either mode; thresholds are scale·w_g.
Eigen::MatrixXd prox(const Eigen::MatrixXd& z, double scale, const GroupStructure& gs,
                     OverlapDuals* duals = nullptr);

/// Per-group thresholds scale·w_g (0 for groups that do not exist).
std::vector<double> thresholds(const GroupStructure& gs, double scale);

} // namespace assoclearn
