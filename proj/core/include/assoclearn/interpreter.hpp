#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "assoclearn/basis.hpp"
#include "assoclearn/coefficients.hpp"

namespace assoclearn {

/// Effects present in a fitted model. The overall effect {0} is always part of the pattern:
/// under the multinomial family it is absorbed by normalization rather than estimated.
class SupportPattern {
public:
    SupportPattern(int num_responses, std::vector<Effect> effects);

    /// Effects with some |β_{k,j}| > tol (tol = 0 keeps exact nonzeros), plus per-block supports.
    static SupportPattern from_beta(const CoefficientBlocks& beta, double tol = 0.0);

    int num_responses() const { return q_; }
    const std::vector<Effect>& effects() const { return effects_; }
    bool contains(Effect k) const;
    /// Highest effect order present.
    int max_order_present() const;

    /// Supports restricted to each predictor block (empty when built from an effect list).
    const std::vector<std::vector<Effect>>& block_effects() const { return block_effects_; }

private:
    int q_;
    std::vector<Effect> effects_;
    std::vector<std::vector<Effect>> block_effects_;
};

struct HierarchyViolation {
    Effect present;
    Effect missing;
};

struct HierarchyCheck {
    bool ok = true;
    std::vector<HierarchyViolation> violations;
};

/// Downward closure check: every nonempty proper subset of a present effect (and {0}) present.
HierarchyCheck check_hierarchy(const std::vector<Effect>& effects);
HierarchyCheck check_hierarchy(const SupportPattern& support);

/// Blocks of 0-based response indices, each sorted, ordered by their smallest member.
using ResponsePartition = std::vector<std::vector<int>>;

/// Connected components of the interaction graph (edge a–b when a present effect of order ≥ 2
/// contains both): the finest partition whose blocks contain every present effect.
ResponsePartition joint_independence_partition(const SupportPattern& support);

struct ConditionalStatement {
    /// Components of the interaction graph after deleting the conditioning set (≥ 2 of them).
    ResponsePartition separated;
    std::vector<int> given;
    /// No nonempty proper subset of `given` separates the remaining responses.
    bool minimal = true;

    std::string text() const;
};

inline constexpr int kMaxConditionalResponses = 8;

/// All vertex-deletion separations of the interaction graph, smallest conditioning sets first.
/// Throws InputError when q exceeds kMaxConditionalResponses.
std::vector<ConditionalStatement> conditional_independence_statements(const SupportPattern& support);

struct IndependenceReport {
    int num_responses = 0;
    ResponsePartition partition;
    std::vector<ConditionalStatement> conditional;
    HierarchyCheck hierarchy;
    std::vector<Effect> effects;

    bool mutual() const;
    /// Plain-text rendering, e.g. "Z1 ⊥ {Z2,Z3,Z4} | X".
    std::string text() const;
};

IndependenceReport interpret(const SupportPattern& support);

/// "Z1 ⊥ {Z2,Z3} ⊥ Z4 | X" style rendering of a partition.
std::string partition_text(const ResponsePartition& partition);

/// Marginal pmf over `keep` (sorted 0-based responses), first kept response fastest.
std::vector<double> marginal_pmf(const ResponseLayout& layout, std::span<const double> pmf,
                                 std::span<const int> keep);

/// Position of a full cell in the marginal over `keep`.
int marginal_index(const ResponseLayout& layout, std::span<const int> cell, std::span<const int> keep);

/// max_j |π_j(x) − Π_l π_{j_{I_l},+}(x)|.
double verify_factorization(const CoefficientBlocks& beta, const BasisSet& basis,
                            const Eigen::VectorXd& x, const ResponsePartition& partition);

/// max over cells with π_C > 0 of |π(j_{rest} | j_C) − Π_l π(j_{I_l} | j_C)|.
double verify_conditional_factorization(const CoefficientBlocks& beta, const BasisSet& basis,
                                        const Eigen::VectorXd& x, const ResponsePartition& separated,
                                        std::span<const int> given);

} // namespace assoclearn
