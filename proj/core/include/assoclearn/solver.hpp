#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "assoclearn/basis.hpp"
#include "assoclearn/likelihood.hpp"
#include "assoclearn/penalty.hpp"

namespace assoclearn {

/// Log-spaced λ grid from λ_max down to ratio·λ_max.
struct PathSpec {
    int count = 50;
    double ratio = 1e-4;
    /// Stop the path once validation cross-entropy has been above its running minimum
    /// for this many consecutive λ values. 0 fits the whole grid.
    int patience = 0;
};

struct SolverConfig {
    ModelFamily family = ModelFamily::Multinomial;
    std::optional<double> lambda;
    PathSpec path;
    double tol = 1e-8;
    int max_iter = 5000;
    /// Backtracking growth factor η for the curvature estimate L.
    double backtrack = 2.0;
    bool acceleration = true;
    bool restart = true;
    /// Start multinomial fits at L = lipschitz_bound; otherwise start at L = 1.
    bool lipschitz_step = true;
    bool deterministic = true;
    std::uint64_t seed = 0;
    int threads = 1;

    /// Throws InputError on λ < 0, tol <= 0, η <= 1 or an invalid path spec.
    void validate() const;
};

struct FitResult {
    explicit FitResult(CoefficientBlocks b) : beta(std::move(b)) {}

    CoefficientBlocks beta;
    double lambda = 0.0;
    ModelFamily family = ModelFamily::Multinomial;
    PenaltyMode mode = PenaltyMode::GroupLasso;
    /// Objective after every accepted step; entry 0 is the starting point.
    std::vector<double> objective_trace;
    int iterations = 0;
    bool converged = false;
    bool diverged = false;
    /// Curvature estimate L in force at termination.
    double step_lipschitz = 0.0;
    /// (effect index, predictor block) pairs with β_{k,j} ≠ 0.
    std::vector<std::pair<int, int>> support;
    double seconds = 0.0;
    std::optional<double> validation_cross_entropy;

    double objective() const { return objective_trace.empty() ? 0.0 : objective_trace.back(); }
};

/// Minimizes L_n(β) + λ Ω(β) by accelerated proximal gradient with backtracking.
/// Under Multinomial the {0} block is held at zero.
FitResult fit(const Dataset& data, const BasisSet& basis, const GroupStructure& gs,
              const SolverConfig& config, double lambda,
              const CoefficientBlocks* warm_start = nullptr);

/// Uses config.lambda, which must be set.
FitResult fit(const Dataset& data, const BasisSet& basis, const GroupStructure& gs,
              const SolverConfig& config);

/// Smallest λ with all penalized groups at zero: max_g ‖∇_g‖ / w_g at the fit of the
/// unpenalized blocks. A conservative bound for the hierarchical mode.
double lambda_max(const Dataset& data, const BasisSet& basis, const GroupStructure& gs,
                  const SolverConfig& config);

struct PathResult {
    std::vector<double> lambdas;
    std::vector<FitResult> fits;
    std::optional<std::size_t> selected;
    int total_iterations = 0;
};

std::vector<double> lambda_grid(double lambda_max, const PathSpec& spec);

/// Fits the grid from the largest λ down. Warm-started fits run sequentially; cold fits may
/// run in parallel. With a validation set the fit minimizing validation cross-entropy is
/// selected.
PathResult fit_path(const Dataset& train, const BasisSet& basis, const GroupStructure& gs,
                    const SolverConfig& config, const Dataset* validation = nullptr,
                    bool warm_start = true);

/// Violation of −∇L_n(β) ∈ λ∂Ω(β). Exact blockwise subgradient distance for the group lasso;
/// the unit-step gradient-mapping norm ‖β − prox_{λΩ}(β − ∇)‖ for the hierarchical mode.
double kkt_residual(const CoefficientBlocks& beta, const BasisSet& basis, const Dataset& data,
                    const GroupStructure& gs, ModelFamily family, double lambda);

/// Nonzero (effect, block) pairs of β.
std::vector<std::pair<int, int>> block_support(const CoefficientBlocks& beta);

} // namespace assoclearn
