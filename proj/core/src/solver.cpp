#include "assoclearn/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "assoclearn/parallel.hpp"

namespace assoclearn {

void SolverConfig::validate() const {
    if (lambda && !(*lambda >= 0.0 && std::isfinite(*lambda))) {
        throw InputError("lambda must be finite and nonnegative");
    }
    if (!(tol > 0.0)) throw InputError("tol must be positive");
    if (max_iter < 1) throw InputError("max_iter must be at least 1");
    if (!(backtrack > 1.0)) throw InputError("backtracking factor must exceed 1");
    if (path.count < 1) throw InputError("path count must be at least 1");
    if (!(path.ratio > 0.0 && path.ratio <= 1.0)) throw InputError("path ratio must lie in (0, 1]");
    if (path.patience < 0) throw InputError("path patience must be nonnegative");
    if (threads < 1) throw InputError("threads must be at least 1");
}

namespace {

constexpr int kConvergedStreak = 3;
constexpr int kMaxBacktracks = 200;

/// 1 where a coefficient is optimized, 0 where it is held at its initial value.
Eigen::MatrixXd free_mask(const GroupStructure& gs, ModelFamily family,
                          const std::vector<char>& frozen_groups) {
    const auto& layout = gs.layout();
    const auto& partition = gs.partition();
    Eigen::MatrixXd mask = Eigen::MatrixXd::Ones(layout.total_dim(), partition.total());
    for (int g = 0; g < gs.num_groups(); ++g) {
        const int e = gs.effect_of(g);
        const bool overall_mult =
            family == ModelFamily::Multinomial && layout.effects()[e].is_overall();
        const bool frozen = !frozen_groups.empty() && frozen_groups[g];
        if (overall_mult || frozen) {
            mask.block(layout.offset(e), partition.offset(gs.block_of(g)), layout.dim(e),
                       partition.size(gs.block_of(g)))
                .setZero();
        }
    }
    return mask;
}

struct Point {
    Eigen::MatrixXd beta;
    double loss = 0.0;
    Eigen::MatrixXd grad;
    bool has_grad = false;
};

FitResult fit_impl(const Dataset& data, const BasisSet& basis, const GroupStructure& gs,
                   const SolverConfig& config, double lambda, const CoefficientBlocks* warm,
                   const std::vector<char>& frozen_groups) {
    config.validate();
    if (!(lambda >= 0.0 && std::isfinite(lambda))) throw InputError("lambda must be nonnegative");
    if (!(gs.layout() == basis.layout())) throw InputError("group structure layout mismatch");
    if (gs.partition().total() != data.p()) {
        throw InputError("predictor partition covers " + std::to_string(gs.partition().total()) +
                         " columns but X has " + std::to_string(data.p()));
    }
    const auto start_time = std::chrono::steady_clock::now();
    const Objective objective(basis, data, config.family, config.threads);
    const Eigen::MatrixXd mask = free_mask(gs, config.family, frozen_groups);

    Eigen::MatrixXd init = Eigen::MatrixXd::Zero(basis.layout().total_dim(), data.p());
    if (warm != nullptr) {
        if (warm->stacked().rows() != init.rows() || warm->stacked().cols() != init.cols()) {
            throw InputError("warm start has wrong shape");
        }
        init = warm->stacked();
    }
    if (config.family == ModelFamily::Multinomial) {
        init = init.cwiseProduct(free_mask(gs, config.family, {}));
    }
    const Eigen::MatrixXd held = init.cwiseProduct(Eigen::MatrixXd::Ones(mask.rows(), mask.cols()) - mask);

    auto penalty = [&](const Eigen::MatrixXd& b) { return lambda > 0.0 ? lambda * omega(b, gs) : 0.0; };
    auto evaluate = [&](Point& pt, bool with_grad) {
        const auto eval = objective.evaluate(pt.beta, with_grad ? &pt.grad : nullptr);
        pt.loss = eval.diverged ? std::numeric_limits<double>::infinity() : eval.value;
        if (with_grad) {
            pt.grad = pt.grad.cwiseProduct(mask);
            pt.has_grad = true;
        }
        return !eval.diverged;
    };

    FitResult result(CoefficientBlocks(basis.layout(), gs.partition()));
    result.lambda = lambda;
    result.family = config.family;
    result.mode = gs.mode();

    Point x;
    x.beta = init;
    if (!evaluate(x, true)) {
        result.beta.stacked() = x.beta;
        result.diverged = true;
        result.objective_trace.push_back(std::numeric_limits<double>::infinity());
        return result;
    }
    double fx = x.loss + penalty(x.beta);
    result.objective_trace.push_back(fx);

    double L = 1.0;
    if (config.family == ModelFamily::Multinomial && config.lipschitz_step) {
        L = lipschitz_bound(data);
        if (!(L > 0.0)) L = 1.0;
    }

    OverlapDuals duals;
    OverlapDuals* duals_ptr = gs.mode() == PenaltyMode::OverlappingHierarchical ? &duals : nullptr;
    Point y = x;
    bool y_is_x = true;
    double t = 1.0;
    int streak = 0;

    for (int it = 1; it <= config.max_iter; ++it) {
        result.iterations = it;
        Point z;
        bool accepted_curvature = false;
        for (int bt = 0; bt < kMaxBacktracks; ++bt) {
            z.beta = prox(y.beta - y.grad / L, lambda / L, gs, duals_ptr).cwiseProduct(mask) + held;
            const bool finite = evaluate(z, false);
            const Eigen::MatrixXd diff = z.beta - y.beta;
            const double model = y.loss + y.grad.cwiseProduct(diff).sum() + 0.5 * L * diff.squaredNorm();
            if (finite && z.loss <= model + 1e-12 * (1.0 + std::abs(y.loss))) {
                accepted_curvature = true;
                break;
            }
            L *= config.backtrack;
        }
        if (!accepted_curvature) {
            result.diverged = true;
            break;
        }
        const double fz = z.loss + penalty(z.beta);

        if (fz > fx) {
            if (!y_is_x && config.restart) {
                // Momentum overshot: restart from the last accepted iterate.
                if (!x.has_grad) evaluate(x, true);
                y = x;
                y_is_x = true;
                t = 1.0;
                continue;
            }
            if (y_is_x) {
                // A plain step that fails to descend means we are at numerical precision.
                result.converged = true;
                break;
            }
        }

        const double previous = fx;
        Point x_prev = std::move(x);
        x = std::move(z);
        fx = fz;
        result.objective_trace.push_back(fx);

        if (config.acceleration) {
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            y.beta = x.beta + ((t - 1.0) / t_next) * (x.beta - x_prev.beta);
            t = t_next;
            y_is_x = false;
            if (!evaluate(y, true)) {
                evaluate(x, true);
                y = x;
                y_is_x = true;
                t = 1.0;
            }
        } else {
            evaluate(x, true);
            y = x;
            y_is_x = true;
        }

        const double rel = std::abs(previous - fx) / std::max(1.0, std::abs(fx));
        streak = rel <= config.tol ? streak + 1 : 0;
        if (streak >= kConvergedStreak) {
            result.converged = true;
            break;
        }
    }

    result.beta.stacked() = std::move(x.beta);
    result.step_lipschitz = L;
    result.support = block_support(result.beta);
    result.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
    return result;
}

} // namespace

std::vector<std::pair<int, int>> block_support(const CoefficientBlocks& beta) {
    std::vector<std::pair<int, int>> support;
    for (int e = 0; e < beta.layout().num_effects(); ++e) {
        for (int j = 0; j < beta.partition().num_blocks(); ++j) {
            if ((beta.block(e, j).array() != 0.0).any()) support.emplace_back(e, j);
        }
    }
    return support;
}

FitResult fit(const Dataset& data, const BasisSet& basis, const GroupStructure& gs,
              const SolverConfig& config, double lambda, const CoefficientBlocks* warm_start) {
    return fit_impl(data, basis, gs, config, lambda, warm_start, {});
}

FitResult fit(const Dataset& data, const BasisSet& basis, const GroupStructure& gs,
              const SolverConfig& config) {
    if (!config.lambda) throw InputError("solver config has no lambda");
    return fit(data, basis, gs, config, *config.lambda);
}

double lambda_max(const Dataset& data, const BasisSet& basis, const GroupStructure& gs,
                  const SolverConfig& config) {
    std::vector<char> frozen(static_cast<std::size_t>(gs.num_groups()), 0);
    bool any_penalized = false;
    bool any_free = false;
    for (int g = 0; g < gs.num_groups(); ++g) {
        frozen[g] = gs.penalized(g) ? 1 : 0;
        any_penalized = any_penalized || gs.penalized(g);
        const bool overall_mult = config.family == ModelFamily::Multinomial &&
                                  gs.layout().effects()[gs.effect_of(g)].is_overall();
        any_free = any_free || (!gs.penalized(g) && !overall_mult);
    }
    if (!any_penalized) throw InputError("lambda_max undefined: every group has zero weight");

    Eigen::MatrixXd beta0 = Eigen::MatrixXd::Zero(basis.layout().total_dim(), data.p());
    if (any_free) {
        SolverConfig inner = config;
        inner.tol = std::min(config.tol, 1e-12);
        beta0 = fit_impl(data, basis, gs, inner, 0.0, nullptr, frozen).beta.stacked();
    }
    Eigen::MatrixXd grad;
    const auto eval = Objective(basis, data, config.family, config.threads).evaluate(beta0, &grad);
    if (eval.diverged) throw std::overflow_error("lambda_max: unpenalized fit diverged");

    const auto& layout = gs.layout();
    const auto& partition = gs.partition();
    double lmax = 0.0;
    for (int g = 0; g < gs.num_groups(); ++g) {
        if (!gs.penalized(g)) continue;
        const int e = gs.effect_of(g);
        const int j = gs.block_of(g);
        const double norm =
            grad.block(layout.offset(e), partition.offset(j), layout.dim(e), partition.size(j)).norm();
        lmax = std::max(lmax, norm / gs.weight(g));
    }
    // Rounded up slightly so that a fit at exactly the returned value is empty after the
    // prox step's own rounding.
    return lmax * (1.0 + 1e-10);
}

std::vector<double> lambda_grid(double lmax, const PathSpec& spec) {
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(spec.count));
    for (int i = 0; i < spec.count; ++i) {
        const double frac = spec.count == 1 ? 0.0 : static_cast<double>(i) / (spec.count - 1);
        grid.push_back(lmax * std::pow(spec.ratio, frac));
    }
    return grid;
}

PathResult fit_path(const Dataset& train, const BasisSet& basis, const GroupStructure& gs,
                    const SolverConfig& config, const Dataset* validation, bool warm_start) {
    config.validate();
    PathResult path;
    path.lambdas = lambda_grid(lambda_max(train, basis, gs, config), config.path);

    auto score = [&](FitResult& f) {
        if (validation == nullptr) return;
        const Eigen::MatrixXd theta = basis.H() * f.beta.stacked();
        f.validation_cross_entropy =
            cross_entropy(predict_probs_matrix(theta, validation->X), validation->Y);
    };

    if (warm_start) {
        double best = std::numeric_limits<double>::infinity();
        int worse = 0;
        for (double lam : path.lambdas) {
            const CoefficientBlocks* warm = path.fits.empty() ? nullptr : &path.fits.back().beta;
            path.fits.push_back(fit(train, basis, gs, config, lam, warm));
            score(path.fits.back());
            if (validation != nullptr && config.path.patience > 0) {
                const double ce = *path.fits.back().validation_cross_entropy;
                if (ce < best) {
                    best = ce;
                    worse = 0;
                } else if (++worse >= config.path.patience) {
                    break;
                }
            }
        }
        path.lambdas.resize(path.fits.size());
    } else {
        path.fits.resize(path.lambdas.size(), FitResult(CoefficientBlocks(basis.layout(), gs.partition())));
        SolverConfig inner = config;
        inner.threads = 1;
        parallel_for(path.lambdas.size(), config.deterministic ? 1 : config.threads, [&](std::size_t i) {
            path.fits[i] = fit(train, basis, gs, inner, path.lambdas[i]);
            score(path.fits[i]);
        });
    }

    for (const auto& f : path.fits) path.total_iterations += f.iterations;
    if (validation != nullptr && !path.fits.empty()) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < path.fits.size(); ++i) {
            if (*path.fits[i].validation_cross_entropy < *path.fits[best].validation_cross_entropy) best = i;
        }
        path.selected = best;
    }
    return path;
}

double kkt_residual(const CoefficientBlocks& beta, const BasisSet& basis, const Dataset& data,
                    const GroupStructure& gs, ModelFamily family, double lambda) {
    Eigen::MatrixXd grad;
    const auto eval = Objective(basis, data, family).evaluate(beta.stacked(), &grad);
    if (eval.diverged) return std::numeric_limits<double>::infinity();
    grad = grad.cwiseProduct(free_mask(gs, family, {}));

    if (gs.mode() == PenaltyMode::OverlappingHierarchical) {
        const Eigen::MatrixXd stepped = prox(beta.stacked() - grad, lambda, gs);
        return (beta.stacked() - stepped).norm();
    }
    const auto& layout = gs.layout();
    const auto& partition = gs.partition();
    double residual = 0.0;
    for (int g = 0; g < gs.num_groups(); ++g) {
        const int e = gs.effect_of(g);
        const int j = gs.block_of(g);
        const auto gg = grad.block(layout.offset(e), partition.offset(j), layout.dim(e), partition.size(j));
        const auto bg = beta.block(e, j);
        const double w = lambda * gs.weight(g);
        const double bn = bg.norm();
        if (bn > 0.0) {
            residual = std::max(residual, (gg + (w / bn) * bg).norm());
        } else {
            residual = std::max(residual, gg.norm() - w);
        }
    }
    return residual;
}

} // namespace assoclearn
