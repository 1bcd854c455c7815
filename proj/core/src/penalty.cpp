#include "assoclearn/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace assoclearn {

std::string to_string(PenaltyMode mode) {
    return mode == PenaltyMode::GroupLasso ? "group" : "overlap";
}

PenaltyMode parse_penalty_mode(const std::string& name) {
    if (name == "group") return PenaltyMode::GroupLasso;
    if (name == "overlap") return PenaltyMode::OverlappingHierarchical;
    throw InputError("unknown penalty '" + name + "' (expected group or overlap)");
}

GroupStructure::GroupStructure(ResponseLayout layout, PredictorPartition partition,
                               PenaltyMode mode)
    : layout_(std::move(layout)), partition_(std::move(partition)), mode_(mode) {
    const int num_effects = layout_.num_effects();
    members_.resize(num_effects);
    for (int e = 0; e < num_effects; ++e) {
        if (mode_ == PenaltyMode::GroupLasso) {
            members_[e] = {e};
            continue;
        }
        const Effect k = layout_.effects()[e];
        for (int f = 0; f < num_effects; ++f) {
            if (k.is_subset_of(layout_.effects()[f])) members_[e].push_back(f);
        }
    }
    weights_ = default_weights(*this);

    for (int g = 0; g < num_groups(); ++g) {
        if (exists(g)) sweep_order_.push_back(g);
    }
    std::stable_sort(sweep_order_.begin(), sweep_order_.end(), [&](int a, int b) {
        return members_[effect_of(a)].size() > members_[effect_of(b)].size();
    });
}

void GroupStructure::set_weight(int group, double w) {
    if (group < 0 || group >= num_groups()) throw InputError("group index out of range");
    if (!std::isfinite(w) || w < 0) {
        throw InputError("penalty weights must be finite and nonnegative");
    }
    weights_[group] = w;
}

void GroupStructure::set_all_weights(double w) {
    for (int g = 0; g < num_groups(); ++g) set_weight(g, w);
}

bool GroupStructure::exists(int group) const {
    return !(mode_ == PenaltyMode::OverlappingHierarchical &&
             layout_.effects()[effect_of(group)].is_overall());
}

double GroupStructure::group_norm(const Eigen::MatrixXd& beta, int group) const {
    const int j = block_of(group);
    double sq = 0.0;
    for (int f : members_[effect_of(group)]) {
        sq += beta.block(layout_.offset(f), partition_.offset(j), layout_.dim(f), partition_.size(j))
                  .squaredNorm();
    }
    return std::sqrt(sq);
}

std::vector<double> default_weights(const GroupStructure& gs) {
    std::vector<double> w(static_cast<std::size_t>(gs.num_groups()), 0.0);
    for (int g = 0; g < gs.num_groups(); ++g) {
        const int e = gs.effect_of(g);
        if (gs.layout().effects()[e].is_overall()) continue;
        w[g] = std::sqrt(static_cast<double>(gs.layout().dim(e)) * gs.partition().size(gs.block_of(g)));
    }
    return w;
}

double omega(const Eigen::MatrixXd& beta, const GroupStructure& gs) {
    double total = 0.0;
    for (int g = 0; g < gs.num_groups(); ++g) {
        if (gs.penalized(g)) total += gs.weight(g) * gs.group_norm(beta, g);
    }
    return total;
}

double omega(const CoefficientBlocks& beta, const GroupStructure& gs) {
    return omega(beta.stacked(), gs);
}

std::vector<double> thresholds(const GroupStructure& gs, double scale) {
    std::vector<double> t(static_cast<std::size_t>(gs.num_groups()), 0.0);
    for (int g = 0; g < gs.num_groups(); ++g) {
        if (gs.exists(g)) t[g] = scale * gs.weight(g);
    }
    return t;
}

namespace {

void check_thresholds(std::span<const double> t, const GroupStructure& gs) {
    if (static_cast<int>(t.size()) != gs.num_groups()) {
        throw InputError("expected one threshold per group");
    }
    for (double v : t) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("prox thresholds must be nonnegative");
    }
}

auto block_of_matrix(Eigen::MatrixXd& m, const GroupStructure& gs, int effect, int j) {
    return m.block(gs.layout().offset(effect), gs.partition().offset(j), gs.layout().dim(effect),
                   gs.partition().size(j));
}

int member_rows(const GroupStructure& gs, int group) {
    int rows = 0;
    for (int f : gs.members(gs.effect_of(group))) rows += gs.layout().dim(f);
    return rows;
}

Eigen::MatrixXd gather(const Eigen::MatrixXd& beta, const GroupStructure& gs, int group) {
    const int j = gs.block_of(group);
    Eigen::MatrixXd out(member_rows(gs, group), gs.partition().size(j));
    int row = 0;
    for (int f : gs.members(gs.effect_of(group))) {
        const int d = gs.layout().dim(f);
        out.middleRows(row, d) =
            beta.block(gs.layout().offset(f), gs.partition().offset(j), d, gs.partition().size(j));
        row += d;
    }
    return out;
}

void scatter(Eigen::MatrixXd& beta, const GroupStructure& gs, int group, const Eigen::MatrixXd& v) {
    const int j = gs.block_of(group);
    int row = 0;
    for (int f : gs.members(gs.effect_of(group))) {
        const int d = gs.layout().dim(f);
        block_of_matrix(beta, gs, f, j) = v.middleRows(row, d);
        row += d;
    }
}

std::vector<double> existing_only(std::span<const double> t, const GroupStructure& gs) {
    std::vector<double> out(t.begin(), t.end());
    for (int g = 0; g < gs.num_groups(); ++g) {
        if (!gs.exists(g)) out[g] = 0.0;
    }
    return out;
}

void project_to_ball(Eigen::MatrixXd& v, double radius) {
    const double norm = v.norm();
    if (norm > radius) v *= (norm > 0.0 ? radius / norm : 0.0);
}

} // namespace

Eigen::MatrixXd prox_group(const Eigen::MatrixXd& z, std::span<const double> t,
                           const GroupStructure& gs) {
    if (gs.mode() != PenaltyMode::GroupLasso) throw InputError("prox_group needs group lasso mode");
    check_thresholds(t, gs);
    Eigen::MatrixXd out = z;
    for (int g = 0; g < gs.num_groups(); ++g) {
        if (t[g] == 0.0) continue;
        auto block = block_of_matrix(out, gs, gs.effect_of(g), gs.block_of(g));
        const double norm = block.norm();
        if (norm <= t[g]) {
            block.setZero();
        } else {
            block *= 1.0 - t[g] / norm;
        }
    }
    return out;
}

CoefficientBlocks prox_group(const CoefficientBlocks& z, std::span<const double> t,
                             const GroupStructure& gs) {
    return CoefficientBlocks(z.layout(), z.partition(), prox_group(z.stacked(), t, gs));
}

OverlapProxResult prox_overlap(const Eigen::MatrixXd& z, std::span<const double> t_in,
                               const GroupStructure& gs, const OverlapDuals* warm,
                               const OverlapProxOptions& options) {
    if (gs.mode() != PenaltyMode::OverlappingHierarchical) {
        throw InputError("prox_overlap needs the hierarchical mode");
    }
    check_thresholds(t_in, gs);
    const auto t = existing_only(t_in, gs);
    const auto& layout = gs.layout();
    const auto& partition = gs.partition();

    // Stacked row indices of every effect's member set.
    std::vector<std::vector<int>> rows_of(static_cast<std::size_t>(layout.num_effects()));
    for (int e = 0; e < layout.num_effects(); ++e) {
        for (int f : gs.members(e)) {
            for (int r = 0; r < layout.dim(f); ++r) rows_of[e].push_back(layout.offset(f) + r);
        }
    }

    OverlapProxResult result;
    auto& xi = result.duals.xi;
    xi.resize(static_cast<std::size_t>(gs.num_groups()));
    const bool use_warm = warm != nullptr && warm->xi.size() == xi.size();
    for (int g = 0; g < gs.num_groups(); ++g) {
        const int rows = static_cast<int>(rows_of[gs.effect_of(g)].size());
        const int cols = partition.size(gs.block_of(g));
        if (use_warm && warm->xi[g].rows() == rows && warm->xi[g].cols() == cols && t[g] > 0.0) {
            xi[g] = warm->xi[g];
            project_to_ball(xi[g], t[g]);
        } else {
            xi[g] = Eigen::MatrixXd::Zero(rows, cols);
        }
    }

    result.beta = z;
    result.converged = true;
    result.passes = 0;
    Eigen::MatrixXd r;
    for (int j = 0; j < partition.num_blocks(); ++j) {
        // Groups of different predictor blocks do not interact.
        std::vector<int> order;
        for (int g : gs.sweep_order()) {
            if (gs.block_of(g) == j && t[g] > 0.0) order.push_back(g);
        }
        if (order.empty()) continue;
        Eigen::MatrixXd b = z.middleCols(partition.offset(j), partition.size(j));
        for (int g : order) b(rows_of[gs.effect_of(g)], Eigen::all) -= xi[g];

        bool converged = false;
        int pass = 1;
        for (; pass <= options.max_passes; ++pass) {
            double change = 0.0;
            for (int g : order) {
                const auto& idx = rows_of[gs.effect_of(g)];
                r = b(idx, Eigen::all);
                r += xi[g];
                const double norm = r.norm();
                const double keep = norm > t[g] ? t[g] / norm : 1.0;
                // new dual = keep * r; primal = (1 - keep) * r
                change = std::max(change, (keep * r - xi[g]).cwiseAbs().maxCoeff());
                xi[g] = keep * r;
                b(idx, Eigen::all) = (1.0 - keep) * r;
            }
            if (change <= options.tol) {
                converged = true;
                break;
            }
        }
        result.passes = std::max(result.passes, std::min(pass, options.max_passes));
        result.converged = result.converged && converged;

        // Inactive groups (‖r_g‖ ≤ t_g) have β_{M(g)} = 0 at the optimum; finish them exactly.
        // Degenerate groups on the boundary converge slowly and keep a small residue otherwise.
        for (int g : order) {
            const auto& idx = rows_of[gs.effect_of(g)];
            r = b(idx, Eigen::all);
            r += xi[g];
            const double norm = r.norm();
            if (norm <= t[g] + std::max(10.0 * options.tol, options.snap) * std::max(1.0, t[g])) {
                xi[g] = norm > t[g] ? Eigen::MatrixXd((t[g] / norm) * r) : r;
                b(idx, Eigen::all).setZero();
            }
        }
        result.beta.middleCols(partition.offset(j), partition.size(j)) = b;
    }
    return result;
}

double overlap_optimality_residual(const Eigen::MatrixXd& z, const Eigen::MatrixXd& beta,
                                   const OverlapDuals& duals, std::span<const double> t_in,
                                   const GroupStructure& gs) {
    check_thresholds(t_in, gs);
    const auto t = existing_only(t_in, gs);
    if (static_cast<int>(duals.xi.size()) != gs.num_groups()) {
        throw InputError("dual count does not match groups");
    }
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(z.rows(), z.cols());
    double residual = 0.0;
    for (int g = 0; g < gs.num_groups(); ++g) {
        const Eigen::MatrixXd& xi = duals.xi[g];
        if (t[g] == 0.0) {
            residual = std::max(residual, xi.cwiseAbs().maxCoeff());
            continue;
        }
        Eigen::MatrixXd acc = gather(sum, gs, g) + xi;
        scatter(sum, gs, g, acc);
        residual = std::max(residual, xi.norm() - t[g]);
        const Eigen::MatrixXd b = gather(beta, gs, g);
        const double bn = b.norm();
        if (bn > 0.0) residual = std::max(residual, (xi - (t[g] / bn) * b).cwiseAbs().maxCoeff());
    }
    residual = std::max(residual, (z - beta - sum).cwiseAbs().maxCoeff());
    return residual;
}

double group_optimality_residual(const Eigen::MatrixXd& z, const Eigen::MatrixXd& beta,
                                 std::span<const double> t, const GroupStructure& gs) {
    check_thresholds(t, gs);
    Eigen::MatrixXd diff = z - beta;
    Eigen::MatrixXd b = beta;
    double residual = 0.0;
    for (int g = 0; g < gs.num_groups(); ++g) {
        auto dg = block_of_matrix(diff, gs, gs.effect_of(g), gs.block_of(g));
        auto bg = block_of_matrix(b, gs, gs.effect_of(g), gs.block_of(g));
        const double bn = bg.norm();
        if (bn > 0.0) {
            residual = std::max(residual, (dg - (t[g] / bn) * bg).norm());
        } else {
            residual = std::max(residual, dg.norm() - t[g]);
        }
    }
    return residual;
}

Eigen::MatrixXd prox(const Eigen::MatrixXd& z, double scale, const GroupStructure& gs,
                     OverlapDuals* duals) {
    const auto t = thresholds(gs, scale);
    if (gs.mode() == PenaltyMode::GroupLasso) return prox_group(z, t, gs);
    auto result = prox_overlap(z, t, gs, duals);
    if (duals != nullptr) *duals = std::move(result.duals);
    return std::move(result.beta);
}

} // namespace assoclearn
