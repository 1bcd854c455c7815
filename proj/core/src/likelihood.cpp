#include "assoclearn/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "assoclearn/parallel.hpp"

namespace assoclearn {

std::string to_string(ModelFamily family) {
    return family == ModelFamily::Multinomial ? "multinomial" : "poisson";
}

ModelFamily parse_family(const std::string& name) {
    if (name == "mult" || name == "multinomial") return ModelFamily::Multinomial;
    if (name == "pois" || name == "poisson") return ModelFamily::Poisson;
    throw InputError("unknown family '" + name + "' (expected mult or pois)");
}

Eigen::MatrixXd identifiability_projector(ModelFamily family, int card) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(card, card);
    if (family == ModelFamily::Multinomial) p.array() -= 1.0 / card;
    return p;
}

Dataset Dataset::make(Eigen::MatrixXd X, Eigen::MatrixXd Y) {
    if (X.rows() != Y.rows()) {
        throw InputError("X has " + std::to_string(X.rows()) + " rows but Y has " +
                         std::to_string(Y.rows()));
    }
    if (X.rows() == 0) throw InputError("dataset is empty");
    if (!X.allFinite()) throw InputError("X contains non-finite values");
    for (Eigen::Index i = 0; i < Y.rows(); ++i) {
        for (Eigen::Index j = 0; j < Y.cols(); ++j) {
            const double v = Y(i, j);
            if (!std::isfinite(v) || v < 0 || v != std::floor(v)) {
                throw InputError("Y row " + std::to_string(i + 1) + " column " +
                                 std::to_string(j + 1) + " is not a nonnegative integer count");
            }
        }
    }
    Dataset d;
    d.trials = Y.rowwise().sum();
    d.X = std::move(X);
    d.Y = std::move(Y);
    return d;
}

void Dataset::validate_for(ModelFamily family, const ResponseLayout& layout) const {
    if (Y.cols() != layout.card()) {
        throw InputError("Y has " + std::to_string(Y.cols()) + " columns but |J|=" +
                         std::to_string(layout.card()));
    }
    if (family == ModelFamily::Multinomial) {
        for (Eigen::Index i = 0; i < trials.size(); ++i) {
            if (trials(i) < 1) {
                throw InputError("row " + std::to_string(i + 1) +
                                 " has zero trials; multinomial fitting needs n_i >= 1");
            }
        }
    }
}

namespace {

constexpr Eigen::Index kChunkRows = 512;

struct ChunkResult {
    double loss = 0.0;
    bool diverged = false;
    Eigen::MatrixXd grad_theta;
};

} // namespace

Objective::Objective(const BasisSet& basis, const Dataset& data, ModelFamily family, int threads)
    : basis_(basis), data_(data), family_(family), threads_(threads) {
    data_.validate_for(family_, basis_.layout());
    xt_ = data_.X.transpose();
    yt_ = data_.Y.transpose();
}

LossEvaluation Objective::evaluate(const Eigen::MatrixXd& beta, Eigen::MatrixXd* grad) const {
    const Eigen::MatrixXd theta = basis_.H() * beta;
    if (!theta.allFinite()) throw std::domain_error("non-finite coefficients");
    const Eigen::Index n = xt_.cols();
    const Eigen::Index chunks = (n + kChunkRows - 1) / kChunkRows;
    std::vector<ChunkResult> parts(static_cast<std::size_t>(chunks));

    parallel_for(parts.size(), threads_, [&](std::size_t c) {
        const Eigen::Index r0 = static_cast<Eigen::Index>(c) * kChunkRows;
        const Eigen::Index rows = std::min(kChunkRows, n - r0);
        const auto Xc = xt_.middleCols(r0, rows);
        const auto Yc = yt_.middleCols(r0, rows);
        // One sample per column.
        Eigen::MatrixXd eta = theta * Xc;
        ChunkResult& out = parts[c];
        for (Eigen::Index i = 0; i < rows; ++i) {
            auto col = eta.col(i);
            const double linear = Yc.col(i).dot(col);
            if (family_ == ModelFamily::Multinomial) {
                const double shift = col.maxCoeff();
                col.array() = (col.array() - shift).exp();
                const double total = col.sum();
                const double ni = data_.trials(r0 + i);
                out.loss += -linear + ni * (shift + std::log(total));
                col *= ni / total;
            } else {
                for (Eigen::Index j = 0; j < col.size(); ++j) {
                    if (col(j) > kExpCap) {
                        out.diverged = true;
                        col(j) = kExpCap;
                    }
                    col(j) = std::exp(col(j));
                }
                out.loss += -linear + col.sum();
            }
        }
        if (grad != nullptr) {
            eta -= Yc;
            out.grad_theta.noalias() = eta * Xc.transpose();
        }
    });

    LossEvaluation result;
    Eigen::MatrixXd grad_theta;
    if (grad != nullptr) grad_theta = Eigen::MatrixXd::Zero(theta.rows(), theta.cols());
    for (const auto& part : parts) {
        result.value += part.loss;
        result.diverged = result.diverged || part.diverged;
        if (grad != nullptr) grad_theta += part.grad_theta;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    result.value *= inv_n;
    if (grad != nullptr) *grad = basis_.H().transpose() * (grad_theta * inv_n);
    return result;
}

double mult_loss(const CoefficientBlocks& beta, const BasisSet& basis, const Dataset& data) {
    return Objective(basis, data, ModelFamily::Multinomial).evaluate(beta.stacked()).value;
}

double pois_loss(const CoefficientBlocks& beta, const BasisSet& basis, const Dataset& data) {
    const auto eval = Objective(basis, data, ModelFamily::Poisson).evaluate(beta.stacked());
    if (eval.diverged) throw std::overflow_error("Poisson mean exceeds the exponent cap");
    return eval.value;
}

double loss(const CoefficientBlocks& beta, const BasisSet& basis, const Dataset& data,
            ModelFamily family) {
    return family == ModelFamily::Multinomial ? mult_loss(beta, basis, data)
                                              : pois_loss(beta, basis, data);
}

CoefficientBlocks gradient(const CoefficientBlocks& beta, const BasisSet& basis,
                           const Dataset& data, ModelFamily family) {
    Eigen::MatrixXd g;
    const auto eval = Objective(basis, data, family).evaluate(beta.stacked(), &g);
    if (eval.diverged) throw std::overflow_error("Poisson mean exceeds the exponent cap");
    return CoefficientBlocks(beta.layout(), beta.partition(), std::move(g));
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& eta) {
    Eigen::MatrixXd out = eta;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        auto row = out.row(i);
        row.array() = (row.array() - row.maxCoeff()).exp();
        row /= row.sum();
    }
    return out;
}

Eigen::MatrixXd predict_probs_matrix(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& X) {
    return softmax_rows(X * theta.transpose());
}

ProbabilityVector predict_probs(const CoefficientBlocks& beta, const BasisSet& basis,
                                const Eigen::VectorXd& x) {
    if (x.size() != beta.num_predictors()) throw InputError("predictor vector has wrong length");
    const Eigen::MatrixXd theta = theta_from_beta(basis, beta);
    return softmax_rows((theta * x).transpose()).transpose();
}

double cross_entropy(const Eigen::MatrixXd& probs, const Eigen::MatrixXd& Y) {
    if (probs.rows() != Y.rows() || probs.cols() != Y.cols()) {
        throw InputError("probability and count matrices differ in shape");
    }
    constexpr double floor = std::numeric_limits<double>::min();
    double total = 0.0;
    for (Eigen::Index i = 0; i < Y.rows(); ++i) {
        for (Eigen::Index j = 0; j < Y.cols(); ++j) {
            if (Y(i, j) > 0) total -= Y(i, j) * std::log(std::max(probs(i, j), floor));
        }
    }
    return total / static_cast<double>(Y.rows());
}

double lipschitz_bound(const Dataset& data) {
    if (data.X.rows() == 0) throw InputError("dataset is empty");
    const Eigen::MatrixXd gram =
        data.X.transpose() * data.trials.asDiagonal() * data.X;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().maxCoeff() / (2.0 * static_cast<double>(data.X.rows()));
}

} // namespace assoclearn
