#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "assoclearn/basis.hpp"
#include "assoclearn/interpreter.hpp"
#include "assoclearn/likelihood.hpp"
#include "assoclearn/solver.hpp"

namespace assoclearn {

/// Magnitudes for the generating coefficients: every nonzero entry is ±U[min, max].
struct SignalSpec {
    double min_magnitude = 0.5;
    double max_magnitude = 1.5;
    /// Randomly chosen predictor columns (besides the intercept) carrying the effects.
    int active_predictors = 2;
};

enum class Estimator { OMult, OPois, LMult, LPois, GMult, GPois, SepMult, Oracle };

std::string to_string(Estimator e);
Estimator parse_estimator(const std::string& name);
std::vector<Estimator> all_estimators();

struct SimConfig {
    std::vector<int> J{2, 2, 2, 3};
    int d = 4;
    std::vector<int> n_grid{100, 500, 2000};
    /// Columns of the design, including the leading intercept column.
    std::vector<int> p_grid{10};
    std::vector<int> schemes{1, 2, 3};
    int n_valid = 1000;
    int n_test = 2000;
    int replicates = 20;
    std::uint64_t seed = 20240601;
    SignalSpec signal;
    std::vector<Estimator> estimators = all_estimators();
    /// Solver settings shared by every fitted estimator; family and λ are set per fit.
    SolverConfig solver = default_solver();
    /// Training responses drawn from this family. Poisson generation is off by default.
    ModelFamily generating = ModelFamily::Multinomial;
    int threads = 1;

    static SolverConfig default_solver();
    /// 100 replicates, N_test = 10000 and the full n / p grids.
    static SimConfig full_scale();
    void validate() const;
};

/// Rows i.i.d. N_p(0, Σ) with Σ_jk = 0.5^|j−k|.
Eigen::MatrixXd gen_predictors(int n, int p, std::uint64_t seed);

/// Σ_jk = 0.5^|j−k|.
Eigen::MatrixXd ar1_covariance(int p, double rho = 0.5);

/// Effects of the generating model for Scheme 1 (mains), 2 (adds {2,3},{2,4},{3,4},{2,3,4})
/// and 3 (adds {1,4} as well). Needs q = 4.
std::vector<Effect> scheme_effects(int scheme);

/// β* on the local partition of p columns: nonzero only on the scheme's effects, column 0
/// (intercept) and `active_predictors` seeded random columns.
CoefficientBlocks gen_scheme_beta(int scheme, const ResponseLayout& layout, int p, std::uint64_t seed,
                                  const SignalSpec& signal = {});

/// Multinomial: one draw per row from softmax(θx). Poisson: independent counts with mean e^{θx}.
/// Throws std::overflow_error if a Poisson log-mean exceeds kExpCap.
Eigen::MatrixXd sample_responses(const Eigen::MatrixXd& X, const CoefficientBlocks& beta_star,
                                 const BasisSet& basis, ModelFamily family, std::uint64_t seed);

/// (1/√2) ‖√p − √r‖₂.
double hellinger(const Eigen::VectorXd& p, const Eigen::VectorXd& r);

/// Average row-wise Hellinger distance.
double mean_hellinger(const Eigen::MatrixXd& p, const Eigen::MatrixXd& r);

/// Fraction of rows whose argmax (lowest index on ties) differs from the realized category.
/// Rows of Y with several nonzero cells use their largest count.
double misclassification(const Eigen::MatrixXd& probs, const Eigen::MatrixXd& Y);
double misclassification(const CoefficientBlocks& beta_hat, const BasisSet& basis, const Dataset& test);

struct SupportScore {
    double tpr = 0.0;
    double fpr = 0.0;
    bool exact = false;
};

/// Effect-level recovery, ignoring {0}.
SupportScore score_support(const std::vector<Effect>& estimated, const std::vector<Effect>& truth,
                           const ResponseLayout& layout);

/// Marginal counts of response l (n × J_l).
Eigen::MatrixXd marginal_counts(const ResponseLayout& layout, const Eigen::MatrixXd& Y, int response);

/// Per-response penalized multinomial fits whose product gives the joint pmf.
struct SepMultFit {
    std::vector<int> categories;
    std::vector<FitResult> marginals;

    /// n × |J| joint probabilities in vec_J order.
    Eigen::MatrixXd probs(const Eigen::MatrixXd& X) const;
};

/// Fits each response with a local group lasso (d = 1). With a validation set each path is
/// tuned on its own marginal cross-entropy, which minimizes the joint product's cross-entropy.
SepMultFit sep_mult_baseline(const Dataset& train, const ResponseLayout& layout,
                             const SolverConfig& config, const Dataset* validation = nullptr);

/// One replicate's data: training rows are a prefix of the largest-n draw so smaller n are
/// nested in larger ones.
struct SimulatedData {
    CoefficientBlocks beta_star;
    Dataset train;
    Dataset valid;
    Dataset test;
    /// π*(x) for each test row.
    Eigen::MatrixXd test_probs;
};

SimulatedData simulate(const SimConfig& config, const BasisSet& basis, int scheme, int p, int n_train,
                       int replicate);

/// Seed for one (scheme, p, replicate, stream) tuple.
std::uint64_t stream_seed(std::uint64_t seed, int scheme, int p, int replicate, int stream);

struct ReplicateRecord {
    int scheme = 0;
    int p = 0;
    int n = 0;
    int replicate = 0;
    Estimator estimator = Estimator::Oracle;
    bool ok = true;
    std::string error;
    double hellinger = 0.0;
    double misclassification = 0.0;
    double cross_entropy = 0.0;
    double tpr = 0.0;
    double fpr = 0.0;
    bool exact_support = false;
    double lambda = 0.0;
    int iterations = 0;
    double seconds = 0.0;
};

struct MetricsRow {
    Estimator estimator = Estimator::Oracle;
    int scheme = 0;
    int p = 0;
    int n = 0;
    int replicates = 0;
    int failures = 0;
    double hellinger_mean = 0.0;
    double hellinger_sd = 0.0;
    double hellinger_median = 0.0;
    double misclassification_mean = 0.0;
    double misclassification_sd = 0.0;
    double misclassification_median = 0.0;
    double cross_entropy_mean = 0.0;
    double cross_entropy_sd = 0.0;
    double tpr_mean = 0.0;
    double fpr_mean = 0.0;
    double exact_support_rate = 0.0;
};

struct StudyResult {
    SimConfig config;
    std::vector<ReplicateRecord> records;
    std::vector<MetricsRow> rows;

    const MetricsRow* find(Estimator e, int scheme, int p, int n) const;
};

/// Fits every estimator on every (scheme, p, n, replicate) cell. Failures are recorded per
/// record and the study continues. Output ordering does not depend on the thread count.
StudyResult run_study(const SimConfig& config);

/// Aggregates records sorted by (scheme, p, n, estimator, replicate).
std::vector<MetricsRow> aggregate(std::vector<ReplicateRecord> records);

} // namespace assoclearn
