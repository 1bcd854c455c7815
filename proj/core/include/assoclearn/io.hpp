#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "assoclearn/interpreter.hpp"
#include "assoclearn/penalty.hpp"
#include "assoclearn/simulation.hpp"
#include "assoclearn/solver.hpp"

namespace assoclearn {

/// A numeric CSV with a mandatory header row.
struct CsvTable {
    std::vector<std::string> header;
    Eigen::MatrixXd values;
};

/// Parses comma-separated numbers. Errors name the source, line and column.
CsvTable parse_csv(std::istream& in, const std::string& source = "<input>");
CsvTable read_csv(const std::string& path);

void write_csv(std::ostream& out, const std::vector<std::string>& header, const Eigen::MatrixXd& values);
void write_csv(const std::string& path, const std::vector<std::string>& header, const Eigen::MatrixXd& values);

/// Shortest decimal that reads back to the same double.
std::string format_double(double v);

/// Y given either as n × |J| counts or as n × q 1-based category codes (converted to one-hot
/// counts in vec_J order).
Eigen::MatrixXd responses_from_table(const ResponseLayout& layout, const Eigen::MatrixXd& table,
                                     const std::string& source = "<input>");

/// "2,2,2,3" → {2,2,2,3}.
std::vector<int> parse_int_list(const std::string& text, const std::string& what);

/// "global", "local" or "blocks=1,9".
PredictorPartition parse_grouping(const std::string& text, int p);

/// "n=50,ratio=1e-4[,patience=5]".
PathSpec parse_path_spec(const std::string& text);

struct TrainingInfo {
    int n = 0;
    int p = 0;
    std::uint64_t seed = 0;
    std::string created;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    /// A column of ones was prepended to X before fitting.
    bool intercept = false;
};

inline constexpr int kModelFormatVersion = 1;

struct ModelFile {
    int version = kModelFormatVersion;
    ResponseLayout layout;
    ModelFamily family = ModelFamily::Multinomial;
    PenaltyMode mode = PenaltyMode::GroupLasso;
    PredictorPartition partition;
    std::vector<double> weights;
    double lambda = 0.0;
    CoefficientBlocks beta;
    std::vector<Effect> support;
    TrainingInfo training;

    static ModelFile from_fit(const FitResult& fit, const GroupStructure& gs, const TrainingInfo& info);
    GroupStructure groups() const;
};

std::string model_to_json(const ModelFile& model);
/// Throws InputError on malformed content or an unsupported version.
ModelFile model_from_json(const std::string& text);
void write_model(const std::string& path, const ModelFile& model);
ModelFile read_model(const std::string& path);

/// Applies [{"effect":[1,2],"block":1,"weight":0.5}, ...] (1-based responses and blocks;
/// "effect":[] is {0}). Returns the number of overrides.
int apply_weights_json(const std::string& text, GroupStructure& gs);

/// Keys: family, lambda, tol, max_iter, backtrack, acceleration, restart, lipschitz_step,
/// deterministic, seed, threads and a [path] table (count, ratio, patience).
SolverConfig parse_solver_toml(const std::string& text, SolverConfig base = {});

/// Keys: J, d, n, p, schemes, n_valid, n_test, replicates, seed, estimators, generating,
/// threads, full_scale, plus [signal] and [solver] tables.
SimConfig parse_study_toml(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// Fit summary with the objective trace; path details when given.
std::string fit_report_json(const FitResult& fit, const PathResult* path = nullptr);
std::string report_to_json(const IndependenceReport& report);

/// One MetricsRow per line. Timing is excluded so fixed seeds give identical files.
std::string study_csv(const std::vector<MetricsRow>& rows);
std::string records_csv(const std::vector<ReplicateRecord>& records);
std::string study_json(const StudyResult& result);
/// Long-format plot data: estimator, scheme, p, n, metric, value.
std::string plot_csv(const std::vector<MetricsRow>& rows);

/// Probability CSV header: pi_1_1_1_1 ... (1-based category tuples) then "argmax".
std::vector<std::string> probability_header(const ResponseLayout& layout);
/// "1-1-2-3" for a vec_J index.
std::string cell_label(const ResponseLayout& layout, int index);

} // namespace assoclearn
