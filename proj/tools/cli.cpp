#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "assoclearn/interpreter.hpp"
#include "assoclearn/io.hpp"
#include "assoclearn/parallel.hpp"
#include "assoclearn/simulation.hpp"
#include "assoclearn/solver.hpp"

namespace assoclearn::cli {

namespace {

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream ss;
    ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return ss.str();
}

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& X) {
    Eigen::MatrixXd out(X.rows(), X.cols() + 1);
    out.col(0).setOnes();
    out.rightCols(X.cols()) = X;
    return out;
}

Dataset load_dataset(const std::string& x_path, const std::string& y_path, const ResponseLayout& layout,
                     bool intercept) {
    Eigen::MatrixXd X = read_csv(x_path).values;
    const Eigen::MatrixXd Y = responses_from_table(layout, read_csv(y_path).values, y_path);
    if (X.rows() != Y.rows()) {
        throw InputError(x_path + " has " + std::to_string(X.rows()) + " rows but " + y_path + " has " +
                         std::to_string(Y.rows()));
    }
    if (X.rows() == 0) throw InputError(x_path + ": no data rows");
    if (intercept) X = with_intercept(X);
    return Dataset::make(std::move(X), Y);
}

std::vector<std::string> column_names(const std::string& prefix, int count) {
    std::vector<std::string> out;
    for (int i = 0; i < count; ++i) out.push_back(prefix + std::to_string(i + 1));
    return out;
}

std::vector<std::string> count_header(const ResponseLayout& layout) {
    std::vector<std::string> out;
    for (int i = 0; i < layout.card(); ++i) {
        std::string label = cell_label(layout, i);
        std::replace(label.begin(), label.end(), '-', '_');
        out.push_back("y_" + label);
    }
    return out;
}

std::string effects_text(const std::vector<Effect>& effects) {
    std::string s;
    for (std::size_t i = 0; i < effects.size(); ++i) s += (i ? " " : "") + effects[i].to_string();
    return s;
}

struct FitArgs {
    std::string x, y, J, family = "mult", penalty = "group", grouping = "global", path, valid_x, valid_y,
        weights, out = "model.json", report, config;
    int d = -1;
    std::optional<double> lambda;
    std::uint64_t seed = 0;
    bool deterministic = false;
    bool intercept = false;
    int threads = 0;
    std::optional<double> tol;
    std::optional<int> max_iter;
};

int cmd_fit(const FitArgs& a, const CLI::App& sub, std::ostream& out, std::ostream& err) {
    const auto categories = parse_int_list(a.J, "--J");
    const auto layout = ResponseLayout::build(categories, a.d < 0 ? static_cast<int>(categories.size()) : a.d);

    SolverConfig cfg = a.config.empty() ? SolverConfig{} : parse_solver_toml(read_text_file(a.config));
    if (sub.count("--family") || a.config.empty()) cfg.family = parse_family(a.family);
    if (a.lambda) cfg.lambda = *a.lambda;
    if (a.tol) cfg.tol = *a.tol;
    if (a.max_iter) cfg.max_iter = *a.max_iter;
    if (!a.path.empty()) cfg.path = parse_path_spec(a.path);
    if (sub.count("--seed")) cfg.seed = a.seed;
    if (a.deterministic) cfg.deterministic = true;
    cfg.threads = a.threads > 0 ? a.threads : (cfg.deterministic ? 1 : thread_count());
    cfg.validate();
    const PenaltyMode mode = parse_penalty_mode(a.penalty);

    const Dataset train = load_dataset(a.x, a.y, layout, a.intercept);
    train.validate_for(cfg.family, layout);
    std::optional<Dataset> valid;
    if (!a.valid_x.empty() || !a.valid_y.empty()) {
        if (a.valid_x.empty() || a.valid_y.empty()) throw InputError("--valid-x and --valid-y go together");
        valid = load_dataset(a.valid_x, a.valid_y, layout, a.intercept);
        if (valid->p() != train.p()) throw InputError("validation X has a different column count");
    }

    GroupStructure gs(layout, parse_grouping(a.grouping, train.p()), mode);
    if (!a.weights.empty()) apply_weights_json(read_text_file(a.weights), gs);

    const BasisSet basis(layout);
    int status = kExitOk;
    std::optional<PathResult> path;
    std::optional<FitResult> chosen;
    if (cfg.lambda) {
        chosen = fit(train, basis, gs, cfg, *cfg.lambda);
    } else {
        path = fit_path(train, basis, gs, cfg, valid ? &*valid : nullptr);
        std::size_t pick = path->fits.size() - 1;
        if (path->selected) {
            pick = *path->selected;
        } else {
            err << "warning: no validation data; reporting the smallest lambda on the path\n";
            status = kExitWarning;
        }
        chosen = path->fits[pick];
    }

    TrainingInfo info{train.n(), train.p(), cfg.seed, utc_timestamp(), chosen->objective(),
                      chosen->iterations, chosen->converged, a.intercept};
    const ModelFile model = ModelFile::from_fit(*chosen, gs, info);
    write_model(a.out, model);
    if (!a.report.empty()) write_text_file(a.report, fit_report_json(*chosen, path ? &*path : nullptr));

    out << "family      " << to_string(cfg.family) << "\n"
        << "penalty     " << to_string(mode) << " (" << gs.partition().num_blocks() << " predictor blocks)\n"
        << "lambda      " << format_double(chosen->lambda) << (path ? " (selected from path)" : "") << "\n"
        << "objective   " << format_double(chosen->objective()) << "\n"
        << "iterations  " << chosen->iterations << (chosen->converged ? "" : " (not converged)") << "\n"
        << "support     " << effects_text(model.support) << "\n"
        << "model       " << a.out << "\n";
    if (chosen->validation_cross_entropy) {
        out << "validation  cross-entropy " << format_double(*chosen->validation_cross_entropy) << "\n";
    }
    if (chosen->diverged) {
        err << "warning: the objective diverged\n";
        status = kExitWarning;
    } else if (!chosen->converged) {
        err << "warning: solver stopped at max_iter before converging\n";
        status = kExitWarning;
    }
    return status;
}

int cmd_predict(const std::string& model_path, const std::string& x_path, const std::string& out_path,
                std::ostream& out) {
    const ModelFile model = read_model(model_path);
    Eigen::MatrixXd X = read_csv(x_path).values;
    if (model.training.intercept) X = with_intercept(X);
    if (X.cols() != model.beta.num_predictors()) {
        throw InputError(x_path + " gives " + std::to_string(X.cols()) + " predictors; the model expects " +
                         std::to_string(model.beta.num_predictors()));
    }
    const BasisSet basis(model.layout);
    const Eigen::MatrixXd probs = predict_probs_matrix(theta_from_beta(basis, model.beta), X);

    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw InputError("cannot write " + out_path);
    }
    std::ostream& dst = out_path.empty() ? out : file;
    const auto header = probability_header(model.layout);
    for (std::size_t c = 0; c < header.size(); ++c) dst << (c ? "," : "") << header[c];
    dst << '\n';
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        Eigen::Index best = 0;
        probs.row(i).maxCoeff(&best);
        for (Eigen::Index j = 0; j < probs.cols(); ++j) dst << format_double(probs(i, j)) << ',';
        dst << cell_label(model.layout, static_cast<int>(best)) << '\n';
    }
    return kExitOk;
}

int cmd_interpret(const std::string& model_path, const std::string& json_path, const std::string& format,
                  double tol, std::ostream& out, std::ostream& err) {
    const ModelFile model = read_model(model_path);
    const SupportPattern support = SupportPattern::from_beta(model.beta, tol);
    const IndependenceReport report = interpret(support);
    if (format == "json") {
        out << report_to_json(report);
    } else {
        out << "Support: " << effects_text(support.effects()) << "\n" << report.text();
    }
    if (!json_path.empty()) write_text_file(json_path, report_to_json(report));
    if (!report.hierarchy.ok) {
        err << "warning: fitted support violates the hierarchy (" << report.hierarchy.violations.size()
            << " missing lower-order effects)\n";
        return kExitWarning;
    }
    return kExitOk;
}

struct SimArgs {
    std::string config, out_dir;
    int scheme = 1;
    int n = 500;
    int p = 10;
    int replicate = 0;
    std::optional<std::uint64_t> seed;
};

int cmd_simulate(const SimArgs& a, std::ostream& out) {
    SimConfig cfg = a.config.empty() ? SimConfig{} : parse_study_toml(read_text_file(a.config));
    if (a.seed) cfg.seed = *a.seed;
    cfg.schemes = {a.scheme};
    cfg.p_grid = {a.p};
    cfg.n_grid = {a.n};
    cfg.validate();
    const auto layout = ResponseLayout::build(cfg.J, cfg.d);
    const BasisSet basis(layout);
    const SimulatedData data = simulate(cfg, basis, a.scheme, a.p, a.n, a.replicate);

    std::filesystem::create_directories(a.out_dir);
    const auto dir = std::filesystem::path(a.out_dir);
    const auto xh = column_names("x", a.p);
    const auto yh = count_header(layout);
    write_csv((dir / "train_x.csv").string(), xh, data.train.X);
    write_csv((dir / "train_y.csv").string(), yh, data.train.Y);
    write_csv((dir / "valid_x.csv").string(), xh, data.valid.X);
    write_csv((dir / "valid_y.csv").string(), yh, data.valid.Y);
    write_csv((dir / "test_x.csv").string(), xh, data.test.X);
    write_csv((dir / "test_y.csv").string(), yh, data.test.Y);
    auto ph = probability_header(layout);
    ph.pop_back();
    write_csv((dir / "test_probs.csv").string(), ph, data.test_probs);

    const GroupStructure gs(layout, PredictorPartition::local(a.p), PenaltyMode::GroupLasso);
    FitResult truth(data.beta_star);
    const TrainingInfo info{a.n, a.p, cfg.seed, "", 0.0, 0, true, false};
    write_model((dir / "beta_star.json").string(), ModelFile::from_fit(truth, gs, info));
    out << "wrote scheme " << a.scheme << " data (n=" << a.n << ", p=" << a.p << ") to " << a.out_dir << "\n";
    return kExitOk;
}

struct StudyArgs {
    std::string config, out_dir;
    int threads = 0;
    std::optional<int> replicates;
    bool full_scale = false;
    bool deterministic = false;
};

int cmd_study(const StudyArgs& a, std::ostream& out, std::ostream& err) {
    SimConfig cfg = a.config.empty() ? SimConfig{} : parse_study_toml(read_text_file(a.config));
    if (a.full_scale) {
        SimConfig full = SimConfig::full_scale();
        full.seed = cfg.seed;
        cfg = full;
    }
    if (a.replicates) cfg.replicates = *a.replicates;
    if (a.threads > 0) {
        cfg.threads = a.threads;
    } else if (a.config.empty()) {
        cfg.threads = thread_count();
    }
    if (a.deterministic) cfg.solver.deterministic = true;
    cfg.validate();

    const StudyResult result = run_study(cfg);
    std::filesystem::create_directories(a.out_dir);
    const auto dir = std::filesystem::path(a.out_dir);
    write_text_file((dir / "study.csv").string(), study_csv(result.rows));
    write_text_file((dir / "study.json").string(), study_json(result));
    write_text_file((dir / "records.csv").string(), records_csv(result.records));
    write_text_file((dir / "plot.csv").string(), plot_csv(result.rows));

    out << std::left << std::setw(8) << "scheme" << std::setw(6) << "p" << std::setw(7) << "n" << std::setw(10)
        << "estimator" << std::setw(12) << "hellinger" << std::setw(12) << "misclass" << "exact_support\n";
    for (const auto& r : result.rows) {
        out << std::left << std::setw(8) << r.scheme << std::setw(6) << r.p << std::setw(7) << r.n << std::setw(10)
            << to_string(r.estimator) << std::setw(12) << std::setprecision(4) << r.hellinger_mean << std::setw(12)
            << r.misclassification_mean << r.exact_support_rate << "\n";
    }
    int failures = 0;
    for (const auto& rec : result.records) {
        if (!rec.ok) {
            ++failures;
            err << "cell failed: scheme " << rec.scheme << " p " << rec.p << " n " << rec.n << " rep " << rec.replicate
                << " " << to_string(rec.estimator) << ": " << rec.error << "\n";
        }
    }
    out << "results in " << a.out_dir << "\n";
    return failures > 0 ? kExitWarning : kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Penalized multivariate categorical regression with interpretable association learning",
                 "assoclearn"};
    app.require_subcommand(1);

    FitArgs fa;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a model at one lambda or along a validated path");
    fit_cmd->add_option("--x", fa.x, "Predictor CSV (header row required)")->required();
    fit_cmd->add_option("--y", fa.y, "Response CSV: n x |J| counts or n x q 1-based codes")->required();
    fit_cmd->add_option("--J", fa.J, "Category counts, e.g. 2,2,2,3")->required();
    fit_cmd->add_option("--d", fa.d, "Maximum effect order (default q)");
    fit_cmd->add_option("--family", fa.family, "mult or pois");
    fit_cmd->add_option("--penalty", fa.penalty, "group or overlap");
    fit_cmd->add_option("--grouping", fa.grouping, "global, local or blocks=<sizes>");
    fit_cmd->add_option("--lambda", fa.lambda, "Single penalty level");
    fit_cmd->add_option("--path", fa.path, "Path spec, e.g. n=50,ratio=1e-4");
    fit_cmd->add_option("--valid-x", fa.valid_x, "Validation predictors");
    fit_cmd->add_option("--valid-y", fa.valid_y, "Validation responses");
    fit_cmd->add_option("--weights", fa.weights, "JSON weight overrides");
    fit_cmd->add_option("--out", fa.out, "Model file to write");
    fit_cmd->add_option("--report", fa.report, "Fit report JSON to write");
    fit_cmd->add_option("--config", fa.config, "Solver TOML");
    fit_cmd->add_option("--seed", fa.seed, "Recorded seed");
    fit_cmd->add_option("--threads", fa.threads, "Worker threads");
    fit_cmd->add_option("--tol", fa.tol, "Relative objective tolerance");
    fit_cmd->add_option("--max-iter", fa.max_iter, "Iteration cap");
    fit_cmd->add_flag("--deterministic", fa.deterministic, "Single-order reductions");
    fit_cmd->add_flag("--intercept", fa.intercept, "Prepend a column of ones to X");
    fit_cmd->get_option("--lambda")->excludes("--path");

    std::string model_path, x_path, out_path;
    auto* predict_cmd = app.add_subcommand("predict", "Category probabilities for new predictors");
    predict_cmd->add_option("--model", model_path, "Model file")->required();
    predict_cmd->add_option("--x", x_path, "Predictor CSV")->required();
    predict_cmd->add_option("--out", out_path, "Output CSV (default stdout)");

    std::string interp_model, json_path, format = "text";
    double support_tol = 0.0;
    auto* interp_cmd = app.add_subcommand("interpret", "Independence structure implied by a fitted support");
    interp_cmd->add_option("--model", interp_model, "Model file")->required();
    interp_cmd->add_option("--json", json_path, "Write the JSON report here");
    interp_cmd->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));
    interp_cmd->add_option("--tol", support_tol, "Treat |beta| <= tol as zero");

    SimArgs sa;
    auto* sim_cmd = app.add_subcommand("simulate", "Write one simulated replicate to CSV");
    sim_cmd->add_option("--config", sa.config, "Study TOML");
    sim_cmd->add_option("--scheme", sa.scheme, "1, 2 or 3");
    sim_cmd->add_option("--n", sa.n, "Training rows");
    sim_cmd->add_option("--p", sa.p, "Design columns including the intercept");
    sim_cmd->add_option("--replicate", sa.replicate, "Replicate index");
    sim_cmd->add_option("--seed", sa.seed, "Master seed");
    sim_cmd->add_option("--out-dir", sa.out_dir, "Output directory")->required();

    StudyArgs st;
    auto* study_cmd = app.add_subcommand("study", "Run the simulation study");
    study_cmd->add_option("--config", st.config, "Study TOML");
    study_cmd->add_option("--out-dir", st.out_dir, "Output directory")->required();
    study_cmd->add_option("--threads", st.threads, "Worker threads");
    study_cmd->add_option("--replicates", st.replicates, "Override the replicate count");
    study_cmd->add_flag("--full-scale", st.full_scale, "100 replicates, N_test = 10000, full grids");
    study_cmd->add_flag("--deterministic", st.deterministic, "Single-order reductions");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInputError;
    }

    try {
        if (*fit_cmd) return cmd_fit(fa, *fit_cmd, out, err);
        if (*predict_cmd) return cmd_predict(model_path, x_path, out_path, out);
        if (*interp_cmd) return cmd_interpret(interp_model, json_path, format, support_tol, out, err);
        if (*sim_cmd) return cmd_simulate(sa, out);
        if (*study_cmd) return cmd_study(st, out, err);
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitInputError;
}

} // namespace assoclearn::cli
