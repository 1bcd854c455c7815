#include "assoclearn/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "toml.hpp"

namespace assoclearn {

using Json = nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

Json effect_json(Effect k) {
    Json a = Json::array();
    for (int r : k.responses()) a.push_back(r + 1);
    return a;
}

Effect effect_from_json(const Json& j, int q) {
    if (!j.is_array()) throw InputError("effect must be an array of 1-based response indices");
    std::uint32_t mask = 0;
    for (const auto& v : j) {
        const int r = v.get<int>();
        if (r < 1 || r > q) throw InputError("effect member " + std::to_string(r) + " outside 1.." + std::to_string(q));
        mask |= 1u << (r - 1);
    }
    return Effect::from_mask(mask);
}

int effect_index_checked(const ResponseLayout& layout, Effect k) {
    const int e = layout.index_of(k);
    if (e < 0) throw InputError("effect " + k.to_string() + " is not in the layout");
    return e;
}

} // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

CsvTable parse_csv(std::istream& in, const std::string& source) {
    CsvTable table;
    std::string line;
    int line_no = 0;
    bool have_header = false;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (trim(line).empty()) continue;
        auto cells = split(line, ',');
        if (!have_header) {
            for (auto& c : cells) table.header.push_back(trim(c));
            have_header = true;
            continue;
        }
        if (cells.size() != table.header.size()) {
            throw InputError(source + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(table.header.size()) + " columns, found " +
                             std::to_string(cells.size()));
        }
        std::vector<double> row;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string cell = trim(cells[c]);
            double v = 0.0;
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size() || !std::isfinite(v)) {
                throw InputError(source + ":" + std::to_string(line_no) + ":" + std::to_string(c + 1) +
                                 ": not a finite number: '" + cell + "'");
            }
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    if (!have_header) throw InputError(source + ": missing header row");
    table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(table.header.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < rows[i].size(); ++c) table.values(i, c) = rows[i][c];
    }
    return table;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    return parse_csv(in, path);
}

void write_csv(std::ostream& out, const std::vector<std::string>& header, const Eigen::MatrixXd& values) {
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index c = 0; c < values.cols(); ++c) out << (c ? "," : "") << format_double(values(i, c));
        out << '\n';
    }
}

void write_csv(const std::string& path, const std::vector<std::string>& header, const Eigen::MatrixXd& values) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    write_csv(out, header, values);
}

Eigen::MatrixXd responses_from_table(const ResponseLayout& layout, const Eigen::MatrixXd& table,
                                     const std::string& source) {
    if (table.cols() == layout.card()) return table;
    if (table.cols() != layout.num_responses()) {
        throw InputError(source + ": Y has " + std::to_string(table.cols()) + " columns; expected |J| = " +
                         std::to_string(layout.card()) + " counts or q = " +
                         std::to_string(layout.num_responses()) + " category codes");
    }
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(table.rows(), layout.card());
    std::vector<int> cell(static_cast<std::size_t>(layout.num_responses()));
    for (Eigen::Index i = 0; i < table.rows(); ++i) {
        for (int l = 0; l < layout.num_responses(); ++l) {
            const double v = table(i, l);
            if (v != std::floor(v) || v < 1 || v > layout.categories()[l]) {
                throw InputError(source + ":" + std::to_string(i + 2) + ":" + std::to_string(l + 1) +
                                 ": category code must be an integer in 1.." +
                                 std::to_string(layout.categories()[l]));
            }
            cell[l] = static_cast<int>(v) - 1;
        }
        counts(i, layout.cell_index(cell)) = 1.0;
    }
    return counts;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
    std::vector<int> out;
    for (const auto& part : split(text, ',')) {
        const std::string t = trim(part);
        int v = 0;
        const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
        if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
            throw InputError(what + ": '" + t + "' is not an integer");
        }
        out.push_back(v);
    }
    if (out.empty()) throw InputError(what + ": empty list");
    return out;
}

PredictorPartition parse_grouping(const std::string& text, int p) {
    if (text == "global") return PredictorPartition::global(p);
    if (text == "local") return PredictorPartition::local(p);
    if (text.rfind("blocks=", 0) == 0) {
        PredictorPartition part(parse_int_list(text.substr(7), "--grouping blocks"));
        if (part.total() != p) {
            throw InputError("--grouping blocks sum to " + std::to_string(part.total()) + " but X has " +
                             std::to_string(p) + " columns");
        }
        return part;
    }
    throw InputError("--grouping must be global, local or blocks=<sizes>");
}

PathSpec parse_path_spec(const std::string& text) {
    PathSpec spec;
    for (const auto& part : split(text, ',')) {
        const auto eq = part.find('=');
        if (eq == std::string::npos) throw InputError("--path expects key=value pairs, got '" + part + "'");
        const std::string key = trim(part.substr(0, eq));
        const std::string val = trim(part.substr(eq + 1));
        try {
            std::size_t used = 0;
            if (key == "n" || key == "count") {
                spec.count = std::stoi(val, &used);
            } else if (key == "ratio") {
                spec.ratio = std::stod(val, &used);
            } else if (key == "patience") {
                spec.patience = std::stoi(val, &used);
            } else {
                throw InputError("--path: unknown key '" + key + "'");
            }
            if (used != val.size()) throw std::invalid_argument(val);
        } catch (const InputError&) {
            throw;
        } catch (const std::exception&) {
            throw InputError("--path: bad value '" + val + "' for " + key);
        }
    }
    SolverConfig check;
    check.path = spec;
    check.validate();
    return spec;
}

ModelFile ModelFile::from_fit(const FitResult& fit, const GroupStructure& gs, const TrainingInfo& info) {
    ModelFile m{kModelFormatVersion, gs.layout(), fit.family, gs.mode(), gs.partition(), gs.weights(),
                fit.lambda, fit.beta, SupportPattern::from_beta(fit.beta).effects(), info};
    return m;
}

GroupStructure ModelFile::groups() const {
    GroupStructure gs(layout, partition, mode);
    for (int g = 0; g < gs.num_groups(); ++g) gs.set_weight(g, weights[g]);
    return gs;
}

std::string model_to_json(const ModelFile& m) {
    Json j;
    j["format"] = "assoclearn-model";
    j["version"] = m.version;
    j["layout"] = {{"J", m.layout.categories()}, {"d", m.layout.max_order()}};
    j["family"] = to_string(m.family);
    j["penalty"] = to_string(m.mode);
    j["partition"] = m.partition.sizes();
    j["lambda"] = m.lambda;

    const GroupStructure gs(m.layout, m.partition, m.mode);
    Json weights = Json::array();
    for (int g = 0; g < gs.num_groups(); ++g) {
        weights.push_back({{"effect", effect_json(m.layout.effects()[gs.effect_of(g)])},
                           {"block", gs.block_of(g) + 1},
                           {"weight", m.weights[g]}});
    }
    j["weights"] = weights;

    Json coefs = Json::array();
    for (int e = 0; e < m.layout.num_effects(); ++e) {
        for (int b = 0; b < m.partition.num_blocks(); ++b) {
            const Eigen::MatrixXd block = m.beta.block(e, b);
            Json values = Json::array();
            for (Eigen::Index r = 0; r < block.rows(); ++r) {
                for (Eigen::Index c = 0; c < block.cols(); ++c) values.push_back(block(r, c));
            }
            coefs.push_back({{"effect", effect_json(m.layout.effects()[e])},
                             {"block", b + 1},
                             {"rows", block.rows()},
                             {"cols", block.cols()},
                             {"values", values}});
        }
    }
    j["coefficients"] = coefs;

    Json support = Json::array();
    for (Effect k : m.support) support.push_back(effect_json(k));
    j["support"] = support;
    j["training"] = {{"n", m.training.n},
                     {"p", m.training.p},
                     {"seed", m.training.seed},
                     {"created", m.training.created},
                     {"objective", m.training.objective},
                     {"iterations", m.training.iterations},
                     {"converged", m.training.converged},
                     {"intercept", m.training.intercept}};
    return j.dump(2) + "\n";
}

ModelFile model_from_json(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw InputError(std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        if (j.value("format", "") != "assoclearn-model") throw InputError("not an assoclearn model file");
        const int version = j.at("version").get<int>();
        if (version != kModelFormatVersion) {
            throw InputError("unsupported model format version " + std::to_string(version));
        }
        auto layout = ResponseLayout::build(j.at("layout").at("J").get<std::vector<int>>(),
                                            j.at("layout").at("d").get<int>());
        PredictorPartition partition(j.at("partition").get<std::vector<int>>());
        const auto family = parse_family(j.at("family").get<std::string>());
        const auto mode = parse_penalty_mode(j.at("penalty").get<std::string>());
        const int q = layout.num_responses();

        GroupStructure gs(layout, partition, mode);
        std::vector<double> weights(static_cast<std::size_t>(gs.num_groups()), 0.0);
        std::vector<char> seen_w(weights.size(), 0);
        for (const auto& w : j.at("weights")) {
            const int e = effect_index_checked(layout, effect_from_json(w.at("effect"), q));
            const int b = w.at("block").get<int>() - 1;
            if (b < 0 || b >= partition.num_blocks()) throw InputError("weight block out of range");
            const int g = gs.group_index(e, b);
            weights[g] = w.at("weight").get<double>();
            seen_w[g] = 1;
        }
        if (std::find(seen_w.begin(), seen_w.end(), 0) != seen_w.end()) throw InputError("model is missing weights");

        CoefficientBlocks beta(layout, partition);
        for (const auto& c : j.at("coefficients")) {
            const int e = effect_index_checked(layout, effect_from_json(c.at("effect"), q));
            const int b = c.at("block").get<int>() - 1;
            if (b < 0 || b >= partition.num_blocks()) throw InputError("coefficient block out of range");
            const auto values = c.at("values").get<std::vector<double>>();
            auto block = beta.block(e, b);
            if (c.at("rows").get<int>() != block.rows() || c.at("cols").get<int>() != block.cols() ||
                static_cast<Eigen::Index>(values.size()) != block.size()) {
                throw InputError("coefficient block " + layout.effects()[e].to_string() + " has the wrong shape");
            }
            for (Eigen::Index r = 0; r < block.rows(); ++r) {
                for (Eigen::Index col = 0; col < block.cols(); ++col) block(r, col) = values[r * block.cols() + col];
            }
        }

        std::vector<Effect> support;
        for (const auto& s : j.at("support")) support.push_back(effect_from_json(s, q));

        const auto& t = j.at("training");
        TrainingInfo info{t.at("n").get<int>(),           t.at("p").get<int>(),
                          t.at("seed").get<std::uint64_t>(), t.at("created").get<std::string>(),
                          t.at("objective").get<double>(), t.at("iterations").get<int>(),
                          t.at("converged").get<bool>(),   t.value("intercept", false)};
        return ModelFile{version, layout, family, mode, partition, weights, j.at("lambda").get<double>(),
                         beta, support, info};
    } catch (const Json::exception& e) {
        throw InputError(std::string("malformed model file: ") + e.what());
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << text;
}

void write_model(const std::string& path, const ModelFile& model) { write_text_file(path, model_to_json(model)); }

ModelFile read_model(const std::string& path) { return model_from_json(read_text_file(path)); }

int apply_weights_json(const std::string& text, GroupStructure& gs) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw InputError(std::string("weights file is not valid JSON: ") + e.what());
    }
    if (!j.is_array()) throw InputError("weights file must be a JSON array");
    int count = 0;
    try {
        for (const auto& w : j) {
            const int e = effect_index_checked(gs.layout(), effect_from_json(w.at("effect"), gs.layout().num_responses()));
            const int b = w.at("block").get<int>() - 1;
            if (b < 0 || b >= gs.partition().num_blocks()) throw InputError("weight block out of range");
            gs.set_weight(gs.group_index(e, b), w.at("weight").get<double>());
            ++count;
        }
    } catch (const Json::exception& e) {
        throw InputError(std::string("malformed weights entry: ") + e.what());
    }
    return count;
}

namespace {

void reject_unknown(const toml::table& t, const std::set<std::string>& known, const std::string& where) {
    for (const auto& [key, node] : t) {
        if (!known.count(std::string(key.str()))) {
            throw InputError(where + ": unknown key '" + std::string(key.str()) + "'");
        }
    }
}

template <typename T>
void read_value(const toml::table& t, const char* key, T& out, const std::string& where) {
    const auto* node = t.get(key);
    if (node == nullptr) return;
    if constexpr (std::is_same_v<T, bool>) {
        if (auto v = node->value<bool>()) {
            out = *v;
            return;
        }
    } else if constexpr (std::is_integral_v<T>) {
        if (auto v = node->value<std::int64_t>()) {
            out = static_cast<T>(*v);
            return;
        }
    } else if constexpr (std::is_floating_point_v<T>) {
        if (auto v = node->value<double>()) {
            out = *v;
            return;
        }
    } else {
        if (auto v = node->value<std::string>()) {
            out = *v;
            return;
        }
    }
    throw InputError(where + ": key '" + key + "' has the wrong type");
}

std::vector<int> read_int_array(const toml::table& t, const char* key, std::vector<int> fallback,
                                const std::string& where) {
    const auto* node = t.get(key);
    if (node == nullptr) return fallback;
    std::vector<int> out;
    if (auto single = node->value<std::int64_t>()) return {static_cast<int>(*single)};
    const auto* arr = node->as_array();
    if (arr == nullptr) throw InputError(where + ": key '" + key + "' must be an integer array");
    for (const auto& v : *arr) {
        auto x = v.value<std::int64_t>();
        if (!x) throw InputError(where + ": key '" + key + "' must hold integers");
        out.push_back(static_cast<int>(*x));
    }
    return out;
}

toml::table parse_toml(const std::string& text, const std::string& where) {
    try {
        return toml::parse(text);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << where << ":" << e.source().begin.line << ":" << e.source().begin.column << ": " << e.description();
        throw InputError(msg.str());
    }
}

SolverConfig solver_from_table(const toml::table& t, SolverConfig c, const std::string& where) {
    reject_unknown(t, {"family", "lambda", "tol", "max_iter", "backtrack", "acceleration", "restart",
                       "lipschitz_step", "deterministic", "seed", "threads", "path"},
                   where);
    std::string family = to_string(c.family);
    read_value(t, "family", family, where);
    c.family = parse_family(family);
    if (t.get("lambda") != nullptr) {
        double lam = 0.0;
        read_value(t, "lambda", lam, where);
        c.lambda = lam;
    }
    read_value(t, "tol", c.tol, where);
    read_value(t, "max_iter", c.max_iter, where);
    read_value(t, "backtrack", c.backtrack, where);
    read_value(t, "acceleration", c.acceleration, where);
    read_value(t, "restart", c.restart, where);
    read_value(t, "lipschitz_step", c.lipschitz_step, where);
    read_value(t, "deterministic", c.deterministic, where);
    std::int64_t seed = static_cast<std::int64_t>(c.seed);
    read_value(t, "seed", seed, where);
    c.seed = static_cast<std::uint64_t>(seed);
    read_value(t, "threads", c.threads, where);
    if (const auto* path = t.get_as<toml::table>("path")) {
        reject_unknown(*path, {"count", "ratio", "patience"}, where + " [path]");
        read_value(*path, "count", c.path.count, where);
        read_value(*path, "ratio", c.path.ratio, where);
        read_value(*path, "patience", c.path.patience, where);
    }
    c.validate();
    return c;
}

} // namespace

SolverConfig parse_solver_toml(const std::string& text, SolverConfig base) {
    return solver_from_table(parse_toml(text, "solver config"), std::move(base), "solver config");
}

SimConfig parse_study_toml(const std::string& text) {
    const std::string where = "study config";
    const auto t = parse_toml(text, where);
    reject_unknown(t, {"J", "d", "n", "p", "schemes", "n_valid", "n_test", "replicates", "seed", "estimators",
                       "generating", "threads", "full_scale", "signal", "solver"},
                   where);
    bool full = false;
    read_value(t, "full_scale", full, where);
    SimConfig c = full ? SimConfig::full_scale() : SimConfig{};
    c.J = read_int_array(t, "J", c.J, where);
    read_value(t, "d", c.d, where);
    c.n_grid = read_int_array(t, "n", c.n_grid, where);
    c.p_grid = read_int_array(t, "p", c.p_grid, where);
    c.schemes = read_int_array(t, "schemes", c.schemes, where);
    read_value(t, "n_valid", c.n_valid, where);
    read_value(t, "n_test", c.n_test, where);
    read_value(t, "replicates", c.replicates, where);
    std::int64_t seed = static_cast<std::int64_t>(c.seed);
    read_value(t, "seed", seed, where);
    c.seed = static_cast<std::uint64_t>(seed);
    read_value(t, "threads", c.threads, where);
    if (const auto* arr = t.get_as<toml::array>("estimators")) {
        c.estimators.clear();
        for (const auto& v : *arr) {
            auto name = v.value<std::string>();
            if (!name) throw InputError(where + ": estimators must be strings");
            c.estimators.push_back(parse_estimator(*name));
        }
    }
    std::string generating = to_string(c.generating);
    read_value(t, "generating", generating, where);
    c.generating = parse_family(generating);
    if (const auto* sig = t.get_as<toml::table>("signal")) {
        reject_unknown(*sig, {"min_magnitude", "max_magnitude", "active_predictors"}, where + " [signal]");
        read_value(*sig, "min_magnitude", c.signal.min_magnitude, where);
        read_value(*sig, "max_magnitude", c.signal.max_magnitude, where);
        read_value(*sig, "active_predictors", c.signal.active_predictors, where);
    }
    if (const auto* sol = t.get_as<toml::table>("solver")) {
        c.solver = solver_from_table(*sol, c.solver, where + " [solver]");
    }
    c.validate();
    return c;
}

std::string fit_report_json(const FitResult& fit, const PathResult* path) {
    Json j;
    j["family"] = to_string(fit.family);
    j["penalty"] = to_string(fit.mode);
    j["lambda"] = fit.lambda;
    j["objective"] = fit.objective();
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    j["diverged"] = fit.diverged;
    j["step_lipschitz"] = fit.step_lipschitz;
    j["seconds"] = fit.seconds;
    if (fit.validation_cross_entropy) j["validation_cross_entropy"] = *fit.validation_cross_entropy;
    Json support = Json::array();
    for (const auto& [e, b] : fit.support) {
        support.push_back({{"effect", effect_json(fit.beta.layout().effects()[e])}, {"block", b + 1}});
    }
    j["support"] = support;
    Json effects = Json::array();
    for (Effect k : SupportPattern::from_beta(fit.beta).effects()) effects.push_back(effect_json(k));
    j["effects"] = effects;
    j["objective_trace"] = fit.objective_trace;
    if (path != nullptr) {
        Json p;
        p["lambdas"] = path->lambdas;
        Json ce = Json::array();
        Json sizes = Json::array();
        for (const auto& f : path->fits) {
            ce.push_back(f.validation_cross_entropy ? Json(*f.validation_cross_entropy) : Json());
            sizes.push_back(f.support.size());
        }
        p["validation_cross_entropy"] = ce;
        p["support_sizes"] = sizes;
        p["selected"] = path->selected ? Json(*path->selected) : Json();
        p["total_iterations"] = path->total_iterations;
        j["path"] = p;
    }
    return j.dump(2) + "\n";
}

std::string report_to_json(const IndependenceReport& report) {
    Json j;
    j["q"] = report.num_responses;
    Json effects = Json::array();
    for (Effect k : report.effects) effects.push_back(effect_json(k));
    j["effects"] = effects;
    auto blocks_json = [](const ResponsePartition& part) {
        Json a = Json::array();
        for (const auto& b : part) {
            Json block = Json::array();
            for (int r : b) block.push_back(r + 1);
            a.push_back(block);
        }
        return a;
    };
    j["joint_partition"] = blocks_json(report.partition);
    j["mutual_independence"] = report.mutual();
    j["joint_statement"] = report.partition.size() > 1 ? Json(partition_text(report.partition)) : Json();
    Json cond = Json::array();
    for (const auto& st : report.conditional) {
        Json given = Json::array();
        for (int r : st.given) given.push_back(r + 1);
        cond.push_back({{"separated", blocks_json(st.separated)},
                        {"given", given},
                        {"minimal", st.minimal},
                        {"text", st.text()}});
    }
    j["conditional"] = cond;
    Json violations = Json::array();
    for (const auto& v : report.hierarchy.violations) {
        violations.push_back({{"present", effect_json(v.present)}, {"missing", effect_json(v.missing)}});
    }
    j["hierarchy"] = {{"ok", report.hierarchy.ok}, {"violations", violations}};
    return j.dump(2) + "\n";
}

std::string study_csv(const std::vector<MetricsRow>& rows) {
    std::ostringstream out;
    out << "estimator,scheme,p,n,replicates,failures,hellinger_mean,hellinger_sd,hellinger_median,"
           "misclassification_mean,misclassification_sd,misclassification_median,cross_entropy_mean,"
           "cross_entropy_sd,tpr_mean,fpr_mean,exact_support_rate\n";
    for (const auto& r : rows) {
        out << to_string(r.estimator) << ',' << r.scheme << ',' << r.p << ',' << r.n << ',' << r.replicates << ','
            << r.failures;
        for (double v : {r.hellinger_mean, r.hellinger_sd, r.hellinger_median, r.misclassification_mean,
                         r.misclassification_sd, r.misclassification_median, r.cross_entropy_mean,
                         r.cross_entropy_sd, r.tpr_mean, r.fpr_mean, r.exact_support_rate}) {
            out << ',' << format_double(v);
        }
        out << '\n';
    }
    return out.str();
}

std::string records_csv(const std::vector<ReplicateRecord>& records) {
    std::ostringstream out;
    out << "estimator,scheme,p,n,replicate,ok,hellinger,misclassification,cross_entropy,tpr,fpr,"
           "exact_support,lambda,iterations,error\n";
    for (const auto& r : records) {
        std::string error = r.error;
        std::replace(error.begin(), error.end(), ',', ';');
        std::replace(error.begin(), error.end(), '\n', ' ');
        out << to_string(r.estimator) << ',' << r.scheme << ',' << r.p << ',' << r.n << ',' << r.replicate << ','
            << (r.ok ? 1 : 0) << ',' << format_double(r.hellinger) << ',' << format_double(r.misclassification)
            << ',' << format_double(r.cross_entropy) << ',' << format_double(r.tpr) << ','
            << format_double(r.fpr) << ',' << (r.exact_support ? 1 : 0) << ',' << format_double(r.lambda) << ','
            << r.iterations << ',' << error << '\n';
    }
    return out.str();
}

std::string study_json(const StudyResult& result) {
    const auto& c = result.config;
    Json j;
    Json est = Json::array();
    for (auto e : c.estimators) est.push_back(to_string(e));
    j["config"] = {{"J", c.J},
                   {"d", c.d},
                   {"n", c.n_grid},
                   {"p", c.p_grid},
                   {"schemes", c.schemes},
                   {"n_valid", c.n_valid},
                   {"n_test", c.n_test},
                   {"replicates", c.replicates},
                   {"seed", c.seed},
                   {"estimators", est},
                   {"generating", to_string(c.generating)},
                   {"signal",
                    {{"min_magnitude", c.signal.min_magnitude},
                     {"max_magnitude", c.signal.max_magnitude},
                     {"active_predictors", c.signal.active_predictors}}},
                   {"solver",
                    {{"tol", c.solver.tol},
                     {"max_iter", c.solver.max_iter},
                     {"path", {{"count", c.solver.path.count}, {"ratio", c.solver.path.ratio},
                               {"patience", c.solver.path.patience}}}}}};
    Json rows = Json::array();
    for (const auto& r : result.rows) {
        rows.push_back({{"estimator", to_string(r.estimator)},
                        {"scheme", r.scheme},
                        {"p", r.p},
                        {"n", r.n},
                        {"replicates", r.replicates},
                        {"failures", r.failures},
                        {"hellinger", {{"mean", r.hellinger_mean}, {"sd", r.hellinger_sd}, {"median", r.hellinger_median}}},
                        {"misclassification",
                         {{"mean", r.misclassification_mean},
                          {"sd", r.misclassification_sd},
                          {"median", r.misclassification_median}}},
                        {"cross_entropy", {{"mean", r.cross_entropy_mean}, {"sd", r.cross_entropy_sd}}},
                        {"tpr", r.tpr_mean},
                        {"fpr", r.fpr_mean},
                        {"exact_support_rate", r.exact_support_rate}});
    }
    j["rows"] = rows;
    Json failures = Json::array();
    for (const auto& r : result.records) {
        if (!r.ok) {
            failures.push_back({{"estimator", to_string(r.estimator)},
                                {"scheme", r.scheme},
                                {"p", r.p},
                                {"n", r.n},
                                {"replicate", r.replicate},
                                {"error", r.error}});
        }
    }
    j["failures"] = failures;
    return j.dump(2) + "\n";
}

std::string plot_csv(const std::vector<MetricsRow>& rows) {
    std::ostringstream out;
    out << "estimator,scheme,p,n,metric,value\n";
    for (const auto& r : rows) {
        const std::pair<const char*, double> metrics[] = {{"hellinger_mean", r.hellinger_mean},
                                                          {"hellinger_median", r.hellinger_median},
                                                          {"misclassification_mean", r.misclassification_mean},
                                                          {"cross_entropy_mean", r.cross_entropy_mean}};
        for (const auto& [name, v] : metrics) {
            out << to_string(r.estimator) << ',' << r.scheme << ',' << r.p << ',' << r.n << ',' << name << ','
                << format_double(v) << '\n';
        }
    }
    return out.str();
}

std::string cell_label(const ResponseLayout& layout, int index) {
    std::string s;
    const auto cell = layout.cell_of(index);
    for (std::size_t l = 0; l < cell.size(); ++l) s += (l ? "-" : "") + std::to_string(cell[l] + 1);
    return s;
}

std::vector<std::string> probability_header(const ResponseLayout& layout) {
    std::vector<std::string> header;
    for (int i = 0; i < layout.card(); ++i) {
        std::string label = cell_label(layout, i);
        std::replace(label.begin(), label.end(), '-', '_');
        header.push_back("pi_" + label);
    }
    header.push_back("argmax");
    return header;
}

} // namespace assoclearn
