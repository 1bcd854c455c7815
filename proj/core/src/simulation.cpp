#include "assoclearn/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "assoclearn/parallel.hpp"
#include "assoclearn/penalty.hpp"

namespace assoclearn {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

const char* const kEstimatorNames[] = {"O-Mult", "O-Pois", "L-Mult", "L-Pois",
                                       "G-Mult", "G-Pois", "Sep-Mult", "Oracle"};

Dataset with_rows(const Dataset& d, int n) {
    Dataset out;
    out.X = d.X.topRows(n);
    out.Y = d.Y.topRows(n);
    out.trials = d.trials.head(n);
    return out;
}

Dataset drop_empty_rows(const Dataset& d) {
    std::vector<int> keep;
    for (int i = 0; i < d.n(); ++i) {
        if (d.trials(i) > 0) keep.push_back(i);
    }
    if (static_cast<int>(keep.size()) == d.n()) return d;
    Dataset out;
    out.X = d.X(keep, Eigen::all);
    out.Y = d.Y(keep, Eigen::all);
    out.trials = d.trials(keep);
    return out;
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sd(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

struct EstimatorSpec {
    PenaltyMode mode;
    bool local;
    ModelFamily family;
};

EstimatorSpec spec_of(Estimator e) {
    switch (e) {
    case Estimator::OMult: return {PenaltyMode::OverlappingHierarchical, true, ModelFamily::Multinomial};
    case Estimator::OPois: return {PenaltyMode::OverlappingHierarchical, true, ModelFamily::Poisson};
    case Estimator::LMult: return {PenaltyMode::GroupLasso, true, ModelFamily::Multinomial};
    case Estimator::LPois: return {PenaltyMode::GroupLasso, true, ModelFamily::Poisson};
    case Estimator::GMult: return {PenaltyMode::GroupLasso, false, ModelFamily::Multinomial};
    case Estimator::GPois: return {PenaltyMode::GroupLasso, false, ModelFamily::Poisson};
    default: throw std::logic_error("not a reparameterized estimator");
    }
}

PredictorPartition global_partition(int p) {
    return p == 1 ? PredictorPartition::global(1) : PredictorPartition({1, p - 1});
}

} // namespace

std::string to_string(Estimator e) { return kEstimatorNames[static_cast<int>(e)]; }

Estimator parse_estimator(const std::string& name) {
    for (int i = 0; i < 8; ++i) {
        if (name == kEstimatorNames[i]) return static_cast<Estimator>(i);
    }
    throw InputError("unknown estimator '" + name + "'");
}

std::vector<Estimator> all_estimators() {
    std::vector<Estimator> out;
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<Estimator>(i));
    return out;
}

SolverConfig SimConfig::default_solver() {
    SolverConfig c;
    c.path = PathSpec{30, 1e-3, 5};
    c.tol = 1e-7;
    c.max_iter = 3000;
    return c;
}

SimConfig SimConfig::full_scale() {
    SimConfig c;
    c.n_grid = {100, 300, 500, 1000, 2000};
    c.p_grid = {10, 50};
    c.n_test = 10000;
    c.replicates = 100;
    c.solver.path = PathSpec{50, 1e-4, 0};
    c.solver.tol = 1e-8;
    return c;
}

void SimConfig::validate() const {
    (void)ResponseLayout::build(J, d);
    if (n_grid.empty() || p_grid.empty() || schemes.empty() || estimators.empty()) {
        throw InputError("study grids must be nonempty");
    }
    for (int n : n_grid) {
        if (n < 1) throw InputError("n must be positive");
    }
    for (int p : p_grid) {
        if (p < 1) throw InputError("p must be positive");
    }
    for (int s : schemes) {
        if (s < 1 || s > 3) throw InputError("scheme must be 1, 2 or 3");
    }
    if (J.size() != 4 || d < 3) throw InputError("schemes need q = 4 responses and d >= 3");
    if (n_valid < 1 || n_test < 1 || replicates < 1) {
        throw InputError("n_valid, n_test and replicates must be positive");
    }
    if (!(signal.min_magnitude >= 0.0 && signal.max_magnitude >= signal.min_magnitude)) {
        throw InputError("signal magnitudes must satisfy 0 <= min <= max");
    }
    if (signal.active_predictors < 0) throw InputError("active_predictors must be nonnegative");
    if (threads < 1) throw InputError("threads must be at least 1");
    solver.validate();
}

std::uint64_t stream_seed(std::uint64_t seed, int scheme, int p, int replicate, int stream) {
    std::uint64_t h = splitmix64(seed);
    for (std::uint64_t v : {std::uint64_t(scheme), std::uint64_t(p), std::uint64_t(replicate),
                            std::uint64_t(stream)}) {
        h = splitmix64(h ^ v);
    }
    return h;
}

Eigen::MatrixXd ar1_covariance(int p, double rho) {
    Eigen::MatrixXd s(p, p);
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) s(i, j) = std::pow(rho, std::abs(i - j));
    }
    return s;
}

Eigen::MatrixXd gen_predictors(int n, int p, std::uint64_t seed) {
    if (n < 1 || p < 1) throw InputError("gen_predictors needs n, p >= 1");
    const Eigen::MatrixXd L = ar1_covariance(p).llt().matrixL();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd Z(n, p);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) Z(i, j) = normal(rng);
    }
    return Z * L.transpose();
}

std::vector<Effect> scheme_effects(int scheme) {
    if (scheme < 1 || scheme > 3) throw InputError("unknown scheme " + std::to_string(scheme));
    auto eff = [](std::initializer_list<int> one_based) {
        std::uint32_t m = 0;
        for (int r : one_based) m |= 1u << (r - 1);
        return Effect::from_mask(m);
    };
    std::vector<Effect> out{eff({1}), eff({2}), eff({3}), eff({4})};
    if (scheme >= 2) {
        for (Effect k : {eff({2, 3}), eff({2, 4}), eff({3, 4}), eff({2, 3, 4})}) out.push_back(k);
    }
    if (scheme == 3) out.push_back(eff({1, 4}));
    std::sort(out.begin(), out.end(), effect_less);
    return out;
}

CoefficientBlocks gen_scheme_beta(int scheme, const ResponseLayout& layout, int p, std::uint64_t seed,
                                  const SignalSpec& signal) {
    const auto effects = scheme_effects(scheme);
    if (layout.num_responses() != 4) throw InputError("schemes are defined for q = 4");
    if (p < 1) throw InputError("p must be positive");

    std::mt19937_64 rng(seed);
    std::vector<int> columns{0};
    std::vector<int> candidates(static_cast<std::size_t>(p - 1));
    std::iota(candidates.begin(), candidates.end(), 1);
    const int active = std::min<int>(signal.active_predictors, p - 1);
    for (int i = 0; i < active; ++i) {
        std::uniform_int_distribution<int> pick(i, p - 2);
        std::swap(candidates[i], candidates[pick(rng)]);
        columns.push_back(candidates[i]);
    }
    std::sort(columns.begin(), columns.end());

    CoefficientBlocks beta(layout, PredictorPartition::local(p));
    std::uniform_real_distribution<double> magnitude(signal.min_magnitude, signal.max_magnitude);
    std::bernoulli_distribution sign(0.5);
    for (Effect k : effects) {
        const int e = layout.index_of(k);
        if (e < 0) throw InputError("layout order too small for scheme " + std::to_string(scheme));
        for (int c : columns) {
            auto block = beta.block(e, c);
            for (int r = 0; r < block.rows(); ++r) {
                const double m = magnitude(rng);
                block(r, 0) = sign(rng) ? m : -m;
            }
        }
    }
    return beta;
}

Eigen::MatrixXd sample_responses(const Eigen::MatrixXd& X, const CoefficientBlocks& beta_star,
                                 const BasisSet& basis, ModelFamily family, std::uint64_t seed) {
    const Eigen::MatrixXd eta = X * theta_from_beta(basis, beta_star).transpose();
    const int card = basis.layout().card();
    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(X.rows(), card);
    std::mt19937_64 rng(seed);
    if (family == ModelFamily::Multinomial) {
        const Eigen::MatrixXd probs = softmax_rows(eta);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            const double u = unif(rng);
            double acc = 0.0;
            int cat = card - 1;
            for (int j = 0; j < card; ++j) {
                acc += probs(i, j);
                if (u < acc) {
                    cat = j;
                    break;
                }
            }
            Y(i, cat) = 1.0;
        }
    } else {
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            for (int j = 0; j < card; ++j) {
                if (eta(i, j) > kExpCap) throw std::overflow_error("Poisson mean diverged");
                std::poisson_distribution<long long> draw(std::exp(eta(i, j)));
                Y(i, j) = static_cast<double>(draw(rng));
            }
        }
    }
    return Y;
}

double hellinger(const Eigen::VectorXd& p, const Eigen::VectorXd& r) {
    if (p.size() != r.size()) throw InputError("hellinger needs equal lengths");
    return (p.cwiseMax(0.0).cwiseSqrt() - r.cwiseMax(0.0).cwiseSqrt()).norm() / std::sqrt(2.0);
}

double mean_hellinger(const Eigen::MatrixXd& p, const Eigen::MatrixXd& r) {
    if (p.rows() != r.rows() || p.cols() != r.cols()) throw InputError("hellinger needs equal shapes");
    if (p.rows() == 0) return 0.0;
    double total = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i) total += hellinger(p.row(i).transpose(), r.row(i).transpose());
    return total / static_cast<double>(p.rows());
}

double misclassification(const Eigen::MatrixXd& probs, const Eigen::MatrixXd& Y) {
    if (probs.rows() != Y.rows() || probs.cols() != Y.cols()) {
        throw InputError("misclassification needs equal shapes");
    }
    if (probs.rows() == 0) return 0.0;
    int wrong = 0;
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        Eigen::Index predicted = 0;
        Eigen::Index realized = 0;
        probs.row(i).maxCoeff(&predicted);
        Y.row(i).maxCoeff(&realized);
        if (predicted != realized) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(probs.rows());
}

double misclassification(const CoefficientBlocks& beta_hat, const BasisSet& basis, const Dataset& test) {
    return misclassification(predict_probs_matrix(theta_from_beta(basis, beta_hat), test.X), test.Y);
}

SupportScore score_support(const std::vector<Effect>& estimated, const std::vector<Effect>& truth,
                           const ResponseLayout& layout) {
    auto has = [](const std::vector<Effect>& v, Effect k) { return std::find(v.begin(), v.end(), k) != v.end(); };
    int tp = 0;
    int fp = 0;
    int positives = 0;
    int negatives = 0;
    bool exact = true;
    for (Effect k : layout.effects()) {
        if (k.is_overall()) continue;
        const bool t = has(truth, k);
        const bool e = has(estimated, k);
        positives += t;
        negatives += !t;
        tp += t && e;
        fp += !t && e;
        exact = exact && t == e;
    }
    SupportScore s;
    s.tpr = positives > 0 ? static_cast<double>(tp) / positives : 1.0;
    s.fpr = negatives > 0 ? static_cast<double>(fp) / negatives : 0.0;
    s.exact = exact;
    return s;
}

Eigen::MatrixXd marginal_counts(const ResponseLayout& layout, const Eigen::MatrixXd& Y, int response) {
    if (response < 0 || response >= layout.num_responses()) throw InputError("response out of range");
    if (Y.cols() != layout.card()) throw InputError("Y columns do not match |J|");
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(Y.rows(), layout.categories()[response]);
    for (int j = 0; j < layout.card(); ++j) {
        out.col(layout.cell_of(j)[response]) += Y.col(j);
    }
    return out;
}

Eigen::MatrixXd SepMultFit::probs(const Eigen::MatrixXd& X) const {
    const auto layout = ResponseLayout::build(categories, 0);
    Eigen::MatrixXd joint = Eigen::MatrixXd::Ones(X.rows(), layout.card());
    for (std::size_t l = 0; l < marginals.size(); ++l) {
        const BasisSet basis(marginals[l].beta.layout());
        const Eigen::MatrixXd pl = predict_probs_matrix(theta_from_beta(basis, marginals[l].beta), X);
        for (int j = 0; j < layout.card(); ++j) {
            joint.col(j).array() *= pl.col(layout.cell_of(j)[l]).array();
        }
    }
    return joint;
}

SepMultFit sep_mult_baseline(const Dataset& train, const ResponseLayout& layout, const SolverConfig& config,
                             const Dataset* validation) {
    SepMultFit out;
    out.categories = layout.categories();
    SolverConfig cfg = config;
    cfg.family = ModelFamily::Multinomial;
    for (int l = 0; l < layout.num_responses(); ++l) {
        const auto marginal_layout = ResponseLayout::build({layout.categories()[l]}, 1);
        const BasisSet basis(marginal_layout);
        const GroupStructure gs(marginal_layout, PredictorPartition::local(train.p()), PenaltyMode::GroupLasso);
        const Dataset tr = Dataset::make(train.X, marginal_counts(layout, train.Y, l));
        std::optional<Dataset> va;
        if (validation != nullptr) va = Dataset::make(validation->X, marginal_counts(layout, validation->Y, l));
        if (cfg.lambda) {
            out.marginals.push_back(fit(tr, basis, gs, cfg, *cfg.lambda));
            continue;
        }
        auto path = fit_path(tr, basis, gs, cfg, va ? &*va : nullptr);
        const std::size_t pick = path.selected.value_or(path.fits.size() - 1);
        out.marginals.push_back(std::move(path.fits[pick]));
    }
    return out;
}

SimulatedData simulate(const SimConfig& config, const BasisSet& basis, int scheme, int p, int n_train,
                       int replicate) {
    const int n_max = std::max(n_train, *std::max_element(config.n_grid.begin(), config.n_grid.end()));
    auto seed = [&](int stream) { return stream_seed(config.seed, scheme, p, replicate, stream); };
    auto design = [&](int n, int stream) {
        Eigen::MatrixXd X(n, p);
        X.col(0).setOnes();
        if (p > 1) X.rightCols(p - 1) = gen_predictors(n, p - 1, seed(stream));
        return X;
    };

    SimulatedData data{gen_scheme_beta(scheme, basis.layout(), p, seed(0), config.signal), {}, {}, {}, {}};
    const Eigen::MatrixXd X_train = design(n_max, 1);
    const Eigen::MatrixXd Y_train = sample_responses(X_train, data.beta_star, basis, config.generating, seed(2));
    data.train = with_rows(Dataset::make(X_train, Y_train), n_train);

    const Eigen::MatrixXd X_valid = design(config.n_valid, 3);
    data.valid = Dataset::make(X_valid, sample_responses(X_valid, data.beta_star, basis, config.generating, seed(4)));

    const Eigen::MatrixXd X_test = design(config.n_test, 5);
    data.test = Dataset::make(
        X_test, sample_responses(X_test, data.beta_star, basis, ModelFamily::Multinomial, seed(6)));
    data.test_probs = predict_probs_matrix(theta_from_beta(basis, data.beta_star), X_test);
    return data;
}

const MetricsRow* StudyResult::find(Estimator e, int scheme, int p, int n) const {
    for (const auto& r : rows) {
        if (r.estimator == e && r.scheme == scheme && r.p == p && r.n == n) return &r;
    }
    return nullptr;
}

namespace {

void fill_metrics(ReplicateRecord& rec, const Eigen::MatrixXd& probs, const SimulatedData& data) {
    rec.hellinger = mean_hellinger(probs, data.test_probs);
    rec.misclassification = misclassification(probs, data.test.Y);
    rec.cross_entropy = cross_entropy(probs, data.test.Y);
}

ReplicateRecord run_estimator(Estimator est, const SimConfig& config, const BasisSet& basis,
                              const SimulatedData& data, const std::vector<Effect>& truth) {
    ReplicateRecord rec;
    rec.estimator = est;
    const auto start = std::chrono::steady_clock::now();
    const auto& layout = basis.layout();
    const int p = data.train.p();

    if (est == Estimator::Oracle) {
        fill_metrics(rec, data.test_probs, data);
        const auto s = score_support(SupportPattern::from_beta(data.beta_star).effects(), truth, layout);
        rec.tpr = s.tpr;
        rec.fpr = s.fpr;
        rec.exact_support = s.exact;
    } else if (est == Estimator::SepMult) {
        const Dataset train = drop_empty_rows(data.train);
        const Dataset valid = drop_empty_rows(data.valid);
        const auto sep = sep_mult_baseline(train, layout, config.solver, &valid);
        fill_metrics(rec, sep.probs(data.test.X), data);
        std::vector<Effect> effects;
        for (int l = 0; l < layout.num_responses(); ++l) {
            if (sep.marginals[l].beta.layout().total_dim() > 1 &&
                sep.marginals[l].beta.stacked().bottomRows(layout.categories()[l] - 1).cwiseAbs().maxCoeff() > 0) {
                effects.push_back(Effect::from_mask(1u << l));
            }
            rec.iterations += sep.marginals[l].iterations;
        }
        const auto s = score_support(effects, truth, layout);
        rec.tpr = s.tpr;
        rec.fpr = s.fpr;
        rec.exact_support = s.exact;
    } else {
        const auto spec = spec_of(est);
        const GroupStructure gs(layout, spec.local ? PredictorPartition::local(p) : global_partition(p), spec.mode);
        SolverConfig cfg = config.solver;
        cfg.family = spec.family;
        cfg.threads = 1;
        const bool mult = spec.family == ModelFamily::Multinomial;
        const Dataset train = mult ? drop_empty_rows(data.train) : data.train;
        const Dataset valid = mult ? drop_empty_rows(data.valid) : data.valid;
        auto path = fit_path(train, basis, gs, cfg, &valid);
        const auto& chosen = path.fits[path.selected.value_or(path.fits.size() - 1)];
        fill_metrics(rec, predict_probs_matrix(theta_from_beta(basis, chosen.beta), data.test.X), data);
        const auto s = score_support(SupportPattern::from_beta(chosen.beta).effects(), truth, layout);
        rec.tpr = s.tpr;
        rec.fpr = s.fpr;
        rec.exact_support = s.exact;
        rec.lambda = chosen.lambda;
        rec.iterations = path.total_iterations;
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

} // namespace

StudyResult run_study(const SimConfig& config) {
    config.validate();
    const auto layout = ResponseLayout::build(config.J, config.d);
    const BasisSet basis(layout);
    const int n_max = *std::max_element(config.n_grid.begin(), config.n_grid.end());

    struct Task {
        int scheme;
        int p;
        int replicate;
    };
    std::vector<Task> tasks;
    for (int s : config.schemes) {
        for (int p : config.p_grid) {
            for (int r = 0; r < config.replicates; ++r) tasks.push_back({s, p, r});
        }
    }

    std::vector<std::vector<ReplicateRecord>> per_task(tasks.size());
    parallel_for(tasks.size(), config.threads, [&](std::size_t t) {
        const Task task = tasks[t];
        auto& out = per_task[t];
        auto stamp = [&](ReplicateRecord rec, int n) {
            rec.scheme = task.scheme;
            rec.p = task.p;
            rec.n = n;
            rec.replicate = task.replicate;
            return rec;
        };
        std::optional<SimulatedData> full;
        std::string data_error;
        try {
            full = simulate(config, basis, task.scheme, task.p, n_max, task.replicate);
        } catch (const std::exception& ex) {
            data_error = ex.what();
        }
        const auto truth = scheme_effects(task.scheme);
        for (int n : config.n_grid) {
            for (Estimator est : config.estimators) {
                if (!full) {
                    ReplicateRecord rec;
                    rec.estimator = est;
                    rec.ok = false;
                    rec.error = data_error;
                    out.push_back(stamp(rec, n));
                    continue;
                }
                SimulatedData data{full->beta_star, with_rows(full->train, n), full->valid, full->test,
                                   full->test_probs};
                try {
                    out.push_back(stamp(run_estimator(est, config, basis, data, truth), n));
                } catch (const std::exception& ex) {
                    ReplicateRecord rec;
                    rec.estimator = est;
                    rec.ok = false;
                    rec.error = ex.what();
                    out.push_back(stamp(rec, n));
                }
            }
        }
    });

    StudyResult result;
    result.config = config;
    for (auto& v : per_task) {
        for (auto& r : v) result.records.push_back(std::move(r));
    }
    result.rows = aggregate(result.records);
    return result;
}

std::vector<MetricsRow> aggregate(std::vector<ReplicateRecord> records) {
    auto key = [](const ReplicateRecord& r) {
        return std::make_tuple(r.scheme, r.p, r.n, static_cast<int>(r.estimator), r.replicate);
    };
    std::sort(records.begin(), records.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });

    std::vector<MetricsRow> rows;
    std::size_t i = 0;
    while (i < records.size()) {
        std::size_t j = i;
        auto same = [&](const ReplicateRecord& r) {
            return r.scheme == records[i].scheme && r.p == records[i].p && r.n == records[i].n &&
                   r.estimator == records[i].estimator;
        };
        std::vector<double> h, m, ce, tpr, fpr, exact;
        MetricsRow row;
        row.estimator = records[i].estimator;
        row.scheme = records[i].scheme;
        row.p = records[i].p;
        row.n = records[i].n;
        for (; j < records.size() && same(records[j]); ++j) {
            const auto& r = records[j];
            ++row.replicates;
            if (!r.ok) {
                ++row.failures;
                continue;
            }
            h.push_back(r.hellinger);
            m.push_back(r.misclassification);
            ce.push_back(r.cross_entropy);
            tpr.push_back(r.tpr);
            fpr.push_back(r.fpr);
            exact.push_back(r.exact_support ? 1.0 : 0.0);
        }
        row.hellinger_mean = mean(h);
        row.hellinger_sd = sd(h);
        row.hellinger_median = median(h);
        row.misclassification_mean = mean(m);
        row.misclassification_sd = sd(m);
        row.misclassification_median = median(m);
        row.cross_entropy_mean = mean(ce);
        row.cross_entropy_sd = sd(ce);
        row.tpr_mean = mean(tpr);
        row.fpr_mean = mean(fpr);
        row.exact_support_rate = mean(exact);
        rows.push_back(row);
        i = j;
    }
    return rows;
}

} // namespace assoclearn
