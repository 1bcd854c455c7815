#include "assoclearn/interpreter.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "assoclearn/likelihood.hpp"

namespace assoclearn {

namespace {

void sort_unique(std::vector<Effect>& effects) {
    std::sort(effects.begin(), effects.end(), effect_less);
    effects.erase(std::unique(effects.begin(), effects.end()), effects.end());
}

std::string response_set_text(const std::vector<int>& responses) {
    if (responses.size() == 1) return "Z" + std::to_string(responses[0] + 1);
    std::string s = "{";
    for (std::size_t i = 0; i < responses.size(); ++i) {
        if (i > 0) s += ",";
        s += "Z" + std::to_string(responses[i] + 1);
    }
    return s + "}";
}

// Components of the interaction graph restricted to vertices outside `removed`.
ResponsePartition components(const std::vector<Effect>& effects, int q, std::uint32_t removed) {
    std::vector<int> parent(static_cast<std::size_t>(q));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    for (Effect k : effects) {
        if (k.order() < 2) continue;
        int first = -1;
        for (int r : k.responses()) {
            if ((removed >> r) & 1u) continue;
            if (first < 0) {
                first = r;
            } else {
                parent[find(r)] = find(first);
            }
        }
    }
    ResponsePartition blocks;
    std::vector<int> block_of(static_cast<std::size_t>(q), -1);
    for (int r = 0; r < q; ++r) {
        if ((removed >> r) & 1u) continue;
        const int root = find(r);
        if (block_of[root] < 0) {
            block_of[root] = static_cast<int>(blocks.size());
            blocks.emplace_back();
        }
        blocks[block_of[root]].push_back(r);
    }
    return blocks;
}

} // namespace

SupportPattern::SupportPattern(int num_responses, std::vector<Effect> effects)
    : q_(num_responses), effects_(std::move(effects)) {
    if (q_ < 1 || q_ > Effect::max_responses) throw InputError("invalid response count");
    for (Effect k : effects_) {
        if (k.mask() >> q_) throw InputError("effect " + k.to_string() + " outside [q]");
    }
    effects_.push_back(Effect{});
    sort_unique(effects_);
}

SupportPattern SupportPattern::from_beta(const CoefficientBlocks& beta, double tol) {
    const auto& layout = beta.layout();
    std::vector<Effect> present;
    std::vector<std::vector<Effect>> per_block(static_cast<std::size_t>(beta.partition().num_blocks()));
    for (int e = 0; e < layout.num_effects(); ++e) {
        for (int j = 0; j < beta.partition().num_blocks(); ++j) {
            if ((beta.block(e, j).array().abs() > tol).any()) {
                present.push_back(layout.effects()[e]);
                per_block[j].push_back(layout.effects()[e]);
            }
        }
    }
    SupportPattern pattern(layout.num_responses(), std::move(present));
    for (auto& b : per_block) sort_unique(b);
    pattern.block_effects_ = std::move(per_block);
    return pattern;
}

bool SupportPattern::contains(Effect k) const {
    return std::find(effects_.begin(), effects_.end(), k) != effects_.end();
}

int SupportPattern::max_order_present() const {
    int d = 0;
    for (Effect k : effects_) d = std::max(d, k.order());
    return d;
}

HierarchyCheck check_hierarchy(const std::vector<Effect>& effects) {
    HierarchyCheck check;
    auto present = [&](Effect k) { return std::find(effects.begin(), effects.end(), k) != effects.end(); };
    for (Effect k : effects) {
        // Enumerate proper subsets of k, including the empty set ({0}).
        const std::uint32_t mask = k.mask();
        if (mask == 0) continue;
        std::vector<Effect> missing;
        for (std::uint32_t sub = (mask - 1) & mask;; sub = (sub - 1) & mask) {
            const Effect s = Effect::from_mask(sub);
            if (!present(s)) missing.push_back(s);
            if (sub == 0) break;
        }
        std::sort(missing.begin(), missing.end(), effect_less);
        for (Effect m : missing) check.violations.push_back({k, m});
    }
    check.ok = check.violations.empty();
    return check;
}

HierarchyCheck check_hierarchy(const SupportPattern& support) { return check_hierarchy(support.effects()); }

ResponsePartition joint_independence_partition(const SupportPattern& support) {
    return components(support.effects(), support.num_responses(), 0u);
}

std::string ConditionalStatement::text() const {
    std::string s;
    for (std::size_t i = 0; i < separated.size(); ++i) {
        if (i > 0) s += " ⊥ ";
        s += response_set_text(separated[i]);
    }
    s += " | ";
    for (int r : given) s += "Z" + std::to_string(r + 1) + ", ";
    return s + "X";
}

std::vector<ConditionalStatement> conditional_independence_statements(const SupportPattern& support) {
    const int q = support.num_responses();
    if (q > kMaxConditionalResponses) {
        throw InputError("conditional statements are enumerated for q <= " +
                         std::to_string(kMaxConditionalResponses));
    }
    std::vector<std::uint32_t> masks;
    for (std::uint32_t c = 1; c < (1u << q); ++c) {
        if (std::popcount(c) <= q - 2) masks.push_back(c);
    }
    std::sort(masks.begin(), masks.end(), [](std::uint32_t a, std::uint32_t b) {
        if (std::popcount(a) != std::popcount(b)) return std::popcount(a) < std::popcount(b);
        return Effect::from_mask(a).responses() < Effect::from_mask(b).responses();
    });

    std::vector<ConditionalStatement> out;
    std::vector<std::uint32_t> separating;
    for (std::uint32_t c : masks) {
        auto blocks = components(support.effects(), q, c);
        if (blocks.size() < 2) continue;
        ConditionalStatement st;
        st.separated = std::move(blocks);
        st.given = Effect::from_mask(c).responses();
        st.minimal = std::none_of(separating.begin(), separating.end(),
                                  [c](std::uint32_t s) { return (s & ~c) == 0 && s != c; });
        separating.push_back(c);
        out.push_back(std::move(st));
    }
    return out;
}

bool IndependenceReport::mutual() const {
    return num_responses >= 2 && static_cast<int>(partition.size()) == num_responses;
}

std::string partition_text(const ResponsePartition& partition) {
    std::string s;
    for (std::size_t i = 0; i < partition.size(); ++i) {
        if (i > 0) s += " ⊥ ";
        s += response_set_text(partition[i]);
    }
    return s + " | X";
}

std::string IndependenceReport::text() const {
    std::string s = "Independence implied by the fitted support:\n";
    if (partition.size() <= 1) {
        s += "  no joint or mutual independence implied\n";
    } else if (mutual()) {
        std::string names;
        for (int r = 0; r < num_responses; ++r) {
            names += (r > 0 ? ", " : "") + std::string("Z") + std::to_string(r + 1);
        }
        s += "  " + names + " are mutually independent given X\n";
        s += "  " + partition_text(partition) + "\n";
    } else {
        s += "  joint independence: " + partition_text(partition) + "\n";
    }
    if (conditional.empty()) {
        s += "  no conditional independence implied\n";
    } else {
        s += "  conditional independence:\n";
        for (const auto& st : conditional) {
            s += "    " + st.text() + (st.minimal ? "" : "  (non-minimal conditioning set)") + "\n";
        }
    }
    if (hierarchy.ok) {
        s += "Hierarchy: ok\n";
    } else {
        s += "Hierarchy: " + std::to_string(hierarchy.violations.size()) + " violation(s)\n";
        for (const auto& v : hierarchy.violations) {
            s += "  " + v.present.to_string() + " present but " + v.missing.to_string() + " missing\n";
        }
    }
    return s;
}

IndependenceReport interpret(const SupportPattern& support) {
    IndependenceReport report;
    report.num_responses = support.num_responses();
    report.partition = joint_independence_partition(support);
    if (support.num_responses() <= kMaxConditionalResponses) {
        report.conditional = conditional_independence_statements(support);
    }
    report.hierarchy = check_hierarchy(support);
    report.effects = support.effects();
    return report;
}

int marginal_index(const ResponseLayout& layout, std::span<const int> cell, std::span<const int> keep) {
    int index = 0;
    int stride = 1;
    for (int r : keep) {
        index += cell[r] * stride;
        stride *= layout.categories()[r];
    }
    return index;
}

std::vector<double> marginal_pmf(const ResponseLayout& layout, std::span<const double> pmf,
                                 std::span<const int> keep) {
    int size = 1;
    for (int r : keep) size *= layout.categories()[r];
    std::vector<double> out(static_cast<std::size_t>(size), 0.0);
    for (int i = 0; i < layout.card(); ++i) {
        const auto cell = layout.cell_of(i);
        out[marginal_index(layout, cell, keep)] += pmf[i];
    }
    return out;
}

namespace {

void check_cover(const ResponseLayout& layout, const ResponsePartition& blocks, std::span<const int> given) {
    std::vector<int> seen(static_cast<std::size_t>(layout.num_responses()), 0);
    auto mark = [&](int r) {
        if (r < 0 || r >= layout.num_responses() || seen[r]++) {
            throw InputError("blocks must partition the responses");
        }
    };
    for (const auto& b : blocks) {
        for (int r : b) mark(r);
    }
    for (int r : given) mark(r);
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
        throw InputError("blocks must partition the responses");
    }
}

} // namespace

double verify_factorization(const CoefficientBlocks& beta, const BasisSet& basis,
                            const Eigen::VectorXd& x, const ResponsePartition& partition) {
    const auto& layout = basis.layout();
    check_cover(layout, partition, {});
    const ProbabilityVector pi = predict_probs(beta, basis, x);
    const std::span<const double> pmf(pi.data(), static_cast<std::size_t>(pi.size()));
    std::vector<std::vector<double>> marginals;
    for (const auto& block : partition) marginals.push_back(marginal_pmf(layout, pmf, block));

    double deviation = 0.0;
    for (int i = 0; i < layout.card(); ++i) {
        const auto cell = layout.cell_of(i);
        double product = 1.0;
        for (std::size_t l = 0; l < partition.size(); ++l) {
            product *= marginals[l][marginal_index(layout, cell, partition[l])];
        }
        deviation = std::max(deviation, std::abs(pi(i) - product));
    }
    return deviation;
}

double verify_conditional_factorization(const CoefficientBlocks& beta, const BasisSet& basis,
                                        const Eigen::VectorXd& x, const ResponsePartition& separated,
                                        std::span<const int> given) {
    const auto& layout = basis.layout();
    check_cover(layout, separated, given);
    const ProbabilityVector pi = predict_probs(beta, basis, x);
    const std::span<const double> pmf(pi.data(), static_cast<std::size_t>(pi.size()));
    std::vector<int> cond(given.begin(), given.end());
    std::sort(cond.begin(), cond.end());
    const auto pi_given = marginal_pmf(layout, pmf, cond);

    std::vector<std::vector<int>> joined;
    std::vector<std::vector<double>> joint_marginals;
    for (const auto& block : separated) {
        std::vector<int> keep = block;
        keep.insert(keep.end(), cond.begin(), cond.end());
        std::sort(keep.begin(), keep.end());
        joint_marginals.push_back(marginal_pmf(layout, pmf, keep));
        joined.push_back(std::move(keep));
    }

    double deviation = 0.0;
    for (int i = 0; i < layout.card(); ++i) {
        const auto cell = layout.cell_of(i);
        const double pc = pi_given[marginal_index(layout, cell, cond)];
        if (!(pc > 0.0)) continue;
        double product = 1.0;
        for (std::size_t l = 0; l < separated.size(); ++l) {
            product *= joint_marginals[l][marginal_index(layout, cell, joined[l])] / pc;
        }
        deviation = std::max(deviation, std::abs(pi(i) / pc - product));
    }
    return deviation;
}

} // namespace assoclearn
