#include <algorithm>
#include <random>

#include "doctest.h"
#include "support.hpp"

#include "assoclearn/interpreter.hpp"
#include "assoclearn/simulation.hpp"

using namespace assoclearn;

namespace {

Effect fx(std::initializer_list<int> one_based) {
    std::vector<int> r;
    for (int v : one_based) r.push_back(v - 1);
    return Effect(r);
}

const ResponseLayout& layout4() {
    static const auto layout = ResponseLayout::build({2, 2, 2, 3}, 4);
    return layout;
}

} // namespace

TEST_CASE("scheme 1 support is mutual independence") {
    const auto report = interpret(SupportPattern(4, scheme_effects(1)));
    CHECK(report.mutual());
    CHECK(report.partition == ResponsePartition{{0}, {1}, {2}, {3}});
    CHECK(report.hierarchy.ok);
    CHECK(report.text().find("Z1, Z2, Z3, Z4 are mutually independent given X") != std::string::npos);
}

TEST_CASE("scheme 2 support separates the first response") {
    const auto report = interpret(SupportPattern(4, scheme_effects(2)));
    CHECK_FALSE(report.mutual());
    CHECK(report.partition == ResponsePartition{{0}, {1, 2, 3}});
    CHECK(partition_text(report.partition) == "Z1 ⊥ {Z2,Z3,Z4} | X");
    CHECK(report.text().find("joint independence: Z1 ⊥ {Z2,Z3,Z4} | X") != std::string::npos);
}

TEST_CASE("scheme 3 support gives a conditional statement") {
    const SupportPattern support(4, scheme_effects(3));
    CHECK(joint_independence_partition(support).size() == 1);
    const auto statements = conditional_independence_statements(support);
    const auto it = std::find_if(statements.begin(), statements.end(),
                                 [](const ConditionalStatement& s) { return s.given == std::vector<int>{3}; });
    REQUIRE(it != statements.end());
    CHECK(it->text() == "Z1 ⊥ {Z2,Z3} | Z4, X");
    CHECK(it->minimal);
    CHECK(statements.front().given.size() == 1);
    for (const auto& s : statements) {
        if (s.given.size() == 2 && std::find(s.given.begin(), s.given.end(), 3) != s.given.end()) CHECK_FALSE(s.minimal);
    }
    const auto report = interpret(support);
    CHECK(report.text().find("no joint or mutual independence implied") != std::string::npos);
}

TEST_CASE("full support implies nothing") {
    const auto report = interpret(SupportPattern(4, layout4().effects()));
    CHECK(report.partition.size() == 1);
    CHECK(report.conditional.empty());
    CHECK(report.text().find("no joint or mutual independence implied") != std::string::npos);
    CHECK(report.text().find("no conditional independence implied") != std::string::npos);
}

TEST_CASE("hierarchy violations are listed") {
    const SupportPattern support(3, {fx({1}), fx({1, 2})});
    const auto check = check_hierarchy(support);
    CHECK_FALSE(check.ok);
    REQUIRE(check.violations.size() == 1);
    CHECK(check.violations[0].present == fx({1, 2}));
    CHECK(check.violations[0].missing == fx({2}));
    CHECK(interpret(support).text().find("{1,2} present but {2} missing") != std::string::npos);
    CHECK(check_hierarchy(std::vector<Effect>{fx({1})}).violations[0].missing == Effect{});
}

TEST_CASE("support from coefficients") {
    const auto layout = ResponseLayout::build({2, 2, 2}, 3);
    CoefficientBlocks beta(layout, PredictorPartition::local(2));
    beta.block(1, 0).setConstant(0.5);
    beta.block(4, 1).setConstant(1e-9);
    const auto exact = SupportPattern::from_beta(beta);
    CHECK(exact.effects() == std::vector<Effect>{Effect{}, fx({1}), fx({1, 2})});
    CHECK(exact.max_order_present() == 2);
    REQUIRE(exact.block_effects().size() == 2);
    CHECK(exact.block_effects()[1] == std::vector<Effect>{fx({1, 2})});
    const auto thresholded = SupportPattern::from_beta(beta, 1e-6);
    CHECK_FALSE(thresholded.contains(fx({1, 2})));
    CHECK(thresholded.contains(Effect{}));
}

TEST_CASE("scheme coefficients factorize as the interpreter claims") {
    const auto& layout = layout4();
    const BasisSet basis(layout);
    std::mt19937_64 rng(211);
    for (int scheme = 1; scheme <= 3; ++scheme) {
        const auto beta = gen_scheme_beta(scheme, layout, 5, 1000 + scheme);
        const auto report = interpret(SupportPattern::from_beta(beta));
        for (int rep = 0; rep < 20; ++rep) {
            Eigen::VectorXd x = testsupport::random_matrix(5, 1, rng);
            x(0) = 1.0;
            CHECK(verify_factorization(beta, basis, x, report.partition) <= 1e-10);
            for (const auto& st : report.conditional) {
                CHECK(verify_conditional_factorization(beta, basis, x, st.separated, st.given) <= 1e-10);
            }
        }
    }
}

TEST_CASE("a dense model does not factorize") {
    const auto& layout = layout4();
    const BasisSet basis(layout);
    std::mt19937_64 rng(223);
    const CoefficientBlocks beta(layout, PredictorPartition::local(1),
                                 testsupport::random_matrix(layout.total_dim(), 1, rng));
    const Eigen::VectorXd x = Eigen::VectorXd::Ones(1);
    CHECK(verify_factorization(beta, basis, x, {{0}, {1, 2, 3}}) > 1e-3);
    CHECK_THROWS_AS(verify_factorization(beta, basis, x, {{0}, {1, 2}}), InputError);
}

TEST_CASE("marginal pmf") {
    const auto layout = ResponseLayout::build({2, 3}, 2);
    const std::vector<double> pmf{0.1, 0.2, 0.05, 0.15, 0.3, 0.2};
    const std::vector<int> first{0}, second{1};
    const auto m1 = marginal_pmf(layout, pmf, first);
    const auto m2 = marginal_pmf(layout, pmf, second);
    CHECK(m1[0] == doctest::Approx(0.45));
    CHECK(m1[1] == doctest::Approx(0.55));
    CHECK(m2[2] == doctest::Approx(0.5));
    const std::vector<int> cell{1, 2};
    CHECK(marginal_index(layout, cell, second) == 2);
}

TEST_CASE("too many responses for conditional enumeration") {
    CHECK_THROWS_AS(conditional_independence_statements(SupportPattern(9, {})), InputError);
}
