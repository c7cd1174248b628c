#include "idxcast/tune.hpp"

#include "oracles/synthetic.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <cmath>

using namespace idxcast;
using namespace idxcast::tune;

namespace {

HyperparamSpace unit_interval() { return HyperparamSpace(ModelKind::Forest, {{"x", RealUniform{0.0, 1.0}}}); }

Objective quadratic() {
    return [](const HyperparamPoint& p, std::uint64_t) {
        const double x = get_real(p, "x");
        return Evaluation{(x - 0.3) * (x - 0.3), {(x - 0.3) * (x - 0.3)}};
    };
}

void check_consistent(const TuneResult& r) {
    ASSERT_EQ(r.history.size(), r.iterations);
    double best = r.history.front().score;
    for (const auto& e : r.history) best = std::min(best, e.score);
    EXPECT_EQ(r.best_score, best);
    const auto first = std::find_if(r.history.begin(), r.history.end(), [&](auto& e) { return e.score == best; });
    EXPECT_EQ(first->point, r.best_point);
}

ingest::PriceSeries linear_series(std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = 100.0 + static_cast<double>(i);
    return synth::series(v);
}

}  // namespace

TEST(RandomSearch, SingleIteration) {
    const auto r = random_search(unit_interval(), quadratic(), {1, 5, 1});
    EXPECT_EQ(r.history.size(), 1u);
    EXPECT_EQ(r.best_point, r.history[0].point);
    check_consistent(r);
}

TEST(RandomSearch, TwoPointSpaceExhaustive) {
    const HyperparamSpace s(ModelKind::Forest, {{"c", Categorical{{std::string("a"), std::string("b")}}}});
    const Objective f = [](const HyperparamPoint& p, std::uint64_t) {
        return Evaluation{get_string(p, "c") == "a" ? 2.0 : 1.0, {}};
    };
    const auto r = random_search(s, f, {50, 3, 1});
    EXPECT_EQ(get_string(r.best_point, "c"), "b");
    check_consistent(r);
}

TEST(RandomSearch, DeterministicAcrossThreads) {
    const auto a = random_search(unit_interval(), quadratic(), {30, 9, 1});
    const auto b = random_search(unit_interval(), quadratic(), {30, 9, 4});
    EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
    EXPECT_EQ(to_json(a).dump(), to_json(random_search(unit_interval(), quadratic(), {30, 9, 1})).dump());
}

TEST(RandomSearch, SinkSeesHistoryInOrder) {
    std::vector<std::size_t> seen;
    const auto r = random_search(unit_interval(), quadratic(), {8, 1, 3},
                                 [&](std::size_t i, const HistoryEntry&) { seen.push_back(i); });
    ASSERT_EQ(seen.size(), 8u);
    for (std::size_t i = 0; i < seen.size(); ++i) EXPECT_EQ(seen[i], i);
}

TEST(Bayes, FindsQuadraticMinimum) {
    BayesOptions o;
    o.n_init = 5;
    o.n_iterations = 30;
    o.seed = 1;
    const auto r = bayesian_optimize(unit_interval(), quadratic(), o);
    EXPECT_NEAR(get_real(r.best_point, "x"), 0.3, 0.05);
    check_consistent(r);
}

TEST(Bayes, ConstantObjectiveTerminates) {
    BayesOptions o;
    o.n_init = 3;
    o.n_iterations = 10;
    const Objective f = [](const HyperparamPoint&, std::uint64_t) { return Evaluation{1.0, {1.0}}; };
    const auto r = bayesian_optimize(unit_interval(), f, o);
    EXPECT_EQ(r.history.size(), 10u);
    EXPECT_EQ(r.best_score, 1.0);
    EXPECT_EQ(r.best_point, r.history.front().point);
}

TEST(Bayes, Preconditions) {
    BayesOptions o;
    o.n_init = 1;
    EXPECT_THROW(bayesian_optimize(unit_interval(), quadratic(), o), Error);
    o.n_init = 5;
    o.n_iterations = 4;
    EXPECT_THROW(bayesian_optimize(unit_interval(), quadratic(), o), Error);
}

TEST(Bayes, MixedSpaceDeterministic) {
    const HyperparamSpace s(ModelKind::Forest, {{"x", RealUniform{0, 1}},
                                                {"k", IntUniform{1, 5}},
                                                {"c", Categorical{{std::string("a"), std::string("b")}}}});
    const Objective f = [](const HyperparamPoint& p, std::uint64_t) {
        const double v = std::pow(get_real(p, "x") - 0.5, 2) + 0.1 * static_cast<double>(get_int(p, "k")) +
                         (get_string(p, "c") == "a" ? 0.0 : 0.2);
        return Evaluation{v, {v}};
    };
    BayesOptions o;
    o.n_iterations = 15;
    o.seed = 4;
    const auto a = bayesian_optimize(s, f, o);
    EXPECT_EQ(to_json(a).dump(), to_json(bayesian_optimize(s, f, o)).dump());
    for (const auto& e : a.history) EXPECT_TRUE(s.contains(e.point));
    check_consistent(a);
}

TEST(TuneResultJson, RoundTrip) {
    const auto r = random_search(unit_interval(), quadratic(), {5, 2, 1});
    const auto back = tune_result_from_json(nlohmann::json::parse(to_json(r).dump()));
    EXPECT_EQ(to_json(back).dump(), to_json(r).dump());
}

TEST(CvObjective, SingleFoldMeanEqualsFold) {
    const auto s = synth::series(synth::sine(120, 20, 10, 0.05, 3));
    const HyperparamPoint p{{"window_size", std::int64_t{3}}, {"n_estimators", std::int64_t{5}}};
    CvConfig cv;
    cv.folds = 1;
    const auto e = cv_objective(ModelKind::Forest, p, s, cv, 1);
    ASSERT_EQ(e.per_fold.size(), 1u);
    EXPECT_EQ(e.mean_score, e.per_fold[0]);
}

TEST(CvObjective, DeepTreeBeatsStumpOnLinearSeries) {
    const auto s = linear_series(200);
    const HyperparamPoint deep{{"window_size", std::int64_t{2}}, {"n_estimators", std::int64_t{1}},
                               {"max_depth", std::string("None")}};
    auto stump = deep;
    stump["max_depth"] = std::int64_t{1};
    const auto a = cv_objective(ModelKind::Forest, deep, s, {}, 1);
    const auto b = cv_objective(ModelKind::Forest, stump, s, {}, 1);
    EXPECT_EQ(a.per_fold.size(), 5u);
    EXPECT_LT(a.mean_score, b.mean_score);
}

TEST(CvObjective, DeterministicAndThreadIndependent) {
    const auto s = synth::series(synth::sine(150, 25, 10, 0.05, 4));
    const HyperparamPoint p{{"window_size", std::int64_t{3}}, {"epochs", std::int64_t{2}}, {"units", std::int64_t{4}}};
    const auto a = cv_objective(ModelKind::Lstm, p, s, {}, 7, 1);
    const auto b = cv_objective(ModelKind::Lstm, p, s, {}, 7, 3);
    EXPECT_EQ(a.per_fold, b.per_fold);
}

TEST(CvObjective, TooLittleData) {
    const auto s = linear_series(6);
    const HyperparamPoint p{{"window_size", std::int64_t{5}}};
    EXPECT_THROW(cv_objective(ModelKind::Forest, p, s, {}, 1), Error);
}
