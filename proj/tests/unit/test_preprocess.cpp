#include "idxcast/preprocess.hpp"

#include "oracles/split_oracle.hpp"
#include "oracles/synthetic.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace idxcast;
using namespace idxcast::preprocess;

namespace {

template <typename Fn>
ErrorKind kind_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorKind::InvalidModel;
}

}  // namespace

TEST(FitNormalizer, TwoPoints) {
    const std::vector<double> v{0, 10};
    const auto p = fit_normalizer(v);
    EXPECT_EQ(p.mean(), 5.0);
    EXPECT_EQ(p.min(), 0.0);
    EXPECT_EQ(p.max(), 10.0);
}

TEST(FitNormalizer, FourPoints) {
    const std::vector<double> v{1, 2, 3, 4};
    const auto p = fit_normalizer(v);
    EXPECT_EQ(p.mean(), 2.5);
    EXPECT_EQ(p.min(), 1.0);
    EXPECT_EQ(p.max(), 4.0);
}

TEST(FitNormalizer, Errors) {
    EXPECT_EQ(kind_of([] { fit_normalizer(std::vector<double>{7, 7, 7}); }), ErrorKind::DegenerateRange);
    EXPECT_EQ(kind_of([] { fit_normalizer(std::vector<double>{7}); }), ErrorKind::TooShort);
    EXPECT_EQ(kind_of([] { NormalizationParams(5, 6, 10); }), ErrorKind::DegenerateRange);
}

TEST(Normalize, Examples) {
    const NormalizationParams p(5, 0, 10);
    EXPECT_EQ(normalize(std::vector<double>{0, 10}, p), (std::vector<double>{-0.5, 0.5}));
    EXPECT_EQ(p.normalize(5.0), 0.0);
    const std::vector<double> v{1, 2, 3, 4};
    const auto n = normalize(v, fit_normalizer(v));
    const std::vector<double> want{-0.5, -1.0 / 6.0, 1.0 / 6.0, 0.5};
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(n[i], want[i], 1e-15);
}

TEST(Denormalize, Examples) {
    const NormalizationParams p(5, 0, 10);
    EXPECT_EQ(denormalize(std::vector<double>{0}, p), (std::vector<double>{5}));
    EXPECT_EQ(denormalize(std::vector<double>{-0.5, 0.5}, p), (std::vector<double>{0, 10}));
}

TEST(NormalizeProperty, OrderPreservingAndRoundTrip) {
    Rng rng(5);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> v(50);
        for (auto& x : v) x = rng.uniform(100, 5000);
        const auto p = fit_normalizer(v);
        const auto n = normalize(v, p);
        const auto back = denormalize(n, p);
        for (std::size_t i = 0; i < v.size(); ++i) {
            EXPECT_LE(std::abs(back[i] - v[i]), 1e-9 * std::abs(v[i]));
            EXPECT_GE(n[i], -1.0);
            EXPECT_LE(n[i], 1.0);
            for (std::size_t j = 0; j < v.size(); ++j) {
                if (v[i] < v[j]) ASSERT_LT(n[i], n[j]);
            }
        }
    }
}

TEST(MakeWindows, EnumerationExample) {
    const std::vector<double> v{1, 2, 3, 4, 5};
    const auto w = make_windows(v, {}, 2);
    ASSERT_EQ(w.size(), 3u);
    EXPECT_EQ(w.features.cols(), 2u);
    const double want[3][2] = {{1, 2}, {2, 3}, {3, 4}};
    for (std::size_t r = 0; r < 3; ++r) {
        for (std::size_t c = 0; c < 2; ++c) EXPECT_EQ(w.features(r, c), want[r][c]);
    }
    EXPECT_EQ(w.targets, (std::vector<double>{3, 4, 5}));
}

TEST(MakeWindows, LagOneAndTooLarge) {
    const std::vector<double> v{7, 8, 9};
    const auto w = make_windows(v, {}, 1);
    EXPECT_EQ(w.targets, (std::vector<double>{8, 9}));
    EXPECT_EQ(w.features(0, 0), 7.0);
    EXPECT_EQ(w.features(1, 0), 8.0);
    EXPECT_EQ(kind_of([&] { make_windows(v, {}, 3); }), ErrorKind::WindowTooLarge);
}

TEST(MakeWindows, TargetsReproduceTailAndDatesAlign) {
    const auto s = synth::series(synth::sine(40, 10, 5, 0.1, 1));
    const auto v = s.values();
    const auto d = s.dates();
    for (std::size_t w = 1; w < 10; ++w) {
        const auto data = make_windows(v, d, w);
        EXPECT_EQ(data.size(), v.size() - w);
        EXPECT_EQ(data.targets, std::vector<double>(v.begin() + static_cast<long>(w), v.end()));
        for (std::size_t i = 0; i < data.size(); ++i) {
            EXPECT_EQ(data.target_dates[i], d[i + w]);
            for (std::size_t c = 0; c < w; ++c) EXPECT_EQ(data.features(i, c), v[i + c]);
        }
    }
}

TEST(SliceRegime, IndexCounts) {
    const auto s = synth::series({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    DatasetSlice slice{"D", s.observations[6].date, 2, std::nullopt};
    const auto pair = slice_regime(s, slice);
    EXPECT_EQ(pair.train.size(), 7u);
    EXPECT_EQ(pair.test.size(), 2u);
    EXPECT_EQ(pair.test.observations[0].close, 8.0);
    EXPECT_LT(pair.train.observations.back().date, pair.test.observations.front().date);
}

TEST(SliceRegime, Errors) {
    const auto s = synth::series({1, 2, 3, 4, 5});
    EXPECT_EQ(kind_of([&] { slice_regime(s, {"D", s.observations.back().date, 1, std::nullopt}); }),
              ErrorKind::InsufficientTestData);
    const Date early{std::chrono::year{2000} / 1 / 1};
    EXPECT_EQ(kind_of([&] { slice_regime(s, {"D", early, 1, std::nullopt}); }), ErrorKind::CutoffOutOfRange);
}

TEST(SliceRegime, TestStartSkipsGap) {
    const auto s = synth::series({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    const auto pair = slice_regime(s, {"D", s.observations[2].date, 2, s.observations[6].date});
    EXPECT_EQ(pair.train.size(), 3u);
    EXPECT_EQ(pair.context.size(), 6u);
    EXPECT_EQ(pair.test.observations[0].close, 7.0);
}

TEST(DefaultSlices, NestedOverSpan) {
    std::vector<double> v(3700);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1000.0 + static_cast<double>(i);
    const auto s = synth::series(v, "SP500", Date{std::chrono::year{2009} / 6 / 1});
    ASSERT_GE(s.observations.back().date, (Date{std::chrono::year{2023} / 3 / 31}));
    const auto slices = default_slices();
    ASSERT_EQ(slices.size(), 3u);
    const auto pairs = slice_regimes(s, slices);
    for (std::size_t k = 1; k < pairs.size(); ++k) {
        EXPECT_LT(pairs[k - 1].train.size(), pairs[k].train.size());
        for (std::size_t i = 0; i < pairs[k - 1].train.size(); ++i) {
            ASSERT_EQ(pairs[k - 1].train.observations[i], pairs[k].train.observations[i]);
        }
    }
    for (const auto& p : pairs) EXPECT_EQ(p.test.size(), 60u);
}

TEST(RollingSplits, Examples) {
    const auto s = rolling_splits(10, 5, 1);
    ASSERT_EQ(s.size(), 5u);
    for (std::size_t k = 0; k < 5; ++k) {
        EXPECT_EQ(s[k].train, (IndexRange{0, 5 + k}));
        EXPECT_EQ(s[k].test, (IndexRange{5 + k, 6 + k}));
    }
    EXPECT_EQ(rolling_splits(6, 5, 1).size(), 1u);
    EXPECT_EQ(kind_of([] { rolling_splits(6, 5, 2); }), ErrorKind::InvalidSplitConfig);
    EXPECT_EQ(kind_of([] { rolling_splits(6, 0, 2); }), ErrorKind::InvalidSplitConfig);
}

TEST(RollingSplits, MatchesEnumerationOracle) {
    Rng rng(8);
    for (int t = 0; t < 300; ++t) {
        const std::size_t n = 2 + rng.index(200);
        const std::size_t initial = 1 + rng.index(n - 1);
        const std::size_t horizon = 1 + rng.index(n - initial);
        const auto got = rolling_splits(n, initial, horizon);
        const auto want = oracle::enumerate_splits(n, initial, horizon);
        ASSERT_EQ(got.size(), want.size());
        std::size_t next_test = initial;
        for (std::size_t k = 0; k < got.size(); ++k) {
            EXPECT_EQ(got[k].train, (IndexRange{want[k].train.front(), want[k].train.back() + 1}));
            EXPECT_EQ(got[k].test, (IndexRange{want[k].test.front(), want[k].test.back() + 1}));
            EXPECT_EQ(got[k].test.begin, next_test);
            next_test = got[k].test.end;
        }
    }
}
