#include "idxcast/common.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>

using namespace idxcast;

TEST(Dates, IsoRoundTrip) {
    const auto d = parse_iso_date("2020-02-19");
    ASSERT_TRUE(d);
    EXPECT_EQ(format_date(*d), "2020-02-19");
    EXPECT_FALSE(parse_iso_date("2020-02-30"));
    EXPECT_FALSE(parse_iso_date("2020/02/19"));
    EXPECT_FALSE(parse_iso_date(""));
}

TEST(FormatDouble, ShortestRoundTrip) {
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(53.6), "53.6");
    const double x = 1.0 / 3.0;
    EXPECT_EQ(std::stod(format_double(x)), x);
}

TEST(Rng, SameSeedSameStream) {
    Rng a(9), b(9);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(Rng, Uniform01InUnitInterval) {
    Rng rng(1);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform01();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(Rng, IndexCoversRangeUniformly) {
    Rng rng(2);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 70000; ++i) ++counts[rng.index(7)];
    for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(MixSeed, DistinctStreams) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t k = 0; k < 1000; ++k) seen.insert(mix_seed(42, k));
    EXPECT_EQ(seen.size(), 1000u);
    EXPECT_EQ(mix_seed(42, 3), mix_seed(42, 3));
}

TEST(Errors, KindIsCarried) {
    try {
        throw Error(ErrorKind::WindowTooLarge, "x");
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::WindowTooLarge);
    }
    EXPECT_TRUE(is_data_error(ErrorKind::MissingFile));
    EXPECT_FALSE(is_data_error(ErrorKind::InvalidConfig));
}
