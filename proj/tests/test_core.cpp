#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "restartbandit/core.hpp"
#include "restartbandit/quadrature.hpp"
#include "restartbandit/random.hpp"

using namespace restartbandit;

TEST(Cutoff, FiniteAndInfinite) {
    const auto t = Cutoff::at(2.5);
    EXPECT_TRUE(t.is_finite());
    EXPECT_EQ(t.value(), 2.5);
    EXPECT_TRUE(t.admits(2.5));
    EXPECT_FALSE(t.admits(2.5000001));

    const auto inf = Cutoff::never();
    EXPECT_TRUE(inf.is_infinite());
    EXPECT_TRUE(inf.admits(1e308));
    EXPECT_THROW((void)inf.value(), InvalidArgument);
    EXPECT_EQ(inf.to_string(), "inf");
    EXPECT_TRUE(std::isinf(inf.as_double()));
    EXPECT_EQ(Cutoff{}, Cutoff::never());
}

TEST(Cutoff, RejectsBadValues) {
    EXPECT_THROW(Cutoff::at(0.0), InvalidArgument);
    EXPECT_THROW(Cutoff::at(-1.0), InvalidArgument);
    EXPECT_THROW(Cutoff::at(NAN), InvalidArgument);
    EXPECT_THROW(Cutoff::at(INFINITY), InvalidArgument);
}

TEST(Cutoff, Ordering) {
    EXPECT_LT(Cutoff::at(1.0), Cutoff::at(2.0));
    EXPECT_LT(Cutoff::at(1e300), Cutoff::never());
    EXPECT_FALSE(Cutoff::never() < Cutoff::never());
    EXPECT_EQ(Cutoff::at(3.0).scaled(4.0), Cutoff::at(12.0));
    EXPECT_EQ(Cutoff::never().scaled(4.0), Cutoff::never());
}

TEST(Format, RoundTrips) {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, 2.0, -7.5}) {
        EXPECT_EQ(parse_double(format_double(v)), v) << v;
    }
    EXPECT_EQ(format_double(2.0), "2");
    EXPECT_EQ(format_double(INFINITY), "inf");
    EXPECT_TRUE(std::isinf(parse_double("inf")));
    EXPECT_THROW(parse_double("1.5x"), InvalidArgument);
    EXPECT_THROW(parse_double(""), InvalidArgument);
    EXPECT_EQ(parse_cutoff("inf"), Cutoff::never());
    EXPECT_EQ(parse_cutoff("0.25"), Cutoff::at(0.25));
}

TEST(Random, DeterministicPerSeed) {
    RandomStream a(7), b(7), c(8);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a();
        EXPECT_EQ(x, b());
        differs |= x != c();
    }
    EXPECT_TRUE(differs);
}

TEST(Random, DerivedSeedsAreDistinct) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t h = 0; h < 20; ++h) {
        for (std::uint64_t r = 0; r < 50; ++r) seen.insert(derive_seed(1, {h, r}));
    }
    EXPECT_EQ(seen.size(), 1000u);
    EXPECT_NE(derive_seed(1, {0, 1}), derive_seed(1, {1, 0}));
    EXPECT_EQ(RandomStream(5).split(3).seed(), derive_seed(5, {3}));
}

TEST(Random, UniformOpenInterval) {
    RandomStream r(3);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform01();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / n, 0.5, 0.005);
    for (int i = 0; i < 1000; ++i) EXPECT_LT(r.below(7), 7u);
}

TEST(Quadrature, Polynomials) {
    EXPECT_NEAR(integrate([](double x) { return x * x; }, 0.0, 3.0), 9.0, 1e-12);
    EXPECT_NEAR(integrate([](double x) { return std::exp(x); }, 0.0, 1.0), std::exp(1.0) - 1.0, 1e-9);
    EXPECT_EQ(integrate([](double) { return 1.0; }, 2.0, 2.0), 0.0);
}

TEST(Quadrature, MildEndpointSingularity) {
    // int_0^1 x^{0.2} dx = 1/1.2, derivative unbounded at 0
    EXPECT_NEAR(integrate([](double x) { return std::pow(x, 0.2); }, 0.0, 1.0, 1e-10), 1.0 / 1.2, 1e-8);
}

TEST(Quadrature, StrongSingularityReportsFailure) {
    EXPECT_THROW(integrate([](double x) { return 1.0 / std::sqrt(x); }, 1e-300, 1.0, 1e-10), QuadratureError);
}

TEST(Quadrature, NonFiniteIntegrandThrows) {
    EXPECT_THROW(integrate([](double) { return NAN; }, 0.0, 1.0), QuadratureError);
    EXPECT_THROW(integrate([](double x) { return x > 0.3 ? INFINITY : 1.0; }, 0.0, 1.0), QuadratureError);
}
