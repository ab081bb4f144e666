#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "restartbandit/stats.hpp"

using namespace restartbandit;
using namespace restartbandit::stats;

TEST(MannKendall, Statistic) {
    EXPECT_EQ(mann_kendall_s(std::vector<double>{1, 2, 3}), 3);
    EXPECT_EQ(mann_kendall_s(std::vector<double>{3, 2, 1}), -3);
    EXPECT_EQ(mann_kendall_s(std::vector<double>{1, 1, 1}), 0);
    EXPECT_EQ(mann_kendall_s(std::vector<double>{1, 3, 2}), 1);
}

TEST(MannKendall, ExactSmallSamples) {
    // Three points: only the identity ordering reaches S = 3.
    EXPECT_NEAR(mann_kendall_increasing(std::vector<double>{1, 2, 3}).p_value, 1.0 / 6.0, 1e-15);
    EXPECT_NEAR(mann_kendall_increasing(std::vector<double>{1, 2, 3, 4}).p_value, 1.0 / 24.0, 1e-15);
    // S = 4 for n = 4: orderings with at most one inversion, 4 of 24.
    const auto t = mann_kendall_increasing(std::vector<double>{1, 2, 4, 3});
    EXPECT_EQ(t.s, 4);
    EXPECT_NEAR(t.p_value, 4.0 / 24.0, 1e-15);
    EXPECT_EQ(mann_kendall_increasing(std::vector<double>{3, 2, 1}).p_value, 1.0);
    EXPECT_EQ(mann_kendall_increasing(std::vector<double>{5}).p_value, 1.0);
}

TEST(MannKendall, NormalApproximation) {
    std::vector<double> up(12), down(12);
    for (int i = 0; i < 12; ++i) {
        up[i] = i;
        down[i] = -i;
    }
    const auto t = mann_kendall_increasing(up);
    EXPECT_EQ(t.s, 66);
    const double var = 12.0 * 11.0 * 29.0 / 18.0;
    EXPECT_NEAR(t.p_value, 0.5 * std::erfc(65.0 / std::sqrt(var) / std::sqrt(2.0)), 1e-12);
    EXPECT_LT(t.p_value, 1e-4);
    EXPECT_GT(mann_kendall_increasing(down).p_value, 0.999);
}

TEST(PairedTest, Examples) {
    const std::vector<double> a = {1, 2}, b = {3, 2};
    const auto t = paired_less(a, b);
    EXPECT_DOUBLE_EQ(t.mean_diff, -1.0);
    EXPECT_DOUBLE_EQ(t.stderr_diff, 1.0);
    EXPECT_DOUBLE_EQ(t.z, -1.0);
    EXPECT_NEAR(t.p_value, 0.158655253931457, 1e-12);

    const std::vector<double> c = {1, 2, 3}, d = {2, 3, 4};
    EXPECT_EQ(paired_less(c, d).p_value, 0.0);
    EXPECT_EQ(paired_less(d, c).p_value, 1.0);
    EXPECT_EQ(paired_less(c, c).p_value, 0.5);
}

TEST(PairedTest, Validation) {
    const std::vector<double> a = {1, 2, 3}, b = {1, 2};
    EXPECT_THROW(paired_less(a, b), InvalidArgument);
    EXPECT_THROW(paired_less(std::vector<double>{1}, std::vector<double>{2}), InvalidArgument);
}
