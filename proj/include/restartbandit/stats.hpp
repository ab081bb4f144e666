#pragma once

// Small hypothesis tests used by the experiment harnesses.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "restartbandit/core.hpp"

namespace restartbandit::stats {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Mann-Kendall S statistic: sum over i < j of sign(x_j - x_i).
inline int mann_kendall_s(std::span<const double> xs) {
    int s = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = i + 1; j < xs.size(); ++j) {
            s += (xs[j] > xs[i]) - (xs[j] < xs[i]);
        }
    }
    return s;
}

struct TrendTest {
    int s = 0;
    double p_value = 1.0; // one-sided, H1: increasing trend
};

/// One-sided Mann-Kendall test for an increasing trend. Exact permutation
/// distribution for n <= 9 (ties ignored), normal approximation with
/// continuity correction above.
inline TrendTest mann_kendall_increasing(std::span<const double> xs) {
    TrendTest t;
    t.s = mann_kendall_s(xs);
    const std::size_t n = xs.size();
    if (n < 2) return t;
    if (n <= 9) {
        std::vector<double> perm(n);
        std::iota(perm.begin(), perm.end(), 0.0);
        std::size_t total = 0;
        std::size_t at_least = 0;
        do {
            ++total;
            if (mann_kendall_s(perm) >= t.s) ++at_least;
        } while (std::next_permutation(perm.begin(), perm.end()));
        t.p_value = static_cast<double>(at_least) / static_cast<double>(total);
        return t;
    }
    const double nd = static_cast<double>(n);
    const double var = nd * (nd - 1.0) * (2.0 * nd + 5.0) / 18.0;
    const double z = t.s > 0 ? (t.s - 1) / std::sqrt(var) : (t.s < 0 ? (t.s + 1) / std::sqrt(var) : 0.0);
    t.p_value = 1.0 - normal_cdf(z);
    return t;
}

struct PairedTest {
    double mean_diff = 0.0;
    double stderr_diff = 0.0;
    double z = 0.0;
    double p_value = 1.0; // one-sided, H1: mean(a - b) < 0
};

/// One-sided paired test of H1: E[a - b] < 0 using the large-sample normal
/// approximation to the paired t statistic.
inline PairedTest paired_less(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) throw InvalidArgument("paired test needs equal lengths >= 2");
    const double n = static_cast<double>(a.size());
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m += a[i] - b[i];
    m /= n;
    double ss = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) ss += (a[i] - b[i] - m) * (a[i] - b[i] - m);
    PairedTest t;
    t.mean_diff = m;
    t.stderr_diff = std::sqrt(ss / (n - 1.0) / n);
    if (t.stderr_diff == 0.0) {
        t.z = m < 0 ? -INFINITY : (m > 0 ? INFINITY : 0.0);
    } else {
        t.z = m / t.stderr_diff;
    }
    t.p_value = normal_cdf(t.z);
    return t;
}

} // namespace restartbandit::stats
