#pragma once

// Mean/variance estimation (plain and median-of-means), confidence radii and
// the optimistic rate index built from them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "restartbandit/core.hpp"

namespace restartbandit {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Streaming count, mean and population variance. Values are shifted by the
/// first observation before accumulating squares, which keeps the
/// sum-of-squares formula well conditioned.
class RunningMoments {
public:
    void add(double x) {
        if (count_ == 0) shift_ = x;
        const double d = x - shift_;
        sum_.add(d);
        sum_sq_.add(d * d);
        ++count_;
    }

    std::size_t count() const { return count_; }

    double mean() const {
        if (count_ == 0) throw InvalidArgument("mean of empty sample");
        return shift_ + sum_.value() / static_cast<double>(count_);
    }

    double variance() const {
        if (count_ == 0) throw InvalidArgument("variance of empty sample");
        const double n = static_cast<double>(count_);
        const double m = sum_.value() / n;
        return std::max(0.0, sum_sq_.value() / n - m * m);
    }

private:
    std::size_t count_ = 0;
    double shift_ = 0.0;
    CompensatedSum sum_;
    CompensatedSum sum_sq_;
};

inline double empirical_mean(std::span<const double> values) {
    if (values.empty()) throw InvalidArgument("empirical_mean: empty sample");
    CompensatedSum s;
    for (double x : values) s.add(x);
    return s.value() / static_cast<double>(values.size());
}

/// Population variance (divisor |S|).
inline double empirical_variance(std::span<const double> values) {
    const double m = empirical_mean(values);
    CompensatedSum s;
    for (double x : values) s.add((x - m) * (x - m));
    return s.value() / static_cast<double>(values.size());
}

/// Lower median: element (m-1)/2 of the sorted values.
inline double lower_median(std::vector<double> values) {
    if (values.empty()) throw InvalidArgument("median of empty list");
    const auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
    std::nth_element(values.begin(), mid, values.end());
    return *mid;
}

namespace detail {

template <class Stat>
double median_of_groups(std::span<const double> values, std::size_t m, Stat stat) {
    if (m == 0) throw InvalidArgument("group count must be >= 1");
    if (m > values.size()) throw InvalidArgument("group count exceeds sample size");
    const std::size_t g = values.size() / m;
    std::vector<double> stats;
    stats.reserve(m);
    for (std::size_t j = 0; j < m; ++j) stats.push_back(stat(values.subspan(j * g, g)));
    return lower_median(std::move(stats));
}

} // namespace detail

/// Median of m group means; groups have floor(n/m) consecutive samples and
/// the surplus at the tail is discarded.
inline double median_of_means(std::span<const double> values, std::size_t m) {
    return detail::median_of_groups(values, m, [](std::span<const double> g) { return empirical_mean(g); });
}

inline double median_of_variances(std::span<const double> values, std::size_t m) {
    return detail::median_of_groups(values, m, [](std::span<const double> g) { return empirical_variance(g); });
}

/// m = floor(3.5 alpha ln n) + 1.
inline std::size_t group_count(std::size_t n, double alpha) {
    if (n == 0) throw InvalidArgument("group_count needs n >= 1");
    return static_cast<std::size_t>(std::floor(3.5 * alpha * std::log(static_cast<double>(n)))) + 1;
}

// ---------------------------------------------------------------------------
// Radii

enum class EstimatorKind {
    bernstein,       // empirical mean/variance with empirical-Bernstein radii
    median_of_means, // median-of-means mean/variance, range-free radii
};

struct RadiusParams {
    double alpha = 2.01;
    double beta = 0.5;
    std::size_t n = 1;

    void validate() const {
        if (!(alpha > 2.0)) throw InvalidArgument("alpha must exceed 2");
        if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgument("beta must lie in (0,1)");
        if (n < 1) throw InvalidArgument("epoch n must be >= 1");
    }

    /// log(n^alpha).
    double log_term() const { return alpha * std::log(static_cast<double>(n)); }
};

/// Paired (U, V) samples for one decision together with their range bounds.
struct SampleSet {
    std::vector<double> u;
    std::vector<double> v;
    double range_u = 1.0;
    double range_v = 1.0;

    std::size_t size() const { return u.size(); }

    void validate() const {
        if (u.size() != v.size()) throw InvalidArgument("SampleSet: u and v lengths differ");
        for (double x : u) {
            if (!(x > 0.0 && x <= range_u)) throw InvalidArgument("SampleSet: u outside (0, range_u]");
        }
        for (double x : v) {
            if (!(x >= 0.0 && x <= range_v)) throw InvalidArgument("SampleSet: v outside [0, range_v]");
        }
    }
};

struct Radii {
    double epsilon = 0.0; // time-side radius
    double eta = 0.0;     // reward-side radius
};

/// Empirical-Bernstein width: 3 * range * L / T + sqrt(2 * var * L / T).
inline double bernstein_width(double variance, double range, double log_term, std::size_t count) {
    const double T = static_cast<double>(count);
    return 3.0 * range * log_term / T + std::sqrt(2.0 * variance * log_term / T);
}

/// Median-of-means width: 11 * sqrt(2 * median_variance * L / T).
inline double mom_width(double median_variance, double log_term, std::size_t count) {
    return 11.0 * std::sqrt(2.0 * median_variance * log_term / static_cast<double>(count));
}

inline Radii bernstein_radii(const SampleSet& s, const RadiusParams& p) {
    s.validate();
    p.validate();
    if (s.size() == 0) throw InvalidArgument("bernstein_radii: no samples");
    const double L = p.log_term();
    return {bernstein_width(empirical_variance(s.u), s.range_u, L, s.size()),
            bernstein_width(empirical_variance(s.v), s.range_v, L, s.size())};
}

/// Group count min(group_count(n, alpha), T); no range-dependent term.
inline Radii mom_radii(const SampleSet& s, const RadiusParams& p) {
    s.validate();
    p.validate();
    if (s.size() == 0) throw InvalidArgument("mom_radii: no samples");
    const std::size_t m = std::min(group_count(p.n, p.alpha), s.size());
    const double L = p.log_term();
    return {mom_width(median_of_variances(s.u, m), L, s.size()),
            mom_width(median_of_variances(s.v, m), L, s.size())};
}

// ---------------------------------------------------------------------------
// Rate index

/// (1 + beta)^2 / (1 - beta).
inline double composite_from_beta(double beta) {
    if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgument("beta must lie in (0,1)");
    return (1.0 + beta) * (1.0 + beta) / (1.0 - beta);
}

/// Inverse of composite_from_beta by bisection; the composite is increasing
/// on (0,1) from 1 to infinity.
inline double beta_from_composite(double composite) {
    if (!(composite > 1.0) || !std::isfinite(composite)) {
        throw InvalidArgument("composite (1+beta)^2/(1-beta) must be finite and > 1");
    }
    double lo = 0.0;
    double hi = 1.0;
    for (int i = 0; i < 200 && hi - lo > 1e-16; ++i) {
        const double mid = 0.5 * (lo + hi);
        if ((1.0 + mid) * (1.0 + mid) / (1.0 - mid) < composite) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// z(beta) = max{2 sqrt(2) (1+beta)^2 / (1-beta)^3, 1/beta}.
inline double z_beta(double beta) {
    if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgument("beta must lie in (0,1)");
    const double a = 2.0 * std::sqrt(2.0) * (1.0 + beta) * (1.0 + beta) / std::pow(1.0 - beta, 3);
    return std::max(a, 1.0 / beta);
}

struct UcbIndex {
    double rate = 0.0;
    double radius = 0.0;
    double value = 0.0; // rate + radius
    std::size_t count = 0;
};

class DegenerateEstimatorError : public Error {
public:
    using Error::Error;
};

/// rate = mu_v / mu_u, radius = (1+beta)^2/(1-beta) * (eta + rate * epsilon) / mu_u.
inline UcbIndex rate_ucb(double mu_u, double mu_v, double epsilon, double eta, double beta, std::size_t count = 0) {
    if (!(mu_u > 0.0)) throw DegenerateEstimatorError("rate_ucb: estimated epoch length must be > 0");
    const double rate = mu_v / mu_u;
    const double radius = composite_from_beta(beta) * (eta + rate * epsilon) / mu_u;
    return {rate, radius, rate + radius, count};
}

} // namespace restartbandit
