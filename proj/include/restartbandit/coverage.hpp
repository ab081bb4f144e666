#pragma once

// Empirical coverage of the reward-rate deviation radii for a renewal reward
// process (X_n, R_n): how often |r_hat - r| exceeds
//   (1+beta)^2/(1-beta) * (eta + r_hat * epsilon) / mu_hat_X
// with the empirical-Bernstein or the median-of-means widths at confidence
// level delta.

#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "restartbandit/arm_models.hpp"
#include "restartbandit/estimators.hpp"
#include "restartbandit/random.hpp"

namespace restartbandit {

struct CoverageReport {
    EstimatorKind estimator = EstimatorKind::bernstein;
    std::size_t n = 0;
    double delta = 0.0;
    double beta = 0.0;
    std::size_t replications = 0;
    std::size_t violations = 0;
    double bound = 0.0;     // 12 delta (Bernstein) or 16.8 delta (median)
    double threshold = 0.0; // sample size from which the bound is guaranteed
    bool pre_asymptotic = false;

    double violation_fraction() const {
        return replications ? static_cast<double>(violations) / static_cast<double>(replications) : 0.0;
    }
    /// Only meaningful when not pre-asymptotic.
    bool within_bound() const { return violation_fraction() <= bound; }
    std::string status() const {
        if (pre_asymptotic) return within_bound() ? "pre-asymptotic(within)" : "pre-asymptotic(exceeded)";
        return within_bound() ? "pass" : "fail";
    }
};

inline const char* to_string(EstimatorKind k) {
    return k == EstimatorKind::bernstein ? "bernstein" : "median_of_means";
}

/// Moments needed for the sample-size thresholds.
struct VariableMoments {
    double mean = 0.0;
    double variance = 0.0;
    double kurtosis = 0.0; // E[(Y - EY)^4] / Var^2, 0 for a degenerate variable
    double cv2 = 0.0;      // Var / mean^2
};

inline VariableMoments moments_from_raw(double m1, double m2, double m3, double m4) {
    VariableMoments v;
    v.mean = m1;
    v.variance = std::max(0.0, m2 - m1 * m1);
    const double c4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1 * m1 * m1 * m1;
    v.kurtosis = v.variance > 0.0 ? c4 / (v.variance * v.variance) : 0.0;
    v.cv2 = m1 > 0.0 ? v.variance / (m1 * m1) : 0.0;
    return v;
}

inline VariableMoments time_moments(const ArmSpec& arm) {
    const auto& d = arm.completion;
    return moments_from_raw(d.raw_moment(1), d.raw_moment(2), d.raw_moment(3), d.raw_moment(4));
}

inline VariableMoments reward_moments(const ArmSpec& arm) {
    return moments_from_raw(reward_moment(arm, 1), reward_moment(arm, 2), reward_moment(arm, 3), reward_moment(arm, 4));
}

/// Largest possible completion time (+inf for unbounded support).
inline double upper_support(const CompletionDistribution& d) {
    if (const auto* x = std::get_if<Deterministic>(&d.variant())) return x->value;
    if (const auto* x = std::get_if<Uniform>(&d.variant())) return x->hi;
    if (const auto* x = std::get_if<Empirical>(&d.variant())) return x->sorted.back();
    return std::numeric_limits<double>::infinity();
}

namespace detail {
// a^2 / Var with the convention that a degenerate variable contributes 0.
inline double range_ratio(double range, double var) { return var > 0.0 ? range * range / var : 0.0; }
} // namespace detail

/// Sample size beyond which the empirical-Bernstein rate bound (12 delta)
/// is guaranteed, for X in [0, a], R in [0, b].
inline double bernstein_threshold(const VariableMoments& x, const VariableMoments& r, double a, double b, double beta) {
    return 8.0 * (x.kurtosis + r.kurtosis + detail::range_ratio(a, x.variance) + detail::range_ratio(b, r.variance)) +
           3.0 * (x.cv2 / (beta * beta) + a / (beta * x.mean) + r.cv2 / (beta * beta) + b / (beta * r.mean));
}

/// Explicit part of the median-of-means threshold; the unspecified additive
/// constant is taken as 0, so this is a lower bound on the true threshold.
inline double median_threshold(const VariableMoments& x, const VariableMoments& r, double beta) {
    return 1024.0 * (x.kurtosis + r.kurtosis + (x.cv2 + r.cv2) / (beta * beta));
}

struct CoverageSpec {
    ArmSpec arm;
    std::size_t n = 10000;
    double delta = 0.01;
    double beta = 1.0 / 3.0;
    EstimatorKind estimator = EstimatorKind::bernstein;
    std::size_t replications = 2000;
    std::uint64_t seed = 0;
};

/// Monte Carlo check of the rate-deviation bound. Each replication draws n
/// i.i.d. (X, R) pairs (no censoring) from an independent substream.
inline CoverageReport rate_deviation_bound_check(const CoverageSpec& spec) {
    if (spec.n < 2) throw InvalidArgument("coverage check needs n >= 2");
    if (!(spec.delta > 0.0 && spec.delta < 1.0)) throw InvalidArgument("delta must lie in (0,1)");
    if (!(spec.beta > 0.0 && spec.beta < 1.0)) throw InvalidArgument("beta must lie in (0,1)");
    const ArmSpec& arm = spec.arm;
    const auto xm = time_moments(arm);
    const auto rm = reward_moments(arm);
    const double true_rate = rm.mean / xm.mean;
    const double log_term = std::log(1.0 / spec.delta);
    const double a = upper_support(arm.completion);
    const double b = 1.0;
    const double composite = composite_from_beta(spec.beta);

    CoverageReport rep;
    rep.estimator = spec.estimator;
    rep.n = spec.n;
    rep.delta = spec.delta;
    rep.beta = spec.beta;
    rep.replications = spec.replications;
    std::size_t groups = 1;
    if (spec.estimator == EstimatorKind::bernstein) {
        if (!std::isfinite(a)) throw InvalidArgument("empirical-Bernstein coverage needs bounded completion times");
        rep.bound = 12.0 * spec.delta;
        rep.threshold = bernstein_threshold(xm, rm, a, b, spec.beta);
    } else {
        rep.bound = 16.8 * spec.delta;
        rep.threshold = median_threshold(xm, rm, spec.beta);
        groups = static_cast<std::size_t>(std::floor(3.5 * log_term)) + 1;
        if (groups > spec.n) throw InvalidArgument("median coverage: more groups than samples");
    }
    rep.pre_asymptotic = !(static_cast<double>(spec.n) >= rep.threshold);

    std::vector<double> xs(spec.n), rs(spec.n);
    const RandomStream root(spec.seed);
    for (std::size_t i = 0; i < spec.replications; ++i) {
        RandomStream rng = root.split(i);
        for (std::size_t j = 0; j < spec.n; ++j) {
            const auto d = sample_arm(arm, rng);
            xs[j] = d.x;
            rs[j] = d.r;
        }
        double mu_x, mu_r, eps, eta;
        if (spec.estimator == EstimatorKind::bernstein) {
            mu_x = empirical_mean(xs);
            mu_r = empirical_mean(rs);
            eps = bernstein_width(empirical_variance(xs), a, log_term, spec.n);
            eta = bernstein_width(empirical_variance(rs), b, log_term, spec.n);
        } else {
            mu_x = median_of_means(xs, groups);
            mu_r = median_of_means(rs, groups);
            eps = mom_width(median_of_variances(xs, groups), log_term, spec.n);
            eta = mom_width(median_of_variances(rs, groups), log_term, spec.n);
        }
        const double r_hat = mu_r / mu_x;
        const double radius = composite * (eta + r_hat * eps) / mu_x;
        if (std::fabs(r_hat - true_rate) > radius) ++rep.violations;
    }
    return rep;
}

inline void write_coverage_csv_header(std::ostream& os) {
    os << "estimator,n,delta,violations,bound,replications,fraction,threshold,status\n";
}

inline void write_coverage_csv_row(std::ostream& os, const CoverageReport& r) {
    os << to_string(r.estimator) << ',' << r.n << ',' << format_double(r.delta) << ',' << r.violations << ','
       << format_double(r.bound) << ',' << r.replications << ',' << format_double(r.violation_fraction()) << ','
       << format_double(r.threshold) << ',' << r.status() << '\n';
}

} // namespace restartbandit
