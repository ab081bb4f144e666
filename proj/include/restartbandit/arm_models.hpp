#pragma once

// Arm generative models: completion-time distributions, (possibly correlated)
// reward models and reset costs, plus right-censoring of a trial and the
// truncated moments that define a decision's reward rate.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "restartbandit/core.hpp"
#include "restartbandit/quadrature.hpp"
#include "restartbandit/random.hpp"

namespace restartbandit {

// ---------------------------------------------------------------------------
// Completion-time distributions

struct Deterministic {
    double value;
};
struct Uniform {
    double lo;
    double hi;
};
struct Exponential {
    double rate;
};
struct Pareto {
    double scale;
    double shape;
};
struct Empirical {
    std::vector<double> sorted;
};

class CompletionDistribution {
public:
    using Variant = std::variant<Deterministic, Uniform, Exponential, Pareto, Empirical>;

    static CompletionDistribution deterministic(double value) {
        require(value > 0 && std::isfinite(value), "Deterministic value must be finite and > 0");
        return CompletionDistribution(Deterministic{value});
    }

    /// lo may be 0 (X > 0 still holds almost surely).
    static CompletionDistribution uniform(double lo, double hi) {
        require(lo >= 0 && lo < hi && std::isfinite(hi), "Uniform requires 0 <= lo < hi < inf");
        return CompletionDistribution(Uniform{lo, hi});
    }

    static CompletionDistribution exponential(double rate) {
        require(rate > 0 && std::isfinite(rate), "Exponential rate must be finite and > 0");
        return CompletionDistribution(Exponential{rate});
    }

    /// shape <= 1 is accepted but the distribution has infinite mean.
    static CompletionDistribution pareto(double scale, double shape) {
        require(scale > 0 && shape > 0 && std::isfinite(scale) && std::isfinite(shape),
                "Pareto scale and shape must be finite and > 0");
        return CompletionDistribution(Pareto{scale, shape});
    }

    static CompletionDistribution empirical(std::vector<double> samples) {
        require(!samples.empty(), "Empirical distribution needs at least one sample");
        for (double x : samples) {
            require(x > 0 && std::isfinite(x), "Empirical samples must be finite and > 0");
        }
        std::sort(samples.begin(), samples.end());
        return CompletionDistribution(Empirical{std::move(samples)});
    }

    const Variant& variant() const { return v_; }

    std::string name() const {
        return std::visit(
            [](const auto& d) -> std::string {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, Deterministic>) return "deterministic";
                else if constexpr (std::is_same_v<T, Uniform>) return "uniform";
                else if constexpr (std::is_same_v<T, Exponential>) return "exponential";
                else if constexpr (std::is_same_v<T, Pareto>) return "pareto";
                else return "empirical";
            },
            v_);
    }

    /// Point mass or finite sample list (moments are exact sums).
    bool is_discrete() const {
        return std::holds_alternative<Deterministic>(v_) || std::holds_alternative<Empirical>(v_);
    }

    bool has_finite_mean() const {
        if (const auto* p = std::get_if<Pareto>(&v_)) return p->shape > 1.0;
        return true;
    }

    /// Left-continuous inverse CDF for q in [0, 1]; the Empirical variant
    /// returns the ceil(q n)-th order statistic (q = 0 gives the minimum).
    double quantile(double q) const {
        q = std::clamp(q, 0.0, 1.0);
        return std::visit(
            [q](const auto& d) -> double {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, Deterministic>) {
                    return d.value;
                } else if constexpr (std::is_same_v<T, Uniform>) {
                    return d.lo + q * (d.hi - d.lo);
                } else if constexpr (std::is_same_v<T, Exponential>) {
                    return -std::log1p(-q) / d.rate;
                } else if constexpr (std::is_same_v<T, Pareto>) {
                    return d.scale * std::pow(1.0 - q, -1.0 / d.shape);
                } else {
                    const auto n = d.sorted.size();
                    auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
                    idx = std::clamp<std::size_t>(idx, 1, n);
                    return d.sorted[idx - 1];
                }
            },
            v_);
    }

    /// x with P(X > x) = p for continuous variants, accurate for tiny p.
    double upper_quantile(double p) const {
        p = std::clamp(p, 0.0, 1.0);
        return std::visit(
            [p, this](const auto& d) -> double {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, Uniform>) {
                    return d.hi - p * (d.hi - d.lo);
                } else if constexpr (std::is_same_v<T, Exponential>) {
                    return -std::log(p) / d.rate;
                } else if constexpr (std::is_same_v<T, Pareto>) {
                    return d.scale * std::pow(p, -1.0 / d.shape);
                } else {
                    return quantile(1.0 - p);
                }
            },
            v_);
    }

    double sample(RandomStream& rng) const { return quantile(rng.uniform01()); }

    /// P(X <= x).
    double cdf(double x) const {
        if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
        return std::visit(
            [x](const auto& d) -> double {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, Deterministic>) {
                    return x >= d.value ? 1.0 : 0.0;
                } else if constexpr (std::is_same_v<T, Uniform>) {
                    return std::clamp((x - d.lo) / (d.hi - d.lo), 0.0, 1.0);
                } else if constexpr (std::is_same_v<T, Exponential>) {
                    return x <= 0 ? 0.0 : -std::expm1(-d.rate * x);
                } else if constexpr (std::is_same_v<T, Pareto>) {
                    return x <= d.scale ? 0.0 : 1.0 - std::pow(d.scale / x, d.shape);
                } else {
                    auto it = std::upper_bound(d.sorted.begin(), d.sorted.end(), x);
                    return static_cast<double>(it - d.sorted.begin()) /
                           static_cast<double>(d.sorted.size());
                }
            },
            v_);
    }

    /// P(X > x), computed without cancellation in the tails.
    double survival(double x) const {
        if (std::isinf(x)) return x > 0 ? 0.0 : 1.0;
        return std::visit(
            [x, this](const auto& d) -> double {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, Exponential>) {
                    return x <= 0 ? 1.0 : std::exp(-d.rate * x);
                } else if constexpr (std::is_same_v<T, Pareto>) {
                    return x <= d.scale ? 1.0 : std::pow(d.scale / x, d.shape);
                } else if constexpr (std::is_same_v<T, Uniform>) {
                    return std::clamp((d.hi - x) / (d.hi - d.lo), 0.0, 1.0);
                } else {
                    return 1.0 - cdf(x);
                }
            },
            v_);
    }

    double mean() const {
        if (!has_finite_mean()) throw InfiniteMeanError(name() + " distribution has infinite mean");
        return raw_moment(1);
    }

    /// E[X^k]; +inf when the moment does not exist.
    double raw_moment(int k) const {
        return std::visit(
            [k](const auto& d) -> double {
                using T = std::decay_t<decltype(d)>;
                const double kd = k;
                if constexpr (std::is_same_v<T, Deterministic>) {
                    return std::pow(d.value, kd);
                } else if constexpr (std::is_same_v<T, Uniform>) {
                    return (std::pow(d.hi, kd + 1) - std::pow(d.lo, kd + 1)) / ((kd + 1) * (d.hi - d.lo));
                } else if constexpr (std::is_same_v<T, Exponential>) {
                    return std::tgamma(kd + 1) / std::pow(d.rate, kd);
                } else if constexpr (std::is_same_v<T, Pareto>) {
                    if (d.shape <= kd) return std::numeric_limits<double>::infinity();
                    return d.shape * std::pow(d.scale, kd) / (d.shape - kd);
                } else {
                    double s = 0.0;
                    for (double x : d.sorted) s += std::pow(x, kd);
                    return s / static_cast<double>(d.sorted.size());
                }
            },
            v_);
    }

    /// E[min(X, t)] = integral of P(X > x) over [0, t]. Finite for every finite t.
    double truncated_mean(const Cutoff& cutoff) const {
        if (cutoff.is_infinite()) return mean();
        const double t = cutoff.value();
        return std::visit(
            [t](const auto& d) -> double {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, Deterministic>) {
                    return std::min(d.value, t);
                } else if constexpr (std::is_same_v<T, Uniform>) {
                    if (t <= d.lo) return t;
                    if (t >= d.hi) return 0.5 * (d.lo + d.hi);
                    const double w = d.hi - d.lo;
                    return d.lo + (w * w - (d.hi - t) * (d.hi - t)) / (2.0 * w);
                } else if constexpr (std::is_same_v<T, Exponential>) {
                    return -std::expm1(-d.rate * t) / d.rate;
                } else if constexpr (std::is_same_v<T, Pareto>) {
                    if (t <= d.scale) return t;
                    if (d.shape == 1.0) return d.scale + d.scale * std::log(t / d.scale);
                    // s + s^a (s^{1-a} - t^{1-a}) / (a - 1)
                    const double a = d.shape;
                    return d.scale + d.scale * (1.0 - std::pow(d.scale / t, a - 1.0)) / (a - 1.0);
                } else {
                    double s = 0.0;
                    for (double x : d.sorted) s += std::min(x, t);
                    return s / static_cast<double>(d.sorted.size());
                }
            },
            v_);
    }

    /// E[(X - t)_+], the expected excess over a finite cutoff.
    double excess_mean(double t) const {
        return std::visit(
            [t, this](const auto& d) -> double {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, Deterministic>) {
                    return std::max(d.value - t, 0.0);
                } else if constexpr (std::is_same_v<T, Uniform>) {
                    if (t <= d.lo) return 0.5 * (d.lo + d.hi) - t;
                    if (t >= d.hi) return 0.0;
                    return (d.hi - t) * (d.hi - t) / (2.0 * (d.hi - d.lo));
                } else if constexpr (std::is_same_v<T, Exponential>) {
                    return t <= 0 ? 1.0 / d.rate - t : std::exp(-d.rate * t) / d.rate;
                } else if constexpr (std::is_same_v<T, Pareto>) {
                    if (!has_finite_mean()) throw InfiniteMeanError("Pareto excess with shape <= 1");
                    if (t <= d.scale) return mean() - t;
                    return d.scale * std::pow(d.scale / t, d.shape - 1.0) / (d.shape - 1.0);
                } else {
                    double s = 0.0;
                    for (double x : d.sorted) s += std::max(x - t, 0.0);
                    return s / static_cast<double>(d.sorted.size());
                }
            },
            v_);
    }

private:
    explicit CompletionDistribution(Variant v) : v_(std::move(v)) {}

    static void require(bool ok, const char* msg) {
        if (!ok) throw InvalidArgument(msg);
    }

    Variant v_;
};

// ---------------------------------------------------------------------------
// Reward models

struct ConstantReward {
    double value;
};
struct BernoulliReward {
    double p;
};
/// R = min(omega * X^gamma, 1).
struct PowerCoupledReward {
    double omega;
    double gamma;
};

class RewardModel {
public:
    using Variant = std::variant<ConstantReward, BernoulliReward, PowerCoupledReward>;

    static RewardModel constant(double value) {
        if (!(value >= 0.0 && value <= 1.0)) throw InvalidArgument("constant reward must lie in [0,1]");
        return RewardModel(ConstantReward{value});
    }
    static RewardModel bernoulli(double p) {
        if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("Bernoulli p must lie in [0,1]");
        return RewardModel(BernoulliReward{p});
    }
    static RewardModel power_coupled(double omega, double gamma) {
        if (!(omega > 0.0) || !std::isfinite(omega) || !std::isfinite(gamma)) {
            throw InvalidArgument("power-coupled reward needs omega > 0 and finite gamma");
        }
        return RewardModel(PowerCoupledReward{omega, gamma});
    }

    const Variant& variant() const { return v_; }

    bool is_independent() const { return !std::holds_alternative<PowerCoupledReward>(v_); }

    /// E[R | X = x]. For x = +inf the limit is returned.
    double conditional_mean(double x) const {
        return std::visit(
            [x](const auto& m) -> double {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, ConstantReward>) return m.value;
                else if constexpr (std::is_same_v<T, BernoulliReward>) return m.p;
                else return std::min(m.omega * std::pow(x, m.gamma), 1.0);
            },
            v_);
    }

    /// E[R^k | X = x].
    double conditional_moment(double x, int k) const {
        return std::visit(
            [x, k](const auto& m) -> double {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, ConstantReward>) return std::pow(m.value, k);
                else if constexpr (std::is_same_v<T, BernoulliReward>) return m.p;
                else return std::pow(std::min(m.omega * std::pow(x, m.gamma), 1.0), k);
            },
            v_);
    }

    double sample(double x, RandomStream& rng) const {
        if (const auto* b = std::get_if<BernoulliReward>(&v_)) return rng.bernoulli(b->p) ? 1.0 : 0.0;
        return conditional_mean(x);
    }

    /// Completion time beyond which a power-coupled reward saturates at 1
    /// (or below which, for negative gamma). Empty for other models.
    std::optional<double> saturation_point() const {
        if (const auto* m = std::get_if<PowerCoupledReward>(&v_)) {
            if (m->gamma == 0.0) return std::nullopt;
            return std::pow(1.0 / m->omega, 1.0 / m->gamma);
        }
        return std::nullopt;
    }

private:
    explicit RewardModel(Variant v) : v_(std::move(v)) {}
    Variant v_;
};

// ---------------------------------------------------------------------------
// Reset cost C(t), clamped into [0, t].

struct ZeroReset {};
struct ConstantReset {
    double cost;
};
struct ProportionalReset {
    double fraction;
};

class ResetCost {
public:
    using Variant = std::variant<ZeroReset, ConstantReset, ProportionalReset>;

    ResetCost() = default;
    static ResetCost zero() { return ResetCost(ZeroReset{}); }
    static ResetCost constant(double c) {
        if (!(c >= 0.0) || !std::isfinite(c)) throw InvalidArgument("reset cost must be finite and >= 0");
        return ResetCost(ConstantReset{c});
    }
    static ResetCost proportional(double fraction) {
        if (!(fraction >= 0.0 && fraction <= 1.0)) throw InvalidArgument("reset fraction must lie in [0,1]");
        return ResetCost(ProportionalReset{fraction});
    }

    const Variant& variant() const { return v_; }

    /// C(t) in [0, t]; the infinite cutoff never pays a reset.
    double at(const Cutoff& cutoff) const {
        if (cutoff.is_infinite()) return 0.0;
        const double t = cutoff.value();
        return std::visit(
            [t](const auto& c) -> double {
                using T = std::decay_t<decltype(c)>;
                if constexpr (std::is_same_v<T, ZeroReset>) return 0.0;
                else if constexpr (std::is_same_v<T, ConstantReset>) return std::min(c.cost, t);
                else return c.fraction * t;
            },
            v_);
    }

private:
    explicit ResetCost(Variant v) : v_(std::move(v)) {}
    Variant v_{ZeroReset{}};
};

struct ArmSpec {
    CompletionDistribution completion;
    RewardModel reward;
    ResetCost reset;
    std::string label;
};

inline ArmSpec make_arm(CompletionDistribution completion, RewardModel reward,
                        ResetCost reset = ResetCost::zero(), std::string label = {}) {
    return ArmSpec{std::move(completion), std::move(reward), std::move(reset), std::move(label)};
}

struct ArmDraw {
    double x;
    double r;
};

/// Draw (X, R) using an explicit uniform quantile for X; any extra randomness
/// of the reward model comes from `rng`.
inline ArmDraw sample_arm_at(const ArmSpec& arm, double q, RandomStream& rng) {
    const double x = arm.completion.quantile(q);
    return {x, arm.reward.sample(x, rng)};
}

inline ArmDraw sample_arm(const ArmSpec& arm, RandomStream& rng) {
    const double q = rng.uniform01();
    return sample_arm_at(arm, q, rng);
}

// ---------------------------------------------------------------------------
// Censored feedback

struct CensoredObservation {
    double u = 0.0;           // elapsed time including any reset cost
    double v = 0.0;           // collected reward
    bool completed = false;   // X <= cutoff
    Cutoff cutoff;            // the cutoff this record is censored at
    double raw_elapsed = 0.0; // min(X, cutoff)

    friend bool operator==(const CensoredObservation&, const CensoredObservation&) = default;
};

inline CensoredObservation censor(double x, double r, const Cutoff& cutoff, const ResetCost& reset) {
    if (cutoff.admits(x)) {
        return {x, r, true, cutoff, x};
    }
    const double t = cutoff.value();
    return {t + reset.at(cutoff), 0.0, false, cutoff, t};
}

/// Re-express an observation censored at obs.cutoff as if it had been
/// censored at smaller_cutoff <= obs.cutoff.
inline CensoredObservation recensor(const CensoredObservation& obs, const Cutoff& smaller_cutoff,
                                    const ResetCost& reset) {
    if (smaller_cutoff > obs.cutoff) {
        throw InvalidArgument("recensor: cutoff " + smaller_cutoff.to_string() + " exceeds observed cutoff " +
                              obs.cutoff.to_string());
    }
    if (smaller_cutoff == obs.cutoff) return obs;
    if (obs.completed && smaller_cutoff.admits(obs.raw_elapsed)) {
        return {obs.raw_elapsed, obs.v, true, smaller_cutoff, obs.raw_elapsed};
    }
    const double t = smaller_cutoff.value();
    return {t + reset.at(smaller_cutoff), 0.0, false, smaller_cutoff, t};
}

// ---------------------------------------------------------------------------
// Truncated moments

/// E[U(t)] = E[min(X, t)] + C(t) P(X > t).
inline double truncated_time_mean(const CompletionDistribution& dist, const ResetCost& reset,
                                  const Cutoff& cutoff) {
    if (cutoff.is_infinite()) return dist.mean();
    return dist.truncated_mean(cutoff) + reset.at(cutoff) * dist.survival(cutoff.value());
}

namespace detail {

/// Beyond this log-survival the remaining mass is below double precision.
inline constexpr double kMaxLogSurvival = 700.0;

/// E[g(X) ; lo < X <= hi] for a continuous distribution. The lower half of
/// the mass is integrated over q = P(X <= x); the upper half over
/// s = -ln P(X > x), where dP = e^{-s} ds, so unbounded tails become smooth
/// decaying integrands. Each piece is split where a power-coupled reward
/// saturates so the clamp kink falls on a node.
template <class G>
double quantile_integral(const CompletionDistribution& dist, const RewardModel& reward, const G& g,
                         double lo, double hi, double tol) {
    const auto sat = reward.saturation_point();
    auto split = [&](const auto& f, double a, double b, double c) {
        if (!(a < b)) return 0.0;
        if (c > a && c < b) return integrate(f, a, c, tol) + integrate(f, c, b, tol);
        return integrate(f, a, b, tol);
    };
    double total = 0.0;
    // Body: q in [cdf(lo), min(cdf(hi), 1/2)].
    const double q_lo = dist.cdf(lo), q_hi = std::min(dist.cdf(hi), 0.5);
    auto body = [&](double q) { return g(dist.quantile(q)); };
    total += split(body, q_lo, q_hi, sat ? dist.cdf(*sat) : -1.0);
    // Tail: s in [max(-ln S(lo), ln 2), -ln S(hi)].
    auto log_survival = [&](double x) {
        const double p = dist.survival(x);
        return p <= 0.0 ? kMaxLogSurvival : std::min(-std::log(p), kMaxLogSurvival);
    };
    const double s_lo = std::max(log_survival(lo), std::log(2.0)), s_hi = log_survival(hi);
    auto tail = [&](double s) {
        const double p = std::exp(-s);
        return g(dist.upper_quantile(p)) * p;
    };
    total += split(tail, s_lo, s_hi, sat ? log_survival(*sat) : -1.0);
    return total;
}

/// E[g(X) ; lo < X <= hi] for g depending on X only through the reward model.
template <class G>
double reward_expectation(const ArmSpec& arm, const G& g, double lo, double hi, double tol) {
    const auto& dist = arm.completion;
    if (const auto* d = std::get_if<Deterministic>(&dist.variant())) {
        return (d->value > lo && d->value <= hi) ? g(d->value) : 0.0;
    }
    if (const auto* e = std::get_if<Empirical>(&dist.variant())) {
        double s = 0.0;
        for (double x : e->sorted) {
            if (x > lo && x <= hi) s += g(x);
        }
        return s / static_cast<double>(e->sorted.size());
    }
    return quantile_integral(dist, arm.reward, g, lo, hi, tol);
}

} // namespace detail

/// E[V(t)] = E[R 1{X <= t}].
inline double truncated_reward_mean(const ArmSpec& arm, const Cutoff& cutoff) {
    const double hi = cutoff.as_double();
    if (arm.reward.is_independent()) {
        return arm.reward.conditional_mean(0.0) * arm.completion.cdf(hi);
    }
    auto g = [&](double x) { return arm.reward.conditional_mean(x); };
    return detail::reward_expectation(arm, g, -1.0, hi, 1e-9);
}

/// E[R 1{X > t}], integrated directly over the tail so small tail masses keep
/// their relative accuracy.
inline double tail_reward_mean(const ArmSpec& arm, double t) {
    if (arm.reward.is_independent()) {
        return arm.reward.conditional_mean(0.0) * arm.completion.survival(t);
    }
    const double tail = arm.completion.survival(t);
    auto g = [&](double x) { return arm.reward.conditional_mean(x); };
    return detail::reward_expectation(arm, g, t, std::numeric_limits<double>::infinity(),
                                      std::max(1e-15, 1e-11 * tail));
}

/// E[R^k] over the whole support.
inline double reward_moment(const ArmSpec& arm, int k) {
    if (arm.reward.is_independent()) return arm.reward.conditional_moment(0.0, k);
    auto g = [&](double x) { return arm.reward.conditional_moment(x, k); };
    return detail::reward_expectation(arm, g, -1.0, std::numeric_limits<double>::infinity(), 1e-10);
}

/// Sorted empirical distribution; sampling is inverse transform with the
/// ceil(q n) order-statistic convention.
inline CompletionDistribution empirical_from_samples(std::span<const double> samples) {
    if (samples.empty()) throw InvalidArgument("empirical_from_samples: empty sample list");
    return CompletionDistribution::empirical(std::vector<double>(samples.begin(), samples.end()));
}

} // namespace restartbandit
