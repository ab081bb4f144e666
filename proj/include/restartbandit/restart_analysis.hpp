#pragma once

// Renewal reward rates of static (arm, cutoff) decisions, the optimal static
// decision over a grid, and the criterion deciding whether a finite restart
// beats waiting for completion.

#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "restartbandit/arm_models.hpp"

namespace restartbandit {

enum class RateFlag {
    ok,
    infinite_mean, // rate at an infinite cutoff of an infinite-mean arm; reported as 0
};

inline const char* to_string(RateFlag f) { return f == RateFlag::ok ? "ok" : "infinite_mean"; }

struct RewardRate {
    double value = 0.0;
    RateFlag flag = RateFlag::ok;
};

/// r(t) = E[V(t)] / E[U(t)].
inline RewardRate reward_rate(const ArmSpec& arm, const Cutoff& cutoff) {
    if (cutoff.is_infinite() && !arm.completion.has_finite_mean()) {
        return {0.0, RateFlag::infinite_mean};
    }
    const double denom = truncated_time_mean(arm.completion, arm.reset, cutoff);
    if (!(denom > 0.0)) throw InvalidArgument("reward_rate: expected epoch length is not positive");
    return {truncated_reward_mean(arm, cutoff) / denom, RateFlag::ok};
}

inline void validate_grid(std::span<const Cutoff> grid) {
    if (grid.empty()) throw InvalidArgument("decision grid is empty");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i - 1] < grid[i])) throw InvalidArgument("decision grid must be strictly increasing");
    }
}

struct RateCurve {
    std::string label;
    std::vector<Cutoff> grid;
    std::vector<double> rates;
    std::vector<RateFlag> flags;
    std::size_t argmax = 0;

    Cutoff best_cutoff() const { return grid.at(argmax); }
    double best_rate() const { return rates.at(argmax); }
};

/// Pointwise reward rates; argmax ties go to the smallest cutoff.
inline RateCurve rate_sweep(const ArmSpec& arm, std::span<const Cutoff> grid) {
    validate_grid(grid);
    RateCurve curve;
    curve.label = arm.label;
    curve.grid.assign(grid.begin(), grid.end());
    for (const auto& t : grid) {
        const auto r = reward_rate(arm, t);
        curve.rates.push_back(r.value);
        curve.flags.push_back(r.flag);
    }
    for (std::size_t i = 1; i < curve.rates.size(); ++i) {
        if (curve.rates[i] > curve.rates[curve.argmax]) curve.argmax = i;
    }
    return curve;
}

/// CSV with columns t,rate,flag.
inline void write_rate_curve_csv(std::ostream& os, const RateCurve& curve) {
    os << "t,rate,flag\n";
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
        os << curve.grid[i].to_string() << ',' << format_double(curve.rates[i]) << ',' << to_string(curve.flags[i])
           << '\n';
    }
}

// ---------------------------------------------------------------------------
// Finite-restart criterion

enum class RestartVerdict {
    restart,  // some restart at t beats waiting: strict inequality holds
    wait,     // waiting for completion is strictly better
    boundary, // equal within tolerance (e.g. memoryless completion times)
};

inline const char* to_string(RestartVerdict v) {
    switch (v) {
        case RestartVerdict::restart: return "restart";
        case RestartVerdict::wait: return "wait";
        case RestartVerdict::boundary: return "boundary";
    }
    return "?";
}

class UndefinedConditionError : public Error {
public:
    using Error::Error;
};

inline constexpr double kRestartTolerance = 1e-9;

inline RestartVerdict verdict_from_margin(double margin, double tol) {
    if (margin > tol) return RestartVerdict::restart;
    if (margin < -tol) return RestartVerdict::wait;
    return RestartVerdict::boundary;
}

struct RestartCondition {
    RestartVerdict verdict;
    double residual_reward = 0.0;  // E[R | X > t]
    double residual_time = 0.0;    // E[X - (t + C(t)) | X > t]
    double fresh_rate = 0.0;       // E[R] / E[X]
    double margin = 0.0;           // fresh_rate * residual_time - residual_reward
};

/// Compares the residual reward rate of an unfinished task, conditioned on
/// X > t, with the reward rate of a fresh task. Conditional tail expectations
/// are unconditional tail integrals divided by P(X > t). The comparison is
/// cross-multiplied (E[R|X>t] < rate * E[X-(t+C)|X>t]) so a non-positive
/// residual time is handled without dividing by it.
inline RestartCondition restart_condition(const ArmSpec& arm, double t, double tol = kRestartTolerance) {
    if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("restart_condition needs a finite t > 0");
    const double tail = arm.completion.survival(t);
    if (!(tail > 0.0)) {
        throw UndefinedConditionError("restart condition undefined: P(X > " + format_double(t) + ") = 0");
    }
    if (!arm.completion.has_finite_mean()) {
        return {RestartVerdict::restart, 0.0, std::numeric_limits<double>::infinity(), 0.0, 0.0};
    }
    const Cutoff cutoff = Cutoff::at(t);
    RestartCondition c;
    c.residual_reward = tail_reward_mean(arm, t) / tail;
    c.residual_time = arm.completion.excess_mean(t) / tail - arm.reset.at(cutoff);
    c.fresh_rate = reward_moment(arm, 1) / arm.completion.mean();
    c.margin = c.fresh_rate * c.residual_time - c.residual_reward;
    c.verdict = verdict_from_margin(c.margin, tol);
    return c;
}

/// The same criterion expressed on rates: r(t) versus r(inf).
inline RestartVerdict rate_criterion(const ArmSpec& arm, double t, double tol = kRestartTolerance) {
    const auto finite = reward_rate(arm, Cutoff::at(t));
    const auto wait = reward_rate(arm, Cutoff::never());
    if (wait.flag == RateFlag::infinite_mean) return RestartVerdict::restart;
    return verdict_from_margin(finite.value - wait.value, tol);
}

// ---------------------------------------------------------------------------
// Optimal static decision

struct StaticDecision {
    std::size_t arm = 0;
    std::size_t level = 0;
    Cutoff cutoff;
    double rate = 0.0;
    bool all_zero = false; // every decision has rate 0; the first one is returned
};

/// Exhaustive argmax over arms x grid. Ties go to the lowest arm index, then
/// the smallest cutoff.
inline StaticDecision optimal_static_decision(std::span<const ArmSpec> arms, std::span<const Cutoff> grid) {
    if (arms.empty()) throw InvalidArgument("optimal_static_decision: no arms");
    validate_grid(grid);
    StaticDecision best;
    best.cutoff = grid[0];
    best.rate = -1.0;
    for (std::size_t k = 0; k < arms.size(); ++k) {
        for (std::size_t l = 0; l < grid.size(); ++l) {
            const double r = reward_rate(arms[k], grid[l]).value;
            if (r > best.rate) {
                best = {k, l, grid[l], r, false};
            }
        }
    }
    best.all_zero = best.rate <= 0.0;
    return best;
}

/// Pseudo-regret reference r* tau.
inline double opt_reference(double r_star, double tau) {
    if (!(r_star >= 0.0) || !(tau > 0.0)) throw InvalidArgument("opt_reference needs r* >= 0 and tau > 0");
    return r_star * tau;
}

} // namespace restartbandit
