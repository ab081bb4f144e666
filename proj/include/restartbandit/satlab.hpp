#pragma once

// SAT experiments: completion-time capture from WalkSAT runs and restart
// meta-runs over the resulting empirical arm (reward 1 per solved instance,
// time in flips).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "restartbandit/arm_models.hpp"
#include "restartbandit/dimacs.hpp"
#include "restartbandit/policies.hpp"
#include "restartbandit/simulator.hpp"
#include "restartbandit/walksat.hpp"

namespace restartbandit {

struct CompletionSamples {
    std::vector<double> flips;  // completed runs only
    std::size_t censored = 0;   // runs that hit the cap
};

class EmptyDistributionError : public Error {
public:
    using Error::Error;
};

/// For every formula and repetition, runs WalkSAT with `cap` flips; an
/// unsolved run is counted as censored and retried from a fresh assignment,
/// at most `max_restarts` times.
inline CompletionSamples collect_completion_samples(std::span<const CnfFormula> formulas, double noise,
                                                    std::uint64_t cap, std::size_t reps, RandomStream& rng,
                                                    std::size_t max_restarts = 10) {
    const BreakCountHeuristic heuristic(noise);
    CompletionSamples out;
    for (std::size_t rep = 0; rep < reps; ++rep) {
        for (const auto& f : formulas) {
            for (std::size_t attempt = 0; attempt <= max_restarts; ++attempt) {
                const auto a = walksat(f, heuristic, cap, rng);
                if (a.solved) {
                    out.flips.push_back(static_cast<double>(a.flips));
                    break;
                }
                ++out.censored;
            }
        }
    }
    if (out.flips.empty()) {
        throw EmptyDistributionError("all " + std::to_string(out.censored) + " runs were censored at " +
                                     std::to_string(cap) + " flips");
    }
    return out;
}

/// Arm for the meta-run: empirical flip counts (a solve at 0 flips is
/// charged one flip so every epoch has positive duration), reward 1, no reset cost.
inline ArmSpec sat_arm(std::span<const double> flips, std::string label = "walksat") {
    std::vector<double> xs(flips.begin(), flips.end());
    for (double& x : xs) x = std::max(x, 1.0);
    return make_arm(empirical_from_samples(xs), RewardModel::constant(1.0), ResetCost::zero(), std::move(label));
}

inline double sample_median(std::span<const double> xs) {
    if (xs.empty()) throw InvalidArgument("median of an empty sample");
    std::vector<double> v(xs.begin(), xs.end());
    return lower_median(std::move(v));
}

/// Restart grid {scale * 10^(-0.5 + 0.125 i) : i = 0..last}.
inline DecisionGrid sat_grid(double scale, std::size_t last) {
    if (!(scale > 0.0)) throw InvalidArgument("grid scale must be > 0");
    std::vector<double> v;
    for (std::size_t i = 0; i <= last; ++i) v.push_back(scale * std::pow(10.0, -0.5 + 0.125 * static_cast<double>(i)));
    return DecisionGrid::from_values(v);
}

enum class SatPreset { uniform_random, backbone };

/// Grid exponents i = 0..8 for uniform random 3-SAT, 0..12 for the
/// controlled-backbone family.
inline DecisionGrid preset_grid(SatPreset p, double scale) {
    return sat_grid(scale, p == SatPreset::uniform_random ? 8 : 12);
}

struct MetaExperimentConfig {
    double budget = 0.0;           // tau, in flips
    std::optional<DecisionGrid> grid;
    std::optional<double> luby_base;
    std::size_t max_restarts = 10; // data collection only
    double noise = 0.5;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(budget >= 0.0) || !std::isfinite(budget)) throw InvalidArgument("meta-run budget must be finite and >= 0");
        if (grid && grid->size() == 0) throw InvalidArgument("meta-run grid is empty");
        if (luby_base && !(*luby_base > 0.0)) throw InvalidArgument("Luby base must be > 0");
        if (!(noise >= 0.0 && noise <= 1.0)) throw InvalidArgument("noise must lie in [0,1]");
    }
};

struct MetaRunResult {
    std::uint64_t solved = 0;
    EpisodeTrace trace;
};

/// Plays `policy` on the SAT arm until the flip budget is exhausted. The
/// solved count is the number of completed epochs.
inline MetaRunResult meta_run(const ArmSpec& arm, Policy& policy, const MetaExperimentConfig& config,
                              bool record = false) {
    config.validate();
    MetaRunResult out;
    if (config.budget == 0.0) {
        out.trace.policy = policy.name();
        out.trace.seed = config.seed;
        return out;
    }
    const ArmSpec arms[] = {arm};
    out.trace = run_episode(arms, policy, config.budget, config.seed, record);
    out.solved = static_cast<std::uint64_t>(std::llround(out.trace.reward));
    return out;
}

} // namespace restartbandit
