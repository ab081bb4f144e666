#pragma once

// WalkSAT-style stochastic local search. Completion time is measured in
// variable flips.

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "restartbandit/dimacs.hpp"
#include "restartbandit/random.hpp"

namespace restartbandit {

/// Incremental assignment state: true-literal counts per clause, the set of
/// unsatisfied clauses and literal occurrence lists.
class WalkSatState {
public:
    explicit WalkSatState(const CnfFormula& f) : formula_(&f) {
        const auto nv = static_cast<std::size_t>(f.num_vars);
        occurrences_.assign(2 * (nv + 1), {});
        for (std::size_t c = 0; c < f.clauses.size(); ++c) {
            for (int lit : f.clauses[c]) occurrences_[slot(lit)].push_back(c);
        }
        value_.assign(nv + 1, false);
        true_count_.assign(f.clauses.size(), 0);
        unsat_pos_.assign(f.clauses.size(), npos);
    }

    const CnfFormula& formula() const { return *formula_; }

    void reset(const std::vector<bool>& assignment) {
        value_ = assignment;
        value_.resize(static_cast<std::size_t>(formula_->num_vars) + 1, false);
        unsat_.clear();
        std::fill(unsat_pos_.begin(), unsat_pos_.end(), npos);
        for (std::size_t c = 0; c < formula_->clauses.size(); ++c) {
            int n = 0;
            for (int lit : formula_->clauses[c]) n += is_true(lit);
            true_count_[c] = n;
            if (n == 0) add_unsat(c);
        }
    }

    bool value(int var) const { return value_[static_cast<std::size_t>(var)]; }
    const std::vector<bool>& assignment() const { return value_; }
    bool is_true(int lit) const { return value_[static_cast<std::size_t>(std::abs(lit))] == (lit > 0); }

    const std::vector<std::size_t>& unsatisfied() const { return unsat_; }
    bool solved() const { return unsat_.empty(); }

    /// Clauses that become unsatisfied if `var` is flipped.
    int break_count(int var) const {
        const int lit = value(var) ? var : -var;
        int b = 0;
        for (std::size_t c : occurrences_[slot(lit)]) b += true_count_[c] == 1;
        return b;
    }

    void flip(int var) {
        const int was_true = value(var) ? var : -var;
        value_[static_cast<std::size_t>(var)] = !value_[static_cast<std::size_t>(var)];
        for (std::size_t c : occurrences_[slot(was_true)]) {
            if (--true_count_[c] == 0) add_unsat(c);
        }
        for (std::size_t c : occurrences_[slot(-was_true)]) {
            if (true_count_[c]++ == 0) remove_unsat(c);
        }
    }

private:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    static std::size_t slot(int lit) {
        return 2 * static_cast<std::size_t>(std::abs(lit)) + (lit < 0 ? 1 : 0);
    }
    void add_unsat(std::size_t c) {
        unsat_pos_[c] = unsat_.size();
        unsat_.push_back(c);
    }
    void remove_unsat(std::size_t c) {
        const std::size_t pos = unsat_pos_[c];
        const std::size_t last = unsat_.back();
        unsat_[pos] = last;
        unsat_pos_[last] = pos;
        unsat_.pop_back();
        unsat_pos_[c] = npos;
    }

    const CnfFormula* formula_;
    std::vector<std::vector<std::size_t>> occurrences_;
    std::vector<bool> value_;
    std::vector<int> true_count_;
    std::vector<std::size_t> unsat_;
    std::vector<std::size_t> unsat_pos_;
};

/// Picks the variable to flip inside an unsatisfied clause.
class FlipHeuristic {
public:
    virtual ~FlipHeuristic() = default;
    virtual int choose(const WalkSatState& state, const std::vector<int>& clause, RandomStream& rng) const = 0;
};

/// WalkSAT/SKC-style choice: with probability `noise` a uniformly random
/// variable of the clause, otherwise a variable of minimum break count
/// (ties uniformly at random).
class BreakCountHeuristic : public FlipHeuristic {
public:
    explicit BreakCountHeuristic(double noise) : noise_(noise) {
        if (!(noise >= 0.0 && noise <= 1.0)) throw InvalidArgument("noise must lie in [0,1]");
    }

    int choose(const WalkSatState& state, const std::vector<int>& clause, RandomStream& rng) const override {
        if (rng.bernoulli(noise_)) return std::abs(clause[rng.below(clause.size())]);
        int best = std::numeric_limits<int>::max();
        int chosen = 0;
        std::uint64_t ties = 0;
        for (int lit : clause) {
            const int var = std::abs(lit);
            const int b = state.break_count(var);
            if (b < best) {
                best = b;
                chosen = var;
                ties = 1;
            } else if (b == best && rng.below(++ties) == 0) {
                chosen = var;
            }
        }
        return chosen;
    }

    double noise() const { return noise_; }

private:
    double noise_;
};

struct SolveAttempt {
    bool solved = false;
    std::uint64_t flips = 0;
    std::optional<std::vector<bool>> assignment; // index 0 unused
};

struct WalkSatOptions {
    std::optional<std::vector<bool>> initial;           // default: uniform random assignment
    std::function<void(int var)> on_flip;               // observer for every flip
};

inline SolveAttempt walksat(const CnfFormula& formula, const FlipHeuristic& heuristic, std::uint64_t max_flips,
                            RandomStream& rng, const WalkSatOptions& options = {}) {
    WalkSatState state(formula);
    std::vector<bool> init(static_cast<std::size_t>(formula.num_vars) + 1, false);
    if (options.initial) {
        init = *options.initial;
    } else {
        for (int v = 1; v <= formula.num_vars; ++v) init[static_cast<std::size_t>(v)] = rng.bernoulli(0.5);
    }
    state.reset(init);
    SolveAttempt out;
    while (!state.solved() && out.flips < max_flips) {
        const auto& unsat = state.unsatisfied();
        const std::size_t c = unsat[rng.below(unsat.size())];
        const int var = heuristic.choose(state, formula.clauses[c], rng);
        state.flip(var);
        ++out.flips;
        if (options.on_flip) options.on_flip(var);
    }
    if (state.solved()) {
        if (!formula.satisfied_by(state.assignment())) {
            throw std::logic_error("walksat: reported assignment does not satisfy the formula");
        }
        out.solved = true;
        out.assignment = state.assignment();
    }
    return out;
}

inline SolveAttempt walksat(const CnfFormula& formula, double noise, std::uint64_t max_flips, RandomStream& rng,
                            const WalkSatOptions& options = {}) {
    return walksat(formula, BreakCountHeuristic(noise), max_flips, rng, options);
}

} // namespace restartbandit
