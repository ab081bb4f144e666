#pragma once

// Decision-making policies over (arm, cutoff) decisions.
//
// Every policy exposes the same two-step contract: next() proposes a decision
// from the current state only, update() folds in the censored feedback that
// decision produced.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "restartbandit/arm_models.hpp"
#include "restartbandit/estimators.hpp"
#include "restartbandit/restart_analysis.hpp"

namespace restartbandit {

/// Strictly increasing cutoffs t_1 < ... < t_L; only the last may be infinite.
class DecisionGrid {
public:
    DecisionGrid() = default;
    explicit DecisionGrid(std::vector<Cutoff> cutoffs) : cutoffs_(std::move(cutoffs)) {
        validate_grid(cutoffs_);
    }

    static DecisionGrid from_values(const std::vector<double>& values) {
        std::vector<Cutoff> c;
        for (double v : values) c.push_back(std::isinf(v) ? Cutoff::never() : Cutoff::at(v));
        return DecisionGrid(std::move(c));
    }

    std::size_t size() const { return cutoffs_.size(); }
    const Cutoff& operator[](std::size_t l) const { return cutoffs_.at(l); }
    const std::vector<Cutoff>& cutoffs() const { return cutoffs_; }
    bool has_infinite() const { return !cutoffs_.empty() && cutoffs_.back().is_infinite(); }

    DecisionGrid scaled(double factor) const {
        std::vector<Cutoff> c;
        for (const auto& t : cutoffs_) c.push_back(t.scaled(factor));
        return DecisionGrid(std::move(c));
    }

    /// Optional diagnostics: the floor E[min(X, t_1)] >= mu_star and the
    /// completion-probability floor epsilon.
    std::optional<double> mu_star;
    std::optional<double> epsilon;

private:
    std::vector<Cutoff> cutoffs_;
};

struct Decision {
    std::size_t arm = 0;
    std::size_t level = 0; // grid index; 0 for policies without a grid
    Cutoff cutoff;

    friend bool operator==(const Decision&, const Decision&) = default;
};

class Policy {
public:
    virtual ~Policy() = default;
    virtual Decision next() const = 0;
    virtual void update(const Decision& decision, const CensoredObservation& obs) = 0;
    virtual std::string name() const = 0;

protected:
    static void check_pairing(const Decision& d, const CensoredObservation& obs) {
        if (!(d.cutoff == obs.cutoff)) {
            throw InvalidArgument("observation censored at " + obs.cutoff.to_string() +
                                  " does not match decision cutoff " + d.cutoff.to_string());
        }
    }
};

// ---------------------------------------------------------------------------
// Baselines

class FixedPolicy : public Policy {
public:
    FixedPolicy(std::size_t arm, Cutoff cutoff, std::size_t level = 0) : decision_{arm, level, cutoff} {}
    Decision next() const override { return decision_; }
    void update(const Decision& d, const CensoredObservation& obs) override { check_pairing(d, obs); }
    std::string name() const override { return "fixed"; }

private:
    Decision decision_;
};

/// Plays the rate-maximizing static decision every epoch.
class StaticPolicy : public Policy {
public:
    StaticPolicy(std::span<const ArmSpec> arms, const DecisionGrid& grid)
        : best_(optimal_static_decision(arms, grid.cutoffs())) {}
    Decision next() const override { return {best_.arm, best_.level, best_.cutoff}; }
    void update(const Decision& d, const CensoredObservation& obs) override { check_pairing(d, obs); }
    std::string name() const override { return "static"; }
    const StaticDecision& decision() const { return best_; }

private:
    StaticDecision best_;
};

/// The Luby sequence 1, 1, 2, 1, 1, 2, 4, ... (i >= 1).
inline std::uint64_t luby_value(std::uint64_t i) {
    if (i == 0) throw InvalidArgument("luby_value index starts at 1");
    for (;;) {
        unsigned k = 1;
        while (((std::uint64_t{1} << k) - 1) < i) ++k;
        if (i == (std::uint64_t{1} << k) - 1) return std::uint64_t{1} << (k - 1);
        i = i - (std::uint64_t{1} << (k - 1)) + 1;
    }
}

/// Epoch n uses cutoff base * luby(n) on a fixed arm.
class LubyPolicy : public Policy {
public:
    LubyPolicy(std::size_t arm, double base_cutoff) : arm_(arm), base_(base_cutoff) {
        if (!(base_cutoff > 0.0)) throw InvalidArgument("Luby base cutoff must be > 0");
    }
    Decision next() const override {
        return {arm_, 0, Cutoff::at(base_ * static_cast<double>(luby_value(epoch_ + 1)))};
    }
    void update(const Decision& d, const CensoredObservation& obs) override {
        check_pairing(d, obs);
        ++epoch_;
    }
    std::string name() const override { return "luby"; }

private:
    std::size_t arm_;
    double base_;
    std::uint64_t epoch_ = 0;
};

// ---------------------------------------------------------------------------
// UCB with restarts

struct UcbConfig {
    double alpha = 2.01;
    double composite = 1.01;           // (1+beta)^2/(1-beta)
    std::size_t init_pulls = 1;        // round-robin pulls per decision
    EstimatorKind estimator = EstimatorKind::bernstein;
    bool share_information = true;     // feed each observation to every t_l <= cutoff
    std::optional<std::size_t> frozen_groups; // median-of-means only: fixed group count
};

/// UCB-RB (bernstein) and UCB-RM (median_of_means).
///
/// Each decision (k, l) keeps statistics over every epoch whose cutoff was
/// >= t_l on arm k, with the observation re-censored at t_l. Decisions are
/// the argmax of rate + radius; ties go to the lowest arm, then the largest
/// cutoff.
class UcbRestartPolicy : public Policy {
public:
    UcbRestartPolicy(std::vector<ResetCost> resets, DecisionGrid grid, UcbConfig config = {})
        : resets_(std::move(resets)), grid_(std::move(grid)), config_(config),
          beta_(beta_from_composite(config.composite)) {
        if (resets_.empty()) throw InvalidArgument("UCB policy needs at least one arm");
        if (grid_.size() == 0) throw InvalidArgument("UCB policy needs a non-empty grid");
        if (!(config_.alpha > 2.0)) throw InvalidArgument("alpha must exceed 2");
        if (config_.init_pulls == 0) throw InvalidArgument("init_pulls must be >= 1");
        if (config_.estimator == EstimatorKind::bernstein && grid_.has_infinite()) {
            throw InvalidArgument("empirical-Bernstein radii need a finite largest cutoff");
        }
        if (config_.frozen_groups && *config_.frozen_groups == 0) throw InvalidArgument("frozen group count must be >= 1");
        cells_.resize(resets_.size() * grid_.size());
        pulls_.assign(cells_.size(), 0);
    }

    std::string name() const override {
        std::string base = config_.estimator == EstimatorKind::bernstein ? "ucb-rb" : "ucb-rm";
        return config_.share_information ? base : base + "-own";
    }

    std::size_t num_arms() const { return resets_.size(); }
    const DecisionGrid& grid() const { return grid_; }
    const UcbConfig& config() const { return config_; }
    double beta() const { return beta_; }
    std::uint64_t epoch() const { return epoch_; }
    bool initializing() const { return epoch_ < init_epochs(); }

    /// T*_{k,l}: samples available to decision (k, l).
    std::size_t sample_count(std::size_t k, std::size_t l) const { return cell(k, l).count(); }
    /// T_{k,l}: times decision (k, l) was played.
    std::size_t pull_count(std::size_t k, std::size_t l) const { return pulls_.at(k * grid_.size() + l); }

    Decision next() const override {
        if (initializing()) {
            const std::size_t e = epoch_ % (num_arms() * grid_.size());
            const std::size_t k = e / grid_.size();
            const std::size_t l = e % grid_.size();
            return {k, l, grid_[l]};
        }
        Decision best{0, 0, grid_[0]};
        double best_value = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < num_arms(); ++k) {
            for (std::size_t l = grid_.size(); l-- > 0;) {
                const double v = index(k, l).value;
                if (v > best_value) {
                    best_value = v;
                    best = {k, l, grid_[l]};
                }
            }
        }
        return best;
    }

    void update(const Decision& d, const CensoredObservation& obs) override {
        check_pairing(d, obs);
        if (d.arm >= num_arms() || d.level >= grid_.size() || !(grid_[d.level] == d.cutoff)) {
            throw InvalidArgument("decision is not on this policy's grid");
        }
        ++pulls_[d.arm * grid_.size() + d.level];
        if (config_.share_information) {
            for (std::size_t l = 0; l <= d.level; ++l) {
                cell_mut(d.arm, l).add(recensor(obs, grid_[l], resets_[d.arm]));
            }
        } else {
            cell_mut(d.arm, d.level).add(obs);
        }
        ++epoch_;
    }

    /// Index of decision (k, l) given the current state (after initialization).
    UcbIndex index(std::size_t k, std::size_t l) const {
        const Cell& c = cell(k, l);
        const std::size_t T = c.count();
        if (T == 0) {
            return {0.0, std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 0};
        }
        const double n = static_cast<double>(std::max<std::uint64_t>(epoch_, 2));
        const double L = config_.alpha * std::log(n);
        if (config_.estimator == EstimatorKind::bernstein) {
            const double range_u = grid_[l].value() + resets_[k].at(grid_[l]);
            const double eps = bernstein_width(c.u.variance(), range_u, L, T);
            const double eta = bernstein_width(c.v.variance(), 1.0, L, T);
            return rate_ucb(c.u.mean(), c.v.mean(), eps, eta, beta_, T);
        }
        const std::size_t m = std::min(
            config_.frozen_groups ? *config_.frozen_groups : group_count(std::max<std::uint64_t>(epoch_, 1), config_.alpha),
            T);
        const auto g = c.groups(m);
        const double eps = mom_width(g.var_u, L, T);
        const double eta = mom_width(g.var_v, L, T);
        return rate_ucb(g.mean_u, g.mean_v, eps, eta, beta_, T);
    }

private:
    /// Running moments for the Bernstein index plus prefix sums of shifted
    /// values and squares for O(1) group statistics in the median index.
    struct Cell {
        RunningMoments u;
        RunningMoments v;
        bool keep_prefix = false;
        double shift_u = 0.0;
        double shift_v = 0.0;
        std::vector<double> pu{0.0}, pu2{0.0}, pv{0.0}, pv2{0.0};

        std::size_t count() const { return u.count(); }

        void add(const CensoredObservation& o) {
            if (keep_prefix) {
                if (u.count() == 0) {
                    shift_u = o.u;
                    shift_v = o.v;
                }
                const double du = o.u - shift_u;
                const double dv = o.v - shift_v;
                pu.push_back(pu.back() + du);
                pu2.push_back(pu2.back() + du * du);
                pv.push_back(pv.back() + dv);
                pv2.push_back(pv2.back() + dv * dv);
            }
            u.add(o.u);
            v.add(o.v);
        }

        struct GroupStats {
            double mean_u, mean_v, var_u, var_v;
        };

        // Only the first m * floor(T/m) samples enter the groups, so the
        // statistics change only when m or the group size changes.
        mutable std::size_t cached_size = 0, cached_m = 0;
        mutable GroupStats cached{};

        GroupStats groups(std::size_t m) const {
            const std::size_t size = count() / m;
            if (cached_m == m && cached_size == size) return cached;
            cached = compute_groups(m);
            cached_m = m;
            cached_size = size;
            return cached;
        }

        GroupStats compute_groups(std::size_t m) const {
            const std::size_t g = count() / m;
            const double gd = static_cast<double>(g);
            std::vector<double> mu(m), mv(m), vu(m), vv(m);
            for (std::size_t j = 0; j < m; ++j) {
                const std::size_t a = j * g;
                const std::size_t b = a + g;
                const double su = pu[b] - pu[a];
                const double sv = pv[b] - pv[a];
                const double ou = su / gd;
                const double ov = sv / gd;
                mu[j] = shift_u + ou;
                mv[j] = shift_v + ov;
                vu[j] = std::max(0.0, (pu2[b] - pu2[a]) / gd - ou * ou);
                vv[j] = std::max(0.0, (pv2[b] - pv2[a]) / gd - ov * ov);
            }
            return {lower_median(std::move(mu)), lower_median(std::move(mv)), lower_median(std::move(vu)),
                    lower_median(std::move(vv))};
        }
    };

    std::uint64_t init_epochs() const { return config_.init_pulls * num_arms() * grid_.size(); }

    const Cell& cell(std::size_t k, std::size_t l) const { return cells_.at(k * grid_.size() + l); }
    Cell& cell_mut(std::size_t k, std::size_t l) {
        Cell& c = cells_.at(k * grid_.size() + l);
        c.keep_prefix = config_.estimator == EstimatorKind::median_of_means;
        return c;
    }

    std::vector<ResetCost> resets_;
    DecisionGrid grid_;
    UcbConfig config_;
    double beta_;
    std::vector<Cell> cells_;
    std::vector<std::size_t> pulls_;
    std::uint64_t epoch_ = 0;
};

// ---------------------------------------------------------------------------
// UCB-RC: quantize a compact cutoff interval, then run UCB-RB on it.

struct UcbRcSetup {
    DecisionGrid grid;
    double delta = 0.0;
    bool degenerate = false; // delta >= t_max - t_min; the grid is {t_min, t_max}
};

/// delta = (sqrt(ln tau / tau))^{1/q}; t_l = t_min + (l-1) delta for
/// l = 1..ceil((t_max - t_min)/delta) + 1, the last point clamped to t_max.
inline UcbRcSetup ucb_rc_grid(double t_min, double t_max, double tau, double q) {
    if (!(t_min > 0.0 && t_min <= t_max && std::isfinite(t_max))) {
        throw InvalidArgument("UCB-RC needs 0 < t_min <= t_max < inf");
    }
    if (!(tau > std::exp(1.0))) throw InvalidArgument("UCB-RC needs tau > e");
    if (!(q > 1.0)) throw InvalidArgument("UCB-RC needs smoothness exponent q > 1");
    UcbRcSetup s;
    s.delta = std::pow(std::sqrt(std::log(tau) / tau), 1.0 / q);
    const double rad = t_max - t_min;
    std::vector<Cutoff> pts;
    if (rad == 0.0) {
        pts.push_back(Cutoff::at(t_min));
        s.degenerate = true;
    } else if (s.delta >= rad) {
        pts = {Cutoff::at(t_min), Cutoff::at(t_max)};
        s.degenerate = true;
    } else {
        const auto L = static_cast<std::size_t>(std::ceil(rad / s.delta)) + 1;
        for (std::size_t l = 0; l < L; ++l) {
            const double t = std::min(t_min + static_cast<double>(l) * s.delta, t_max);
            if (pts.empty() || pts.back().value() < t) pts.push_back(Cutoff::at(t));
        }
    }
    s.grid = DecisionGrid(std::move(pts));
    return s;
}

inline std::unique_ptr<UcbRestartPolicy> ucb_rc_build(std::vector<ResetCost> resets, double t_min, double t_max,
                                                      double tau, double q, UcbConfig config = {}) {
    config.estimator = EstimatorKind::bernstein;
    auto setup = ucb_rc_grid(t_min, t_max, tau, q);
    return std::make_unique<UcbRestartPolicy>(std::move(resets), std::move(setup.grid), config);
}

inline std::vector<ResetCost> resets_of(std::span<const ArmSpec> arms) {
    std::vector<ResetCost> r;
    for (const auto& a : arms) r.push_back(a.reset);
    return r;
}

} // namespace restartbandit
