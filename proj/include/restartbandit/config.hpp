#pragma once

// JSON experiment configuration. Every object is checked against its list of
// known keys; errors carry the key path, e.g. "arms[1].completion.shape".

#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "restartbandit/arm_models.hpp"
#include "restartbandit/policies.hpp"

namespace restartbandit {

using Json = nlohmann::json;

class ConfigError : public Error {
public:
    ConfigError(const std::string& path, const std::string& msg)
        : Error((path.empty() ? std::string("<root>") : path) + ": " + msg), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

/// A JSON value together with its key path.
class ConfigNode {
public:
    ConfigNode(const Json& j, std::string path) : j_(&j), path_(std::move(path)) {}

    const Json& json() const { return *j_; }
    const std::string& path() const { return path_; }

    std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    std::string index_path(std::size_t i) const { return path_ + "[" + std::to_string(i) + "]"; }

    [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(path_, msg); }

    void require_object() const {
        if (!j_->is_object()) fail("expected an object");
    }
    void allow_keys(std::initializer_list<const char*> keys) const {
        require_object();
        std::set<std::string> known(keys.begin(), keys.end());
        for (auto it = j_->begin(); it != j_->end(); ++it) {
            if (!known.count(it.key())) throw ConfigError(child_path(it.key()), "unknown key");
        }
    }
    bool has(const std::string& key) const { return j_->is_object() && j_->contains(key); }

    ConfigNode at(const std::string& key) const {
        require_object();
        if (!j_->contains(key)) throw ConfigError(child_path(key), "missing required key");
        return {(*j_)[key], child_path(key)};
    }
    std::optional<ConfigNode> find(const std::string& key) const {
        if (!has(key)) return std::nullopt;
        return ConfigNode((*j_)[key], child_path(key));
    }
    std::vector<ConfigNode> items() const {
        if (!j_->is_array()) fail("expected an array");
        std::vector<ConfigNode> out;
        for (std::size_t i = 0; i < j_->size(); ++i) out.emplace_back((*j_)[i], index_path(i));
        return out;
    }

    /// Numbers, or the strings "inf"/"infinity".
    double as_double() const {
        if (j_->is_number()) return j_->get<double>();
        if (j_->is_string()) {
            const auto s = j_->get<std::string>();
            if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
        }
        fail("expected a number");
    }
    double as_finite() const {
        const double v = as_double();
        if (!std::isfinite(v)) fail("expected a finite number");
        return v;
    }
    std::uint64_t as_uint() const {
        if (j_->is_number_unsigned()) return j_->get<std::uint64_t>();
        if (j_->is_number_integer() && j_->get<std::int64_t>() >= 0) return j_->get<std::uint64_t>();
        if (j_->is_number_float()) {
            const double v = j_->get<double>();
            if (v >= 0 && v == std::floor(v) && v < 1.8e19) return static_cast<std::uint64_t>(v);
        }
        fail("expected a non-negative integer");
    }
    bool as_bool() const {
        if (!j_->is_boolean()) fail("expected true or false");
        return j_->get<bool>();
    }
    std::string as_string() const {
        if (!j_->is_string()) fail("expected a string");
        return j_->get<std::string>();
    }
    std::vector<double> as_doubles() const {
        std::vector<double> out;
        for (const auto& n : items()) out.push_back(n.as_double());
        return out;
    }

    double get_double(const std::string& key, double fallback) const {
        auto n = find(key);
        return n ? n->as_finite() : fallback;
    }
    std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const {
        auto n = find(key);
        return n ? n->as_uint() : fallback;
    }
    bool get_bool(const std::string& key, bool fallback) const {
        auto n = find(key);
        return n ? n->as_bool() : fallback;
    }
    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto n = find(key);
        return n ? n->as_string() : fallback;
    }

private:
    const Json* j_;
    std::string path_;
};

/// Runs `f` and rethrows library argument errors as ConfigError at `node`.
template <class F>
auto with_path(const ConfigNode& node, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        node.fail(e.what());
    }
}

inline Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw Error("config '" + path + "': " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Arms

inline CompletionDistribution parse_completion(const ConfigNode& n) {
    const std::string type = n.at("type").as_string();
    if (type == "deterministic") {
        n.allow_keys({"type", "value"});
        return with_path(n, [&] { return CompletionDistribution::deterministic(n.at("value").as_finite()); });
    }
    if (type == "uniform") {
        n.allow_keys({"type", "lo", "hi"});
        return with_path(n, [&] { return CompletionDistribution::uniform(n.at("lo").as_finite(), n.at("hi").as_finite()); });
    }
    if (type == "exponential") {
        n.allow_keys({"type", "rate"});
        return with_path(n, [&] { return CompletionDistribution::exponential(n.at("rate").as_finite()); });
    }
    if (type == "pareto") {
        n.allow_keys({"type", "scale", "shape"});
        return with_path(n, [&] {
            return CompletionDistribution::pareto(n.at("scale").as_finite(), n.at("shape").as_finite());
        });
    }
    if (type == "empirical") {
        n.allow_keys({"type", "samples"});
        return with_path(n, [&] { return CompletionDistribution::empirical(n.at("samples").as_doubles()); });
    }
    n.at("type").fail("unknown completion distribution '" + type + "'");
}

inline RewardModel parse_reward(const ConfigNode& n) {
    const std::string type = n.at("type").as_string();
    if (type == "constant") {
        n.allow_keys({"type", "value"});
        return with_path(n, [&] { return RewardModel::constant(n.get_double("value", 1.0)); });
    }
    if (type == "bernoulli") {
        n.allow_keys({"type", "p"});
        return with_path(n, [&] { return RewardModel::bernoulli(n.at("p").as_finite()); });
    }
    if (type == "power") {
        n.allow_keys({"type", "omega", "gamma"});
        return with_path(n, [&] {
            return RewardModel::power_coupled(n.at("omega").as_finite(), n.at("gamma").as_finite());
        });
    }
    n.at("type").fail("unknown reward model '" + type + "'");
}

inline ResetCost parse_reset(const ConfigNode& n) {
    const std::string type = n.at("type").as_string();
    if (type == "zero") {
        n.allow_keys({"type"});
        return ResetCost::zero();
    }
    if (type == "constant") {
        n.allow_keys({"type", "value"});
        return with_path(n, [&] { return ResetCost::constant(n.at("value").as_finite()); });
    }
    if (type == "proportional") {
        n.allow_keys({"type", "fraction"});
        return with_path(n, [&] { return ResetCost::proportional(n.at("fraction").as_finite()); });
    }
    n.at("type").fail("unknown reset cost '" + type + "'");
}

inline ArmSpec parse_arm(const ConfigNode& n) {
    n.allow_keys({"label", "completion", "reward", "reset"});
    auto completion = parse_completion(n.at("completion"));
    auto reward = n.has("reward") ? parse_reward(n.at("reward")) : RewardModel::constant(1.0);
    auto reset = n.has("reset") ? parse_reset(n.at("reset")) : ResetCost::zero();
    return make_arm(std::move(completion), std::move(reward), std::move(reset), n.get_string("label", ""));
}

inline std::vector<ArmSpec> parse_arms(const ConfigNode& n) {
    std::vector<ArmSpec> arms;
    for (const auto& a : n.items()) arms.push_back(parse_arm(a));
    if (arms.empty()) n.fail("at least one arm is required");
    return arms;
}

inline DecisionGrid parse_grid(const ConfigNode& n) {
    return with_path(n, [&] { return DecisionGrid::from_values(n.as_doubles()); });
}

// ---------------------------------------------------------------------------
// Policies

struct PolicySpec {
    std::string name = "ucb-rb"; // static, ucb-rb, ucb-rm, ucb-rc, luby, fixed
    std::optional<DecisionGrid> grid;
    UcbConfig ucb;
    std::size_t arm = 0;                 // luby, fixed
    std::optional<double> cutoff;        // fixed (may be inf)
    std::optional<double> base;          // luby
    double t_min = 0.0, t_max = 0.0, q = 2.0; // ucb-rc
};

inline PolicySpec parse_policy(const ConfigNode& n) {
    n.allow_keys({"name", "grid", "alpha", "composite", "init_pulls", "share_information", "groups", "arm", "cutoff",
                  "base", "t_min", "t_max", "q"});
    PolicySpec p;
    p.name = n.at("name").as_string();
    static const std::set<std::string> known{"static", "ucb-rb", "ucb-rm", "ucb-rc", "luby", "fixed"};
    if (!known.count(p.name)) n.at("name").fail("unknown policy '" + p.name + "'");
    if (auto g = n.find("grid")) p.grid = parse_grid(*g);
    p.ucb.alpha = n.get_double("alpha", p.ucb.alpha);
    p.ucb.composite = n.get_double("composite", p.ucb.composite);
    p.ucb.init_pulls = n.get_uint("init_pulls", p.ucb.init_pulls);
    p.ucb.share_information = n.get_bool("share_information", true);
    p.ucb.estimator = p.name == "ucb-rm" ? EstimatorKind::median_of_means : EstimatorKind::bernstein;
    if (auto g = n.find("groups")) p.ucb.frozen_groups = g->as_uint();
    p.arm = n.get_uint("arm", 0);
    if (auto c = n.find("cutoff")) p.cutoff = c->as_double();
    if (auto b = n.find("base")) p.base = b->as_finite();
    p.t_min = n.get_double("t_min", 0.0);
    p.t_max = n.get_double("t_max", 0.0);
    p.q = n.get_double("q", 2.0);

    const bool needs_grid = p.name == "static" || p.name == "ucb-rb" || p.name == "ucb-rm";
    if (needs_grid && !p.grid) n.fail("policy '" + p.name + "' needs a grid");
    if (p.name == "fixed" && !p.cutoff) n.fail("policy 'fixed' needs a cutoff");
    if (p.name == "luby" && !p.base) n.fail("policy 'luby' needs a base");
    if (p.name == "ucb-rc" && !(n.has("t_min") && n.has("t_max"))) n.fail("policy 'ucb-rc' needs t_min and t_max");
    return p;
}

/// Builds a fresh policy for an episode of horizon `tau`.
inline std::unique_ptr<Policy> make_policy(const PolicySpec& p, std::span<const ArmSpec> arms, double tau) {
    if ((p.name == "luby" || p.name == "fixed") && p.arm >= arms.size()) {
        throw InvalidArgument("policy arm index " + std::to_string(p.arm) + " out of range");
    }
    if (p.name == "static") return std::make_unique<StaticPolicy>(arms, *p.grid);
    if (p.name == "ucb-rb" || p.name == "ucb-rm") {
        return std::make_unique<UcbRestartPolicy>(resets_of(arms), *p.grid, p.ucb);
    }
    if (p.name == "ucb-rc") return ucb_rc_build(resets_of(arms), p.t_min, p.t_max, tau, p.q, p.ucb);
    if (p.name == "luby") return std::make_unique<LubyPolicy>(p.arm, *p.base);
    if (p.name == "fixed") {
        const double c = *p.cutoff;
        return std::make_unique<FixedPolicy>(p.arm, std::isinf(c) ? Cutoff::never() : Cutoff::at(c));
    }
    throw InvalidArgument("unknown policy '" + p.name + "'");
}

/// Validates that a policy can be built before any simulation starts.
inline void check_policy(const PolicySpec& p, std::span<const ArmSpec> arms, double tau, const std::string& path) {
    try {
        (void)make_policy(p, arms, tau);
    } catch (const Error& e) {
        throw ConfigError(path, e.what());
    }
}

} // namespace restartbandit
