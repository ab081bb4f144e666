// restartbandit: experiment driver.
//
//   restartbandit rate-sweep    --config cfg.json --out dir
//   restartbandit simulate      --config cfg.json --out dir [--seed N] [--replications N] [--workers N]
//   restartbandit concentration --config cfg.json --out dir [--seed N] [--replications N]
//   restartbandit sat           --config cfg.json --out dir [--seed N] [--replications N] [--policies all|luby-only]
//
// Every run writes manifest.json next to its CSV outputs.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "restartbandit/config.hpp"
#include "restartbandit/coverage.hpp"
#include "restartbandit/restart_analysis.hpp"
#include "restartbandit/satlab.hpp"
#include "restartbandit/simulator.hpp"
#include "restartbandit/version.hpp"

namespace fs = std::filesystem;
using namespace restartbandit;

namespace {

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr)) throw Error("sha256 failed");
    std::string hex;
    char buf[3];
    for (unsigned i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", md[i]);
        hex += buf;
    }
    return hex;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot read '" + p.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Options {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> replications;
    unsigned workers = 0;
    std::string policies = "all";
};

/// Collects input hashes and output names for the manifest.
class RunContext {
public:
    RunContext(std::string command, const Options& opt) : command_(std::move(command)), opt_(opt) {
        config_path_ = opt.config;
        add_input(config_path_);
        config_ = load_json_file(config_path_.string());
        if (opt.seed) config_["seed"] = *opt.seed;
        if (opt.replications) config_["replications"] = *opt.replications;
        fs::create_directories(opt.out);
    }

    Json& config() { return config_; }
    ConfigNode root() const { return ConfigNode(config_, ""); }
    const Options& options() const { return opt_; }

    void add_input(const fs::path& p) { inputs_.push_back({p.string(), sha256_hex(read_file(p))}); }

    /// Resolves a path from the config: as given if it exists, else relative to the config file.
    fs::path resolve(const std::string& p) const {
        fs::path path(p);
        if (path.is_absolute() || fs::exists(path)) return path;
        return config_path_.parent_path() / path;
    }

    template <class Writer>
    void write(const std::string& name, Writer&& w) {
        export_csv(fs::path(opt_.out) / name, std::forward<Writer>(w));
        outputs_.push_back(name);
    }

    Json& results() { return results_; }

    void finish() {
        Json m;
        m["command"] = command_;
        m["tool_version"] = kVersion;
        m["library_version"] = kVersion;
        m["compiler"] = __VERSION__;
        m["cplusplus"] = static_cast<long>(__cplusplus);
        Json ins = Json::array();
        std::string combined;
        for (const auto& [path, hash] : inputs_) {
            ins.push_back({{"path", path}, {"sha256", hash}});
            combined += hash;
        }
        m["inputs"] = ins;
        m["input_hash"] = sha256_hex(combined);
        m["config"] = config_;
        m["outputs"] = outputs_;
        if (!results_.is_null()) m["results"] = results_;
        write_file_atomic(fs::path(opt_.out) / "manifest.json", m.dump(2) + "\n");
    }

private:
    std::string command_;
    Options opt_;
    fs::path config_path_;
    Json config_;
    Json results_;
    std::vector<std::pair<std::string, std::string>> inputs_;
    std::vector<std::string> outputs_;
};

std::vector<Cutoff> to_cutoffs(const std::vector<double>& v) {
    std::vector<Cutoff> c;
    for (double x : v) c.push_back(std::isinf(x) ? Cutoff::never() : Cutoff::at(x));
    return c;
}

/// "grid": [..] or "grid_log10": {"start", "stop", "step"}.
std::vector<Cutoff> parse_sweep_grid(const ConfigNode& root) {
    if (root.has("grid") && root.has("grid_log10")) root.fail("give either 'grid' or 'grid_log10', not both");
    if (auto g = root.find("grid")) {
        auto c = with_path(*g, [&] { return to_cutoffs(g->as_doubles()); });
        with_path(*g, [&] { validate_grid(c); });
        return c;
    }
    const auto g = root.at("grid_log10");
    g.allow_keys({"start", "stop", "step"});
    const double a = g.at("start").as_finite(), b = g.at("stop").as_finite(), s = g.at("step").as_finite();
    if (!(s > 0.0) || b < a) g.fail("need step > 0 and stop >= start");
    std::vector<Cutoff> c;
    const auto n = static_cast<std::size_t>(std::floor((b - a) / s + 1e-9));
    for (std::size_t i = 0; i <= n; ++i) c.push_back(Cutoff::at(std::pow(10.0, a + s * static_cast<double>(i))));
    return c;
}

// ---------------------------------------------------------------------------

void cmd_rate_sweep(RunContext& ctx) {
    const auto root = ctx.root();
    root.allow_keys({"completion", "reset", "omega", "gammas", "grid", "grid_log10", "seed"});
    const auto completion = parse_completion(root.at("completion"));
    const auto reset = root.has("reset") ? parse_reset(root.at("reset")) : ResetCost::zero();
    const double omega = root.at("omega").as_finite();
    const auto gammas = root.at("gammas").as_doubles();
    const auto grid = parse_sweep_grid(root);

    std::ostringstream summary;
    summary << "gamma,argmax_t,max_rate,rate_inf,inf_flag\n";
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        const double g = gammas[i];
        const ConfigNode gnode(root.json()["gammas"][i], "gammas[" + std::to_string(i) + "]");
        const auto reward = with_path(gnode, [&] { return RewardModel::power_coupled(omega, g); });
        const auto arm = make_arm(completion, reward, reset, "gamma=" + format_double(g));
        const auto curve = rate_sweep(arm, grid);
        ctx.write("rate_gamma_" + format_double(g) + ".csv", [&](std::ostream& os) { write_rate_curve_csv(os, curve); });
        ctx.write("criterion_gamma_" + format_double(g) + ".csv", [&](std::ostream& os) {
            os << "t,verdict,margin\n";
            for (const auto& t : grid) {
                if (t.is_infinite()) continue;
                if (!(arm.completion.survival(t.value()) > 0.0)) {
                    os << t.to_string() << ",undefined,nan\n";
                    continue;
                }
                const auto c = restart_condition(arm, t.value());
                os << t.to_string() << ',' << to_string(c.verdict) << ',' << format_double(c.margin) << '\n';
            }
        });
        const auto inf = reward_rate(arm, Cutoff::never());
        summary << format_double(g) << ',' << curve.best_cutoff().to_string() << ',' << format_double(curve.best_rate())
                << ',' << format_double(inf.value) << ',' << to_string(inf.flag) << '\n';
    }
    ctx.write("summary.csv", [&](std::ostream& os) { os << summary.str(); });
}

// ---------------------------------------------------------------------------

/// Grid against which r* is computed.
std::vector<Cutoff> reference_grid(const ConfigNode& root, const PolicySpec& p) {
    if (auto g = root.find("reference_grid")) {
        auto c = with_path(*g, [&] { return to_cutoffs(g->as_doubles()); });
        with_path(*g, [&] { validate_grid(c); });
        return c;
    }
    if (p.grid) return p.grid->cutoffs();
    if (p.name == "ucb-rc") {
        std::vector<Cutoff> c;
        const std::size_t n = 2000;
        for (std::size_t i = 0; i <= n; ++i) {
            const double t = p.t_min + (p.t_max - p.t_min) * static_cast<double>(i) / static_cast<double>(n);
            if (c.empty() || c.back().value() < t) c.push_back(Cutoff::at(t));
        }
        return c;
    }
    root.fail("policy '" + p.name + "' has no grid; give 'reference_grid' for r*");
}

void cmd_simulate(RunContext& ctx) {
    const auto root = ctx.root();
    root.allow_keys({"arms", "policy", "horizons", "replications", "seed", "reference_grid", "workers", "trace"});
    const auto arms = parse_arms(root.at("arms"));
    const auto policy = parse_policy(root.at("policy"));
    const auto horizons = root.at("horizons").as_doubles();
    for (std::size_t h = 0; h < horizons.size(); ++h) {
        if (!(horizons[h] > 0.0) || !std::isfinite(horizons[h])) {
            throw ConfigError(root.at("horizons").index_path(h), "horizon must be finite and > 0");
        }
        check_policy(policy, arms, horizons[h], "policy");
    }
    const auto reps = root.get_uint("replications", 100);
    if (reps < 2) root.at("replications").fail("need at least 2 replications");
    const auto seed = root.get_uint("seed", 0);
    const unsigned workers = ctx.options().workers ? ctx.options().workers
                                                   : static_cast<unsigned>(root.get_uint("workers", 0));
    const auto ref = reference_grid(root, policy);
    const auto best = optimal_static_decision(arms, ref);

    PolicyFactory factory = [&](double tau) { return make_policy(policy, arms, tau); };
    const auto report = monte_carlo_regret(arms, factory, horizons, reps, seed, best.rate, workers);
    ctx.write("report.csv", [&](std::ostream& os) { write_report_csv(os, report); });
    if (root.get_bool("trace", false) && !horizons.empty()) {
        auto p = make_policy(policy, arms, horizons.front());
        const auto trace = run_episode(arms, *p, horizons.front(), replication_seed(seed, 0, 0));
        ctx.write("trace.csv", [&](std::ostream& os) { write_trace_csv(os, trace); });
    }
    ctx.results() = {{"r_star", best.rate},
                     {"r_star_arm", best.arm},
                     {"r_star_cutoff", best.cutoff.to_string()}};
}

// ---------------------------------------------------------------------------

void cmd_concentration(RunContext& ctx) {
    const auto root = ctx.root();
    root.allow_keys({"cases", "n", "delta", "beta", "replications", "seed"});
    const auto ns = root.at("n").items();
    const auto deltas = root.at("delta").as_doubles();
    const double beta = root.get_double("beta", 1.0 / 3.0);
    const auto reps = root.get_uint("replications", 2000);
    const auto seed = root.get_uint("seed", 0);
    Json results = Json::array();
    const auto cases = root.at("cases").items();
    for (std::size_t c = 0; c < cases.size(); ++c) {
        const auto& node = cases[c];
        node.allow_keys({"label", "arm", "estimator"});
        const auto label = node.at("label").as_string();
        const auto arm = parse_arm(node.at("arm"));
        const auto est_name = node.at("estimator").as_string();
        EstimatorKind est;
        if (est_name == "bernstein") {
            est = EstimatorKind::bernstein;
        } else if (est_name == "median_of_means") {
            est = EstimatorKind::median_of_means;
        } else {
            node.at("estimator").fail("unknown estimator '" + est_name + "'");
        }
        std::vector<CoverageReport> rows;
        for (std::size_t i = 0; i < ns.size(); ++i) {
            for (std::size_t j = 0; j < deltas.size(); ++j) {
                CoverageSpec spec{arm};
                spec.n = ns[i].as_uint();
                spec.delta = deltas[j];
                spec.beta = beta;
                spec.estimator = est;
                spec.replications = reps;
                spec.seed = derive_seed(seed, {c, i, j});
                rows.push_back(with_path(node, [&] { return rate_deviation_bound_check(spec); }));
                results.push_back({{"case", label},
                                   {"n", spec.n},
                                   {"delta", spec.delta},
                                   {"status", rows.back().status()}});
            }
        }
        ctx.write("coverage_" + label + ".csv", [&](std::ostream& os) {
            write_coverage_csv_header(os);
            for (const auto& r : rows) write_coverage_csv_row(os, r);
        });
    }
    ctx.results() = results;
}

// ---------------------------------------------------------------------------

std::vector<CnfFormula> load_instances(RunContext& ctx, const ConfigNode& root) {
    std::vector<CnfFormula> out;
    if (auto list = root.find("instances")) {
        for (const auto& item : list->items()) {
            const fs::path p = ctx.resolve(item.as_string());
            if (!fs::exists(p)) item.fail("instance file '" + p.string() + "' not found");
            ctx.add_input(p);
            std::ifstream in(p);
            try {
                out.push_back(parse_dimacs(in));
            } catch (const ParseError& e) {
                item.fail(p.string() + ": " + e.what());
            }
        }
    }
    if (auto g = root.find("generate")) {
        g->allow_keys({"n_vars", "n_clauses", "count", "seed"});
        const auto n = g->at("n_vars").as_uint();
        const auto m = g->at("n_clauses").as_uint();
        const auto count = g->at("count").as_uint();
        const auto s = g->get_uint("seed", 0);
        for (std::uint64_t i = 0; i < count; ++i) {
            out.push_back(with_path(*g, [&] {
                return generate_random_3sat(static_cast<int>(n), static_cast<int>(m), derive_seed(s, {i}));
            }));
        }
    }
    if (out.empty()) root.fail("no instances: give 'instances' and/or 'generate'");
    return out;
}

void cmd_sat(RunContext& ctx) {
    if (ctx.options().policies != "all") ctx.config()["policies"] = ctx.options().policies;
    const auto root = ctx.root();
    root.allow_keys({"instances", "generate", "noise", "cap", "reps", "max_restarts", "preset", "grid_scale",
                     "horizons", "replications", "seed", "ucb", "luby_bases", "fixed_grid", "policies"});
    const auto formulas = load_instances(ctx, root);
    const double noise = root.get_double("noise", 0.5);
    const auto cap = root.get_uint("cap", 100000);
    const auto reps = root.get_uint("reps", 50);
    const auto max_restarts = root.get_uint("max_restarts", 10);
    const auto seed = root.get_uint("seed", 0);
    const auto replications = root.get_uint("replications", 100);
    if (replications < 2) root.at("replications").fail("need at least 2 replications");
    const auto preset_name = root.get_string("preset", "uniform_random");
    SatPreset preset;
    if (preset_name == "uniform_random") {
        preset = SatPreset::uniform_random;
    } else if (preset_name == "backbone") {
        preset = SatPreset::backbone;
    } else {
        root.at("preset").fail("unknown preset '" + preset_name + "'");
    }
    const auto which = root.get_string("policies", "all");
    if (which != "all" && which != "luby-only") root.at("policies").fail("expected 'all' or 'luby-only'");
    UcbConfig ucb;
    ucb.init_pulls = 40;
    if (auto u = root.find("ucb")) {
        u->allow_keys({"alpha", "composite", "init_pulls"});
        ucb.alpha = u->get_double("alpha", ucb.alpha);
        ucb.composite = u->get_double("composite", ucb.composite);
        ucb.init_pulls = u->get_uint("init_pulls", ucb.init_pulls);
    }
    const auto bases = root.has("luby_bases") ? root.at("luby_bases").as_doubles() : std::vector<double>{};
    const auto horizons = root.at("horizons").as_doubles();
    for (std::size_t h = 0; h < horizons.size(); ++h) {
        if (!(horizons[h] > 0.0) || !std::isfinite(horizons[h])) {
            throw ConfigError(root.at("horizons").index_path(h), "horizon must be finite and > 0");
        }
    }

    RandomStream rng(derive_seed(seed, {0x5a7}));
    const auto samples = with_path(root, [&] {
        return collect_completion_samples(formulas, noise, cap, reps, rng, max_restarts);
    });
    ctx.write("samples.csv", [&](std::ostream& os) {
        os << "flips\n";
        for (double x : samples.flips) os << format_double(x) << '\n';
    });

    const ArmSpec arm = sat_arm(samples.flips);
    const double scale = root.has("grid_scale") ? root.at("grid_scale").as_finite() : sample_median(samples.flips);
    const DecisionGrid grid = with_path(root, [&] { return preset_grid(preset, scale); });
    ctx.write("empirical_rate.csv", [&](std::ostream& os) {
        write_rate_curve_csv(os, rate_sweep(arm, grid.cutoffs()));
    });

    struct Entry {
        std::string policy, param;
        PolicyFactory factory;
    };
    std::vector<Entry> entries;
    const std::vector<ResetCost> resets{ResetCost::zero()};
    if (which == "all") {
        entries.push_back({"ucb-rb", "", [&](double) { return std::make_unique<UcbRestartPolicy>(resets, grid, ucb); }});
        if (root.get_bool("fixed_grid", true)) {
            for (std::size_t l = 0; l < grid.size(); ++l) {
                entries.push_back({"fixed", grid[l].to_string(),
                                   [&, l](double) { return std::make_unique<FixedPolicy>(0, grid[l], l); }});
            }
        }
    }
    for (double b : bases) {
        if (!(b > 0.0)) root.at("luby_bases").fail("Luby base must be > 0");
        entries.push_back({"luby", format_double(b), [b](double) { return std::make_unique<LubyPolicy>(0, b); }});
    }

    const ArmSpec arms[] = {arm};
    std::ostringstream os;
    os << "tau,policy,param,mean_solved,stderr,reps\n";
    for (std::size_t h = 0; h < horizons.size(); ++h) {
        for (const auto& e : entries) {
            const auto traces = run_replications(arms, e.factory, horizons[h], replications, seed, h,
                                                 ctx.options().workers);
            std::vector<double> solved;
            for (const auto& t : traces) solved.push_back(t.reward);
            const auto [m, se] = mean_and_stderr(solved);
            os << format_double(horizons[h]) << ',' << e.policy << ',' << e.param << ',' << format_double(m) << ','
               << format_double(se) << ',' << replications << '\n';
        }
    }
    ctx.write("solved.csv", [&](std::ostream& o) { o << os.str(); });
    ctx.results() = {{"instances", formulas.size()},
                     {"completed_runs", samples.flips.size()},
                     {"censored_runs", samples.censored},
                     {"grid_scale", scale}};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-constrained restart bandit experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    Options opt;
    auto common = [&](CLI::App* sub, bool seeded) {
        sub->add_option("--config", opt.config, "JSON config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out, "output directory")->capture_default_str();
        auto* s = sub->add_option_function<std::uint64_t>("--seed", [&](std::uint64_t v) { opt.seed = v; },
                                                          "base seed (overrides config)");
        if (!seeded) s->description("accepted for uniformity; the sweep is deterministic");
    };
    auto* rate = app.add_subcommand("rate-sweep", "reward rate vs cutoff for power-coupled rewards");
    common(rate, false);
    auto* sim = app.add_subcommand("simulate", "Monte Carlo pseudo-regret of a policy");
    common(sim, true);
    auto* conc = app.add_subcommand("concentration", "coverage of the rate-deviation radii");
    common(conc, true);
    auto* sat = app.add_subcommand("sat", "WalkSAT completion times and restart meta-runs");
    common(sat, true);
    for (auto* sub : {sim, conc, sat}) {
        sub->add_option_function<std::uint64_t>("--replications", [&](std::uint64_t v) { opt.replications = v; },
                                                "replications (overrides config)");
    }
    for (auto* sub : {sim, sat}) sub->add_option("--workers", opt.workers, "worker threads (0 = hardware)");
    sat->add_option("--policies", opt.policies, "all or luby-only")->check(CLI::IsMember({"all", "luby-only"}));

    CLI11_PARSE(app, argc, argv);

    try {
        const std::string name = app.get_subcommands().front()->get_name();
        RunContext ctx(name, opt);
        if (name == "rate-sweep") {
            cmd_rate_sweep(ctx);
        } else if (name == "simulate") {
            cmd_simulate(ctx);
        } else if (name == "concentration") {
            cmd_concentration(ctx);
        } else {
            cmd_sat(ctx);
        }
        ctx.finish();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
