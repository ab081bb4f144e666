#pragma once

// The time-constrained decision process: epochs run until cumulative elapsed
// time first exceeds the horizon tau, and the crossing epoch's reward counts.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "restartbandit/arm_models.hpp"
#include "restartbandit/policies.hpp"
#include "restartbandit/random.hpp"

namespace restartbandit {

struct TraceRecord {
    std::uint64_t n = 0; // 1-based epoch
    Decision decision;
    CensoredObservation obs;
    double elapsed = 0.0; // S_n

    friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

using DecisionKey = std::pair<std::size_t, std::size_t>; // (arm, level)

struct EpisodeTrace {
    std::vector<TraceRecord> records; // empty when recording is off
    std::uint64_t epochs = 0;         // N(tau)
    double reward = 0.0;              // REW(tau)
    double elapsed = 0.0;             // S_N
    double tau = 0.0;
    std::uint64_t seed = 0;
    std::string policy;
    std::map<DecisionKey, std::uint64_t> pulls;

    std::uint64_t pulls_of(std::size_t arm, std::size_t level) const {
        auto it = pulls.find({arm, level});
        return it == pulls.end() ? 0 : it->second;
    }
};

/// Random stream feeding arm k's trials in an episode seeded with `seed`.
inline RandomStream arm_stream(std::uint64_t seed, std::size_t k) { return RandomStream(derive_seed(seed, {k})); }

inline EpisodeTrace run_episode(std::span<const ArmSpec> arms, Policy& policy, double tau, std::uint64_t seed,
                                bool record = true) {
    if (!(tau > 0.0)) throw InvalidArgument("run_episode needs tau > 0");
    if (arms.empty()) throw InvalidArgument("run_episode needs at least one arm");
    std::vector<RandomStream> streams;
    for (std::size_t k = 0; k < arms.size(); ++k) streams.push_back(arm_stream(seed, k));

    EpisodeTrace trace;
    trace.tau = tau;
    trace.seed = seed;
    trace.policy = policy.name();
    CompensatedSum elapsed;
    CompensatedSum reward;
    while (true) {
        const std::uint64_t n = trace.epochs + 1;
        Decision d;
        CensoredObservation obs;
        try {
            d = policy.next();
            if (d.arm >= arms.size()) throw InvalidArgument("policy chose arm " + std::to_string(d.arm) + " of " +
                                                            std::to_string(arms.size()));
            const ArmSpec& arm = arms[d.arm];
            const auto draw = sample_arm(arm, streams[d.arm]);
            obs = censor(draw.x, draw.r, d.cutoff, arm.reset);
            policy.update(d, obs);
        } catch (const std::exception& e) {
            throw Error("epoch " + std::to_string(n) + " (" + policy.name() + "): " + e.what());
        }
        elapsed.add(obs.u);
        reward.add(obs.v);
        trace.epochs = n;
        ++trace.pulls[{d.arm, d.level}];
        if (record) trace.records.push_back({n, d, obs, elapsed.value()});
        if (elapsed.value() > tau) break;
    }
    trace.elapsed = elapsed.value();
    trace.reward = reward.value();
    return trace;
}

// ---------------------------------------------------------------------------
// Monte Carlo over horizons and replications

/// Builds a fresh policy for an episode with horizon tau.
using PolicyFactory = std::function<std::unique_ptr<Policy>(double tau)>;

/// Seed of replication `rep` at horizon index `h`: derive_seed(base, {h, rep}).
inline std::uint64_t replication_seed(std::uint64_t base_seed, std::size_t h, std::size_t rep) {
    return derive_seed(base_seed, {h, rep});
}

inline unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Runs `reps` independent episodes (without per-epoch records) on a worker
/// pool. Results are indexed by replication, so ordering is deterministic.
inline std::vector<EpisodeTrace> run_replications(std::span<const ArmSpec> arms, const PolicyFactory& factory,
                                                  double tau, std::size_t reps, std::uint64_t base_seed,
                                                  std::size_t horizon_index = 0, unsigned workers = 0) {
    std::vector<EpisodeTrace> out(reps);
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(reps);
    auto work = [&] {
        for (std::size_t i = next++; i < reps; i = next++) {
            try {
                auto policy = factory(tau);
                out[i] = run_episode(arms, *policy, tau, replication_seed(base_seed, horizon_index, i), false);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned n_workers = std::min<unsigned>(workers ? workers : default_workers(), static_cast<unsigned>(reps));
    if (n_workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

struct RegretRow {
    double tau = 0.0;
    std::string policy;
    double mean_reward = 0.0;
    double stderr_reward = 0.0;
    double pseudo_regret = 0.0; // r* tau - mean_reward
    std::size_t reps = 0;
    std::vector<double> rewards; // per replication, not exported
};

struct RegretReport {
    double r_star = 0.0;
    std::vector<RegretRow> rows;
};

inline std::pair<double, double> mean_and_stderr(std::span<const double> xs) {
    const double n = static_cast<double>(xs.size());
    double m = 0.0;
    for (double x : xs) m += x;
    m /= n;
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    const double sd = xs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    return {m, sd / std::sqrt(n)};
}

/// Pseudo-regret r* tau - E[REW(tau)] estimated over independent replications.
inline RegretReport monte_carlo_regret(std::span<const ArmSpec> arms, const PolicyFactory& factory,
                                       std::span<const double> horizons, std::size_t reps, std::uint64_t base_seed,
                                       double r_star, unsigned workers = 0) {
    if (reps < 2) throw InvalidArgument("monte_carlo_regret needs at least 2 replications");
    RegretReport report;
    report.r_star = r_star;
    for (std::size_t h = 0; h < horizons.size(); ++h) {
        const double tau = horizons[h];
        const auto traces = run_replications(arms, factory, tau, reps, base_seed, h, workers);
        RegretRow row;
        row.tau = tau;
        row.policy = traces.empty() ? std::string{} : traces.front().policy;
        row.reps = reps;
        for (const auto& t : traces) row.rewards.push_back(t.reward);
        std::tie(row.mean_reward, row.stderr_reward) = mean_and_stderr(row.rewards);
        row.pseudo_regret = opt_reference(r_star, tau) - row.mean_reward;
        report.rows.push_back(std::move(row));
    }
    return report;
}

// ---------------------------------------------------------------------------
// CSV interchange

inline void write_trace_csv(std::ostream& os, const EpisodeTrace& trace) {
    os << "n,arm,cutoff,u,v,completed,S_n\n";
    for (const auto& r : trace.records) {
        os << r.n << ',' << r.decision.arm << ',' << r.obs.cutoff.to_string() << ',' << format_double(r.obs.u) << ','
           << format_double(r.obs.v) << ',' << (r.obs.completed ? 1 : 0) << ',' << format_double(r.elapsed) << '\n';
    }
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

/// Parses the trace CSV back into records. Grid levels are not part of the
/// schema and come back as 0.
inline std::vector<TraceRecord> read_trace_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "n,arm,cutoff,u,v,completed,S_n") {
        throw InvalidArgument("trace CSV: unexpected header '" + line + "'");
    }
    std::vector<TraceRecord> out;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto c = split_csv_line(line);
        if (c.size() != 7) throw InvalidArgument("trace CSV line " + std::to_string(lineno) + ": expected 7 columns");
        TraceRecord r;
        r.n = std::stoull(c[0]);
        r.decision.arm = std::stoull(c[1]);
        r.decision.cutoff = parse_cutoff(c[2]);
        r.obs.cutoff = r.decision.cutoff;
        r.obs.u = parse_double(c[3]);
        r.obs.v = parse_double(c[4]);
        r.obs.completed = c[5] == "1";
        r.obs.raw_elapsed = r.obs.completed ? r.obs.u : r.obs.cutoff.value();
        r.elapsed = parse_double(c[6]);
        out.push_back(r);
    }
    return out;
}

inline void write_report_csv(std::ostream& os, const RegretReport& report) {
    os << "tau,policy,mean_reward,stderr,pseudo_regret,reps\n";
    for (const auto& r : report.rows) {
        os << format_double(r.tau) << ',' << r.policy << ',' << format_double(r.mean_reward) << ','
           << format_double(r.stderr_reward) << ',' << format_double(r.pseudo_regret) << ',' << r.reps << '\n';
    }
}

/// Writes via a temporary file in the same directory and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
        out << content;
        out.flush();
        if (!out) throw Error("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
    }
}

template <class Writer>
void export_csv(const std::filesystem::path& path, Writer&& writer) {
    std::ostringstream os;
    writer(os);
    write_file_atomic(path, os.str());
}

} // namespace restartbandit
