#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "restartbandit/simulator.hpp"

using namespace restartbandit;

namespace {

std::vector<Cutoff> cutoffs(std::initializer_list<double> v) {
    std::vector<Cutoff> c;
    for (double x : v) c.push_back(Cutoff::at(x));
    return c;
}

std::vector<ArmSpec> two_arms() {
    return {make_arm(CompletionDistribution::pareto(1.0, 1.5), RewardModel::constant(1.0)),
            make_arm(CompletionDistribution::uniform(0.0, 4.0), RewardModel::bernoulli(0.7), ResetCost::constant(0.5))};
}

std::string trace_text(const EpisodeTrace& t) {
    std::ostringstream os;
    write_trace_csv(os, t);
    return os.str();
}

class ThrowingPolicy : public Policy {
public:
    Decision next() const override {
        if (n_ == 3) throw InvalidArgument("boom");
        return {0, 0, Cutoff::at(1.0)};
    }
    void update(const Decision&, const CensoredObservation&) override { ++n_; }
    std::string name() const override { return "throwing"; }

private:
    int n_ = 0;
};

} // namespace

TEST(Episode, DeterministicExample) {
    const std::vector<ArmSpec> arms = {make_arm(CompletionDistribution::deterministic(2.0), RewardModel::constant(1.0))};
    FixedPolicy p(0, Cutoff::never());
    const auto t = run_episode(arms, p, 7.0, 1);
    EXPECT_EQ(t.epochs, 4u);
    EXPECT_EQ(t.reward, 4.0);
    EXPECT_EQ(t.elapsed, 8.0);
}

TEST(Episode, ShortHorizonSingleEpoch) {
    const std::vector<ArmSpec> arms = {make_arm(CompletionDistribution::deterministic(2.0), RewardModel::constant(0.3))};
    FixedPolicy p(0, Cutoff::never());
    const auto t = run_episode(arms, p, 0.5, 1);
    EXPECT_EQ(t.epochs, 1u);
    EXPECT_EQ(t.reward, 0.3);
    EXPECT_THROW(run_episode(arms, p, 0.0, 1), InvalidArgument);
}

TEST(Episode, FirstPassage) {
    const auto arms = two_arms();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        UcbRestartPolicy p(resets_of(arms), DecisionGrid(cutoffs({1.5, 3.0, 6.0})));
        const double tau = 500.0;
        const auto t = run_episode(arms, p, tau, seed);
        ASSERT_EQ(t.records.size(), t.epochs);
        const double before = t.records.size() > 1 ? t.records[t.records.size() - 2].elapsed : 0.0;
        EXPECT_LE(before, tau);
        EXPECT_GT(t.elapsed, tau);
        double s = 0.0;
        for (const auto& r : t.records) s += r.obs.u;
        EXPECT_NEAR(s, t.elapsed, 1e-9 * s);
    }
}

TEST(Episode, PolicyErrorsCarryEpochContext) {
    const auto arms = two_arms();
    ThrowingPolicy p;
    try {
        run_episode(arms, p, 1e6, 1);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("epoch 4 (throwing): boom"), std::string::npos) << e.what();
    }
    FixedPolicy bad(5, Cutoff::at(1.0));
    EXPECT_THROW(run_episode(arms, bad, 10.0, 1), Error);
}

TEST(Episode, ByteIdenticalPerSeed) {
    const auto arms = two_arms();
    auto run = [&](std::uint64_t seed) {
        UcbRestartPolicy p(resets_of(arms), DecisionGrid(cutoffs({1.5, 3.0, 6.0})));
        return trace_text(run_episode(arms, p, 300.0, seed));
    };
    EXPECT_EQ(run(4), run(4));
    EXPECT_NE(run(4), run(5));
}

TEST(Episode, TraceCsvRoundTrip) {
    const auto arms = two_arms();
    UcbRestartPolicy p(resets_of(arms), DecisionGrid(cutoffs({1.5, 3.0, 6.0})));
    const auto t = run_episode(arms, p, 200.0, 8);
    std::istringstream is(trace_text(t));
    const auto back = read_trace_csv(is);
    ASSERT_EQ(back.size(), t.records.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        auto expect = t.records[i];
        expect.decision.level = 0; // levels are not part of the schema
        EXPECT_EQ(back[i], expect) << "row " << i;
    }
    std::istringstream bad("n,arm\n");
    EXPECT_THROW(read_trace_csv(bad), InvalidArgument);
    std::istringstream short_row("n,arm,cutoff,u,v,completed,S_n\n1,0,2\n");
    EXPECT_THROW(read_trace_csv(short_row), InvalidArgument);
}

TEST(Replications, IndependentOfWorkerCount) {
    const auto arms = two_arms();
    PolicyFactory f = [&](double) {
        return std::make_unique<UcbRestartPolicy>(resets_of(arms), DecisionGrid(cutoffs({1.5, 3.0, 6.0})));
    };
    const auto a = run_replications(arms, f, 300.0, 12, 77, 0, 1);
    const auto b = run_replications(arms, f, 300.0, 12, 77, 0, 3);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].reward, b[i].reward);
        EXPECT_EQ(a[i].epochs, b[i].epochs);
        EXPECT_EQ(a[i].seed, replication_seed(77, 0, i));
    }
}

TEST(Regret, ZeroRewardArms) {
    const std::vector<ArmSpec> arms = {make_arm(CompletionDistribution::exponential(1.0), RewardModel::constant(0.0))};
    PolicyFactory f = [&](double) { return std::make_unique<FixedPolicy>(0, Cutoff::at(1.0)); };
    const std::vector<double> horizons = {10.0, 100.0};
    const auto rep = monte_carlo_regret(arms, f, horizons, 5, 1, 0.0, 1);
    ASSERT_EQ(rep.rows.size(), 2u);
    for (const auto& r : rep.rows) {
        EXPECT_EQ(r.pseudo_regret, 0.0);
        EXPECT_EQ(r.mean_reward, 0.0);
    }
    EXPECT_THROW(monte_carlo_regret(arms, f, horizons, 1, 1, 0.0, 1), InvalidArgument);
}

TEST(Regret, ReportCsvSchema) {
    RegretReport empty;
    std::ostringstream a;
    write_report_csv(a, empty);
    EXPECT_EQ(a.str(), "tau,policy,mean_reward,stderr,pseudo_regret,reps\n");

    const std::vector<ArmSpec> arms = {make_arm(CompletionDistribution::deterministic(2.0), RewardModel::constant(1.0))};
    PolicyFactory f = [&](double) { return std::make_unique<FixedPolicy>(0, Cutoff::never()); };
    const std::vector<double> horizons = {1e3, 1e4, 4e4};
    const auto rep = monte_carlo_regret(arms, f, horizons, 3, 1, 0.5, 1);
    std::ostringstream b;
    write_report_csv(b, rep);
    EXPECT_EQ(b.str(),
              "tau,policy,mean_reward,stderr,pseudo_regret,reps\n"
              "1e+03,fixed,501,0,-1,3\n"
              "1e+04,fixed,5001,0,-1,3\n"
              "4e+04,fixed,20001,0,-1,3\n");
}

TEST(Regret, RenewalSanity) {
    // A fixed decision earns reward_rate per unit time over long horizons.
    const auto arms = two_arms();
    for (std::size_t k = 0; k < arms.size(); ++k) {
        const Cutoff t = Cutoff::at(3.0);
        const double eu = truncated_time_mean(arms[k].completion, arms[k].reset, t);
        const double tau = 1e4 * eu;
        PolicyFactory f = [&](double) { return std::make_unique<FixedPolicy>(k, t); };
        const std::vector<double> horizons = {tau};
        const auto rep = monte_carlo_regret(arms, f, horizons, 200, 31 + k, 0.0, 1);
        const auto& row = rep.rows[0];
        EXPECT_NEAR(row.mean_reward / tau, reward_rate(arms[k], t).value, 3.0 * row.stderr_reward / tau) << k;
    }
}

TEST(Regret, StaticRateConverges) {
    const std::vector<ArmSpec> arms = {make_arm(CompletionDistribution::pareto(1.0, 1.2), RewardModel::constant(1.0))};
    const DecisionGrid grid(cutoffs({1.5, 2.0, 3.0, 5.0, 10.0}));
    const auto best = optimal_static_decision(arms, grid.cutoffs());
    PolicyFactory f = [&](double) { return std::make_unique<StaticPolicy>(arms, grid); };
    const std::vector<double> horizons = {1e2, 1e4};
    const auto rep = monte_carlo_regret(arms, f, horizons, 100, 2, best.rate, 1);
    const double gap_small = std::fabs(rep.rows[0].mean_reward / 1e2 - best.rate);
    const double gap_large = std::fabs(rep.rows[1].mean_reward / 1e4 - best.rate);
    EXPECT_LT(gap_large, gap_small);
    EXPECT_LT(gap_large, 0.01 * best.rate);
}

TEST(Regret, EpochCountBounds) {
    // N(tau) lies between tau / max E[U] and 2 tau / mu_* + slack.
    const auto arms = two_arms();
    const DecisionGrid grid(cutoffs({1.5, 3.0, 6.0}));
    double max_eu = 0.0, mu_star = INFINITY;
    for (const auto& a : arms) {
        for (const auto& t : grid.cutoffs()) {
            max_eu = std::max(max_eu, truncated_time_mean(a.completion, a.reset, t));
            mu_star = std::min(mu_star, truncated_time_mean(a.completion, a.reset, t));
        }
    }
    PolicyFactory f = [&](double) { return std::make_unique<UcbRestartPolicy>(resets_of(arms), grid); };
    const double tau = 5000.0;
    const auto traces = run_replications(arms, f, tau, 50, 12, 0, 1);
    int inside = 0;
    for (const auto& t : traces) {
        const double n = static_cast<double>(t.epochs);
        inside += n >= tau / max_eu * 0.9 && n <= 2.0 * tau / mu_star + 50.0;
    }
    EXPECT_GE(inside, 48);
}

TEST(Export, AtomicFileWrite) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "rb_export_test";
    fs::create_directories(dir);
    const fs::path p = dir / "report.csv";
    RegretReport empty;
    export_csv(p, [&](std::ostream& os) { write_report_csv(os, empty); });
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "tau,policy,mean_reward,stderr,pseudo_regret,reps");
    EXPECT_FALSE(fs::exists(p.string() + ".tmp"));
    EXPECT_THROW(write_file_atomic(dir / "missing" / "x.csv", "x"), Error);
    fs::remove_all(dir);
}
