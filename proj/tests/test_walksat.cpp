#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "restartbandit/satlab.hpp"

using namespace restartbandit;

namespace {

std::vector<CnfFormula> bundled() {
    namespace fs = std::filesystem;
    std::vector<fs::path> paths;
    for (const auto& e : fs::directory_iterator(fs::path(RB_DATA_DIR) / "uf20")) paths.push_back(e.path());
    std::sort(paths.begin(), paths.end());
    std::vector<CnfFormula> out;
    for (const auto& p : paths) {
        std::ifstream in(p);
        out.push_back(parse_dimacs(in));
    }
    return out;
}

CnfFormula contradiction() { return parse_dimacs("p cnf 1 2\n1 0\n-1 0\n"); }

} // namespace

TEST(WalkSat, EmptyFormulaSolvesWithoutFlips) {
    CnfFormula f;
    f.num_vars = 3;
    RandomStream rng(1);
    const auto a = walksat(f, 0.5, 100, rng);
    EXPECT_TRUE(a.solved);
    EXPECT_EQ(a.flips, 0u);
}

TEST(WalkSat, UnitClauseNeedsAtMostOneFlip) {
    const auto f = parse_dimacs("p cnf 1 1\n1 0\n");
    RandomStream rng(2);
    WalkSatOptions opt;
    opt.initial = std::vector<bool>{false, false};
    const auto a = walksat(f, 0.5, 100, rng, opt);
    EXPECT_TRUE(a.solved);
    EXPECT_EQ(a.flips, 1u);
    EXPECT_TRUE((*a.assignment)[1]);
    for (int i = 0; i < 20; ++i) EXPECT_LE(walksat(f, 0.5, 100, rng).flips, 1u);
}

TEST(WalkSat, CountsEveryFlip) {
    const auto fs = bundled();
    RandomStream rng(3);
    std::uint64_t seen = 0;
    WalkSatOptions opt;
    opt.on_flip = [&](int) { ++seen; };
    const auto a = walksat(fs[0], 0.5, 1000000, rng, opt);
    EXPECT_TRUE(a.solved);
    EXPECT_EQ(seen, a.flips);
}

TEST(WalkSat, CapOnUnsatisfiable) {
    RandomStream rng(4);
    const auto a = walksat(contradiction(), 0.5, 37, rng);
    EXPECT_FALSE(a.solved);
    EXPECT_EQ(a.flips, 37u);
    EXPECT_FALSE(a.assignment.has_value());
}

TEST(WalkSat, BreakCounts) {
    const auto f = parse_dimacs("p cnf 3 3\n1 2 0\n1 -3 0\n-1 3 0\n");
    WalkSatState s(f);
    s.reset({false, false, true, false});
    // x1 false: clause 1 has one true literal (x2), clause 2 one (-3), clause 3 one (-1).
    EXPECT_EQ(s.break_count(1), 1);
    EXPECT_EQ(s.break_count(2), 1);
    EXPECT_EQ(s.break_count(3), 1);
    EXPECT_TRUE(s.solved());
    s.flip(2);
    EXPECT_EQ(s.unsatisfied().size(), 1u);
    s.flip(2);
    EXPECT_TRUE(s.solved());
    s.flip(1);
    EXPECT_EQ(s.unsatisfied().size(), 1u);
}

TEST(WalkSat, DeterministicPerSeed) {
    const auto fs = bundled();
    RandomStream a(9), b(9);
    EXPECT_EQ(walksat(fs[1], 0.5, 1000000, a).flips, walksat(fs[1], 0.5, 1000000, b).flips);
}

TEST(BundledData, AllInstancesSatisfiable) {
    const auto fs = bundled();
    ASSERT_EQ(fs.size(), 20u);
    RandomStream rng(5);
    for (const auto& f : fs) {
        const auto a = walksat(f, 0.5, 1000000, rng);
        ASSERT_TRUE(a.solved);
        EXPECT_TRUE(f.satisfied_by(*a.assignment));
    }
}

TEST(Collect, FlipCountsAreRightSkewed) {
    const auto fs = bundled();
    RandomStream rng(6);
    const auto s = collect_completion_samples(fs, 0.5, 1000000, 20, rng);
    EXPECT_EQ(s.flips.size(), 400u);
    EXPECT_EQ(s.censored, 0u);
    const double med = sample_median(s.flips);
    double mean = 0.0;
    for (double x : s.flips) mean += x / s.flips.size();
    EXPECT_GT(mean, med);
    EXPECT_GT(*std::max_element(s.flips.begin(), s.flips.end()), 5.0 * med);
}

TEST(Collect, CensoredRunsAreRetried) {
    const std::vector<CnfFormula> fs = {contradiction()};
    RandomStream rng(7);
    try {
        collect_completion_samples(fs, 0.5, 10, 2, rng, 3);
        FAIL() << "expected EmptyDistributionError";
    } catch (const EmptyDistributionError& e) {
        EXPECT_NE(std::string(e.what()).find("all 8 runs"), std::string::npos) << e.what();
    }
    CnfFormula trivial;
    trivial.num_vars = 3;
    const std::vector<CnfFormula> mixed = {contradiction(), trivial};
    const auto s = collect_completion_samples(mixed, 0.5, 10, 2, rng, 3);
    EXPECT_EQ(s.flips.size(), 2u);
    EXPECT_EQ(s.censored, 8u);
}

TEST(SatArm, ClampsZeroFlips) {
    const std::vector<double> flips = {0.0, 4.0, 4.0};
    const auto arm = sat_arm(flips);
    EXPECT_NEAR(arm.completion.mean(), 3.0, 1e-12);
    EXPECT_EQ(sample_median(std::vector<double>{1, 2, 3, 4}), 2.0);
    EXPECT_THROW(sample_median(std::vector<double>{}), InvalidArgument);
}

TEST(SatGrid, Values) {
    const auto g = sat_grid(100.0, 8);
    ASSERT_EQ(g.size(), 9u);
    EXPECT_NEAR(g.cutoffs().front().value(), 100.0 / std::sqrt(10.0), 1e-9);
    EXPECT_NEAR(g.cutoffs().back().value(), 100.0 * std::sqrt(10.0), 1e-9);
    EXPECT_EQ(preset_grid(SatPreset::backbone, 1.0).size(), 13u);
    EXPECT_THROW(sat_grid(0.0, 3), InvalidArgument);
}

TEST(MetaRun, ZeroBudgetSolvesNothing) {
    const std::vector<double> flips = {3.0};
    FixedPolicy p(0, Cutoff::never());
    MetaExperimentConfig c;
    c.budget = 0.0;
    EXPECT_EQ(meta_run(sat_arm(flips), p, c).solved, 0u);
    c.budget = -1.0;
    EXPECT_THROW(meta_run(sat_arm(flips), p, c), InvalidArgument);
}

TEST(MetaRun, CountsCompletedEpochs) {
    const std::vector<double> flips = {4.0};
    FixedPolicy p(0, Cutoff::never());
    MetaExperimentConfig c;
    c.budget = 10.0;
    // Completions at 4, 8 and 12; the last one crosses the budget.
    EXPECT_EQ(meta_run(sat_arm(flips), p, c).solved, 3u);
    FixedPolicy short_cut(0, Cutoff::at(2.0));
    EXPECT_EQ(meta_run(sat_arm(flips), short_cut, c).solved, 0u);
}
