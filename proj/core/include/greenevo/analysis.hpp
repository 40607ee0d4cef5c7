#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "greenevo/results.hpp"

namespace greenevo {

struct SampleGroup {
    std::string label;
    std::vector<double> values;
};

enum class TestMethod { exact, approximate };

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    TestMethod method = TestMethod::approximate;
    bool degenerate = false; ///< no variation in the data; p is 1 by convention
};

std::string_view to_string(TestMethod method) noexcept;

/// 1-based ranks with ties sharing the mean of their positions.
std::vector<double> midranks(std::span<const double> values);

/// H with tie correction; p from the chi-square tail with k - 1 degrees of freedom.
TestResult kruskal_wallis(std::span<const SampleGroup> groups);

enum class MannWhitneyMode { exact, approximate, automatic };
enum class Tail { two_sided, less, greater };

inline constexpr std::size_t kExactEnumerationCap = 200000;

/// statistic = U of `a`, i.e. rank sum of `a` minus n_a (n_a + 1) / 2, using
/// midranks. Exact mode counts all C(n_a + n_b, n_a) assignments of the pooled
/// ranks to `a` and throws StatsError past kExactEnumerationCap. Approximate
/// mode is the normal approximation with tie-corrected variance and continuity
/// correction. `less` means `a` tends to be smaller than `b`. Two-sided p is
/// twice the smaller tail, capped at 1. Automatic picks exact under the cap.
TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                          MannWhitneyMode mode = MannWhitneyMode::automatic,
                          Tail alternative = Tail::two_sided);
TestResult mann_whitney_u(const SampleGroup& a, const SampleGroup& b, MannWhitneyMode mode = MannWhitneyMode::automatic,
                          Tail alternative = Tail::two_sided);

/// min(1, p * m) for each p, order preserved.
std::vector<double> bonferroni(std::span<const double> p_values, std::size_t m);

struct SummaryRow {
    std::string label;
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0; ///< sample standard deviation (n - 1); 0 for a single value
    double median = 0.0;
    std::optional<double> diff_to_baseline; ///< median - baseline median; empty on the baseline row
};

std::vector<SummaryRow> summarize(std::span<const SampleGroup> groups, std::size_t baseline_index = 0);

// Experiment comparison over generations.csv rows.

enum class Pooling {
    all_generations, ///< best individual of every generation of every run
    final_generation ///< best individual of the last generation of each run
};

struct PairwiseMatrix {
    std::string metric;
    std::vector<std::string> labels;
    /// p[i][j], Bonferroni-adjusted two-sided Mann-Whitney p for i > j; empty otherwise.
    std::vector<std::vector<std::optional<double>>> p;
};

struct KruskalRow {
    std::string metric;
    TestResult result;
    std::size_t groups = 0;
};

struct MbfRow {
    int generation = 0;
    double baseline_fitness = 0.0;
    double proposed_fitness = 0.0;
    double baseline_accuracy = 0.0;
    double proposed_acc_left = 0.0;
    double proposed_acc_right = 0.0;
    double baseline_power = 0.0;
    double proposed_power_left = 0.0;
    double proposed_power_right = 0.0;
};

struct AnalysisReport {
    std::vector<SummaryRow> accuracy;
    std::vector<SummaryRow> power;
    PairwiseMatrix accuracy_pairwise;
    PairwiseMatrix power_pairwise;
    std::vector<KruskalRow> kruskal;
    std::vector<MbfRow> mbf; ///< mean over runs of each run's best, per generation common to both
};

/// Groups: Baseline Accuracy / Power (left partition, main head) against
/// Proposed Accuracy_left, Accuracy_right, Power_left, Power_right.
/// Throws StatsError when either side has no rows.
AnalysisReport analyze_experiments(const std::vector<GenerationRow>& baseline, const std::vector<GenerationRow>& proposed,
                                   Pooling pooling = Pooling::all_generations);

/// summary.csv, accuracy_pairwise.csv, power_pairwise.csv, kruskal.csv, mbf.csv.
void write_analysis(const AnalysisReport& report, const std::string& directory);

} // namespace greenevo
