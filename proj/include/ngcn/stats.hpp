#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ngcn/metrics.hpp"
#include "ngcn/trainer.hpp"

namespace ngcn {

struct ComparisonCell {
  double mean = 0.0;
  double stdev = 0.0;
};

/// Rectangular table of (case row) x (model column) accuracy cells,
/// lower-is-better.
struct ComparisonTable {
  std::vector<std::string> models;                 // column names
  std::vector<std::string> cases;                  // row labels, e.g. "D1/RMSE"
  std::vector<std::vector<ComparisonCell>> cells;  // [row][column]

  std::string to_csv() const;  // means only, consumable by the stats command
  /// mean +/- std per cell; cells beating the reference column are marked.
  std::string to_text(std::size_t reference_column) const;
};

/// Parses a cells CSV (header "case,<model>,...", one numeric row per case).
ComparisonTable read_cells_csv(std::istream& in);

struct FriedmanResult {
  std::vector<double> mean_ranks;  // one per model, 1 = best
  double chi_square = 0.0;
};

/// Ranks models within each row (ties get the average rank) and averages the
/// ranks over rows; lower cell values are better.
FriedmanResult friedman_mean_ranks(const std::vector<std::vector<double>>& rows);
FriedmanResult friedman_mean_ranks(const ComparisonTable& table);

struct WilcoxonResult {
  double r_plus = 0.0;
  double r_minus = 0.0;
  double p_one_sided = 0.0;  // P(T >= R+) under the exact null
  std::size_t n = 0;         // differences after zero removal
};

/// Exact one-sided Wilcoxon signed-rank test over the 2^n sign assignments.
/// Zero differences are dropped before ranking; ties share average ranks.
/// Supports n <= 25.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> diffs);

struct CrossValResult {
  std::string model;
  std::vector<MetricPair> per_rep;  // test metrics of successful repetitions
  std::vector<RunReport> reports;
  std::vector<std::string> failures;
  double rmse_mean = 0.0, rmse_std = 0.0;
  double mae_mean = 0.0, mae_std = 0.0;
};

/// Runs `run_one` with seeds base_seed + 0 .. base_seed + n_reps - 1,
/// aggregating test RMSE/MAE (mean and sample std). Per-repetition failures
/// are recorded; at least one repetition must succeed.
CrossValResult cross_validate_with(const std::function<RunReport(std::uint64_t)>& run_one,
                                   std::size_t n_reps, std::uint64_t base_seed,
                                   std::string model_name);

/// Five (by default) independent repetitions: fresh seeded split + training
/// per repetition.
CrossValResult cross_validate(const UndirectedWeightedGraph& g, ModelKind kind,
                              const TrainConfig& config, std::size_t n_reps = 5);

/// Assembles the two metric rows (RMSE, MAE) of one dataset from
/// cross-validation columns.
ComparisonTable make_comparison_table(const std::string& dataset,
                                      const std::vector<CrossValResult>& columns);

}  // namespace ngcn
