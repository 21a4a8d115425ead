#include "ngcn/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <sstream>

#include "ngcn/errors.hpp"
#include "ngcn/text.hpp"

namespace ngcn {

namespace {

std::string fmt(double x, const char* spec) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), spec, x);
  return buf;
}

/// Average ranks (1-based) of values sorted ascending; exactly equal values
/// share the average of the positions they occupy.
std::vector<double> average_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t at = 0;
  while (at < n) {
    std::size_t end = at + 1;
    while (end < n && values[order[end]] == values[order[at]]) ++end;
    // positions at+1 .. end (1-based); average = (first + last) / 2
    const double rank = (static_cast<double>(at + 1) + static_cast<double>(end)) / 2.0;
    for (std::size_t k = at; k < end; ++k) ranks[order[k]] = rank;
    at = end;
  }
  return ranks;
}

double mean_of(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double mu = mean_of(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - mu) * (x - mu);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

}  // namespace

std::string ComparisonTable::to_csv() const {
  std::string out = "case";
  for (const std::string& m : models) out += "," + m;
  out += "\n";
  for (std::size_t r = 0; r < cases.size(); ++r) {
    out += cases[r];
    for (const ComparisonCell& c : cells[r]) out += "," + fmt_double(c.mean);
    out += "\n";
  }
  return out;
}

std::string ComparisonTable::to_text(std::size_t reference_column) const {
  if (reference_column >= models.size()) throw DataError("reference column out of range");
  std::ostringstream out;
  out << "case";
  for (const std::string& m : models) out << "\t" << m;
  out << "\n";
  for (std::size_t r = 0; r < cases.size(); ++r) {
    out << cases[r];
    for (std::size_t c = 0; c < models.size(); ++c) {
      const ComparisonCell& cell = cells[r][c];
      out << "\t";
      if (c != reference_column && cell.mean < cells[r][reference_column].mean) out << "♣ ";
      out << fmt(cell.mean, "%.5f") << " ±" << fmt(cell.stdev, "%.1e");
    }
    out << "\n";
  }
  return out.str();
}

ComparisonTable read_cells_csv(std::istream& in) {
  ComparisonTable table;
  std::string line;
  if (!std::getline(in, line)) throw DataError("cells csv: empty input");
  {
    std::stringstream ss(line);
    std::string tok;
    bool first = true;
    while (std::getline(ss, tok, ',')) {
      if (first) {
        first = false;
        continue;
      }
      table.models.push_back(tok);
    }
  }
  if (table.models.empty()) throw DataError("cells csv: header has no model columns");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    if (!std::getline(ss, tok, ',')) continue;
    table.cases.push_back(tok);
    std::vector<ComparisonCell> row;
    while (std::getline(ss, tok, ',')) {
      try {
        row.push_back({std::stod(tok), 0.0});
      } catch (const std::exception&) {
        throw DataError("cells csv: non-numeric cell '" + tok + "'");
      }
    }
    if (row.size() != table.models.size())
      throw DataError("cells csv: row '" + table.cases.back() + "' has " +
                      std::to_string(row.size()) + " cells, expected " +
                      std::to_string(table.models.size()));
    table.cells.push_back(std::move(row));
  }
  if (table.cases.empty()) throw DataError("cells csv: no rows");
  return table;
}

FriedmanResult friedman_mean_ranks(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw DataError("friedman: no rows");
  const std::size_t k = rows.front().size();
  if (k < 2) throw DataError("friedman: need at least two models");
  for (const auto& row : rows)
    if (row.size() != k) throw DataError("friedman: incomplete table");

  FriedmanResult result;
  result.mean_ranks.assign(k, 0.0);
  for (const auto& row : rows) {
    const std::vector<double> ranks = average_ranks(row);
    for (std::size_t c = 0; c < k; ++c) result.mean_ranks[c] += ranks[c];
  }
  const double n = static_cast<double>(rows.size());
  for (double& r : result.mean_ranks) r /= n;

  double sum_sq = 0.0;
  for (double r : result.mean_ranks) sum_sq += r * r;
  const double kk = static_cast<double>(k);
  result.chi_square = 12.0 * n / (kk * (kk + 1.0)) * (sum_sq - kk * (kk + 1.0) * (kk + 1.0) / 4.0);
  return result;
}

FriedmanResult friedman_mean_ranks(const ComparisonTable& table) {
  std::vector<std::vector<double>> rows;
  rows.reserve(table.cells.size());
  for (const auto& row : table.cells) {
    std::vector<double> means;
    means.reserve(row.size());
    for (const ComparisonCell& c : row) means.push_back(c.mean);
    rows.push_back(std::move(means));
  }
  return friedman_mean_ranks(rows);
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> diffs) {
  std::vector<double> nonzero;
  nonzero.reserve(diffs.size());
  for (double d : diffs)
    if (d != 0.0) nonzero.push_back(d);
  if (nonzero.empty()) throw DataError("wilcoxon: all differences are zero");
  const std::size_t n = nonzero.size();
  if (n > 25) throw DataError("wilcoxon: exact null distribution supported up to n = 25");

  std::vector<double> magnitudes(n);
  for (std::size_t k = 0; k < n; ++k) magnitudes[k] = std::abs(nonzero[k]);
  const std::vector<double> ranks = average_ranks(magnitudes);

  // Doubled ranks are integers even with average-rank ties.
  std::vector<long> doubled(n);
  long total2 = 0;
  for (std::size_t k = 0; k < n; ++k) {
    doubled[k] = std::lround(2.0 * ranks[k]);
    total2 += doubled[k];
  }

  WilcoxonResult result;
  result.n = n;
  long r_plus2 = 0;
  for (std::size_t k = 0; k < n; ++k)
    if (nonzero[k] > 0.0) r_plus2 += doubled[k];
  result.r_plus = static_cast<double>(r_plus2) / 2.0;
  result.r_minus = static_cast<double>(total2 - r_plus2) / 2.0;

  // Exact distribution of the doubled positive-rank sum under random signs.
  std::vector<std::uint64_t> ways(static_cast<std::size_t>(total2) + 1, 0);
  ways[0] = 1;
  for (long r2 : doubled)
    for (long t = total2; t >= r2; --t) ways[t] += ways[t - r2];

  std::uint64_t at_least = 0;
  for (long t = r_plus2; t <= total2; ++t) at_least += ways[t];
  result.p_one_sided =
      static_cast<double>(at_least) / std::pow(2.0, static_cast<double>(n));
  return result;
}

CrossValResult cross_validate_with(const std::function<RunReport(std::uint64_t)>& run_one,
                                   std::size_t n_reps, std::uint64_t base_seed,
                                   std::string model_name) {
  if (n_reps == 0) throw ConfigError("cross_validate: n_reps must be >= 1");
  CrossValResult result;
  result.model = std::move(model_name);
  for (std::size_t rep = 0; rep < n_reps; ++rep) {
    try {
      RunReport report = run_one(base_seed + rep);
      result.per_rep.push_back({report.test_rmse, report.test_mae, report.test_edge_count});
      result.reports.push_back(std::move(report));
    } catch (const Error& err) {
      result.failures.push_back("rep " + std::to_string(rep) + ": " + err.what());
    }
  }
  if (result.per_rep.empty())
    throw TrainError("cross_validate: every repetition failed; first failure: " +
                     result.failures.front());

  std::vector<double> rmses, maes;
  for (const MetricPair& m : result.per_rep) {
    rmses.push_back(m.rmse);
    maes.push_back(m.mae);
  }
  result.rmse_mean = mean_of(rmses);
  result.rmse_std = sample_std(rmses);
  result.mae_mean = mean_of(maes);
  result.mae_std = sample_std(maes);
  return result;
}

CrossValResult cross_validate(const UndirectedWeightedGraph& g, ModelKind kind,
                              const TrainConfig& config, std::size_t n_reps) {
  auto run_one = [&](std::uint64_t seed) {
    TrainConfig cfg = config;
    cfg.model_kind = kind;
    cfg.seed = seed;
    const EdgeSplit split = split_edges(g, seed);
    return train(g, split, cfg).report;
  };
  return cross_validate_with(run_one, n_reps, config.seed, to_string(kind));
}

ComparisonTable make_comparison_table(const std::string& dataset,
                                      const std::vector<CrossValResult>& columns) {
  if (columns.empty()) throw DataError("comparison table: no columns");
  ComparisonTable table;
  table.cases = {dataset + "/RMSE", dataset + "/MAE"};
  table.cells.resize(2);
  for (const CrossValResult& col : columns) {
    table.models.push_back(col.model);
    table.cells[0].push_back({col.rmse_mean, col.rmse_std});
    table.cells[1].push_back({col.mae_mean, col.mae_std});
  }
  return table;
}

}  // namespace ngcn
