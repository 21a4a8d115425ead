// Command-line front end: ingestion, training, evaluation, and model
// comparison statistics for missing-weight estimation on undirected
// weighted graphs.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ngcn/checkpoint.hpp"
#include "ngcn/errors.hpp"
#include "ngcn/graph.hpp"
#include "ngcn/run_config.hpp"
#include "ngcn/stats.hpp"
#include "ngcn/text.hpp"
#include "ngcn/trainer.hpp"
#include "ngcn/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitTraining = 3;

struct CommonFlags {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out_dir;
  std::int64_t seed = -1;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "configuration file (key = value lines)");
  cmd->add_option("--set", flags.sets, "override a config key, e.g. --set eta=0.005");
  cmd->add_option("--out", flags.out_dir, "output directory for run artifacts");
  cmd->add_option("--seed", flags.seed, "override the seed");
}

ngcn::RunConfig resolve_config(const CommonFlags& flags) {
  ngcn::RunConfig cfg;
  if (!flags.config_path.empty()) cfg = ngcn::RunConfig::from_file(flags.config_path);
  cfg.apply_set_flags(flags.sets);
  if (flags.seed >= 0) cfg.seed = static_cast<std::uint64_t>(flags.seed);
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  return cfg;
}

ngcn::UndirectedWeightedGraph load_dataset(const ngcn::RunConfig& cfg) {
  if (cfg.dataset.empty()) throw ngcn::ConfigError("config key 'dataset' is required");
  ngcn::UndirectedWeightedGraph g;
  if (cfg.dataset.size() >= 4 && cfg.dataset.substr(cfg.dataset.size() - 4) == ".mtx") {
    ngcn::ParseResult parsed = ngcn::parse_matrix_market_file(cfg.dataset);
    if (parsed.dropped_self_loops > 0)
      std::cerr << "warning: dropped " << parsed.dropped_self_loops << " self-loop entries\n";
    g = std::move(parsed.graph);
  } else {
    std::ifstream in(cfg.dataset);
    if (!in) throw ngcn::DataError("cannot open dataset '" + cfg.dataset + "'");
    g = ngcn::read_edge_list_graph(in);
  }
  if (cfg.normalize) g = ngcn::normalize_weights(g);
  return g;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ngcn::DataError("cannot write '" + path.string() + "'");
  out << content;
}

/// The manifest is written last; its presence marks a completed run.
void write_manifest(const fs::path& dir, const std::string& command,
                    const ngcn::RunConfig& cfg, double elapsed_seconds) {
  json j;
  j["command"] = command;
  j["tool_version"] = ngcn::kVersion;
  j["dataset"] = cfg.dataset;
  j["out_dir"] = cfg.out_dir;
  j["elapsed_seconds"] = elapsed_seconds;
  {
    json c;
    std::istringstream echo(cfg.to_key_values());
    std::string line;
    while (std::getline(echo, line)) {
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(0, eq - 1);
      c[key] = line.substr(eq + 2);
    }
    j["config"] = std::move(c);
  }
  write_file(dir / "manifest.json", j.dump(2) + "\n");
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

fs::path prepare_out_dir(const ngcn::RunConfig& cfg) {
  fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  write_file(dir / "resolved_config.txt", cfg.to_key_values());
  return dir;
}

std::string metrics_csv(const ngcn::MetricPair& m,
                        const std::optional<ngcn::WeightScale>& scale) {
  std::string out = "metric,value\n";
  out += "rmse," + ngcn::fmt_double(m.rmse) + "\n";
  out += "mae," + ngcn::fmt_double(m.mae) + "\n";
  out += "n," + std::to_string(m.n) + "\n";
  if (scale.has_value()) {
    const double span = scale->max - scale->min;
    out += "rmse_original_units," + ngcn::fmt_double(m.rmse * span) + "\n";
    out += "mae_original_units," + ngcn::fmt_double(m.mae * span) + "\n";
  }
  return out;
}

int run_quoted(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  out += "'";
  return out;
}

// ----------------------------------------------------------------------------
// subcommands

int cmd_fetch(const std::string& group, const std::string& name, const std::string& dest) {
  fs::create_directories(dest);
  const fs::path target = fs::path(dest) / (name + ".mtx");
  if (fs::exists(target)) {
    ngcn::ParseResult parsed = ngcn::parse_matrix_market_file(target.string());
    std::cout << "already present: " << target.string() << " (" << parsed.graph.n_nodes
              << " nodes, " << parsed.graph.edges.size() << " edges)\n";
    return 0;
  }

  const std::string url =
      "https://suitesparse-collection-website.herokuapp.com/MM/" + group + "/" + name + ".tar.gz";
  const fs::path archive = fs::path(dest) / (name + ".tar.gz");
  std::cout << "fetching " << url << "\n";
  const std::string curl = "curl -fsSL --retry 2 -o " + shell_quote(archive.string()) + " " +
                           shell_quote(url);
  if (run_quoted(curl) != 0)
    throw ngcn::DataError("download failed for dataset " + group + "/" + name +
                          " (network unreachable or unknown dataset)");
  const std::string tar = "tar -xzf " + shell_quote(archive.string()) + " -C " +
                          shell_quote(dest) + " --strip-components=1 " +
                          shell_quote(name + "/" + name + ".mtx");
  if (run_quoted(tar) != 0)
    throw ngcn::DataError("could not unpack archive for dataset " + group + "/" + name);
  fs::remove(archive);

  ngcn::ParseResult parsed = ngcn::parse_matrix_market_file(target.string());
  std::cout << "fetched " << target.string() << " (" << parsed.graph.n_nodes << " nodes, "
            << parsed.graph.edges.size() << " edges)\n";
  return 0;
}

int cmd_split(const CommonFlags& flags) {
  Timer timer;
  const ngcn::RunConfig cfg = resolve_config(flags);
  const ngcn::UndirectedWeightedGraph g = load_dataset(cfg);
  const ngcn::EdgeSplit split = ngcn::split_edges(g, cfg.seed);

  const fs::path dir = prepare_out_dir(cfg);
  const fs::path split_dir = dir / "split";
  fs::create_directories(split_dir);
  for (const auto& [name, edges] :
       {std::pair{"train", &split.train}, {"validation", &split.validation},
        {"test", &split.test}}) {
    std::ofstream out(split_dir / (std::string(name) + ".txt"));
    ngcn::write_edge_list(out, *edges);
  }
  write_file(split_dir / "split.json", ngcn::split_manifest_json(split));
  std::cout << "split: " << split.train.size() << " train, " << split.validation.size()
            << " validation, " << split.test.size() << " test\n";
  write_manifest(dir, "split", cfg, timer.seconds());
  return 0;
}

int cmd_train(const CommonFlags& flags) {
  Timer timer;
  const ngcn::RunConfig cfg = resolve_config(flags);
  const ngcn::UndirectedWeightedGraph g = load_dataset(cfg);
  const ngcn::EdgeSplit split = ngcn::split_edges(g, cfg.seed);

  const fs::path dir = prepare_out_dir(cfg);
  ngcn::TrainResult result = ngcn::train(g, split, cfg.to_train_config());

  ngcn::save_checkpoint((dir / "checkpoint.bin").string(), result.params);
  write_file(dir / "report.json", result.report.to_json());
  write_file(dir / "curves.csv", result.report.curves_csv());
  write_file(dir / "metrics.csv",
             metrics_csv({result.report.test_rmse, result.report.test_mae,
                          result.report.test_edge_count},
                         g.weight_scale));
  std::cout << "trained " << ngcn::to_string(cfg.model) << ": best epoch "
            << result.report.best_epoch << ", validation rmse " << result.report.best_val_rmse
            << ", test rmse " << result.report.test_rmse << ", test mae "
            << result.report.test_mae << "\n";
  write_manifest(dir, "train", cfg, timer.seconds());
  return 0;
}

int cmd_evaluate(const CommonFlags& flags, const std::string& checkpoint_path) {
  Timer timer;
  const ngcn::RunConfig cfg = resolve_config(flags);
  const ngcn::UndirectedWeightedGraph g = load_dataset(cfg);
  const ngcn::EdgeSplit split = ngcn::split_edges(g, cfg.seed);

  const ngcn::ModelParams params = ngcn::load_checkpoint(checkpoint_path);
  const ngcn::EdgePredictor predictor(params, g, split.train);
  std::vector<double> truth;
  truth.reserve(split.test.size());
  for (const ngcn::Edge& e : split.test) truth.push_back(e.w);
  const ngcn::MetricPair m = ngcn::rmse_mae(truth, predictor.predict(split.test));

  const fs::path dir = prepare_out_dir(cfg);
  write_file(dir / "metrics.csv", metrics_csv(m, g.weight_scale));
  std::cout << "test rmse " << m.rmse << ", test mae " << m.mae << " over " << m.n << " edges\n";
  write_manifest(dir, "evaluate", cfg, timer.seconds());
  return 0;
}

std::vector<double> parse_grid(const std::string& csv, const std::string& what) {
  if (csv.empty()) return {};
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ngcn::ConfigError("--" + what + ": bad number '" + tok + "'");
    }
  }
  return out;
}

int cmd_gridsearch(const CommonFlags& flags, const std::string& etas_csv,
                   const std::string& lambdas_csv, std::size_t jobs) {
  Timer timer;
  const ngcn::RunConfig cfg = resolve_config(flags);
  const ngcn::UndirectedWeightedGraph g = load_dataset(cfg);
  const ngcn::EdgeSplit split = ngcn::split_edges(g, cfg.seed);

  std::vector<double> etas = parse_grid(etas_csv, "etas");
  std::vector<double> lambdas = parse_grid(lambdas_csv, "lambdas");
  if (etas.empty()) etas = ngcn::default_eta_grid();
  if (lambdas.empty()) lambdas = ngcn::default_lambda_grid();

  const fs::path dir = prepare_out_dir(cfg);
  const ngcn::GridSearchResult result =
      ngcn::grid_search(g, split, cfg.to_train_config(), etas, lambdas, jobs);

  std::string csv = "eta,lambda,status,val_rmse,test_rmse,test_mae,best_epoch\n";
  for (const ngcn::GridCell& cell : result.cells) {
    csv += ngcn::fmt_double(cell.eta) + "," + ngcn::fmt_double(cell.lambda);
    if (cell.ok)
      csv += ",ok," + ngcn::fmt_double(cell.report.best_val_rmse) + "," +
             ngcn::fmt_double(cell.report.test_rmse) + "," +
             ngcn::fmt_double(cell.report.test_mae) + "," +
             std::to_string(cell.report.best_epoch) + "\n";
    else
      csv += ",failed,,,,\n";
  }
  write_file(dir / "grid.csv", csv);

  ngcn::RunConfig best_cfg = cfg;
  best_cfg.eta = result.best.eta;
  best_cfg.lambda = result.best.lambda;
  write_file(dir / "best_config.txt", best_cfg.to_key_values());
  std::cout << "grid search: " << result.cells.size() << " cells, best eta " << result.best.eta
            << ", best lambda " << result.best.lambda << "\n";
  write_manifest(dir, "gridsearch", cfg, timer.seconds());
  return 0;
}

int cmd_compare(const CommonFlags& flags, const std::string& models_csv, std::size_t reps) {
  Timer timer;
  const ngcn::RunConfig cfg = resolve_config(flags);
  const ngcn::UndirectedWeightedGraph g = load_dataset(cfg);

  std::vector<ngcn::ModelKind> kinds;
  {
    std::stringstream ss(models_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) kinds.push_back(ngcn::model_kind_from_string(tok));
  }
  if (kinds.empty()) throw ngcn::ConfigError("--models: need at least one model");

  const fs::path dir = prepare_out_dir(cfg);
  const fs::path report_dir = dir / "reports";
  fs::create_directories(report_dir);

  std::vector<ngcn::CrossValResult> columns;
  std::size_t reference = 0;
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    ngcn::CrossValResult col = ngcn::cross_validate(g, kinds[k], cfg.to_train_config(), reps);
    for (std::size_t rep = 0; rep < col.reports.size(); ++rep)
      write_file(report_dir / (col.model + "_rep" + std::to_string(rep) + ".json"),
                 col.reports[rep].to_json());
    for (const std::string& failure : col.failures)
      std::cerr << "warning: " << col.model << " " << failure << "\n";
    if (kinds[k] == ngcn::ModelKind::ngcn) reference = k;
    columns.push_back(std::move(col));
  }

  const std::string dataset_label = fs::path(cfg.dataset).stem().string();
  const ngcn::ComparisonTable table = ngcn::make_comparison_table(dataset_label, columns);
  write_file(dir / "comparison_cells.csv", table.to_csv());
  write_file(dir / "comparison.txt", table.to_text(reference));
  std::cout << table.to_text(reference);
  write_manifest(dir, "compare", cfg, timer.seconds());
  return 0;
}

int cmd_stats(const CommonFlags& flags, const std::string& cells_path, std::string target) {
  Timer timer;
  ngcn::RunConfig cfg = resolve_config(flags);

  std::ifstream in(cells_path);
  if (!in) throw ngcn::DataError("cannot open cells csv '" + cells_path + "'");
  const ngcn::ComparisonTable table = ngcn::read_cells_csv(in);

  if (target.empty()) target = table.models.back();
  std::size_t target_col = table.models.size();
  for (std::size_t c = 0; c < table.models.size(); ++c)
    if (table.models[c] == target) target_col = c;
  if (target_col == table.models.size())
    throw ngcn::ConfigError("--target '" + target + "' is not a column of the table");

  const ngcn::FriedmanResult friedman = ngcn::friedman_mean_ranks(table);

  std::ostringstream text;
  json j;
  text << "friedman mean ranks (lower is better):\n";
  char buf[160];
  for (std::size_t c = 0; c < table.models.size(); ++c) {
    std::snprintf(buf, sizeof(buf), "  %-8s %.6g\n", table.models[c].c_str(),
                  friedman.mean_ranks[c]);
    text << buf;
    j["friedman"]["mean_ranks"][table.models[c]] = friedman.mean_ranks[c];
  }
  std::snprintf(buf, sizeof(buf), "friedman chi-square: %.6g\n", friedman.chi_square);
  text << buf;
  j["friedman"]["chi_square"] = friedman.chi_square;

  text << "wilcoxon signed-rank (one-sided, vs " << target << "):\n";
  for (std::size_t c = 0; c < table.models.size(); ++c) {
    if (c == target_col) continue;
    std::vector<double> diffs;
    for (std::size_t r = 0; r < table.cases.size(); ++r)
      diffs.push_back(table.cells[r][c].mean - table.cells[r][target_col].mean);
    const ngcn::WilcoxonResult w = ngcn::wilcoxon_signed_rank(diffs);
    std::snprintf(buf, sizeof(buf), "  %s vs %s: R+=%.6g R-=%.6g p=%s\n", target.c_str(),
                  table.models[c].c_str(), w.r_plus, w.r_minus,
                  ngcn::format_p(w.p_one_sided).c_str());
    text << buf;
    j["wilcoxon"][target + " vs " + table.models[c]] = {
        {"r_plus", w.r_plus}, {"r_minus", w.r_minus}, {"p_one_sided", w.p_one_sided}};
  }

  const fs::path dir = prepare_out_dir(cfg);
  write_file(dir / "stats.txt", text.str());
  write_file(dir / "stats.json", j.dump(2) + "\n");
  std::cout << text.str();
  write_manifest(dir, "stats", cfg, timer.seconds());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"missing-weight estimation on undirected weighted graphs"};
  app.require_subcommand(1);

  CommonFlags flags;

  auto* fetch = app.add_subcommand("fetch", "download a sparse-matrix-collection dataset");
  std::string fetch_group, fetch_name, fetch_dest = "data";
  fetch->add_option("--group", fetch_group, "collection group, e.g. ML_Graph")->required();
  fetch->add_option("--name", fetch_name, "matrix name, e.g. plantsmargin_12NN")->required();
  fetch->add_option("--dest", fetch_dest, "destination directory");

  auto* split = app.add_subcommand("split", "write train/validation/test edge lists");
  add_common_flags(split, flags);

  auto* train = app.add_subcommand("train", "train one model and write its checkpoint");
  add_common_flags(train, flags);

  auto* evaluate = app.add_subcommand("evaluate", "test metrics for a checkpoint");
  add_common_flags(evaluate, flags);
  std::string checkpoint_path;
  evaluate->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();

  auto* gridsearch = app.add_subcommand("gridsearch", "train every (eta, lambda) grid cell");
  add_common_flags(gridsearch, flags);
  std::string etas_csv, lambdas_csv;
  std::size_t jobs = 1;
  gridsearch->add_option("--etas", etas_csv, "comma-separated learning rates");
  gridsearch->add_option("--lambdas", lambdas_csv, "comma-separated regularization weights");
  gridsearch->add_option("--jobs", jobs, "concurrent grid cells");

  auto* compare = app.add_subcommand("compare", "cross-validate several models side by side");
  add_common_flags(compare, flags);
  std::string models_csv = "ngcn,mf,gcn";
  std::size_t reps = 5;
  compare->add_option("--models", models_csv, "comma-separated model kinds");
  compare->add_option("--reps", reps, "repetitions per model");

  auto* stats = app.add_subcommand("stats", "friedman + wilcoxon analysis of a cells csv");
  add_common_flags(stats, flags);
  std::string cells_path, target;
  stats->add_option("--cells", cells_path, "comparison cells csv")->required();
  stats->add_option("--target", target, "column tested against the rest (default: last)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (fetch->parsed()) return cmd_fetch(fetch_group, fetch_name, fetch_dest);
    if (split->parsed()) return cmd_split(flags);
    if (train->parsed()) return cmd_train(flags);
    if (evaluate->parsed()) return cmd_evaluate(flags, checkpoint_path);
    if (gridsearch->parsed()) return cmd_gridsearch(flags, etas_csv, lambdas_csv, jobs);
    if (compare->parsed()) return cmd_compare(flags, models_csv, reps);
    if (stats->parsed()) return cmd_stats(flags, cells_path, target);
  } catch (const ngcn::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ngcn::TrainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitTraining;
  } catch (const ngcn::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
