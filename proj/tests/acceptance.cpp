// Acceptance suite: one pass/fail line per criterion. The final stretch
// criterion needs the real plantsmargin dataset and is skipped when the file
// is not available (set NGCN_D1 or place it at data/plantsmargin_12NN.mtx).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ngcn/baselines.hpp"
#include "ngcn/graph.hpp"
#include "ngcn/metrics.hpp"
#include "ngcn/model.hpp"
#include "ngcn/rng.hpp"
#include "ngcn/stats.hpp"
#include "ngcn/text.hpp"
#include "ngcn/trainer.hpp"
#include "test_util.hpp"

using namespace ngcn;

namespace {

struct Failure {
  std::string detail;
};

void require(bool ok, const std::string& detail) {
  if (!ok) throw Failure{detail};
}

std::string fmt(const char* spec, double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, x);
  return buf;
}

// --------------------------------------------------------------------------
// criterion 1: gradient oracle

std::string criterion_gradient_oracle() {
  const std::size_t n = 8, dim = 4, layers = 2, n_edges = 12;
  int instances = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; instances < 20; ++seed) {
    require(seed < 400, "could not find 20 off-kink instances");
    UndirectedWeightedGraph g = testutil::random_graph(n, n_edges, mix_seed(seed, 1));
    const NormalizedAdjacency adj = build_normalized_adjacency(g, g.edges);
    NgcnParams p = testutil::fd_params(n, dim, dim, layers, mix_seed(seed, 2));
    if (testutil::min_abs_pre_activation(forward(p, adj)) <= 1e-3) continue;
    ++instances;

    // targets near the initial predictions keep the loss O(1), so the
    // difference quotients stay far above cancellation noise
    {
      const ForwardTrace trace = forward(p, adj);
      Rng noise(mix_seed(seed, 3));
      for (Edge& e : g.edges)
        e.w = std::max(0.05, predict_edge(p, trace, e.i, e.j) + 0.4 * (noise.next_unit() - 0.5));
    }

    const double lambda = seed % 2 == 0 ? 0.0 : 0.01;
    const std::vector<double> analytic =
        testutil::grad_coords(batch_gradients(p, adj, g.edges, lambda));
    std::vector<double*> coords = testutil::param_coords(p);
    auto loss_fn = [&] { return batch_loss(p, forward(p, adj), g.edges, lambda); };
    const double base_loss = loss_fn();
    const std::vector<double> fd = testutil::finite_diff(coords, loss_fn, 1e-5);
    require(analytic.size() == fd.size(), "coordinate count mismatch");
    for (std::size_t k = 0; k < fd.size(); ++k) {
      const double err = testutil::rel_err(analytic[k], fd[k], base_loss);
      worst = std::max(worst, err);
      require(err < 1e-4, "coordinate " + std::to_string(k) + " relative error " +
                              fmt("%.3g", err) + " at seed " + std::to_string(seed));
    }
  }
  return "20 instances, worst relative error " + fmt("%.3g", worst);
}

// --------------------------------------------------------------------------
// criterion 2: symmetry suite

std::string criterion_symmetry() {
  const std::size_t n = 12;
  const UndirectedWeightedGraph g = testutil::random_graph(n, 30, 5);
  const NormalizedAdjacency adj = build_normalized_adjacency(g, g.edges);

  Rng pick(99);
  for (std::uint64_t draw = 0; draw < 1000; ++draw) {
    NgcnParams p = testutil::fd_params(n, 3, 3, 2, mix_seed(draw, 3));
    const ForwardTrace trace = forward(p, adj);
    for (int t = 0; t < 4; ++t) {
      const std::size_t i = pick.next_index(n);
      const std::size_t j = pick.next_index(n);
      require(predict_edge(p, trace, i, j) == predict_edge(p, trace, j, i),
              "prediction asymmetry at draw " + std::to_string(draw));
      require(collab_score(p, i, j) == collab_score(p, j, i),
              "collaboration asymmetry at draw " + std::to_string(draw));
    }

    p.fusion_weight = 0.0;
    MfParams mf;
    mf.n_nodes = n;
    mf.latent_dim = p.latent_dim;
    mf.factors = p.collab_factors;
    for (int t = 0; t < 4; ++t) {
      const std::size_t i = pick.next_index(n);
      const std::size_t j = pick.next_index(n);
      require(predict_edge(p, trace, i, j) == mf_predict(mf, i, j),
              "zero-fusion prediction differs from mf at draw " + std::to_string(draw));
    }
  }
  return "1000 draws, bit-exact";
}

// --------------------------------------------------------------------------
// criterion 3: residual identity

std::string criterion_residual_identity() {
  const UndirectedWeightedGraph g = testutil::random_graph(9, 18, 7);
  const NormalizedAdjacency adj = build_normalized_adjacency(g, g.edges);

  NgcnParams p = testutil::fd_params(9, 4, 3, 3, 11);
  for (Matrix& w : p.layer_weights) w.fill(0.0);
  require(forward(p, adj).layer_outputs.back() == p.node_features,
          "zero weights did not reproduce the features");

  UndirectedWeightedGraph isolated;
  isolated.n_nodes = 9;
  const NormalizedAdjacency empty = build_normalized_adjacency(isolated, {});
  const NgcnParams q = testutil::fd_params(9, 4, 3, 3, 12);
  require(forward(q, empty).layer_outputs.back() == q.node_features,
          "empty adjacency did not reproduce the features");
  return "exact equality on both identities";
}

// --------------------------------------------------------------------------
// criterion 4: descent and fit on a low-rank synthetic graph

std::string criterion_descent_fit() {
  int good = 0;
  std::string details;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const UndirectedWeightedGraph g =
        normalize_weights(testutil::rank_k_graph(50, 4, 0.4, mix_seed(seed, 40)));
    const EdgeSplit split = split_edges(g, seed);

    TrainConfig cfg;
    cfg.model_kind = ModelKind::ngcn;
    cfg.feature_dim = 8;
    cfg.latent_dim = 8;
    cfg.n_layers = 2;
    cfg.eta = 0.005;
    cfg.lambda = 1e-4;
    cfg.batch_size = 128;
    cfg.max_epochs = 300;
    cfg.patience = 300;
    cfg.seed = seed;

    const TrainResult r = train(g, split, cfg);
    const bool fit = r.report.test_rmse < 0.05;
    const bool halved =
        r.report.epochs.back().train_loss < 0.5 * r.report.epochs.front().train_loss;
    if (fit && halved) ++good;
    details += " seed" + std::to_string(seed) + ":rmse=" + fmt("%.4f", r.report.test_rmse);
  }
  require(good >= 4, "only " + std::to_string(good) + " of 5 seeds passed;" + details);
  return std::to_string(good) + "/5 seeds;" + details;
}

// --------------------------------------------------------------------------
// criterion 5: relative ordering against both baselines

std::string criterion_relative_ordering() {
  auto median = [](std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    return xs[xs.size() / 2];
  };

  const UndirectedWeightedGraph g =
      normalize_weights(testutil::knn_rank_graph(200, 4, 12, 31, 0.5));

  std::vector<double> rmse_ngcn, rmse_mf, rmse_gcn;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const EdgeSplit split = split_edges(g, seed);
    TrainConfig cfg;
    cfg.feature_dim = 8;
    cfg.latent_dim = 8;
    cfg.n_layers = 2;
    cfg.eta = 0.005;
    cfg.lambda = 1e-4;
    cfg.batch_size = 256;
    cfg.max_epochs = 250;
    cfg.patience = 30;
    cfg.seed = seed;

    cfg.model_kind = ModelKind::ngcn;
    rmse_ngcn.push_back(train(g, split, cfg).report.test_rmse);
    cfg.model_kind = ModelKind::mf;
    rmse_mf.push_back(train(g, split, cfg).report.test_rmse);
    cfg.model_kind = ModelKind::gcn;
    rmse_gcn.push_back(train(g, split, cfg).report.test_rmse);
  }

  const double med_ngcn = median(rmse_ngcn);
  const double med_mf = median(rmse_mf);
  const double med_gcn = median(rmse_gcn);
  const std::string detail = "median rmse: ngcn=" + fmt("%.4f", med_ngcn) +
                             " mf=" + fmt("%.4f", med_mf) + " gcn=" + fmt("%.4f", med_gcn);
  require(med_ngcn < med_mf && med_ngcn < med_gcn, detail);
  return detail;
}

// --------------------------------------------------------------------------
// criterion 6: exact statistics

std::string criterion_exact_statistics() {
  std::vector<double> diffs = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  WilcoxonResult w = wilcoxon_signed_rank(diffs);
  require(w.r_plus == 36.0 && w.r_minus == 0.0, "all-positive rank sums wrong");
  require(w.p_one_sided == 1.0 / 256.0, "all-positive p wrong");
  require(format_p(w.p_one_sided) == "0.003906", "all-positive p formats wrong");

  diffs[0] = -0.1;
  w = wilcoxon_signed_rank(diffs);
  require(w.r_plus == 35.0 && w.r_minus == 1.0, "one-negative rank sums wrong");
  require(w.p_one_sided == 2.0 / 256.0, "one-negative p wrong");
  require(format_p(w.p_one_sided) == "0.007813", "one-negative p formats wrong");

  Rng rng(49);
  int cases = 0;
  for (std::size_t n = 1; n <= 12; ++n) {
    for (int trial = 0; trial < 3; ++trial) {
      std::vector<double> sample(n);
      for (double& d : sample) {
        const double mag = static_cast<double>(1 + rng.next_index(5)) / 4.0;
        d = rng.next_unit() < 0.5 ? -mag : mag;
      }
      const WilcoxonResult got = wilcoxon_signed_rank(sample);
      require(got.p_one_sided == testutil::wilcoxon_brute_force_p(sample),
              "exact p diverged from brute force at n = " + std::to_string(n));
      ++cases;
    }
  }
  return "published rows exact; " + std::to_string(cases) + " brute-force cases matched";
}

// --------------------------------------------------------------------------
// criterion 7: friedman reproduction

std::string criterion_friedman() {
  const FriedmanResult r = friedman_mean_ranks(testutil::kComparisonCells);
  require(r.mean_ranks.size() == 8, "expected eight models");
  require(std::abs(r.mean_ranks[7] - 1.125) < 1e-12,
          "reference mean rank " + fmt("%.6f", r.mean_ranks[7]) + " != 1.125");
  for (std::size_t c = 0; c + 1 < 8; ++c)
    require(r.mean_ranks[c] > r.mean_ranks[7],
            "column " + std::to_string(c) + " does not rank above the reference");
  return "reference mean rank 1.125, all others strictly above";
}

// --------------------------------------------------------------------------
// criterion 8: metric sanity

std::string criterion_metric_sanity() {
  const std::vector<std::pair<double, double>> perfect = {{0.4, 0.4}, {0.9, 0.9}};
  const MetricPair p = rmse_mae(perfect);
  require(p.rmse == 0.0 && p.mae == 0.0, "perfect predictions must score zero");

  Rng rng(77);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> truth(1 + rng.next_index(25)), pred(truth.size());
    for (std::size_t k = 0; k < truth.size(); ++k) {
      truth[k] = rng.next_unit();
      pred[k] = rng.next_unit();
    }
    const MetricPair m = rmse_mae(truth, pred);
    require(m.rmse >= m.mae - 1e-15, "rmse fell below mae");
  }

  const std::vector<std::pair<double, double>> worked = {{1, 0}, {0, 1}, {1, 1}, {0, 0}};
  const MetricPair w = rmse_mae(worked);
  require(std::abs(w.rmse - std::sqrt(0.5)) < 1e-12, "worked rmse off");
  require(std::abs(w.mae - 0.5) < 1e-12, "worked mae off");
  return "all three checks at 1e-12";
}

// --------------------------------------------------------------------------
// criterion 9 (stretch): the real dataset at reduced grid scale

std::string find_d1() {
  if (const char* env = std::getenv("NGCN_D1"); env && std::filesystem::exists(env)) return env;
  for (const char* p : {"data/plantsmargin_12NN.mtx", "../data/plantsmargin_12NN.mtx"})
    if (std::filesystem::exists(p)) return p;
  return "";
}

std::string criterion_stretch_d1(const std::string& path) {
  const ParseResult parsed = parse_matrix_market_file(path);
  require(parsed.graph.n_nodes == 1600,
          "expected 1600 nodes, got " + std::to_string(parsed.graph.n_nodes));
  require(parsed.graph.edges.size() == 25482,
          "expected 25482 edges, got " + std::to_string(parsed.graph.edges.size()));
  const UndirectedWeightedGraph g = normalize_weights(parsed.graph);

  TrainConfig base;
  base.model_kind = ModelKind::ngcn;
  base.feature_dim = 128;
  base.latent_dim = 128;
  base.n_layers = 2;
  base.batch_size = 2048;
  base.max_epochs = 1000;
  base.patience = 30;
  base.seed = 1;

  const EdgeSplit grid_split = split_edges(g, base.seed);
  const GridSearchResult grid = grid_search(g, grid_split, base, {0.0005, 0.001, 0.005},
                                            {1e-4, 1e-3, 1e-2});

  TrainConfig best = grid.best;
  const CrossValResult cv = cross_validate(g, ModelKind::ngcn, best, 5);
  const std::string detail = "mean test rmse " + fmt("%.5f", cv.rmse_mean) + " (eta=" +
                             fmt("%.4g", best.eta) + ", lambda=" + fmt("%.4g", best.lambda) + ")";
  require(cv.rmse_mean <= 0.042, detail);
  return detail;
}

// --------------------------------------------------------------------------

struct Criterion {
  int id;
  std::string name;
  double time_limit_s;  // 0 = unbounded
  std::function<std::string()> run;
  bool stretch = false;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int a = 1; a < argc; ++a) {
    const std::string arg = argv[a];
    if (arg == "--only" && a + 1 < argc) only = std::atoi(argv[++a]);
  }

  const std::string d1 = find_d1();
  std::vector<Criterion> criteria = {
      {1, "gradient oracle vs central differences", 10.0, criterion_gradient_oracle},
      {2, "bit-exact prediction symmetry", 0.0, criterion_symmetry},
      {3, "residual identity", 0.0, criterion_residual_identity},
      {4, "descent and fit on low-rank synthetic data", 120.0, criterion_descent_fit},
      {5, "ordering against mf and gcn baselines", 600.0, criterion_relative_ordering},
      {6, "exact wilcoxon statistics", 0.0, criterion_exact_statistics},
      {7, "friedman mean-rank reproduction", 0.0, criterion_friedman},
      {8, "metric sanity", 0.0, criterion_metric_sanity},
      {9, "plantsmargin reduced-grid accuracy (stretch)", 7200.0,
       [&] { return criterion_stretch_d1(d1); }, true},
  };

  bool gate_failed = false;
  for (const Criterion& c : criteria) {
    if (only != 0 && c.id != only) continue;
    if (c.stretch && d1.empty()) {
      std::printf("[SKIP] criterion %d: %s — dataset not available (set NGCN_D1)\n", c.id,
                  c.name.c_str());
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    try {
      detail = c.run();
    } catch (const Failure& f) {
      ok = false;
      detail = f.detail;
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (ok && c.time_limit_s > 0.0 && elapsed > c.time_limit_s) {
      ok = false;
      detail = "exceeded time limit of " + fmt("%.0f", c.time_limit_s) + " s";
    }
    std::printf("[%s] criterion %d: %s (%.1fs) — %s\n", ok ? "PASS" : "FAIL", c.id,
                c.name.c_str(), elapsed, detail.c_str());
    if (!ok && !c.stretch) gate_failed = true;
  }
  return gate_failed ? 1 : 0;
}
