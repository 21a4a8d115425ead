#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ngcn/graph.hpp"
#include "ngcn/metrics.hpp"
#include "ngcn/model_kind.hpp"
#include "ngcn/rng.hpp"

namespace ngcn {

struct TrainConfig {
  double eta = 1e-3;
  double lambda = 1e-4;
  std::size_t batch_size = 2048;
  std::size_t max_epochs = 1000;
  std::size_t patience = 30;
  std::uint64_t seed = 1;
  ModelKind model_kind = ModelKind::ngcn;
  std::size_t feature_dim = 128;
  std::size_t latent_dim = 128;
  std::size_t n_layers = 2;

  void validate() const;  // throws ConfigError
};

/// Mutable view of one parameter tensor, used by the optimizer.
struct NamedTensor {
  std::string name;
  std::span<double> values;
};

/// Per-tensor Adam accumulators; shapes follow the tensor list they were
/// created for.
struct AdamState {
  static constexpr double beta1 = 0.9;
  static constexpr double beta2 = 0.999;
  static constexpr double epsilon = 1e-8;

  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  long timestep = 0;

  static AdamState for_tensors(std::span<const NamedTensor> tensors);
};

/// One bias-corrected Adam update over every tensor. Throws TrainError naming
/// the tensor if a gradient is non-finite.
void adam_step(AdamState& state, std::span<const NamedTensor> params,
               std::span<const std::vector<double>> grads, double eta);

enum class StopReason { threshold, patience };
std::string to_string(StopReason reason);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_rmse = 0.0;
};

struct RunReport {
  TrainConfig config;
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_val_rmse = 0.0;
  StopReason stop_reason = StopReason::threshold;
  double test_rmse = 0.0;
  double test_mae = 0.0;
  std::size_t test_edge_count = 0;

  std::string to_json() const;   // no timestamps, byte-reproducible
  std::string curves_csv() const;
};

/// Tracks the strict minimum of validation RMSE; signals stop after
/// `patience` consecutive epochs without improvement.
class EarlyStopper {
 public:
  explicit EarlyStopper(std::size_t patience) : patience_(patience) {}

  struct Update {
    bool improved = false;
    bool should_stop = false;
  };
  Update observe(double val_rmse);

  double best() const { return best_; }
  std::size_t best_epoch() const { return best_epoch_; }

 private:
  std::size_t patience_;
  double best_ = 0.0;
  std::size_t best_epoch_ = 0;
  std::size_t epochs_seen_ = 0;
  std::size_t since_improvement_ = 0;
};

/// Seeded shuffle of the training edges into batches of at most batch_size;
/// the batches partition the edges exactly.
std::vector<std::vector<Edge>> make_batches(std::span<const Edge> edges, std::size_t batch_size,
                                            Rng& rng);

struct TrainResult {
  ModelParams params;  // parameters of the best validation epoch
  RunReport report;
};

/// Mini-batch Adam training with early stopping on validation RMSE.
/// The propagation operator is built from split.train only.
TrainResult train(const UndirectedWeightedGraph& g, const EdgeSplit& split,
                  const TrainConfig& config);

/// Binds trained parameters to the propagation operator built from the
/// training edges, caching final representations so edge queries are O(dim).
class EdgePredictor {
 public:
  EdgePredictor(const ModelParams& params, const UndirectedWeightedGraph& g,
                const std::vector<Edge>& train_edges);

  double predict(std::size_t i, std::size_t j) const;
  std::vector<double> predict(std::span<const Edge> edges) const;

 private:
  Matrix reps_;
  Matrix collab_;
  double fusion_ = 1.0;
  bool has_collab_ = false;
};

// Learning-rate / regularization grids used when none are given.
std::vector<double> default_eta_grid();
std::vector<double> default_lambda_grid();

struct GridCell {
  double eta = 0.0;
  double lambda = 0.0;
  bool ok = false;
  std::string error;
  RunReport report;
};

struct GridSearchResult {
  TrainConfig best;
  std::vector<GridCell> cells;
};

/// Index of the winning cell: minimal validation RMSE, ties broken by smaller
/// lambda, then smaller eta. Throws if no cell succeeded.
std::size_t select_best_cell(const std::vector<GridCell>& cells);

/// Trains every (eta, lambda) pair; per-cell failures are recorded and the
/// remaining grid continues. jobs > 1 runs cells concurrently.
GridSearchResult grid_search(const UndirectedWeightedGraph& g, const EdgeSplit& split,
                             const TrainConfig& base,
                             std::vector<double> etas = default_eta_grid(),
                             std::vector<double> lambdas = default_lambda_grid(),
                             std::size_t jobs = 1);

}  // namespace ngcn
