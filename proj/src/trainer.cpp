#include "ngcn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <memory>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "ngcn/errors.hpp"
#include "ngcn/kernels.hpp"
#include "ngcn/text.hpp"

namespace ngcn {

namespace {

constexpr std::uint64_t kShuffleStream = 77;

struct BatchGrads {
  double loss = 0.0;
  std::vector<std::vector<double>> grads;  // aligned with tensors()
};

std::vector<double> flat_copy(const Matrix& m) {
  return {m.flat().begin(), m.flat().end()};
}

/// Uniform training interface over the three model kinds. Keeps the
/// propagation operator and exposes parameters as flat tensors for Adam.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::vector<NamedTensor> tensors() = 0;
  virtual BatchGrads eval(std::span<const Edge> batch, double lambda) = 0;
  virtual std::vector<double> predict(std::span<const Edge> edges) const = 0;
  virtual ModelParams snapshot() const = 0;
};

class NgcnBackend : public Backend {
 public:
  NgcnBackend(const UndirectedWeightedGraph& g, const EdgeSplit& split, const TrainConfig& cfg)
      : adj_(build_normalized_adjacency(g, split.train)),
        params_(init_params(g.n_nodes, cfg.feature_dim, cfg.latent_dim, cfg.n_layers, cfg.seed)) {}

  std::vector<NamedTensor> tensors() override {
    std::vector<NamedTensor> out;
    out.push_back({"X", params_.node_features.flat()});
    for (std::size_t l = 0; l < params_.n_layers; ++l)
      out.push_back({"W[" + std::to_string(l) + "]", params_.layer_weights[l].flat()});
    out.push_back({"Y", params_.collab_factors.flat()});
    out.push_back({"omega", {&params_.fusion_weight, 1}});
    return out;
  }

  BatchGrads eval(std::span<const Edge> batch, double lambda) override {
    const ForwardTrace trace = forward(params_, adj_);
    BatchGrads out;
    out.loss = batch_loss(params_, trace, batch, lambda);
    NgcnGradients g = batch_gradients(params_, adj_, trace, batch, lambda);
    out.grads.push_back(flat_copy(g.node_features));
    for (const Matrix& w : g.layer_weights) out.grads.push_back(flat_copy(w));
    out.grads.push_back(flat_copy(g.collab_factors));
    out.grads.push_back({g.fusion_weight});
    return out;
  }

  std::vector<double> predict(std::span<const Edge> edges) const override {
    const ForwardTrace trace = forward(params_, adj_);
    std::vector<double> out;
    out.reserve(edges.size());
    for (const Edge& e : edges) out.push_back(predict_edge(params_, trace, e.i, e.j));
    return out;
  }

  ModelParams snapshot() const override { return params_; }

 private:
  NormalizedAdjacency adj_;
  NgcnParams params_;
};

class MfBackend : public Backend {
 public:
  MfBackend(const UndirectedWeightedGraph& g, const TrainConfig& cfg)
      : params_(mf_init(g.n_nodes, cfg.latent_dim, cfg.seed)) {}

  std::vector<NamedTensor> tensors() override { return {{"Y", params_.factors.flat()}}; }

  BatchGrads eval(std::span<const Edge> batch, double lambda) override {
    MfEval e = mf_forward_loss_grads(params_, batch, lambda);
    return {e.loss, {flat_copy(e.grad_factors)}};
  }

  std::vector<double> predict(std::span<const Edge> edges) const override {
    std::vector<double> out;
    out.reserve(edges.size());
    for (const Edge& e : edges) out.push_back(mf_predict(params_, e.i, e.j));
    return out;
  }

  ModelParams snapshot() const override { return params_; }

 private:
  MfParams params_;
};

class GcnBackend : public Backend {
 public:
  GcnBackend(const UndirectedWeightedGraph& g, const EdgeSplit& split, const TrainConfig& cfg)
      : op_(build_gcn_propagation(g, split.train)),
        params_(gcn_init(g.n_nodes, cfg.feature_dim, cfg.n_layers, cfg.seed)) {}

  std::vector<NamedTensor> tensors() override {
    std::vector<NamedTensor> out;
    out.push_back({"X", params_.node_features.flat()});
    for (std::size_t l = 0; l < params_.n_layers; ++l)
      out.push_back({"W[" + std::to_string(l) + "]", params_.layer_weights[l].flat()});
    return out;
  }

  BatchGrads eval(std::span<const Edge> batch, double lambda) override {
    GcnEval e = gcn_loss_grads(params_, op_, batch, lambda);
    BatchGrads out;
    out.loss = e.loss;
    out.grads.push_back(flat_copy(e.grad_features));
    for (const Matrix& w : e.grad_weights) out.grads.push_back(flat_copy(w));
    return out;
  }

  std::vector<double> predict(std::span<const Edge> edges) const override {
    const GcnTrace trace = gcn_forward(params_, op_);
    std::vector<double> out;
    out.reserve(edges.size());
    for (const Edge& e : edges) out.push_back(gcn_predict(params_, trace, e.i, e.j));
    return out;
  }

  ModelParams snapshot() const override { return params_; }

 private:
  SparseOperator op_;
  GcnParams params_;
};

std::unique_ptr<Backend> make_backend(const UndirectedWeightedGraph& g, const EdgeSplit& split,
                                      const TrainConfig& cfg) {
  switch (cfg.model_kind) {
    case ModelKind::ngcn: return std::make_unique<NgcnBackend>(g, split, cfg);
    case ModelKind::mf: return std::make_unique<MfBackend>(g, cfg);
    case ModelKind::gcn: return std::make_unique<GcnBackend>(g, split, cfg);
  }
  throw ConfigError("unknown model kind");
}

double rmse_of(const Backend& backend, std::span<const Edge> edges) {
  std::vector<double> truth;
  truth.reserve(edges.size());
  for (const Edge& e : edges) truth.push_back(e.w);
  return rmse_mae(truth, backend.predict(edges)).rmse;
}

}  // namespace

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "ngcn") return ModelKind::ngcn;
  if (s == "mf") return ModelKind::mf;
  if (s == "gcn") return ModelKind::gcn;
  throw ConfigError("unknown model '" + s + "' (expected ngcn, mf, or gcn)");
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::ngcn: return "ngcn";
    case ModelKind::mf: return "mf";
    case ModelKind::gcn: return "gcn";
  }
  return "?";
}

ModelKind kind_of(const ModelParams& params) {
  if (std::holds_alternative<NgcnParams>(params)) return ModelKind::ngcn;
  if (std::holds_alternative<MfParams>(params)) return ModelKind::mf;
  return ModelKind::gcn;
}

void TrainConfig::validate() const {
  if (!(eta > 0.0)) throw ConfigError("eta must be > 0");
  if (lambda < 0.0) throw ConfigError("lambda must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (patience < 1) throw ConfigError("patience must be >= 1");
  switch (model_kind) {
    case ModelKind::ngcn:
      if (feature_dim < 1 || latent_dim < 1 || n_layers < 1)
        throw ConfigError("ngcn requires f >= 1, d >= 1, layers >= 1");
      break;
    case ModelKind::mf:
      if (latent_dim < 1) throw ConfigError("mf requires d >= 1");
      break;
    case ModelKind::gcn:
      if (feature_dim < 1) throw ConfigError("gcn requires f >= 1");
      break;
  }
}

AdamState AdamState::for_tensors(std::span<const NamedTensor> tensors) {
  AdamState s;
  s.m.reserve(tensors.size());
  s.v.reserve(tensors.size());
  for (const NamedTensor& t : tensors) {
    s.m.emplace_back(t.values.size(), 0.0);
    s.v.emplace_back(t.values.size(), 0.0);
  }
  return s;
}

void adam_step(AdamState& state, std::span<const NamedTensor> params,
               std::span<const std::vector<double>> grads, double eta) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw TrainError("adam_step: tensor count mismatch");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (grads[k].size() != params[k].values.size())
      throw TrainError("adam_step: shape mismatch for tensor " + params[k].name);
    if (!all_finite(grads[k]))
      throw TrainError("adam_step: non-finite gradient in tensor " + params[k].name);
  }
  state.timestep += 1;
  for (std::size_t k = 0; k < params.size(); ++k)
    kernels::adam_update(params[k].values, grads[k], state.m[k], state.v[k], eta,
                         AdamState::beta1, AdamState::beta2, AdamState::epsilon,
                         state.timestep);
}

std::string to_string(StopReason reason) {
  return reason == StopReason::threshold ? "threshold" : "patience";
}

EarlyStopper::Update EarlyStopper::observe(double val_rmse) {
  ++epochs_seen_;
  Update u;
  if (epochs_seen_ == 1 || val_rmse < best_) {
    best_ = val_rmse;
    best_epoch_ = epochs_seen_;
    since_improvement_ = 0;
    u.improved = true;
  } else {
    ++since_improvement_;
  }
  u.should_stop = since_improvement_ >= patience_;
  return u;
}

std::vector<std::vector<Edge>> make_batches(std::span<const Edge> edges, std::size_t batch_size,
                                            Rng& rng) {
  std::vector<Edge> shuffled(edges.begin(), edges.end());
  rng.shuffle(shuffled);
  std::vector<std::vector<Edge>> batches;
  for (std::size_t at = 0; at < shuffled.size(); at += batch_size) {
    const std::size_t end = std::min(at + batch_size, shuffled.size());
    batches.emplace_back(shuffled.begin() + at, shuffled.begin() + end);
  }
  return batches;
}

std::string RunReport::to_json() const {
  nlohmann::json j;
  j["model"] = to_string(config.model_kind);
  j["config"] = {{"eta", config.eta},
                 {"lambda", config.lambda},
                 {"batch_size", config.batch_size},
                 {"max_epochs", config.max_epochs},
                 {"patience", config.patience},
                 {"seed", config.seed},
                 {"f", config.feature_dim},
                 {"d", config.latent_dim},
                 {"layers", config.n_layers}};
  nlohmann::json rows = nlohmann::json::array();
  for (const EpochRecord& e : epochs)
    rows.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_rmse", e.val_rmse}});
  j["epochs"] = std::move(rows);
  j["best_epoch"] = best_epoch;
  j["best_val_rmse"] = best_val_rmse;
  j["stop_reason"] = to_string(stop_reason);
  j["test_rmse"] = test_rmse;
  j["test_mae"] = test_mae;
  j["test_edge_count"] = test_edge_count;
  return j.dump(2) + "\n";
}

std::string RunReport::curves_csv() const {
  std::string out = "epoch,train_loss,val_rmse\n";
  for (const EpochRecord& e : epochs)
    out += std::to_string(e.epoch) + "," + fmt_double(e.train_loss) + "," +
           fmt_double(e.val_rmse) + "\n";
  return out;
}

TrainResult train(const UndirectedWeightedGraph& g, const EdgeSplit& split,
                  const TrainConfig& config) {
  config.validate();
  if (split.train.empty()) throw TrainError("train: empty training set");
  if (split.validation.empty()) throw TrainError("train: empty validation set");

  std::unique_ptr<Backend> backend = make_backend(g, split, config);
  std::vector<NamedTensor> tensors = backend->tensors();
  AdamState adam = AdamState::for_tensors(tensors);
  Rng shuffle_rng(mix_seed(config.seed, kShuffleStream));
  EarlyStopper stopper(config.patience);

  RunReport report;
  report.config = config;
  report.stop_reason = StopReason::threshold;

  ModelParams best = backend->snapshot();
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (const std::vector<Edge>& batch : make_batches(split.train, config.batch_size, shuffle_rng)) {
      BatchGrads bg = backend->eval(batch, config.lambda);
      if (!std::isfinite(bg.loss))
        throw TrainError("train: non-finite loss at epoch " + std::to_string(epoch));
      adam_step(adam, tensors, bg.grads, config.eta);
      epoch_loss += bg.loss;
    }
    const double val_rmse = rmse_of(*backend, split.validation);
    if (!std::isfinite(val_rmse))
      throw TrainError("train: non-finite validation error at epoch " + std::to_string(epoch));
    report.epochs.push_back({epoch, epoch_loss, val_rmse});

    const EarlyStopper::Update u = stopper.observe(val_rmse);
    if (u.improved) best = backend->snapshot();
    if (u.should_stop) {
      report.stop_reason = StopReason::patience;
      break;
    }
  }
  report.best_epoch = stopper.best_epoch();
  report.best_val_rmse = stopper.best();

  EdgePredictor predictor(best, g, split.train);
  std::vector<double> truth;
  truth.reserve(split.test.size());
  for (const Edge& e : split.test) truth.push_back(e.w);
  const MetricPair test = rmse_mae(truth, predictor.predict(split.test));
  report.test_rmse = test.rmse;
  report.test_mae = test.mae;
  report.test_edge_count = test.n;

  return {std::move(best), std::move(report)};
}

EdgePredictor::EdgePredictor(const ModelParams& params, const UndirectedWeightedGraph& g,
                             const std::vector<Edge>& train_edges) {
  if (const auto* p = std::get_if<NgcnParams>(&params)) {
    const NormalizedAdjacency adj = build_normalized_adjacency(g, train_edges);
    reps_ = forward(*p, adj).layer_outputs.back();
    collab_ = p->collab_factors;
    fusion_ = p->fusion_weight;
    has_collab_ = true;
  } else if (const auto* p = std::get_if<MfParams>(&params)) {
    reps_ = p->factors;
    fusion_ = 1.0;
  } else {
    const auto& gp = std::get<GcnParams>(params);
    const SparseOperator op = build_gcn_propagation(g, train_edges);
    reps_ = gcn_forward(gp, op).layer_outputs.back();
    fusion_ = 1.0;
  }
}

double EdgePredictor::predict(std::size_t i, std::size_t j) const {
  if (i >= reps_.rows() || j >= reps_.rows()) throw DataError("node index out of range");
  const double u = dot(reps_.row_span(i), reps_.row_span(j));
  if (!has_collab_) return u;
  const double v = dot(collab_.row_span(i), collab_.row_span(j));
  return fusion_ * u + (1.0 - fusion_) * v;
}

std::vector<double> EdgePredictor::predict(std::span<const Edge> edges) const {
  std::vector<double> out;
  out.reserve(edges.size());
  for (const Edge& e : edges) out.push_back(predict(e.i, e.j));
  return out;
}

std::vector<double> default_eta_grid() {
  return {0.00005, 0.0001, 0.0005, 0.001, 0.005, 0.01, 0.05};
}

std::vector<double> default_lambda_grid() {
  return {0.00001, 0.00005, 0.0001, 0.0005, 0.001, 0.005, 0.01, 0.05, 0.1, 0.5, 1.0};
}

std::size_t select_best_cell(const std::vector<GridCell>& cells) {
  std::size_t best = cells.size();
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (!cells[k].ok) continue;
    if (best == cells.size()) {
      best = k;
      continue;
    }
    const GridCell& a = cells[k];
    const GridCell& b = cells[best];
    const auto key = [](const GridCell& c) {
      return std::make_tuple(c.report.best_val_rmse, c.lambda, c.eta);
    };
    if (key(a) < key(b)) best = k;
  }
  if (best == cells.size()) throw TrainError("grid search: every cell failed");
  return best;
}

GridSearchResult grid_search(const UndirectedWeightedGraph& g, const EdgeSplit& split,
                             const TrainConfig& base, std::vector<double> etas,
                             std::vector<double> lambdas, std::size_t jobs) {
  if (etas.empty() || lambdas.empty()) throw ConfigError("grid search: empty grid");
  GridSearchResult result;
  result.cells.resize(etas.size() * lambdas.size());
  for (std::size_t a = 0; a < etas.size(); ++a)
    for (std::size_t b = 0; b < lambdas.size(); ++b) {
      GridCell& cell = result.cells[a * lambdas.size() + b];
      cell.eta = etas[a];
      cell.lambda = lambdas[b];
    }

  auto run_cell = [&](GridCell& cell) {
    TrainConfig cfg = base;
    cfg.eta = cell.eta;
    cfg.lambda = cell.lambda;
    try {
      cell.report = train(g, split, cfg).report;
      cell.ok = true;
    } catch (const Error& err) {
      cell.ok = false;
      cell.error = err.what();
    }
  };

  if (jobs <= 1) {
    for (GridCell& cell : result.cells) run_cell(cell);
  } else {
    std::size_t next = 0;
    while (next < result.cells.size()) {
      std::vector<std::future<void>> wave;
      for (std::size_t k = 0; k < jobs && next < result.cells.size(); ++k, ++next)
        wave.push_back(std::async(std::launch::async, run_cell, std::ref(result.cells[next])));
      for (std::future<void>& f : wave) f.get();
    }
  }

  const std::size_t winner = select_best_cell(result.cells);
  result.best = base;
  result.best.eta = result.cells[winner].eta;
  result.best.lambda = result.cells[winner].lambda;
  return result;
}

}  // namespace ngcn
