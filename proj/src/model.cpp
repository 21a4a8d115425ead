#include "ngcn/model.hpp"

#include <algorithm>
#include <cmath>

#include "ngcn/errors.hpp"
#include "ngcn/kernels.hpp"
#include "ngcn/rng.hpp"

namespace ngcn {

namespace {

constexpr double kInitHigh = 0.05;

void check_shapes(const NgcnParams& p) {
  if (p.n_nodes == 0 || p.feature_dim == 0 || p.latent_dim == 0 || p.n_layers == 0)
    throw DataError("ngcn params: dimensions must be positive");
  if (p.node_features.rows() != p.n_nodes || p.node_features.cols() != p.feature_dim)
    throw DataError("ngcn params: node feature shape mismatch");
  if (p.collab_factors.rows() != p.n_nodes || p.collab_factors.cols() != p.latent_dim)
    throw DataError("ngcn params: collaboration factor shape mismatch");
  if (p.layer_weights.size() != p.n_layers)
    throw DataError("ngcn params: layer count mismatch");
  for (const Matrix& w : p.layer_weights)
    if (w.rows() != p.feature_dim || w.cols() != p.feature_dim)
      throw DataError("ngcn params: layer weight shape mismatch");
}

void check_index(const NgcnParams& p, std::size_t i, std::size_t j) {
  if (i >= p.n_nodes || j >= p.n_nodes) throw DataError("node index out of range");
}

// Unique endpoint set of the batch, sorted.
std::vector<std::size_t> batch_nodes(std::span<const Edge> batch) {
  std::vector<std::size_t> nodes;
  nodes.reserve(batch.size() * 2);
  for (const Edge& e : batch) {
    nodes.push_back(e.i);
    nodes.push_back(e.j);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return nodes;
}

void axpy(double* acc, double alpha, const double* x, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) acc[k] += alpha * x[k];
}

}  // namespace

Matrix init_uniform_tensor(std::size_t rows, std::size_t cols, std::uint64_t seed,
                           std::uint64_t stream) {
  Matrix m(rows, cols);
  Rng rng(mix_seed(seed, stream));
  for (double& x : m.flat()) x = kInitHigh * rng.next_unit();
  return m;
}

NgcnParams init_params(std::size_t n_nodes, std::size_t feature_dim, std::size_t latent_dim,
                       std::size_t n_layers, std::uint64_t seed) {
  if (n_nodes == 0 || feature_dim == 0 || latent_dim == 0 || n_layers == 0)
    throw DataError("init_params: dimensions must be positive");
  NgcnParams p;
  p.n_nodes = n_nodes;
  p.feature_dim = feature_dim;
  p.latent_dim = latent_dim;
  p.n_layers = n_layers;
  p.node_features = init_uniform_tensor(n_nodes, feature_dim, seed, kStreamFeatures);
  p.layer_weights.reserve(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l)
    p.layer_weights.push_back(init_uniform_tensor(feature_dim, feature_dim, seed, kStreamLayer0 + l));
  p.collab_factors = init_uniform_tensor(n_nodes, latent_dim, seed, kStreamFactors);
  p.fusion_weight = 0.5;
  return p;
}

ForwardTrace forward(const NgcnParams& p, const NormalizedAdjacency& adj) {
  check_shapes(p);
  if (adj.n_nodes != p.n_nodes) throw DataError("forward: operator size does not match node count");

  ForwardTrace trace;
  trace.layer_outputs.reserve(p.n_layers + 1);
  trace.pre_activations.reserve(p.n_layers);
  trace.layer_outputs.push_back(p.node_features);

  Matrix prop(p.n_nodes, p.feature_dim);
  for (std::size_t l = 0; l < p.n_layers; ++l) {
    kernels::spmm(adj, trace.layer_outputs[l], prop);
    Matrix pre(p.n_nodes, p.feature_dim);
    kernels::gemm(prop, p.layer_weights[l], pre);
    Matrix next(p.n_nodes, p.feature_dim);
    kernels::relu_residual(pre, trace.layer_outputs[l], next);
    trace.pre_activations.push_back(std::move(pre));
    trace.layer_outputs.push_back(std::move(next));
  }
  return trace;
}

double collab_score(const NgcnParams& p, std::size_t i, std::size_t j) {
  check_index(p, i, j);
  return dot(p.collab_factors.row_span(i), p.collab_factors.row_span(j));
}

double predict_edge(const NgcnParams& p, const ForwardTrace& trace, std::size_t i, std::size_t j) {
  check_index(p, i, j);
  const Matrix& reps = trace.layer_outputs.back();
  const double u = dot(reps.row_span(i), reps.row_span(j));
  const double v = dot(p.collab_factors.row_span(i), p.collab_factors.row_span(j));
  return p.fusion_weight * u + (1.0 - p.fusion_weight) * v;
}

double batch_loss(const NgcnParams& p, const ForwardTrace& trace, std::span<const Edge> batch,
                  double lambda) {
  if (batch.empty()) throw DataError("batch_loss: empty batch");
  const Matrix& reps = trace.layer_outputs.back();
  const double omega = p.fusion_weight;

  double total = 0.0;
  for (const Edge& e : batch) {
    check_index(p, e.i, e.j);
    const double u = dot(reps.row_span(e.i), reps.row_span(e.j));
    const double v = dot(p.collab_factors.row_span(e.i), p.collab_factors.row_span(e.j));
    const double fused = omega * u + (1.0 - omega) * v;
    const double r1 = e.w - fused;
    const double r2 = e.w - u;
    const double r3 = e.w - v;
    total += r1 * r1 + r2 * r2 + r3 * r3;
  }
  if (lambda > 0.0) {
    double reg = omega * omega;
    for (std::size_t i : batch_nodes(batch)) {
      reg += squared_norm(p.node_features.row_span(i));
      reg += squared_norm(p.collab_factors.row_span(i));
    }
    for (const Matrix& w : p.layer_weights) reg += squared_norm(w.flat());
    total += lambda * reg;
  }
  return total;
}

NgcnGradients batch_gradients(const NgcnParams& p, const NormalizedAdjacency& adj,
                              std::span<const Edge> batch, double lambda) {
  return batch_gradients(p, adj, forward(p, adj), batch, lambda);
}

NgcnGradients batch_gradients(const NgcnParams& p, const NormalizedAdjacency& adj,
                              const ForwardTrace& trace, std::span<const Edge> batch,
                              double lambda) {
  if (batch.empty()) throw DataError("batch_gradients: empty batch");
  check_shapes(p);
  const std::size_t n = p.n_nodes, f = p.feature_dim;
  const Matrix& reps = trace.layer_outputs.back();
  const double omega = p.fusion_weight;

  NgcnGradients g;
  g.node_features = Matrix(n, f);
  g.collab_factors = Matrix(n, p.latent_dim);
  g.layer_weights.assign(p.n_layers, Matrix(f, f));

  // Head gradients: scatter per edge into dL/dH(L) and dL/dY.
  Matrix grad_reps(n, f);
  for (const Edge& e : batch) {
    check_index(p, e.i, e.j);
    const double u = dot(reps.row_span(e.i), reps.row_span(e.j));
    const double v = dot(p.collab_factors.row_span(e.i), p.collab_factors.row_span(e.j));
    const double fused = omega * u + (1.0 - omega) * v;
    const double r1 = e.w - fused;
    const double r2 = e.w - u;
    const double r3 = e.w - v;
    const double gu = -2.0 * r1 * omega - 2.0 * r2;
    const double gv = -2.0 * r1 * (1.0 - omega) - 2.0 * r3;
    g.fusion_weight += -2.0 * r1 * (u - v);
    axpy(grad_reps.row(e.i), gu, reps.row(e.j), f);
    axpy(grad_reps.row(e.j), gu, reps.row(e.i), f);
    axpy(g.collab_factors.row(e.i), gv, p.collab_factors.row(e.j), p.latent_dim);
    axpy(g.collab_factors.row(e.j), gv, p.collab_factors.row(e.i), p.latent_dim);
  }

  // Through the layers; the skip connection passes the gradient along and the
  // operator is its own transpose.
  Matrix masked(n, f), prop(n, f), tmp(n, f);
  for (std::size_t l = p.n_layers; l-- > 0;) {
    kernels::relu_mask(grad_reps, trace.pre_activations[l], masked);
    kernels::spmm(adj, trace.layer_outputs[l], prop);
    kernels::gemm_tn(prop, masked, g.layer_weights[l]);
    kernels::gemm_nt(masked, p.layer_weights[l], tmp);
    kernels::spmm(adj, tmp, prop);
    kernels::add_scaled(grad_reps, 1.0, prop);
  }
  g.node_features = std::move(grad_reps);

  if (lambda > 0.0) {
    for (std::size_t i : batch_nodes(batch)) {
      axpy(g.node_features.row(i), 2.0 * lambda, p.node_features.row(i), f);
      axpy(g.collab_factors.row(i), 2.0 * lambda, p.collab_factors.row(i), p.latent_dim);
    }
    for (std::size_t l = 0; l < p.n_layers; ++l)
      kernels::add_scaled(g.layer_weights[l], 2.0 * lambda, p.layer_weights[l]);
    g.fusion_weight += 2.0 * lambda * omega;
  }
  return g;
}

}  // namespace ngcn
