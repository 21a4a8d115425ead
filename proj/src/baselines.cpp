#include "ngcn/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "ngcn/errors.hpp"
#include "ngcn/kernels.hpp"
#include "ngcn/model.hpp"

namespace ngcn {

namespace {

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

MfParams mf_init(std::size_t n_nodes, std::size_t latent_dim, std::uint64_t seed) {
  if (n_nodes == 0 || latent_dim == 0) throw DataError("mf_init: dimensions must be positive");
  MfParams p;
  p.n_nodes = n_nodes;
  p.latent_dim = latent_dim;
  p.factors = init_uniform_tensor(n_nodes, latent_dim, seed, kStreamFactors);
  return p;
}

double mf_predict(const MfParams& p, std::size_t i, std::size_t j) {
  if (i >= p.n_nodes || j >= p.n_nodes) throw DataError("node index out of range");
  return dot(p.factors.row_span(i), p.factors.row_span(j));
}

MfEval mf_forward_loss_grads(const MfParams& p, std::span<const Edge> batch, double lambda) {
  if (batch.empty()) throw DataError("mf_forward_loss_grads: empty batch");
  MfEval out;
  out.grad_factors = Matrix(p.n_nodes, p.latent_dim);
  for (const Edge& e : batch) {
    if (e.i >= p.n_nodes || e.j >= p.n_nodes) throw DataError("node index out of range");
    const double v = dot(p.factors.row_span(e.i), p.factors.row_span(e.j));
    const double r = e.w - v;
    out.loss += r * r;
    const double gv = -2.0 * r;
    axpy(out.grad_factors.row(e.i), gv, p.factors.row(e.j), p.latent_dim);
    axpy(out.grad_factors.row(e.j), gv, p.factors.row(e.i), p.latent_dim);
  }
  if (lambda > 0.0) {
    for (std::size_t i : batch_nodes(batch)) {
      out.loss += lambda * squared_norm(p.factors.row_span(i));
      axpy(out.grad_factors.row(i), 2.0 * lambda, p.factors.row(i), p.latent_dim);
    }
  }
  return out;
}

GcnParams gcn_init(std::size_t n_nodes, std::size_t feature_dim, std::size_t n_layers,
                   std::uint64_t seed) {
  if (n_nodes == 0 || feature_dim == 0) throw DataError("gcn_init: dimensions must be positive");
  GcnParams p;
  p.n_nodes = n_nodes;
  p.feature_dim = feature_dim;
  p.n_layers = n_layers;
  p.node_features = init_uniform_tensor(n_nodes, feature_dim, seed, kStreamFeatures);
  p.layer_weights.reserve(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l)
    p.layer_weights.push_back(init_uniform_tensor(feature_dim, feature_dim, seed, kStreamLayer0 + l));
  return p;
}

SparseOperator build_gcn_propagation(const UndirectedWeightedGraph& g,
                                     const std::vector<Edge>& train) {
  check_train_edges(g, train);
  const std::size_t n = g.n_nodes;

  std::vector<double> degree(n, 1.0);  // self-loop weight 1
  for (const Edge& e : train) {
    degree[e.i] += e.w;
    degree[e.j] += e.w;
  }

  std::vector<std::vector<std::pair<std::size_t, double>>> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i].emplace_back(i, 1.0 / degree[i]);
  for (const Edge& e : train) {
    const double c = e.w / std::sqrt(degree[e.i] * degree[e.j]);
    rows[e.i].emplace_back(e.j, c);
    rows[e.j].emplace_back(e.i, c);
  }

  SparseOperator op;
  op.n_nodes = n;
  op.row_ptr.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(rows[i].begin(), rows[i].end());
    op.row_ptr[i + 1] = op.row_ptr[i] + rows[i].size();
  }
  op.col.reserve(op.row_ptr[n]);
  op.coeff.reserve(op.row_ptr[n]);
  for (std::size_t i = 0; i < n; ++i)
    for (auto [j, c] : rows[i]) {
      op.col.push_back(j);
      op.coeff.push_back(c);
    }
  return op;
}

GcnTrace gcn_forward(const GcnParams& p, const SparseOperator& op) {
  if (op.n_nodes != p.n_nodes) throw DataError("gcn_forward: operator size does not match node count");
  if (p.node_features.rows() != p.n_nodes || p.node_features.cols() != p.feature_dim)
    throw DataError("gcn_forward: node feature shape mismatch");
  for (const Matrix& w : p.layer_weights)
    if (w.rows() != p.feature_dim || w.cols() != p.feature_dim)
      throw DataError("gcn_forward: layer weight shape mismatch");

  GcnTrace trace;
  trace.layer_outputs.reserve(p.n_layers + 1);
  trace.pre_activations.reserve(p.n_layers);
  trace.layer_outputs.push_back(p.node_features);

  Matrix prop(p.n_nodes, p.feature_dim);
  for (std::size_t l = 0; l < p.n_layers; ++l) {
    kernels::spmm(op, trace.layer_outputs[l], prop);
    Matrix pre(p.n_nodes, p.feature_dim);
    kernels::gemm(prop, p.layer_weights[l], pre);
    Matrix next(p.n_nodes, p.feature_dim);
    kernels::relu(pre, next);
    trace.pre_activations.push_back(std::move(pre));
    trace.layer_outputs.push_back(std::move(next));
  }
  return trace;
}

double gcn_predict(const GcnParams& p, const GcnTrace& trace, std::size_t i, std::size_t j) {
  if (i >= p.n_nodes || j >= p.n_nodes) throw DataError("node index out of range");
  const Matrix& reps = trace.layer_outputs.back();
  return dot(reps.row_span(i), reps.row_span(j));
}

GcnEval gcn_loss_grads(const GcnParams& p, const SparseOperator& op, std::span<const Edge> batch,
                       double lambda) {
  if (batch.empty()) throw DataError("gcn_loss_grads: empty batch");
  const GcnTrace trace = gcn_forward(p, op);
  const Matrix& reps = trace.layer_outputs.back();
  const std::size_t n = p.n_nodes, f = p.feature_dim;

  GcnEval out;
  out.grad_weights.assign(p.n_layers, Matrix(f, f));

  Matrix grad_reps(n, f);
  for (const Edge& e : batch) {
    if (e.i >= n || e.j >= n) throw DataError("node index out of range");
    const double u = dot(reps.row_span(e.i), reps.row_span(e.j));
    const double r = e.w - u;
    out.loss += r * r;
    const double gu = -2.0 * r;
    axpy(grad_reps.row(e.i), gu, reps.row(e.j), f);
    axpy(grad_reps.row(e.j), gu, reps.row(e.i), f);
  }

  Matrix masked(n, f), prop(n, f), tmp(n, f);
  for (std::size_t l = p.n_layers; l-- > 0;) {
    kernels::relu_mask(grad_reps, trace.pre_activations[l], masked);
    kernels::spmm(op, trace.layer_outputs[l], prop);
    kernels::gemm_tn(prop, masked, out.grad_weights[l]);
    kernels::gemm_nt(masked, p.layer_weights[l], tmp);
    kernels::spmm(op, tmp, grad_reps);
  }
  out.grad_features = std::move(grad_reps);

  if (lambda > 0.0) {
    for (std::size_t i : batch_nodes(batch)) {
      out.loss += lambda * squared_norm(p.node_features.row_span(i));
      axpy(out.grad_features.row(i), 2.0 * lambda, p.node_features.row(i), f);
    }
    for (std::size_t l = 0; l < p.n_layers; ++l) {
      out.loss += lambda * squared_norm(p.layer_weights[l].flat());
      kernels::add_scaled(out.grad_weights[l], 2.0 * lambda, p.layer_weights[l]);
    }
  }
  return out;
}

}  // namespace ngcn
