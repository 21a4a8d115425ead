#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ngcn/graph.hpp"
#include "ngcn/matrix.hpp"

namespace ngcn {

/// Matrix-factorization baseline: one symmetric factor matrix, prediction by
/// inner product of factor rows.
struct MfParams {
  std::size_t n_nodes = 0;
  std::size_t latent_dim = 0;
  Matrix factors;  // n_nodes x latent_dim
};

struct MfEval {
  double loss = 0.0;
  Matrix grad_factors;
};

MfParams mf_init(std::size_t n_nodes, std::size_t latent_dim, std::uint64_t seed);
double mf_predict(const MfParams& p, std::size_t i, std::size_t j);

/// Squared-error loss over the batch plus lambda * ||factor rows of batch
/// nodes||^2, with analytic gradients.
MfEval mf_forward_loss_grads(const MfParams& p, std::span<const Edge> batch, double lambda);

/// Vanilla graph-convolution baseline: propagation with self-loops and
/// degrees of (A + I), ReLU activation, no residual connection.
struct GcnParams {
  std::size_t n_nodes = 0;
  std::size_t feature_dim = 0;
  std::size_t n_layers = 0;
  Matrix node_features;
  std::vector<Matrix> layer_weights;
};

struct GcnTrace {
  std::vector<Matrix> layer_outputs;    // n_layers + 1
  std::vector<Matrix> pre_activations;  // n_layers
};

struct GcnEval {
  double loss = 0.0;
  Matrix grad_features;
  std::vector<Matrix> grad_weights;
};

GcnParams gcn_init(std::size_t n_nodes, std::size_t feature_dim, std::size_t n_layers,
                   std::uint64_t seed);

/// D^{-1/2} (A + I) D^{-1/2} over the training edges, with weighted entries
/// and weighted degrees d_ii = 1 + sum of incident training weights.
SparseOperator build_gcn_propagation(const UndirectedWeightedGraph& g,
                                     const std::vector<Edge>& train);

GcnTrace gcn_forward(const GcnParams& p, const SparseOperator& op);
double gcn_predict(const GcnParams& p, const GcnTrace& trace, std::size_t i, std::size_t j);

/// Squared-error loss on inner products of final representations plus
/// lambda * (||feature rows of batch nodes||^2 + sum ||W||^2), with gradients.
GcnEval gcn_loss_grads(const GcnParams& p, const SparseOperator& op, std::span<const Edge> batch,
                       double lambda);

}  // namespace ngcn
