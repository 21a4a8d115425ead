#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ngcn/graph.hpp"
#include "ngcn/matrix.hpp"

namespace ngcn {

/// All trainable tensors of the fused model: learned node features, the
/// propagation layer weights, the collaboration factor matrix, and the scalar
/// blending the two prediction heads.
struct NgcnParams {
  std::size_t n_nodes = 0;
  std::size_t feature_dim = 0;  // width of node_features and every layer
  std::size_t latent_dim = 0;   // width of collab_factors
  std::size_t n_layers = 0;
  Matrix node_features;               // n_nodes x feature_dim
  std::vector<Matrix> layer_weights;  // n_layers square matrices
  Matrix collab_factors;              // n_nodes x latent_dim
  double fusion_weight = 0.5;
};

/// Per-layer activations cached by forward() and reused by backprop.
/// layer_outputs[0] equals the node features; layer_outputs[l+1] =
/// relu(pre_activations[l]) + layer_outputs[l].
struct ForwardTrace {
  std::vector<Matrix> layer_outputs;    // n_layers + 1
  std::vector<Matrix> pre_activations;  // n_layers
};

/// Gradients, shape-congruent with NgcnParams.
struct NgcnGradients {
  Matrix node_features;
  std::vector<Matrix> layer_weights;
  Matrix collab_factors;
  double fusion_weight = 0.0;
};

// Initialization streams. Tensors are drawn from per-tensor seeded streams so
// that equal-shape tensors start bit-identical across model kinds trained
// with the same seed.
inline constexpr std::uint64_t kStreamFeatures = 1;
inline constexpr std::uint64_t kStreamLayer0 = 2;     // layer l uses kStreamLayer0 + l
inline constexpr std::uint64_t kStreamFactors = 1000;

/// Entries i.i.d. uniform on [0, 0.05] from the given stream of `seed`.
Matrix init_uniform_tensor(std::size_t rows, std::size_t cols, std::uint64_t seed,
                           std::uint64_t stream);

NgcnParams init_params(std::size_t n_nodes, std::size_t feature_dim, std::size_t latent_dim,
                       std::size_t n_layers, std::uint64_t seed);

/// Residual weighted propagation over the full node set.
ForwardTrace forward(const NgcnParams& p, const NormalizedAdjacency& adj);

/// Inner product of the collaboration factor rows of i and j.
double collab_score(const NgcnParams& p, std::size_t i, std::size_t j);

/// fusion_weight * <h_i, h_j> + (1 - fusion_weight) * <y_i, y_j>, with h the
/// final-layer representations. No output activation.
double predict_edge(const NgcnParams& p, const ForwardTrace& trace, std::size_t i, std::size_t j);

/// Joint squared-error loss over the batch: fused head + propagation head +
/// collaboration head, plus lambda times the squared norm of the fusion
/// weight, all layer weights, and the feature/factor rows of batch nodes.
double batch_loss(const NgcnParams& p, const ForwardTrace& trace, std::span<const Edge> batch,
                  double lambda);

/// Analytic gradients of batch_loss. The 4-argument form runs forward itself;
/// the trace overload reuses a caller-provided trace of the same parameters.
NgcnGradients batch_gradients(const NgcnParams& p, const NormalizedAdjacency& adj,
                              std::span<const Edge> batch, double lambda);
NgcnGradients batch_gradients(const NgcnParams& p, const NormalizedAdjacency& adj,
                              const ForwardTrace& trace, std::span<const Edge> batch,
                              double lambda);

}  // namespace ngcn
