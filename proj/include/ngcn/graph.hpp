#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ngcn/kernels.hpp"

namespace ngcn {

/// One undirected edge, stored once with i < j. A weight of zero never
/// appears: zero entries of the adjacency matrix mean "unknown".
struct Edge {
  std::size_t i = 0;
  std::size_t j = 0;
  double w = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct WeightScale {
  double min = 0.0;
  double max = 1.0;
};

/// Canonical undirected weighted graph: node count plus a deduplicated edge
/// list sorted by (i, j) with i < j. weight_scale records the original range
/// when min-max normalization was applied.
struct UndirectedWeightedGraph {
  std::size_t n_nodes = 0;
  std::vector<Edge> edges;
  std::optional<WeightScale> weight_scale;
};

struct ParseResult {
  UndirectedWeightedGraph graph;
  std::size_t dropped_self_loops = 0;
};

/// Train / validation / test partition of the known edges.
struct EdgeSplit {
  std::vector<Edge> train;
  std::vector<Edge> validation;
  std::vector<Edge> test;
  std::uint64_t seed = 0;
};

/// Symmetric propagation operator with coefficients a_ij / sqrt(d_ii d_jj),
/// where d is the weighted degree over training edges. No diagonal entries;
/// nodes without training edges have degree zero and produce no entries.
struct NormalizedAdjacency : SparseOperator {
  std::vector<double> degree;

  struct Entry {
    std::size_t i = 0;
    std::size_t j = 0;
    double c = 0.0;
  };
  std::vector<Entry> entries() const;
};

/// Parses MatrixMarket coordinate input (1-based indices, '%' comments).
/// The "%%MatrixMarket" banner is optional; without it entries are read as
/// one line per undirected pair. General (non-symmetric-tagged) inputs must
/// contain both (i,j) and (j,i) with equal values. Self-loops are dropped
/// and counted. Errors carry the offending line number.
ParseResult parse_matrix_market(std::istream& in);
ParseResult parse_matrix_market_file(const std::string& path);

/// Min-max scales all weights to (0, 1] by w / max(w) and records the scale.
/// A graph that already carries a weight_scale is returned unchanged.
UndirectedWeightedGraph normalize_weights(const UndirectedWeightedGraph& g);

/// Seeded shuffle into ten near-equal shards; shards 0-6 train, 7 validation,
/// 8-9 test. Requires at least 10 edges.
EdgeSplit split_edges(const UndirectedWeightedGraph& g, std::uint64_t seed);

/// Throws DataError unless every edge is a canonical edge of g with matching
/// weight. Shared precondition of the propagation-operator builders.
void check_train_edges(const UndirectedWeightedGraph& g, const std::vector<Edge>& train);

NormalizedAdjacency build_normalized_adjacency(const UndirectedWeightedGraph& g,
                                               const std::vector<Edge>& train);

// Canonical edge-list text format: "i j w" per line, 0-based, i < j.
void write_edge_list(std::ostream& out, const std::vector<Edge>& edges);
std::vector<Edge> read_edge_list(std::istream& in);

/// Reads edge-list text as a whole graph; n_nodes is one past the largest index.
UndirectedWeightedGraph read_edge_list_graph(std::istream& in);

/// JSON manifest describing a split: seed, shard-to-role mapping, counts.
std::string split_manifest_json(const EdgeSplit& split);

}  // namespace ngcn
