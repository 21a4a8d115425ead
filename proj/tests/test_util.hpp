#pragma once

// Shared fixtures and oracles for the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "ngcn/baselines.hpp"
#include "ngcn/graph.hpp"
#include "ngcn/model.hpp"
#include "ngcn/rng.hpp"

namespace ngcn::testutil {

// ---------------------------------------------------------------------------
// synthetic graphs

/// Random canonical graph: m distinct pairs over n nodes, weights in (0, 1].
inline UndirectedWeightedGraph random_graph(std::size_t n, std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Edge> edges;
  std::vector<std::vector<bool>> used(n, std::vector<bool>(n, false));
  while (edges.size() < m) {
    std::size_t i = rng.next_index(n);
    std::size_t j = rng.next_index(n);
    if (i == j) continue;
    if (i > j) std::swap(i, j);
    if (used[i][j]) continue;
    used[i][j] = true;
    edges.push_back({i, j, 1e-6 + rng.next_unit()});
  }
  std::sort(edges.begin(), edges.end(),
            [](const Edge& a, const Edge& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
  return {n, std::move(edges), std::nullopt};
}

/// Nonnegative factor rows z_i in [0,1)^rank.
inline std::vector<std::vector<double>> random_factors(std::size_t n, std::size_t rank,
                                                       std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> z(n, std::vector<double>(rank));
  for (auto& row : z)
    for (double& x : row) x = rng.next_unit();
  return z;
}

inline double factor_weight(const std::vector<std::vector<double>>& z, std::size_t i,
                            std::size_t j) {
  double s = 0.0;
  for (std::size_t k = 0; k < z[i].size(); ++k) s += z[i][k] * z[j][k];
  return std::max(s, 1e-9);
}

/// Weights <z_i, z_j> from rank-`rank` nonnegative factors; each pair i < j is
/// observed independently with probability observed_frac.
inline UndirectedWeightedGraph rank_k_graph(std::size_t n, std::size_t rank, double observed_frac,
                                            std::uint64_t seed) {
  const auto z = random_factors(n, rank, mix_seed(seed, 10));
  Rng rng(mix_seed(seed, 11));
  UndirectedWeightedGraph g;
  g.n_nodes = n;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.next_unit() < observed_frac) g.edges.push_back({i, j, factor_weight(z, i, j)});
  return g;
}

/// Rank-`rank` factor weights overlaid on a k-nearest-neighbour topology in
/// factor space. With mixture > 0 the weights blend the factor inner product
/// with a locality kernel over the same space, so part of the signal lives in
/// the neighbourhood structure rather than in any low-rank factorization.
inline UndirectedWeightedGraph knn_rank_graph(std::size_t n, std::size_t rank, std::size_t knn,
                                              std::uint64_t seed, double mixture = 0.0) {
  const auto z = random_factors(n, rank, mix_seed(seed, 20));
  auto dist2 = [&](std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t k = 0; k < rank; ++k) {
      const double d = z[a][k] - z[b][k];
      s += d * d;
    }
    return s;
  };
  std::vector<std::vector<bool>> used(n, std::vector<bool>(n, false));
  UndirectedWeightedGraph g;
  g.n_nodes = n;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::size_t>> near;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) near.emplace_back(dist2(i, j), j);
    std::partial_sort(near.begin(), near.begin() + static_cast<long>(std::min(knn, near.size())),
                      near.end());
    for (std::size_t k = 0; k < std::min(knn, near.size()); ++k) {
      std::size_t a = i, b = near[k].second;
      if (a > b) std::swap(a, b);
      if (used[a][b]) continue;
      used[a][b] = true;
      g.edges.push_back({a, b, factor_weight(z, a, b)});
    }
  }
  if (mixture > 0.0) {
    double mean_d2 = 0.0;
    for (const Edge& e : g.edges) mean_d2 += dist2(e.i, e.j);
    mean_d2 /= static_cast<double>(g.edges.size());
    for (Edge& e : g.edges)
      e.w = (1.0 - mixture) * e.w + mixture * std::exp(-dist2(e.i, e.j) / mean_d2);
  }
  std::sort(g.edges.begin(), g.edges.end(),
            [](const Edge& a, const Edge& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
  return g;
}

/// MatrixMarket text for a canonical graph (symmetric, lower triangle).
inline std::string to_matrix_market(const UndirectedWeightedGraph& g) {
  std::string s = "%%MatrixMarket matrix coordinate real symmetric\n";
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%zu %zu %zu\n", g.n_nodes, g.n_nodes, g.edges.size());
  s += buf;
  for (const Edge& e : g.edges) {
    std::snprintf(buf, sizeof(buf), "%zu %zu %.17g\n", e.j + 1, e.i + 1, e.w);
    s += buf;
  }
  return s;
}

// ---------------------------------------------------------------------------
// finite-difference oracles

inline std::vector<double*> param_coords(NgcnParams& p) {
  std::vector<double*> out;
  for (double& x : p.node_features.flat()) out.push_back(&x);
  for (Matrix& w : p.layer_weights)
    for (double& x : w.flat()) out.push_back(&x);
  for (double& x : p.collab_factors.flat()) out.push_back(&x);
  out.push_back(&p.fusion_weight);
  return out;
}

inline std::vector<double> grad_coords(const NgcnGradients& g) {
  std::vector<double> out;
  for (double x : g.node_features.flat()) out.push_back(x);
  for (const Matrix& w : g.layer_weights)
    for (double x : w.flat()) out.push_back(x);
  for (double x : g.collab_factors.flat()) out.push_back(x);
  out.push_back(g.fusion_weight);
  return out;
}

inline std::vector<double*> param_coords(GcnParams& p) {
  std::vector<double*> out;
  for (double& x : p.node_features.flat()) out.push_back(&x);
  for (Matrix& w : p.layer_weights)
    for (double& x : w.flat()) out.push_back(&x);
  return out;
}

inline std::vector<double> grad_coords(const GcnEval& e) {
  std::vector<double> out;
  for (double x : e.grad_features.flat()) out.push_back(x);
  for (const Matrix& w : e.grad_weights)
    for (double x : w.flat()) out.push_back(x);
  return out;
}

/// Central finite differences of `loss` over the given coordinates.
template <class LossFn>
std::vector<double> finite_diff(std::vector<double*>& coords, LossFn&& loss, double step = 1e-5) {
  std::vector<double> out(coords.size());
  for (std::size_t k = 0; k < coords.size(); ++k) {
    const double saved = *coords[k];
    *coords[k] = saved + step;
    const double up = loss();
    *coords[k] = saved - step;
    const double down = loss();
    *coords[k] = saved;
    out[k] = (up - down) / (2.0 * step);
  }
  return out;
}

/// Relative error with a floor: below the floor a central-difference quotient
/// is dominated by cancellation noise and only absolute agreement is
/// meaningful. A quotient of a function of magnitude F at step h carries
/// absolute noise of roughly eps * F / h, so the floor scales with F.
inline double rel_err(double a, double b, double function_scale = 1.0) {
  const double floor = 1e-6 * std::max(1.0, std::abs(function_scale));
  const double denom = std::max({std::abs(a), std::abs(b), floor});
  return std::abs(a - b) / denom;
}

/// Random parameters sized for gradient checks: magnitudes large enough to
/// keep every pre-activation away from the ReLU kink, signed layer weights so
/// both mask branches are exercised, and factor rows scaled so both prediction
/// heads land in a similar range (keeps the loss, and with it the
/// finite-difference noise floor, moderate).
inline NgcnParams fd_params(std::size_t n, std::size_t f, std::size_t d, std::size_t layers,
                            std::uint64_t seed) {
  NgcnParams p;
  p.n_nodes = n;
  p.feature_dim = f;
  p.latent_dim = d;
  p.n_layers = layers;
  Rng rng(seed);
  p.node_features = Matrix(n, f);
  for (double& x : p.node_features.flat()) x = 0.1 + 0.8 * rng.next_unit();
  for (std::size_t l = 0; l < layers; ++l) {
    Matrix w(f, f);
    for (double& x : w.flat()) x = -0.6 + 1.2 * rng.next_unit();
    p.layer_weights.push_back(std::move(w));
  }
  p.collab_factors = Matrix(n, d);
  for (double& x : p.collab_factors.flat()) x = 0.5 + 0.7 * rng.next_unit();
  p.fusion_weight = 0.3 + 0.4 * rng.next_unit();
  return p;
}

inline double min_abs_pre_activation(const ForwardTrace& trace) {
  double lo = 1e300;
  for (const Matrix& pre : trace.pre_activations)
    for (double x : pre.flat()) lo = std::min(lo, std::abs(x));
  return lo;
}

// ---------------------------------------------------------------------------
// statistics oracle

/// Brute-force exact one-sided signed-rank p: enumerates all 2^n sign
/// assignments. Independent of the production implementation.
inline double wilcoxon_brute_force_p(const std::vector<double>& diffs) {
  std::vector<double> nonzero;
  for (double d : diffs)
    if (d != 0.0) nonzero.push_back(d);
  const std::size_t n = nonzero.size();

  std::vector<double> mags(n);
  for (std::size_t k = 0; k < n; ++k) mags[k] = std::abs(nonzero[k]);
  std::vector<long> doubled(n);
  for (std::size_t k = 0; k < n; ++k) {
    long below = 0, equal = 0;
    for (std::size_t t = 0; t < n; ++t) {
      if (mags[t] < mags[k]) ++below;
      if (mags[t] == mags[k]) ++equal;
    }
    // occupies positions below+1 .. below+equal; doubled average rank
    doubled[k] = 2 * below + equal + 1;
  }
  long observed = 0;
  for (std::size_t k = 0; k < n; ++k)
    if (nonzero[k] > 0.0) observed += doubled[k];

  std::uint64_t at_least = 0;
  for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
    long t = 0;
    for (std::size_t k = 0; k < n; ++k)
      if (mask & (1ULL << k)) t += doubled[k];
    if (t >= observed) ++at_least;
  }
  return static_cast<double>(at_least) / std::pow(2.0, static_cast<double>(n));
}

// ---------------------------------------------------------------------------
// published comparison cells (RMSE and MAE per dataset, eight models)

inline const std::vector<std::string> kComparisonModels = {"M1", "M2", "M3", "M4",
                                                           "M5", "M6", "M7", "M8"};
inline const std::vector<std::string> kComparisonCases = {"D1/RMSE", "D1/MAE", "D2/RMSE",
                                                          "D2/MAE",  "D3/RMSE", "D3/MAE",
                                                          "D4/RMSE", "D4/MAE"};
inline const std::vector<std::vector<double>> kComparisonCells = {
    {0.04123, 0.03834, 0.03848, 0.04026, 0.03939, 0.03818, 0.03857, 0.03520},
    {0.02312, 0.02317, 0.02320, 0.02298, 0.02171, 0.02280, 0.02168, 0.02068},
    {0.07388, 0.07029, 0.06921, 0.07205, 0.07046, 0.06796, 0.06912, 0.06873},
    {0.03445, 0.03508, 0.03504, 0.03774, 0.03336, 0.03595, 0.03341, 0.03191},
    {0.07355, 0.06121, 0.07339, 0.09000, 0.07453, 0.06238, 0.07614, 0.06050},
    {0.05030, 0.04527, 0.05564, 0.06150, 0.05062, 0.04651, 0.05030, 0.04368},
    {0.08809, 0.08619, 0.08576, 0.08716, 0.08203, 0.08231, 0.08141, 0.07323},
    {0.04523, 0.05366, 0.05181, 0.05046, 0.04227, 0.04796, 0.04224, 0.04028},
};

/// Mean ranks implied by the cells above (ties averaged), frozen by hand.
inline const std::vector<double> kComparisonMeanRanks = {5.9375, 4.875,  5.5,  7.0,
                                                        4.375,  3.625, 3.5625, 1.125};

}  // namespace ngcn::testutil
