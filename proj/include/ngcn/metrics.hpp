#pragma once

#include <cstddef>
#include <span>
#include <utility>

namespace ngcn {

struct MetricPair {
  double rmse = 0.0;
  double mae = 0.0;
  std::size_t n = 0;  // evaluated edges
};

/// Root mean squared error and mean absolute error over (truth, prediction)
/// pairs. Throws on empty input.
MetricPair rmse_mae(std::span<const std::pair<double, double>> pairs);
MetricPair rmse_mae(std::span<const double> truth, std::span<const double> prediction);

}  // namespace ngcn
