#include "ngcn/metrics.hpp"

#include <cmath>

#include "ngcn/errors.hpp"

namespace ngcn {

MetricPair rmse_mae(std::span<const std::pair<double, double>> pairs) {
  if (pairs.empty()) throw DataError("rmse_mae: empty input");
  double sq = 0.0, ab = 0.0;
  for (const auto& [truth, pred] : pairs) {
    const double r = truth - pred;
    sq += r * r;
    ab += std::abs(r);
  }
  const double n = static_cast<double>(pairs.size());
  return {std::sqrt(sq / n), ab / n, pairs.size()};
}

MetricPair rmse_mae(std::span<const double> truth, std::span<const double> prediction) {
  if (truth.size() != prediction.size()) throw DataError("rmse_mae: size mismatch");
  if (truth.empty()) throw DataError("rmse_mae: empty input");
  double sq = 0.0, ab = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const double r = truth[k] - prediction[k];
    sq += r * r;
    ab += std::abs(r);
  }
  const double n = static_cast<double>(truth.size());
  return {std::sqrt(sq / n), ab / n, truth.size()};
}

}  // namespace ngcn
