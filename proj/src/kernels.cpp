#include "ngcn/kernels.hpp"

#include <cmath>
#include <cstdint>

#include "ngcn/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ngcn::kernels {

namespace {

bool g_parallel = true;

void check_spmm(const SparseOperator& a, const Matrix& x, Matrix& out) {
  if (x.rows() != a.n_nodes) throw DataError("spmm: operand rows do not match operator size");
  if (!out.same_shape(x)) out = Matrix(x.rows(), x.cols());
}

inline void spmm_row(const SparseOperator& a, const Matrix& x, Matrix& out, std::size_t i) {
  double* o = out.row(i);
  std::fill(o, o + out.cols(), 0.0);
  for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
    const double c = a.coeff[k];
    const double* src = x.row(a.col[k]);
    for (std::size_t t = 0; t < x.cols(); ++t) o[t] += c * src[t];
  }
}

void check_gemm(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.cols() != b.rows()) throw DataError("gemm: inner dimensions differ");
  if (out.rows() != a.rows() || out.cols() != b.cols()) out = Matrix(a.rows(), b.cols());
}

inline void gemm_row(const Matrix& a, const Matrix& b, Matrix& out, std::size_t i) {
  double* o = out.row(i);
  std::fill(o, o + out.cols(), 0.0);
  const double* ar = a.row(i);
  for (std::size_t k = 0; k < a.cols(); ++k) {
    const double av = ar[k];
    const double* br = b.row(k);
    for (std::size_t j = 0; j < b.cols(); ++j) o[j] += av * br[j];
  }
}

void check_gemm_nt(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.cols() != b.cols()) throw DataError("gemm_nt: inner dimensions differ");
  if (out.rows() != a.rows() || out.cols() != b.rows()) out = Matrix(a.rows(), b.rows());
}

inline void gemm_nt_row(const Matrix& a, const Matrix& b, Matrix& out, std::size_t i) {
  double* o = out.row(i);
  for (std::size_t j = 0; j < b.rows(); ++j) o[j] = dot(a.row_span(i), b.row_span(j));
}

void check_gemm_tn(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.rows() != b.rows()) throw DataError("gemm_tn: inner dimensions differ");
  if (out.rows() != a.cols() || out.cols() != b.cols()) out = Matrix(a.cols(), b.cols());
}

inline void gemm_tn_row(const Matrix& a, const Matrix& b, Matrix& out, std::size_t c) {
  // out row c = sum over n of a(n, c) * b row n
  double* o = out.row(c);
  std::fill(o, o + out.cols(), 0.0);
  for (std::size_t n = 0; n < a.rows(); ++n) {
    const double av = a(n, c);
    if (av == 0.0) continue;
    const double* br = b.row(n);
    for (std::size_t j = 0; j < b.cols(); ++j) o[j] += av * br[j];
  }
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (!a.same_shape(b)) throw DataError(std::string(what) + ": shape mismatch");
}

}  // namespace

void set_parallel(bool on) { g_parallel = on; }
bool parallel_enabled() { return g_parallel; }

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace serial {

void spmm(const SparseOperator& a, const Matrix& x, Matrix& out) {
  check_spmm(a, x, out);
  for (std::size_t i = 0; i < a.n_nodes; ++i) spmm_row(a, x, out, i);
}

void gemm(const Matrix& a, const Matrix& b, Matrix& out) {
  check_gemm(a, b, out);
  for (std::size_t i = 0; i < a.rows(); ++i) gemm_row(a, b, out, i);
}

void gemm_nt(const Matrix& a, const Matrix& b, Matrix& out) {
  check_gemm_nt(a, b, out);
  for (std::size_t i = 0; i < a.rows(); ++i) gemm_nt_row(a, b, out, i);
}

void gemm_tn(const Matrix& a, const Matrix& b, Matrix& out) {
  check_gemm_tn(a, b, out);
  for (std::size_t c = 0; c < a.cols(); ++c) gemm_tn_row(a, b, out, c);
}

void relu(const Matrix& pre, Matrix& out) {
  if (!out.same_shape(pre)) out = Matrix(pre.rows(), pre.cols());
  auto p = pre.flat();
  auto o = out.flat();
  for (std::size_t k = 0; k < p.size(); ++k) o[k] = p[k] > 0.0 ? p[k] : 0.0;
}

void relu_residual(const Matrix& pre, const Matrix& skip, Matrix& out) {
  require_same_shape(pre, skip, "relu_residual");
  if (!out.same_shape(pre)) out = Matrix(pre.rows(), pre.cols());
  auto p = pre.flat();
  auto s = skip.flat();
  auto o = out.flat();
  for (std::size_t k = 0; k < p.size(); ++k) o[k] = (p[k] > 0.0 ? p[k] : 0.0) + s[k];
}

void relu_mask(const Matrix& grad, const Matrix& pre, Matrix& out) {
  require_same_shape(grad, pre, "relu_mask");
  if (!out.same_shape(pre)) out = Matrix(pre.rows(), pre.cols());
  auto g = grad.flat();
  auto p = pre.flat();
  auto o = out.flat();
  for (std::size_t k = 0; k < p.size(); ++k) o[k] = p[k] > 0.0 ? g[k] : 0.0;
}

void add_scaled(Matrix& acc, double alpha, const Matrix& x) {
  require_same_shape(acc, x, "add_scaled");
  auto a = acc.flat();
  auto xs = x.flat();
  for (std::size_t k = 0; k < a.size(); ++k) a[k] += alpha * xs[k];
}

void edge_dots(const Matrix& reps, std::span<const EdgePair> pairs, std::span<double> out) {
  if (out.size() != pairs.size()) throw DataError("edge_dots: output size mismatch");
  for (std::size_t e = 0; e < pairs.size(); ++e)
    out[e] = dot(reps.row_span(pairs[e].first), reps.row_span(pairs[e].second));
}

void adam_update(std::span<double> p, std::span<const double> g, std::span<double> m,
                 std::span<double> v, double eta, double beta1, double beta2, double eps,
                 long t) {
  const double c1 = 1.0 / (1.0 - std::pow(beta1, static_cast<double>(t)));
  const double c2 = 1.0 / (1.0 - std::pow(beta2, static_cast<double>(t)));
  for (std::size_t k = 0; k < p.size(); ++k) {
    m[k] = beta1 * m[k] + (1.0 - beta1) * g[k];
    v[k] = beta2 * v[k] + (1.0 - beta2) * g[k] * g[k];
    p[k] -= eta * (m[k] * c1) / (std::sqrt(v[k] * c2) + eps);
  }
}

}  // namespace serial

void spmm(const SparseOperator& a, const Matrix& x, Matrix& out) {
  check_spmm(a, x, out);
  if (!g_parallel) {
    for (std::size_t i = 0; i < a.n_nodes; ++i) spmm_row(a, x, out, i);
    return;
  }
  const std::int64_t n = static_cast<std::int64_t>(a.n_nodes);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) spmm_row(a, x, out, static_cast<std::size_t>(i));
}

void gemm(const Matrix& a, const Matrix& b, Matrix& out) {
  check_gemm(a, b, out);
  if (!g_parallel) {
    for (std::size_t i = 0; i < a.rows(); ++i) gemm_row(a, b, out, i);
    return;
  }
  const std::int64_t n = static_cast<std::int64_t>(a.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) gemm_row(a, b, out, static_cast<std::size_t>(i));
}

void gemm_nt(const Matrix& a, const Matrix& b, Matrix& out) {
  check_gemm_nt(a, b, out);
  if (!g_parallel) {
    for (std::size_t i = 0; i < a.rows(); ++i) gemm_nt_row(a, b, out, i);
    return;
  }
  const std::int64_t n = static_cast<std::int64_t>(a.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) gemm_nt_row(a, b, out, static_cast<std::size_t>(i));
}

void gemm_tn(const Matrix& a, const Matrix& b, Matrix& out) {
  check_gemm_tn(a, b, out);
  if (!g_parallel) {
    for (std::size_t c = 0; c < a.cols(); ++c) gemm_tn_row(a, b, out, c);
    return;
  }
  const std::int64_t n = static_cast<std::int64_t>(a.cols());
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < n; ++c) gemm_tn_row(a, b, out, static_cast<std::size_t>(c));
}

void relu(const Matrix& pre, Matrix& out) {
  if (!out.same_shape(pre)) out = Matrix(pre.rows(), pre.cols());
  auto p = pre.flat();
  auto o = out.flat();
  const std::int64_t n = static_cast<std::int64_t>(p.size());
  if (!g_parallel) {
    serial::relu(pre, out);
    return;
  }
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < n; ++k) o[k] = p[k] > 0.0 ? p[k] : 0.0;
}

void relu_residual(const Matrix& pre, const Matrix& skip, Matrix& out) {
  require_same_shape(pre, skip, "relu_residual");
  if (!out.same_shape(pre)) out = Matrix(pre.rows(), pre.cols());
  if (!g_parallel) {
    serial::relu_residual(pre, skip, out);
    return;
  }
  auto p = pre.flat();
  auto s = skip.flat();
  auto o = out.flat();
  const std::int64_t n = static_cast<std::int64_t>(p.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < n; ++k) o[k] = (p[k] > 0.0 ? p[k] : 0.0) + s[k];
}

void relu_mask(const Matrix& grad, const Matrix& pre, Matrix& out) {
  require_same_shape(grad, pre, "relu_mask");
  if (!out.same_shape(pre)) out = Matrix(pre.rows(), pre.cols());
  if (!g_parallel) {
    serial::relu_mask(grad, pre, out);
    return;
  }
  auto g = grad.flat();
  auto p = pre.flat();
  auto o = out.flat();
  const std::int64_t n = static_cast<std::int64_t>(p.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < n; ++k) o[k] = p[k] > 0.0 ? g[k] : 0.0;
}

void add_scaled(Matrix& acc, double alpha, const Matrix& x) {
  require_same_shape(acc, x, "add_scaled");
  if (!g_parallel) {
    serial::add_scaled(acc, alpha, x);
    return;
  }
  auto a = acc.flat();
  auto xs = x.flat();
  const std::int64_t n = static_cast<std::int64_t>(a.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < n; ++k) a[k] += alpha * xs[k];
}

void edge_dots(const Matrix& reps, std::span<const EdgePair> pairs, std::span<double> out) {
  if (out.size() != pairs.size()) throw DataError("edge_dots: output size mismatch");
  if (!g_parallel) {
    serial::edge_dots(reps, pairs, out);
    return;
  }
  const std::int64_t n = static_cast<std::int64_t>(pairs.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t e = 0; e < n; ++e)
    out[e] = dot(reps.row_span(pairs[e].first), reps.row_span(pairs[e].second));
}

void adam_update(std::span<double> p, std::span<const double> g, std::span<double> m,
                 std::span<double> v, double eta, double beta1, double beta2, double eps,
                 long t) {
  if (!g_parallel) {
    serial::adam_update(p, g, m, v, eta, beta1, beta2, eps, t);
    return;
  }
  const double c1 = 1.0 / (1.0 - std::pow(beta1, static_cast<double>(t)));
  const double c2 = 1.0 / (1.0 - std::pow(beta2, static_cast<double>(t)));
  const std::int64_t n = static_cast<std::int64_t>(p.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < n; ++k) {
    m[k] = beta1 * m[k] + (1.0 - beta1) * g[k];
    v[k] = beta2 * v[k] + (1.0 - beta2) * g[k] * g[k];
    p[k] -= eta * (m[k] * c1) / (std::sqrt(v[k] * c2) + eps);
  }
}

}  // namespace ngcn::kernels
