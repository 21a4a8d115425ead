#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "ngcn/matrix.hpp"

namespace ngcn {

/// Sparse symmetric operator in CSR form, used for representation
/// propagation. Row entries are sorted by column so every traversal
/// order is deterministic.
struct SparseOperator {
  std::size_t n_nodes = 0;
  std::vector<std::size_t> row_ptr;  // n_nodes + 1
  std::vector<std::size_t> col;
  std::vector<double> coeff;

  std::size_t nnz() const { return col.size(); }
};

namespace kernels {

/// Process-wide switch between the OpenMP kernels and the serial reference
/// path. The parallel kernels are bit-identical to the serial ones: every
/// output element is produced by exactly one thread running the same inner
/// loop, and reductions are kept out of the parallel regions.
void set_parallel(bool on);
bool parallel_enabled();
int max_threads();

using EdgePair = std::pair<std::size_t, std::size_t>;

// Serial reference implementations, kept for tests and the benchmark.
namespace serial {
void spmm(const SparseOperator& a, const Matrix& x, Matrix& out);                // out = A x
void gemm(const Matrix& a, const Matrix& b, Matrix& out);                        // out = a b
void gemm_nt(const Matrix& a, const Matrix& b, Matrix& out);                     // out = a bᵀ
void gemm_tn(const Matrix& a, const Matrix& b, Matrix& out);                     // out = aᵀ b
void relu(const Matrix& pre, Matrix& out);                                       // max(pre, 0)
void relu_residual(const Matrix& pre, const Matrix& skip, Matrix& out);          // max(pre, 0) + skip
void relu_mask(const Matrix& grad, const Matrix& pre, Matrix& out);              // grad where pre > 0
void add_scaled(Matrix& acc, double alpha, const Matrix& x);                     // acc += alpha x
void edge_dots(const Matrix& reps, std::span<const EdgePair> pairs, std::span<double> out);
void adam_update(std::span<double> p, std::span<const double> g, std::span<double> m,
                 std::span<double> v, double eta, double beta1, double beta2, double eps,
                 long t);
}  // namespace serial

void spmm(const SparseOperator& a, const Matrix& x, Matrix& out);
void gemm(const Matrix& a, const Matrix& b, Matrix& out);
void gemm_nt(const Matrix& a, const Matrix& b, Matrix& out);
void gemm_tn(const Matrix& a, const Matrix& b, Matrix& out);
void relu(const Matrix& pre, Matrix& out);
void relu_residual(const Matrix& pre, const Matrix& skip, Matrix& out);
void relu_mask(const Matrix& grad, const Matrix& pre, Matrix& out);
void add_scaled(Matrix& acc, double alpha, const Matrix& x);
void edge_dots(const Matrix& reps, std::span<const EdgePair> pairs, std::span<double> out);
void adam_update(std::span<double> p, std::span<const double> g, std::span<double> m,
                 std::span<double> v, double eta, double beta1, double beta2, double eps, long t);

}  // namespace kernels
}  // namespace ngcn
