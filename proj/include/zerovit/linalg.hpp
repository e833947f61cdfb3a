#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace zerovit::linalg {

/// Read-only row-major view of a rows x cols block of doubles.
struct MatrixView {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::span<const double> data;

  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  MatrixView view() const { return {rows_, cols_, data_}; }
  operator MatrixView() const { return view(); }  // NOLINT(google-explicit-constructor)

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct EigenDecomposition {
  std::vector<double> values;  // descending
  Matrix vectors;              // column i pairs with values[i]
  int sweeps = 0;
};

double frobenius_norm(MatrixView w);

// Cyclic Jacobi on the symmetrized input (A + A^T) / 2. Converges when the
// off-diagonal Frobenius mass drops to 1e-12 * ||A||_F; throws a numeric
// error after 100 sweeps otherwise.
EigenDecomposition sym_eigen(MatrixView a);
std::vector<double> sym_eigenvalues(MatrixView a);

// The min(U, V)-sized Gram matrix: W^T W when U >= V, else W W^T.
Matrix gram(MatrixView w);

// Sum of singular values, via sqrt of clamped Gram eigenvalues.
double nuclear_norm(MatrixView w);

// nuclear_norm(W) / sqrt(U), a continuous stand-in for rank(W) when
// ||W||_F <= sqrt(U). Diagnostics only.
double rank_surrogate(MatrixView w);

}  // namespace zerovit::linalg
