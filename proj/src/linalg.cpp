#include "zerovit/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "zerovit/error.hpp"

namespace zerovit::linalg {

namespace {

constexpr int kMaxSweeps = 100;
constexpr double kRelativeTolerance = 1e-12;

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (i != j) s += a(i, j) * a(i, j);
    }
  }
  return std::sqrt(s);
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorKind::kShape, "matrix " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                                       " given " + std::to_string(data_.size()) + " values");
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> values) {
  Matrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

double frobenius_norm(MatrixView w) {
  double s = 0.0;
  for (double v : w.data) s += v * v;
  return std::sqrt(s);
}

EigenDecomposition sym_eigen(MatrixView in) {
  if (in.rows != in.cols) {
    throw Error(ErrorKind::kShape, "sym_eigen: matrix is " + std::to_string(in.rows) + "x" +
                                       std::to_string(in.cols) + ", not square");
  }
  const std::size_t n = in.rows;
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (in(i, j) + in(j, i));
  }

  EigenDecomposition out;
  out.vectors = Matrix::identity(n);
  Matrix& v = out.vectors;

  const double tol = kRelativeTolerance * frobenius_norm(a);
  int sweep = 0;
  for (; off_diagonal_norm(a) > tol; ++sweep) {
    if (sweep == kMaxSweeps) {
      throw Error(ErrorKind::kNumeric, "sym_eigen: Jacobi did not converge in " +
                                           std::to_string(kMaxSweeps) + " sweeps (n=" +
                                           std::to_string(n) + ")");
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::fabs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  out.sweeps = sweep;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  Matrix sorted(n, n);
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.values[i] = a(order[i], order[i]);
    for (std::size_t k = 0; k < n; ++k) sorted(k, i) = v(k, order[i]);
  }
  out.vectors = std::move(sorted);
  return out;
}

std::vector<double> sym_eigenvalues(MatrixView a) { return sym_eigen(a).values; }

Matrix gram(MatrixView w) {
  const bool tall = w.rows >= w.cols;
  const std::size_t n = tall ? w.cols : w.rows;
  const std::size_t inner = tall ? w.rows : w.cols;
  Matrix g(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < inner; ++r) {
        s += tall ? w(r, i) * w(r, j) : w(i, r) * w(j, r);
      }
      g(i, j) = g(j, i) = s;
    }
  }
  return g;
}

double nuclear_norm(MatrixView w) {
  if (w.rows == 0 || w.cols == 0) return 0.0;
  double total = 0.0;
  for (double lambda : sym_eigenvalues(gram(w))) total += std::sqrt(std::max(lambda, 0.0));
  return total;
}

double rank_surrogate(MatrixView w) {
  if (w.rows == 0) throw Error(ErrorKind::kShape, "rank_surrogate: matrix has no rows");
  return nuclear_norm(w) / std::sqrt(static_cast<double>(w.rows));
}

}  // namespace zerovit::linalg
