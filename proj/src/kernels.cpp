#include "vmf/kernels.hpp"

#include <cmath>
#include <cstdint>

#include "vmf/errors.hpp"

// Parallelization rule: every output element is written by exactly one
// thread, and the summation order inside each element is fixed. That keeps
// results bitwise identical to vmf::reference regardless of thread count.
// Loop bodies here must stay in sync with src/reference.cpp.

namespace vmf::kernels {

void affine(const Matrix& X, const Matrix& W, std::span<const double> bias,
            Matrix& out) {
  if (X.cols() != W.rows() || bias.size() != W.cols()) {
    throw ConfigError("affine: incompatible shapes");
  }
  out = Matrix(X.rows(), W.cols());
  const std::int64_t n_rows = static_cast<std::int64_t>(X.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t n = 0; n < n_rows; ++n) {
    const double* x = X.row(static_cast<std::size_t>(n));
    double* o = out.row(static_cast<std::size_t>(n));
    for (std::size_t j = 0; j < W.cols(); ++j) o[j] = bias[j];
    for (std::size_t i = 0; i < X.cols(); ++i) {
      const double xi = x[i];
      const double* w = W.row(i);
      for (std::size_t j = 0; j < W.cols(); ++j) o[j] += xi * w[j];
    }
  }
}

void matmul_tn(const Matrix& A, const Matrix& B, Matrix& out) {
  if (A.rows() != B.rows()) {
    throw ConfigError("matmul_tn: row counts differ");
  }
  out = Matrix(A.cols(), B.cols());
  const std::int64_t n_cols = static_cast<std::int64_t>(A.cols());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n_cols; ++i) {
    double* o = out.row(static_cast<std::size_t>(i));
    for (std::size_t n = 0; n < A.rows(); ++n) {
      const double a = A(n, static_cast<std::size_t>(i));
      const double* b = B.row(n);
      for (std::size_t j = 0; j < B.cols(); ++j) o[j] += a * b[j];
    }
  }
}

void matmul_nt(const Matrix& A, const Matrix& B, Matrix& out) {
  if (A.cols() != B.cols()) {
    throw ConfigError("matmul_nt: inner dimensions differ");
  }
  out = Matrix(A.rows(), B.rows());
  const std::int64_t n_rows = static_cast<std::int64_t>(A.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t n = 0; n < n_rows; ++n) {
    const double* a = A.row(static_cast<std::size_t>(n));
    double* o = out.row(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < B.rows(); ++i) {
      const double* b = B.row(i);
      double acc = 0.0;
      for (std::size_t j = 0; j < A.cols(); ++j) acc += a[j] * b[j];
      o[i] = acc;
    }
  }
}

void column_sums(const Matrix& A, std::vector<double>& out) {
  out.assign(A.cols(), 0.0);
  const std::int64_t n_cols = static_cast<std::int64_t>(A.cols());
#pragma omp parallel for schedule(static)
  for (std::int64_t j = 0; j < n_cols; ++j) {
    double acc = 0.0;
    for (std::size_t n = 0; n < A.rows(); ++n) {
      acc += A(n, static_cast<std::size_t>(j));
    }
    out[static_cast<std::size_t>(j)] = acc;
  }
}

void normalize_rows(const Matrix& Z, Matrix& out, std::vector<double>& norms) {
  out = Matrix(Z.rows(), Z.cols());
  norms.assign(Z.rows(), 0.0);
  const std::int64_t n_rows = static_cast<std::int64_t>(Z.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t n = 0; n < n_rows; ++n) {
    const double* z = Z.row(static_cast<std::size_t>(n));
    double acc = 0.0;
    for (std::size_t j = 0; j < Z.cols(); ++j) acc += z[j] * z[j];
    norms[static_cast<std::size_t>(n)] = std::sqrt(acc);
  }
  // Throwing from inside an OpenMP region is undefined, so validate after.
  for (std::size_t n = 0; n < Z.rows(); ++n) {
    if (!(norms[n] >= 1e-12)) {
      throw ZeroNormError("normalize_rows: row " + std::to_string(n) +
                          " has vanishing norm");
    }
  }
#pragma omp parallel for schedule(static)
  for (std::int64_t n = 0; n < n_rows; ++n) {
    const double* z = Z.row(static_cast<std::size_t>(n));
    double* o = out.row(static_cast<std::size_t>(n));
    const double inv = 1.0 / norms[static_cast<std::size_t>(n)];
    for (std::size_t j = 0; j < Z.cols(); ++j) o[j] = z[j] * inv;
  }
}

void apply_relu(const Matrix& Z, Matrix& out) {
  out = Matrix(Z.rows(), Z.cols());
  const std::int64_t total = static_cast<std::int64_t>(Z.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t t = 0; t < total; ++t) {
    const double z = Z.data()[static_cast<std::size_t>(t)];
    out.data()[static_cast<std::size_t>(t)] = z > 0.0 ? z : 0.0;
  }
}

void apply_tanh(const Matrix& Z, Matrix& out) {
  out = Matrix(Z.rows(), Z.cols());
  const std::int64_t total = static_cast<std::int64_t>(Z.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t t = 0; t < total; ++t) {
    out.data()[static_cast<std::size_t>(t)] =
        std::tanh(Z.data()[static_cast<std::size_t>(t)]);
  }
}

void relu_backward(const Matrix& Z, const Matrix& upstream, Matrix& out) {
  Matrix::require_same_shape(Z, upstream, "relu_backward");
  out = Matrix(Z.rows(), Z.cols());
  const std::int64_t total = static_cast<std::int64_t>(Z.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t t = 0; t < total; ++t) {
    const std::size_t u = static_cast<std::size_t>(t);
    out.data()[u] = Z.data()[u] > 0.0 ? upstream.data()[u] : 0.0;
  }
}

void tanh_backward(const Matrix& Z, const Matrix& upstream, Matrix& out) {
  Matrix::require_same_shape(Z, upstream, "tanh_backward");
  out = Matrix(Z.rows(), Z.cols());
  const std::int64_t total = static_cast<std::int64_t>(Z.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t t = 0; t < total; ++t) {
    const std::size_t u = static_cast<std::size_t>(t);
    const double th = std::tanh(Z.data()[u]);
    out.data()[u] = upstream.data()[u] * (1.0 - th * th);
  }
}

void softmax_rows(const Matrix& scores, Matrix& out) {
  out = Matrix(scores.rows(), scores.cols());
  const std::int64_t n_rows = static_cast<std::int64_t>(scores.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t n = 0; n < n_rows; ++n) {
    const double* s = scores.row(static_cast<std::size_t>(n));
    double* o = out.row(static_cast<std::size_t>(n));
    double mx = s[0];
    for (std::size_t j = 1; j < scores.cols(); ++j) {
      if (s[j] > mx) mx = s[j];
    }
    double total = 0.0;
    for (std::size_t j = 0; j < scores.cols(); ++j) {
      o[j] = std::exp(s[j] - mx);
      total += o[j];
    }
    const double inv = 1.0 / total;
    for (std::size_t j = 0; j < scores.cols(); ++j) o[j] *= inv;
  }
}

}  // namespace vmf::kernels
