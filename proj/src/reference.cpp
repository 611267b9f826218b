#include "vmf/kernels.hpp"

#include <cmath>

#include "vmf/errors.hpp"

// Serial twins of vmf::kernels. Loop bodies are kept in sync with
// src/kernels.cpp minus the pragmas; tests assert bitwise equality.

namespace vmf::reference {

void affine(const Matrix& X, const Matrix& W, std::span<const double> bias,
            Matrix& out) {
  if (X.cols() != W.rows() || bias.size() != W.cols()) {
    throw ConfigError("affine: incompatible shapes");
  }
  out = Matrix(X.rows(), W.cols());
  for (std::size_t n = 0; n < X.rows(); ++n) {
    const double* x = X.row(n);
    double* o = out.row(n);
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
  for (std::size_t i = 0; i < A.cols(); ++i) {
    double* o = out.row(i);
    for (std::size_t n = 0; n < A.rows(); ++n) {
      const double a = A(n, i);
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
  for (std::size_t n = 0; n < A.rows(); ++n) {
    const double* a = A.row(n);
    double* o = out.row(n);
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
  for (std::size_t j = 0; j < A.cols(); ++j) {
    double acc = 0.0;
    for (std::size_t n = 0; n < A.rows(); ++n) acc += A(n, j);
    out[j] = acc;
  }
}

void normalize_rows(const Matrix& Z, Matrix& out, std::vector<double>& norms) {
  out = Matrix(Z.rows(), Z.cols());
  norms.assign(Z.rows(), 0.0);
  for (std::size_t n = 0; n < Z.rows(); ++n) {
    const double* z = Z.row(n);
    double acc = 0.0;
    for (std::size_t j = 0; j < Z.cols(); ++j) acc += z[j] * z[j];
    norms[n] = std::sqrt(acc);
  }
  for (std::size_t n = 0; n < Z.rows(); ++n) {
    if (!(norms[n] >= 1e-12)) {
      throw ZeroNormError("normalize_rows: row " + std::to_string(n) +
                          " has vanishing norm");
    }
  }
  for (std::size_t n = 0; n < Z.rows(); ++n) {
    const double* z = Z.row(n);
    double* o = out.row(n);
    const double inv = 1.0 / norms[n];
    for (std::size_t j = 0; j < Z.cols(); ++j) o[j] = z[j] * inv;
  }
}

void apply_relu(const Matrix& Z, Matrix& out) {
  out = Matrix(Z.rows(), Z.cols());
  for (std::size_t t = 0; t < Z.size(); ++t) {
    const double z = Z.data()[t];
    out.data()[t] = z > 0.0 ? z : 0.0;
  }
}

void apply_tanh(const Matrix& Z, Matrix& out) {
  out = Matrix(Z.rows(), Z.cols());
  for (std::size_t t = 0; t < Z.size(); ++t) {
    out.data()[t] = std::tanh(Z.data()[t]);
  }
}

void relu_backward(const Matrix& Z, const Matrix& upstream, Matrix& out) {
  Matrix::require_same_shape(Z, upstream, "relu_backward");
  out = Matrix(Z.rows(), Z.cols());
  for (std::size_t t = 0; t < Z.size(); ++t) {
    out.data()[t] = Z.data()[t] > 0.0 ? upstream.data()[t] : 0.0;
  }
}

void tanh_backward(const Matrix& Z, const Matrix& upstream, Matrix& out) {
  Matrix::require_same_shape(Z, upstream, "tanh_backward");
  out = Matrix(Z.rows(), Z.cols());
  for (std::size_t t = 0; t < Z.size(); ++t) {
    const double th = std::tanh(Z.data()[t]);
    out.data()[t] = upstream.data()[t] * (1.0 - th * th);
  }
}

void softmax_rows(const Matrix& scores, Matrix& out) {
  out = Matrix(scores.rows(), scores.cols());
  for (std::size_t n = 0; n < scores.rows(); ++n) {
    const double* s = scores.row(n);
    double* o = out.row(n);
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

}  // namespace vmf::reference
