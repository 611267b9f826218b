#pragma once

#include <span>
#include <vector>

#include "vmf/matrix.hpp"

// Batch primitives behind the network, objective, evaluator, and clustering
// code. vmf::kernels parallelizes over rows with OpenMP; vmf::reference is a
// serial twin with the exact same per-element operation order, so the two
// produce bitwise identical results under any thread count. Tests compare
// them element for element with operator==, and tools/bench_main.cpp times
// them against each other.

namespace vmf::kernels {

// out = X * W + bias, X: N x I, W: I x J, bias: J.
void affine(const Matrix& X, const Matrix& W, std::span<const double> bias,
            Matrix& out);

// out = A^T * B, A: N x I, B: N x J, out: I x J. Gradient of an affine
// layer's weights when A is the input batch and B the upstream gradient.
void matmul_tn(const Matrix& A, const Matrix& B, Matrix& out);

// out = A * B^T, A: N x J, B: I x J, out: N x I. Doubles as the cosine
// score block when both arguments have unit rows.
void matmul_nt(const Matrix& A, const Matrix& B, Matrix& out);

// out[j] = sum over rows of A(:, j). Gradient of a bias.
void column_sums(const Matrix& A, std::vector<double>& out);

// Row-wise L2 normalization. norms[i] gets the pre-division length.
// Throws ZeroNormError if any row norm falls below 1e-12.
void normalize_rows(const Matrix& Z, Matrix& out, std::vector<double>& norms);

void apply_relu(const Matrix& Z, Matrix& out);
void apply_tanh(const Matrix& Z, Matrix& out);

// Elementwise activation backward: out = upstream * act'(Z).
void relu_backward(const Matrix& Z, const Matrix& upstream, Matrix& out);
void tanh_backward(const Matrix& Z, const Matrix& upstream, Matrix& out);

// Row-wise softmax with max subtraction.
void softmax_rows(const Matrix& scores, Matrix& out);

}  // namespace vmf::kernels

namespace vmf::reference {

void affine(const Matrix& X, const Matrix& W, std::span<const double> bias,
            Matrix& out);
void matmul_tn(const Matrix& A, const Matrix& B, Matrix& out);
void matmul_nt(const Matrix& A, const Matrix& B, Matrix& out);
void column_sums(const Matrix& A, std::vector<double>& out);
void normalize_rows(const Matrix& Z, Matrix& out, std::vector<double>& norms);
void apply_relu(const Matrix& Z, Matrix& out);
void apply_tanh(const Matrix& Z, Matrix& out);
void relu_backward(const Matrix& Z, const Matrix& upstream, Matrix& out);
void tanh_backward(const Matrix& Z, const Matrix& upstream, Matrix& out);
void softmax_rows(const Matrix& scores, Matrix& out);

}  // namespace vmf::reference
