#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vmf/errors.hpp"

namespace vmf {

// Dense row-major double matrix. Deliberately minimal: storage, shape, and
// row access. All the actual linear algebra lives in vmf::kernels (parallel)
// and vmf::reference (serial twin).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  std::span<const double> row_span(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double> row_span(std::size_t i) {
    return {data_.data() + i * cols_, cols_};
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  static void require_same_shape(const Matrix& a, const Matrix& b,
                                 const char* what) {
    if (!a.same_shape(b)) {
      throw ConfigError(std::string("shape mismatch in ") + what);
    }
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace vmf
