#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace mrgnn {

class Rng;

// Dense row-major float64 matrix. Everything in this library is rank <= 2;
// scalars are 1x1 and feature rows are 1xN. Invariant: rows*cols == data size
// and both extents are positive.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int rows, int cols);  // zero-filled
  Tensor(int rows, int cols, std::vector<double> data);

  static Tensor zeros(int rows, int cols) { return Tensor(rows, cols); }
  static Tensor filled(int rows, int cols, double value);
  static Tensor scalar(double value) { return Tensor(1, 1, {value}); }
  static Tensor row(std::initializer_list<double> values);
  static Tensor row(std::vector<double> values);
  static Tensor from_rows(const std::vector<std::vector<double>>& rows);
  // Entries i.i.d. uniform in [-limit, limit].
  static Tensor uniform(int rows, int cols, double limit, Rng& rng);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
  std::vector<int> shape() const { return {rows_, cols_}; }
  std::string shape_str() const;
  bool empty() const { return data_.empty(); }
  bool same_shape(const Tensor& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  double& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  double at(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  double& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  double operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<const double> values() const { return data_; }

  void fill(double value);
  bool all_finite() const;
  // Throws NumericError naming `context` if any entry is NaN or infinite.
  void ensure_finite(const std::string& context) const;

  // Exact elementwise equality (0.0 == -0.0 counts as equal).
  friend bool operator==(const Tensor& a, const Tensor& b);

  // If this tensor becomes a tape leaf, should gradients flow into it?
  bool requires_grad = false;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// Value kernels shared by the tape ops and the optimizer. All of them check
// shapes and throw ShapeError naming the offending extents.
Tensor matmul_values(const Tensor& a, const Tensor& b);
void add_matmul_nt(Tensor& acc, const Tensor& a, const Tensor& b);  // acc += a * b^T
void add_matmul_tn(Tensor& acc, const Tensor& a, const Tensor& b);  // acc += a^T * b
Tensor add_values(const Tensor& a, const Tensor& b);
void add_in_place(Tensor& acc, const Tensor& x);
Tensor mul_values(const Tensor& a, const Tensor& b);

}  // namespace mrgnn
