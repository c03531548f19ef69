#include "mrgnn/tensor.hpp"

#include <cmath>
#include <sstream>

#include "mrgnn/errors.hpp"
#include "mrgnn/rng.hpp"

namespace mrgnn {

namespace {

void check_extents(int rows, int cols) {
  if (rows <= 0 || cols <= 0) {
    std::ostringstream os;
    os << "tensor extents must be positive, got " << rows << "x" << cols;
    throw ShapeError(os.str());
  }
}

}  // namespace

Tensor::Tensor(int rows, int cols) : rows_(rows), cols_(cols) {
  check_extents(rows, cols);
  data_.assign(static_cast<std::size_t>(rows) * cols, 0.0);
}

Tensor::Tensor(int rows, int cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  check_extents(rows, cols);
  if (data_.size() != static_cast<std::size_t>(rows) * cols) {
    std::ostringstream os;
    os << "tensor data length " << data_.size() << " does not match shape " << rows << "x"
       << cols;
    throw ShapeError(os.str());
  }
}

Tensor Tensor::filled(int rows, int cols, double value) {
  Tensor t(rows, cols);
  t.fill(value);
  return t;
}

Tensor Tensor::row(std::initializer_list<double> values) {
  return Tensor(1, static_cast<int>(values.size()), std::vector<double>(values));
}

Tensor Tensor::row(std::vector<double> values) {
  // Read the size before std::move(values): argument evaluation order is
  // unspecified and the moved-from vector reports size 0.
  const int n = static_cast<int>(values.size());
  return Tensor(1, n, std::move(values));
}

Tensor Tensor::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw ShapeError("from_rows: no rows given");
  std::size_t width = rows.front().size();
  std::vector<double> flat;
  flat.reserve(rows.size() * width);
  for (const auto& r : rows) {
    if (r.size() != width) throw ShapeError("from_rows: ragged rows");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return Tensor(static_cast<int>(rows.size()), static_cast<int>(width), std::move(flat));
}

Tensor Tensor::uniform(int rows, int cols, double limit, Rng& rng) {
  Tensor t(rows, cols);
  for (std::int64_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-limit, limit);
  return t;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << rows_ << "x" << cols_;
  return os.str();
}

void Tensor::fill(double value) {
  for (auto& v : data_) v = value;
}

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Tensor::ensure_finite(const std::string& context) const {
  if (!all_finite()) throw NumericError("non-finite value in " + context);
}

bool operator==(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) return false;
  for (std::int64_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return false;
  }
  return true;
}

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                     b.shape_str());
  }
}

}  // namespace

Tensor matmul_values(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner extents differ, " + a.shape_str() + " * " + b.shape_str());
  }
  Tensor c(a.rows(), b.cols());
  const int n = a.rows(), k = a.cols(), m = b.cols();
  // i-k-j order: streams through b and c rows, decent cache behaviour without
  // pulling in a BLAS just for desk-scale matrices.
  for (int i = 0; i < n; ++i) {
    const double* arow = a.data() + static_cast<std::size_t>(i) * k;
    double* crow = c.data() + static_cast<std::size_t>(i) * m;
    for (int kk = 0; kk < k; ++kk) {
      const double av = arow[kk];
      if (av == 0.0) continue;
      const double* brow = b.data() + static_cast<std::size_t>(kk) * m;
      for (int j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

void add_matmul_nt(Tensor& acc, const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols() || acc.rows() != a.rows() || acc.cols() != b.rows()) {
    throw ShapeError("matmul_nt: incompatible shapes " + acc.shape_str() + " += " +
                     a.shape_str() + " * " + b.shape_str() + "^T");
  }
  const int n = a.rows(), k = a.cols(), m = b.rows();
  for (int i = 0; i < n; ++i) {
    const double* arow = a.data() + static_cast<std::size_t>(i) * k;
    double* crow = acc.data() + static_cast<std::size_t>(i) * m;
    for (int j = 0; j < m; ++j) {
      const double* brow = b.data() + static_cast<std::size_t>(j) * k;
      double s = 0.0;
      for (int kk = 0; kk < k; ++kk) s += arow[kk] * brow[kk];
      crow[j] += s;
    }
  }
}

void add_matmul_tn(Tensor& acc, const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || acc.rows() != a.cols() || acc.cols() != b.cols()) {
    throw ShapeError("matmul_tn: incompatible shapes " + acc.shape_str() + " += " +
                     a.shape_str() + "^T * " + b.shape_str());
  }
  const int n = a.rows(), k = a.cols(), m = b.cols();
  for (int r = 0; r < n; ++r) {
    const double* arow = a.data() + static_cast<std::size_t>(r) * k;
    const double* brow = b.data() + static_cast<std::size_t>(r) * m;
    for (int i = 0; i < k; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* crow = acc.data() + static_cast<std::size_t>(i) * m;
      for (int j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

Tensor add_values(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor c = a;
  for (std::int64_t i = 0; i < c.size(); ++i) c[i] += b[i];
  return c;
}

void add_in_place(Tensor& acc, const Tensor& x) {
  require_same_shape(acc, x, "add_in_place");
  for (std::int64_t i = 0; i < acc.size(); ++i) acc[i] += x[i];
}

Tensor mul_values(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  Tensor c = a;
  for (std::int64_t i = 0; i < c.size(); ++i) c[i] *= b[i];
  return c;
}

}  // namespace mrgnn
