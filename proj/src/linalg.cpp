/// @file linalg.cpp

#include "hybrid/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace hybrid {

CsrMatrix::CsrMatrix(std::size_t nrows, std::size_t ncols, std::vector<std::size_t> row_ptr,
                     std::vector<std::size_t> col_idx, std::vector<double> values)
    : nrows_(nrows),
      ncols_(ncols),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  if (row_ptr_.size() != nrows_ + 1 || row_ptr_.front() != 0)
    throw DimensionError("CsrMatrix: row_ptr must have nrows+1 entries starting at 0");
  if (row_ptr_.back() != values_.size() || col_idx_.size() != values_.size())
    throw DimensionError("CsrMatrix: row_ptr[nrows] must equal nnz");
  for (std::size_t i = 0; i < nrows_; ++i) {
    if (row_ptr_[i + 1] < row_ptr_[i])
      throw DimensionError("CsrMatrix: row_ptr decreases at row " + std::to_string(i));
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      if (col_idx_[k] >= ncols_)
        throw DimensionError("CsrMatrix: column index out of range in row " + std::to_string(i));
      if (k > row_ptr_[i] && col_idx_[k] <= col_idx_[k - 1])
        throw DimensionError("CsrMatrix: columns not strictly increasing in row " +
                             std::to_string(i));
      if (!std::isfinite(values_[k]))
        throw NumericalError("CsrMatrix: non-finite value in row " + std::to_string(i));
    }
  }
}

CsrMatrix CsrMatrix::from_triplets(std::size_t nrows, std::size_t ncols,
                                   std::vector<Triplet> triplets) {
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<std::size_t> row_ptr(nrows + 1, 0);
  std::vector<std::size_t> col_idx;
  std::vector<double> values;
  col_idx.reserve(triplets.size());
  values.reserve(triplets.size());
  for (std::size_t k = 0; k < triplets.size(); ++k) {
    const Triplet& t = triplets[k];
    if (t.row >= nrows || t.col >= ncols)
      throw DimensionError("CsrMatrix::from_triplets: entry out of range");
    if (!values.empty() && k > 0 && triplets[k - 1].row == t.row && triplets[k - 1].col == t.col) {
      values.back() += t.value;
      continue;
    }
    col_idx.push_back(t.col);
    values.push_back(t.value);
    ++row_ptr[t.row + 1];
  }
  for (std::size_t i = 0; i < nrows; ++i) row_ptr[i + 1] += row_ptr[i];
  return CsrMatrix(nrows, ncols, std::move(row_ptr), std::move(col_idx), std::move(values));
}

CsrMatrix CsrMatrix::identity(std::size_t n) {
  std::vector<std::size_t> row_ptr(n + 1);
  std::vector<std::size_t> col_idx(n);
  for (std::size_t i = 0; i <= n; ++i) row_ptr[i] = i;
  for (std::size_t i = 0; i < n; ++i) col_idx[i] = i;
  return CsrMatrix(n, n, std::move(row_ptr), std::move(col_idx), std::vector<double>(n, 1.0));
}

double CsrMatrix::at(std::size_t i, std::size_t j) const {
  if (i >= nrows_ || j >= ncols_) throw DimensionError("CsrMatrix::at: index out of range");
  auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
  auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
  auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

Vector CsrMatrix::diagonal() const {
  const std::size_t n = std::min(nrows_, ncols_);
  Vector d = Vector::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) d[static_cast<Eigen::Index>(i)] = at(i, i);
  return d;
}

CsrMatrix CsrMatrix::transpose() const {
  std::vector<std::size_t> row_ptr(ncols_ + 1, 0);
  for (std::size_t c : col_idx_) ++row_ptr[c + 1];
  for (std::size_t j = 0; j < ncols_; ++j) row_ptr[j + 1] += row_ptr[j];
  std::vector<std::size_t> next(row_ptr.begin(), row_ptr.end() - 1);
  std::vector<std::size_t> col_idx(nnz());
  std::vector<double> values(nnz());
  for (std::size_t i = 0; i < nrows_; ++i) {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const std::size_t dst = next[col_idx_[k]]++;
      col_idx[dst] = i;
      values[dst] = values_[k];
    }
  }
  return CsrMatrix(ncols_, nrows_, std::move(row_ptr), std::move(col_idx), std::move(values));
}

CsrMatrix CsrMatrix::scaled(double factor) const {
  std::vector<double> values = values_;
  for (double& v : values) v *= factor;
  return CsrMatrix(nrows_, ncols_, row_ptr_, col_idx_, std::move(values));
}

Matrix CsrMatrix::to_dense() const {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(nrows_), static_cast<Eigen::Index>(ncols_));
  for (std::size_t i = 0; i < nrows_; ++i)
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col_idx_[k])) = values_[k];
  return m;
}

bool CsrMatrix::is_symmetric() const {
  if (nrows_ != ncols_) return false;
  const CsrMatrix t = transpose();
  return t.row_ptr_ == row_ptr_ && t.col_idx_ == col_idx_ && t.values_ == values_;
}

void spmv_into(const CsrMatrix& a, const Vector& x, Vector& y) {
  if (a.cols() != static_cast<std::size_t>(x.size()))
    throw DimensionError("spmv: matrix has " + std::to_string(a.cols()) +
                         " columns but vector has " + std::to_string(x.size()) + " entries");
  y.resize(static_cast<Eigen::Index>(a.rows()));
  const auto& rp = a.row_ptr();
  const auto& ci = a.col_idx();
  const auto& v = a.values();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double sum = 0.0;
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) sum += v[k] * x[static_cast<Eigen::Index>(ci[k])];
    y[static_cast<Eigen::Index>(i)] = sum;
  }
}

Vector spmv(const CsrMatrix& a, const Vector& x) {
  Vector y;
  spmv_into(a, x, y);
  return y;
}

Vector residual(const CsrMatrix& a, const Vector& b, const Vector& x) {
  if (a.rows() != static_cast<std::size_t>(b.size()))
    throw DimensionError("residual: rhs length does not match matrix rows");
  Vector r;
  spmv_into(a, x, r);
  r = b - r;
  return r;
}

CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("multiply: inner dimensions differ");
  std::vector<Triplet> trip;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) {
      const std::size_t mid = a.col_idx()[k];
      for (std::size_t l = b.row_ptr()[mid]; l < b.row_ptr()[mid + 1]; ++l)
        trip.push_back({i, b.col_idx()[l], a.values()[k] * b.values()[l]});
    }
  }
  return CsrMatrix::from_triplets(a.rows(), b.cols(), std::move(trip));
}

Matrix cholesky(const Matrix& s, double jitter) {
  if (s.rows() != s.cols()) throw DimensionError("cholesky: matrix is not square");
  if (jitter < 0.0) throw std::invalid_argument("cholesky: jitter must be non-negative");
  const Eigen::Index n = s.rows();
  Matrix l = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = s(j, j) + jitter;
    for (Eigen::Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0) || !std::isfinite(d))
      throw NumericalError("cholesky: non-positive pivot " + std::to_string(d) + " at index " +
                           std::to_string(j));
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double v = s(i, j);
      for (Eigen::Index k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / ljj;
    }
  }
  return l;
}

Vector cholesky_solve(const Matrix& lower, const Vector& b) {
  if (lower.rows() != b.size()) throw DimensionError("cholesky_solve: size mismatch");
  const Eigen::Index n = lower.rows();
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double v = b[i];
    for (Eigen::Index k = 0; k < i; ++k) v -= lower(i, k) * y[k];
    y[i] = v / lower(i, i);
  }
  Vector x(n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    double v = y[i];
    for (Eigen::Index k = i + 1; k < n; ++k) v -= lower(k, i) * x[k];
    x[i] = v / lower(i, i);
  }
  return x;
}

Matrix sine_basis(std::size_t n) {
  if (n < 1) throw std::invalid_argument("sine_basis: n must be at least 1");
  const double h = 1.0 / static_cast<double>(n + 1);
  const double scale = std::sqrt(2.0 * h);
  const auto nn = static_cast<Eigen::Index>(n);
  Matrix xi(nn, nn);
  for (Eigen::Index j = 0; j < nn; ++j)
    for (Eigen::Index i = 0; i < nn; ++i)
      // Integer product reduced mod 2(n+1) keeps the matrix exactly symmetric.
      xi(j, i) = scale * std::sin(std::numbers::pi *
                                  static_cast<double>(((i + 1) * (j + 1)) % (2 * (nn + 1))) /
                                  static_cast<double>(nn + 1));
  return xi;
}

Vector sine_transform_1d(const Vector& v, std::size_t n, double h) {
  if (n < 1) throw std::invalid_argument("sine_transform_1d: n must be at least 1");
  if (static_cast<std::size_t>(v.size()) != n)
    throw DimensionError("sine_transform_1d: vector length differs from n");
  if (std::abs(h * static_cast<double>(n + 1) - 1.0) > 1e-12)
    throw std::invalid_argument("sine_transform_1d: h must equal 1/(n+1)");
  const double scale = std::sqrt(2.0 * h);
  Vector alpha(static_cast<Eigen::Index>(n));
  for (std::size_t i = 1; i <= n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 1; j <= n; ++j)
      sum += std::sin(static_cast<double>(i) * std::numbers::pi * h * static_cast<double>(j)) *
             v[static_cast<Eigen::Index>(j - 1)];
    alpha[static_cast<Eigen::Index>(i - 1)] = scale * sum;
  }
  return alpha;
}

double norm_l2(const Vector& v) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) sum += v[i] * v[i];
  return std::sqrt(sum);
}

double norm_linf(const Vector& v) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) m = std::max(m, std::abs(v[i]));
  return m;
}

bool all_finite(const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i])) return false;
  return true;
}

double operator_norm_2(const LinearMap& apply, std::size_t n, std::size_t iters,
                       std::uint64_t seed) {
  if (n == 0) return 0.0;
  const auto nn = static_cast<Eigen::Index>(n);
  Matrix m(nn, nn);
  Vector probe = Vector::Zero(nn);
  for (Eigen::Index j = 0; j < nn; ++j) {
    probe[j] = 1.0;
    const Vector col = apply(probe);
    if (col.size() != nn) throw DimensionError("operator_norm_2: map changes dimension");
    m.col(j) = col;
    probe[j] = 0.0;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector x(nn);
  for (Eigen::Index i = 0; i < nn; ++i) x[i] = normal(rng);
  x /= norm_l2(x);
  double sigma_sq = 0.0;
  for (std::size_t it = 0; it < std::max<std::size_t>(iters, 1); ++it) {
    Vector y = m.transpose() * (m * x);
    const double ny = norm_l2(y);
    if (ny == 0.0) return 0.0;
    sigma_sq = x.dot(y);
    x = y / ny;
  }
  const Vector mx = m * x;
  return std::max(std::sqrt(std::max(sigma_sq, 0.0)), norm_l2(mx));
}

}  // namespace hybrid
