#ifndef RAONAKRA_BANDED_HPP
#define RAONAKRA_BANDED_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace raonakra {

// Accumulator type for residual-sensitive products.
using extended = long double;

/// Symmetric band matrix holding the lower band row by row.
///
/// Entry (i, j) with 0 <= i - j <= kd lives at data[i * (kd + 1) + kd - (i - j)].
/// Entries outside the band are structurally zero and never stored.
class SymBandMatrix {
public:
  SymBandMatrix() = default;
  SymBandMatrix(std::size_t n, std::size_t kd)
      : n_(n), kd_(kd), data_(n * (kd + 1), 0.0) {}

  std::size_t size() const { return n_; }
  std::size_t half_bandwidth() const { return kd_; }

  bool in_band(std::size_t i, std::size_t j) const {
    return (i >= j ? i - j : j - i) <= kd_;
  }

  double operator()(std::size_t i, std::size_t j) const {
    if (i < j) std::swap(i, j);
    if (i - j > kd_) return 0.0;
    return data_[slot(i, j)];
  }

  /// Writes A(i,j) and, implicitly, A(j,i).
  void set(std::size_t i, std::size_t j, double value) {
    if (i < j) std::swap(i, j);
    if (i - j > kd_) throw std::out_of_range("SymBandMatrix::set outside band");
    data_[slot(i, j)] = value;
  }

  void add(std::size_t i, std::size_t j, double value) {
    if (i < j) std::swap(i, j);
    if (i - j > kd_) throw std::out_of_range("SymBandMatrix::add outside band");
    data_[slot(i, j)] += value;
  }

  void matvec(std::span<const double> x, std::span<double> y) const {
    check_dims(x.size(), y.size());
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t j0 = i > kd_ ? i - kd_ : 0;
      const double *row = &data_[i * (kd_ + 1) + kd_ - (i - j0)];
      double acc = 0.0;
      for (std::size_t j = j0; j < i; ++j) acc += row[j - j0] * x[j];
      acc += row[i - j0] * x[i];
      y[i] = acc;
    }
    // upper triangle by symmetry
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t j0 = i > kd_ ? i - kd_ : 0;
      const double *row = &data_[i * (kd_ + 1) + kd_ - (i - j0)];
      const double xi = x[i];
      for (std::size_t j = j0; j < i; ++j) y[j] += row[j - j0] * xi;
    }
  }

  std::vector<double> matvec(std::span<const double> x) const {
    std::vector<double> y(n_);
    matvec(x, y);
    return y;
  }

  void matvec_extended(std::span<const extended> x, std::span<extended> y) const {
    check_dims(x.size(), y.size());
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t j0 = i > kd_ ? i - kd_ : 0;
      const std::size_t j1 = std::min(n_ - 1, i + kd_);
      extended acc = 0.0L;
      for (std::size_t j = j0; j <= j1; ++j) acc += static_cast<extended>((*this)(i, j)) * x[j];
      y[i] = acc;
    }
  }

  /// x^T A x.
  double quadratic_form(std::span<const double> x) const {
    const std::vector<double> y = matvec(x);
    double acc = 0.0;
    for (std::size_t i = 0; i < n_; ++i) acc += x[i] * y[i];
    return acc;
  }

  /// Row-major dense copy. Intended for small oracle checks.
  std::vector<double> to_dense() const {
    std::vector<double> d(n_ * n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) d[i * n_ + j] = (*this)(i, j);
    return d;
  }

  const std::vector<double> &raw() const { return data_; }

private:
  std::size_t slot(std::size_t i, std::size_t j) const {
    return i * (kd_ + 1) + kd_ - (i - j);
  }
  void check_dims(std::size_t nx, std::size_t ny) const {
    if (nx != n_ || ny != n_)
      throw std::invalid_argument("SymBandMatrix: dimension mismatch");
  }

  std::size_t n_ = 0;
  std::size_t kd_ = 0;
  std::vector<double> data_;
};

/// Upper-triangular band matrix (entries (i, j) with 0 <= j - i <= kd).
class UpperBandMatrix {
public:
  UpperBandMatrix() = default;
  UpperBandMatrix(std::size_t n, std::size_t kd)
      : n_(n), kd_(kd), data_(n * (kd + 1), 0.0) {}

  std::size_t size() const { return n_; }
  std::size_t bandwidth() const { return kd_; }

  double operator()(std::size_t i, std::size_t j) const {
    if (j < i || j - i > kd_) return 0.0;
    return data_[i * (kd_ + 1) + (j - i)];
  }
  void set(std::size_t i, std::size_t j, double value) {
    if (j < i || j - i > kd_)
      throw std::out_of_range("UpperBandMatrix::set outside band");
    data_[i * (kd_ + 1) + (j - i)] = value;
  }

  /// y = R x
  void apply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t j1 = std::min(n_ - 1, i + kd_);
      double acc = 0.0;
      for (std::size_t j = i; j <= j1; ++j) acc += data_[i * (kd_ + 1) + (j - i)] * x[j];
      y[i] = acc;
    }
  }

  /// y = R^T x
  void apply_transpose(std::span<const double> x, std::span<double> y) const {
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t j1 = std::min(n_ - 1, i + kd_);
      for (std::size_t j = i; j <= j1; ++j) y[j] += data_[i * (kd_ + 1) + (j - i)] * x[i];
    }
  }

  std::vector<double> to_dense() const {
    std::vector<double> d(n_ * n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) d[i * n_ + j] = (*this)(i, j);
    return d;
  }

private:
  std::size_t n_ = 0;
  std::size_t kd_ = 0;
  std::vector<double> data_;
};

class NotPositiveDefinite : public std::runtime_error {
public:
  NotPositiveDefinite(std::size_t row, double pivot)
      : std::runtime_error("band Cholesky: non-positive pivot " + std::to_string(pivot) +
                           " at row " + std::to_string(row)),
        row_(row) {}
  std::size_t row() const { return row_; }

private:
  std::size_t row_;
};

/// Cholesky factorization A = L L^T of a symmetric positive definite band
/// matrix. L keeps the bandwidth of A, so the factor reuses its storage layout.
class BandCholesky {
public:
  BandCholesky() = default;

  explicit BandCholesky(const SymBandMatrix &a) : l_(a) {
    const std::size_t n = l_.size();
    const std::size_t kd = l_.half_bandwidth();
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j0 = i > kd ? i - kd : 0;
      for (std::size_t j = j0; j <= i; ++j) {
        double s = l_(i, j);
        const std::size_t k0 = std::max(j0, j > kd ? j - kd : 0);
        for (std::size_t k = k0; k < j; ++k) s -= l_(i, k) * l_(j, k);
        if (i == j) {
          if (!(s > 0.0)) throw NotPositiveDefinite(i, s);
          l_.set(i, i, std::sqrt(s));
        } else {
          l_.set(i, j, s / l_(j, j));
        }
      }
    }
  }

  std::size_t size() const { return l_.size(); }

  /// L(i, j) for i >= j.
  double lower(std::size_t i, std::size_t j) const { return i >= j ? l_(i, j) : 0.0; }

  /// Solves A x = b in place.
  void solve_in_place(std::span<double> b) const {
    const std::size_t n = l_.size();
    const std::size_t kd = l_.half_bandwidth();
    if (b.size() != n) throw std::invalid_argument("BandCholesky: dimension mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j0 = i > kd ? i - kd : 0;
      double s = b[i];
      for (std::size_t j = j0; j < i; ++j) s -= l_(i, j) * b[j];
      b[i] = s / l_(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
      const std::size_t j1 = std::min(n - 1, ii + kd);
      double s = b[ii];
      for (std::size_t j = ii + 1; j <= j1; ++j) s -= l_(j, ii) * b[j];
      b[ii] = s / l_(ii, ii);
    }
  }

  std::vector<double> solve(std::span<const double> b) const {
    std::vector<double> x(b.begin(), b.end());
    solve_in_place(x);
    return x;
  }

  /// R = L^T as an upper band matrix.
  UpperBandMatrix upper_factor() const {
    const std::size_t n = l_.size();
    const std::size_t kd = l_.half_bandwidth();
    UpperBandMatrix r(n, kd);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j0 = i > kd ? i - kd : 0;
      for (std::size_t j = j0; j <= i; ++j) r.set(j, i, l_(i, j));
    }
    return r;
  }

private:
  SymBandMatrix l_;
};

}  // namespace raonakra

#endif  // RAONAKRA_BANDED_HPP
