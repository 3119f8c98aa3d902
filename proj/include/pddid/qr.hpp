#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "pddid/errors.hpp"
#include "pddid/matrix.hpp"

namespace pddid {

/// Householder QR with column pivoting (Businger-Golub). R lives in the upper
/// triangle of the stored factor, the Householder vectors (scaled so their
/// leading entry is 1) below the diagonal. Pivoting keeps the diagonal of R
/// non-increasing in magnitude, which is what makes the rank decision and the
/// "which columns are collinear" report reliable.
class PivotedQr {
 public:
  explicit PivotedQr(const Matrix& a, double rel_pivot_tol = 1e-10)
      : qr_(a), tau_(a.cols(), 0.0), perm_(a.cols()) {
    const std::size_t n = qr_.rows();
    const std::size_t p = qr_.cols();
    if (n < p || p == 0) {
      throw Error(ErrorCode::DimensionMismatch,
                  "QR requires n >= p >= 1, got " + std::to_string(n) + "x" + std::to_string(p));
    }
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});

    for (std::size_t j = 0; j < p; ++j) {
      // Pivot: bring the remaining column with the largest trailing norm to
      // position j. Norms are recomputed exactly; p is small here.
      std::size_t best = j;
      double best_norm2 = trailing_norm2(j, j);
      for (std::size_t k = j + 1; k < p; ++k) {
        const double norm2 = trailing_norm2(k, j);
        if (norm2 > best_norm2) {
          best = k;
          best_norm2 = norm2;
        }
      }
      if (best != j) {
        for (std::size_t i = 0; i < n; ++i) std::swap(qr_(i, j), qr_(i, best));
        std::swap(perm_[j], perm_[best]);
      }

      const double normx = std::sqrt(best_norm2);
      if (normx == 0.0) {
        tau_[j] = 0.0;  // remaining block is exactly zero
        continue;
      }
      const double s = qr_(j, j) > 0.0 ? -1.0 : 1.0;
      const double u1 = qr_(j, j) - s * normx;
      for (std::size_t i = j + 1; i < n; ++i) qr_(i, j) /= u1;
      tau_[j] = -s * u1 / normx;
      qr_(j, j) = s * normx;

      for (std::size_t k = j + 1; k < p; ++k) {
        double dot = qr_(j, k);
        for (std::size_t i = j + 1; i < n; ++i) dot += qr_(i, j) * qr_(i, k);
        const double scale = tau_[j] * dot;
        qr_(j, k) -= scale;
        for (std::size_t i = j + 1; i < n; ++i) qr_(i, k) -= scale * qr_(i, j);
      }
    }

    const double r00 = std::fabs(qr_(0, 0));
    rank_ = 0;
    for (std::size_t j = 0; j < p; ++j) {
      if (std::fabs(qr_(j, j)) > rel_pivot_tol * r00 && std::fabs(qr_(j, j)) > 0.0) {
        ++rank_;
      } else {
        break;  // pivoted diagonal is non-increasing
      }
    }
  }

  std::size_t rows() const { return qr_.rows(); }
  std::size_t cols() const { return qr_.cols(); }
  std::size_t rank() const { return rank_; }
  bool full_rank() const { return rank_ == qr_.cols(); }

  /// perm[k] = original index of the column pivoted to position k.
  const std::vector<std::size_t>& permutation() const { return perm_; }

  /// Original indices of the columns left behind by the pivoting when the
  /// matrix is rank deficient (ascending).
  std::vector<std::size_t> deficient_columns() const {
    std::vector<std::size_t> out(perm_.begin() + static_cast<std::ptrdiff_t>(rank_), perm_.end());
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Least-squares solution of min ||a x - y||_2. Requires full rank.
  std::vector<double> solve(const std::vector<double>& y) const {
    const std::size_t n = qr_.rows();
    const std::size_t p = qr_.cols();
    if (y.size() != n) {
      throw Error(ErrorCode::DimensionMismatch,
                  "response length " + std::to_string(y.size()) + " != row count " + std::to_string(n));
    }
    if (!full_rank()) {
      throw Error(ErrorCode::RankDeficient, "matrix is rank deficient");
    }
    std::vector<double> qty = y;
    apply_qt(qty);

    std::vector<double> x(p, 0.0);
    for (std::size_t l = p; l-- > 0;) {
      double v = qty[l];
      for (std::size_t r = l + 1; r < p; ++r) v -= qr_(l, r) * x[r];
      x[l] = v / qr_(l, l);
    }
    std::vector<double> out(p, 0.0);
    for (std::size_t k = 0; k < p; ++k) out[perm_[k]] = x[k];
    return out;
  }

  /// (a' a)^-1 in the original column order. Requires full rank.
  Matrix normal_matrix_inverse() const {
    const std::size_t p = qr_.cols();
    if (!full_rank()) {
      throw Error(ErrorCode::RankDeficient, "matrix is rank deficient");
    }
    // U = R^-1 by back substitution, then (R'R)^-1 = U U'.
    Matrix u(p, p, 0.0);
    for (std::size_t col = 0; col < p; ++col) {
      for (std::size_t l = col + 1; l-- > 0;) {
        double v = (l == col) ? 1.0 : 0.0;
        for (std::size_t r = l + 1; r <= col; ++r) v -= qr_(l, r) * u(r, col);
        u(l, col) = v / qr_(l, l);
      }
    }
    Matrix cov(p, p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = i; j < p; ++j) {
        double dot = 0.0;
        for (std::size_t k = j; k < p; ++k) dot += u(i, k) * u(j, k);
        cov(perm_[i], perm_[j]) = dot;
        cov(perm_[j], perm_[i]) = dot;
      }
    }
    return cov;
  }

 private:
  double trailing_norm2(std::size_t col, std::size_t from_row) const {
    double acc = 0.0;
    for (std::size_t i = from_row; i < qr_.rows(); ++i) acc += qr_(i, col) * qr_(i, col);
    return acc;
  }

  void apply_qt(std::vector<double>& y) const {
    const std::size_t n = qr_.rows();
    const std::size_t p = qr_.cols();
    for (std::size_t j = 0; j < p; ++j) {
      if (tau_[j] == 0.0) continue;
      double dot = y[j];
      for (std::size_t i = j + 1; i < n; ++i) dot += qr_(i, j) * y[i];
      const double scale = tau_[j] * dot;
      y[j] -= scale;
      for (std::size_t i = j + 1; i < n; ++i) y[i] -= scale * qr_(i, j);
    }
  }

  Matrix qr_;
  std::vector<double> tau_;
  std::vector<std::size_t> perm_;
  std::size_t rank_ = 0;
};

}  // namespace pddid
