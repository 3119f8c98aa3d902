#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "pddid/errors.hpp"
#include "pddid/matrix.hpp"
#include "pddid/qr.hpp"
#include "pddid/tail_prob.hpp"

namespace pddid {

enum class Family { gaussian, binomial };

inline const char* family_name(Family f) {
  return f == Family::gaussian ? "gaussian" : "binomial";
}

/// n x p regressor matrix with named columns. Columns are addressed by label
/// downstream (the interaction column of a DID design is found by name, not
/// position).
struct DesignMatrix {
  Matrix values;
  std::vector<std::string> column_labels;

  std::size_t n() const { return values.rows(); }
  std::size_t p() const { return values.cols(); }

  std::size_t column_index(std::string_view label) const {
    for (std::size_t j = 0; j < column_labels.size(); ++j) {
      if (column_labels[j] == label) return j;
    }
    throw Error(ErrorCode::MissingColumn, "no design column labeled '" + std::string(label) + "'");
  }

  void validate() const {
    if (n() < p() || p() < 1) {
      throw Error(ErrorCode::DimensionMismatch,
                  "design must satisfy n >= p >= 1, got " + std::to_string(n()) + "x" + std::to_string(p()));
    }
    if (column_labels.size() != p()) {
      throw Error(ErrorCode::DimensionMismatch, "column label count does not match column count");
    }
    std::unordered_set<std::string_view> seen;
    for (const auto& label : column_labels) {
      if (!seen.insert(label).second) {
        throw Error(ErrorCode::ConfigInvalid, "duplicate design column label '" + label + "'");
      }
    }
    for (double v : values.data()) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::NonFinite, "design matrix contains a non-finite entry");
      }
    }
  }
};

/// Solver output: point estimates plus classical (model-based) inference.
struct FitSummary {
  std::vector<double> coefficients;
  Matrix covariance;
  std::vector<double> standard_errors;
  std::vector<double> test_statistics;
  std::vector<double> p_values;
  double residual_variance = 0.0;  // gaussian family only; 0 for binomial
  std::size_t degrees_of_freedom = 0;
  Family family = Family::gaussian;
  bool converged = false;
};

namespace detail {

inline void check_response_length(const DesignMatrix& x, const std::vector<double>& y) {
  if (y.size() != x.n()) {
    throw Error(ErrorCode::DimensionMismatch,
                "response length " + std::to_string(y.size()) + " != design rows " + std::to_string(x.n()));
  }
}

inline std::string join_labels(const DesignMatrix& x, const std::vector<std::size_t>& cols) {
  std::string out;
  for (std::size_t c : cols) {
    if (!out.empty()) out += ", ";
    out += x.column_labels[c];
  }
  return out;
}

/// Wald-style inference shared by both families. With zero residual degrees
/// of freedom there is nothing to test: covariance collapses to zero and
/// p-values pin to 1. An exactly-zero SE with a nonzero coefficient reports
/// an infinite statistic and p = 0.
inline void fill_inference(FitSummary& fit, const TailReference& ref) {
  const std::size_t p = fit.coefficients.size();
  fit.standard_errors.assign(p, 0.0);
  fit.test_statistics.assign(p, 0.0);
  fit.p_values.assign(p, 1.0);
  for (std::size_t k = 0; k < p; ++k) {
    fit.standard_errors[k] = std::sqrt(fit.covariance(k, k));
    const double se = fit.standard_errors[k];
    if (se == 0.0) {
      if (fit.coefficients[k] == 0.0) continue;  // t = 0, p = 1
      fit.test_statistics[k] = fit.coefficients[k] > 0
                                   ? std::numeric_limits<double>::infinity()
                                   : -std::numeric_limits<double>::infinity();
      fit.p_values[k] = 0.0;
      continue;
    }
    fit.test_statistics[k] = fit.coefficients[k] / se;
    fit.p_values[k] = tail_p_value(fit.test_statistics[k], ref);
  }
}

}  // namespace detail

/// Factors a design once so that repeated gaussian solves against new
/// response vectors are cheap. This is what the permutation engine leans on:
/// within-arm permutation of (Y, Z) leaves a covariate-free design untouched,
/// so one factorization serves all replicates.
class LeastSquaresPlan {
 public:
  /// The design must outlive the plan.
  explicit LeastSquaresPlan(const DesignMatrix& x) : x_(&validated(x)), qr_(x.values) {
    if (!qr_.full_rank()) {
      throw Error(ErrorCode::RankDeficient,
                  "collinear columns: " + detail::join_labels(x, qr_.deficient_columns()));
    }
  }

  /// Coefficients only; no inference. O(n p) per call after the one-time
  /// factorization.
  std::vector<double> coefficients(const std::vector<double>& y) const {
    detail::check_response_length(*x_, y);
    return qr_.solve(y);
  }

  /// Full gaussian fit against a response.
  FitSummary summary(const std::vector<double>& y) const {
    const std::size_t n = x_->n();
    const std::size_t p = x_->p();
    FitSummary fit;
    fit.family = Family::gaussian;
    fit.converged = true;
    fit.degrees_of_freedom = n - p;
    fit.coefficients = coefficients(y);

    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double fitted = 0.0;
      for (std::size_t j = 0; j < p; ++j) fitted += x_->values(i, j) * fit.coefficients[j];
      const double r = y[i] - fitted;
      rss += r * r;
    }
    if (fit.degrees_of_freedom == 0) {
      // Saturated fit: no residual information, nothing to test.
      fit.residual_variance = 0.0;
      fit.covariance = Matrix(p, p, 0.0);
      fit.standard_errors.assign(p, 0.0);
      fit.test_statistics.assign(p, 0.0);
      fit.p_values.assign(p, 1.0);
      return fit;
    }
    fit.residual_variance = rss / static_cast<double>(fit.degrees_of_freedom);
    fit.covariance = qr_.normal_matrix_inverse();
    for (double& v : fit.covariance.data()) v *= fit.residual_variance;
    detail::fill_inference(fit, TailReference::student_t(static_cast<double>(fit.degrees_of_freedom)));
    return fit;
  }

 private:
  static const DesignMatrix& validated(const DesignMatrix& x) {
    x.validate();
    return x;
  }

  const DesignMatrix* x_;
  PivotedQr qr_;
};

/// Ordinary least squares with classical homoskedastic inference:
/// covariance = RSS/(n-p) * (X'X)^-1, Student-t tests on n-p df.
inline FitSummary solve_least_squares(const DesignMatrix& x, const std::vector<double>& y) {
  detail::check_response_length(x, y);
  return LeastSquaresPlan(x).summary(y);
}

/// Binomial-family fit by iteratively reweighted least squares (logit link).
/// Covariance is the inverse Fisher information at the optimum; tests are
/// Wald z against the normal. Convergence criterion is the score equation:
/// max |X'(y - mu)| < tol.
inline FitSummary fit_logistic(const DesignMatrix& x, const std::vector<double>& y,
                               int max_iter = 50, double tol = 1e-8) {
  x.validate();
  detail::check_response_length(x, y);
  if (max_iter < 1 || !(tol > 0.0)) {
    throw Error(ErrorCode::ConfigInvalid, "fit_logistic requires max_iter >= 1 and tol > 0");
  }
  const std::size_t n = x.n();
  const std::size_t p = x.p();

  std::size_t ones = 0;
  for (double v : y) {
    if (v != 0.0 && v != 1.0) {
      throw Error(ErrorCode::ConfigInvalid, "binomial response entries must be 0 or 1");
    }
    if (v == 1.0) ++ones;
  }
  if (ones == 0 || ones == n) {
    throw Error(ErrorCode::AllSameClass, "binomial response has a single class; nothing to fit");
  }

  std::vector<double> beta(p, 0.0);
  std::vector<double> eta(n, 0.0), mu(n, 0.5), weights(n, 0.25);
  Matrix weighted_x(n, p, 0.0);
  std::vector<double> weighted_z(n, 0.0);
  bool converged = false;

  auto score_max = [&]() {
    double worst = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += x.values(i, j) * (y[i] - mu[i]);
      worst = std::max(worst, std::fabs(s));
    }
    return worst;
  };

  for (int iter = 0; iter < max_iter; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      eta[i] = 0.0;
      for (std::size_t j = 0; j < p; ++j) eta[i] += x.values(i, j) * beta[j];
      // Stable logistic: never exponentiate a large positive argument.
      mu[i] = eta[i] >= 0.0 ? 1.0 / (1.0 + std::exp(-eta[i]))
                            : std::exp(eta[i]) / (1.0 + std::exp(eta[i]));
      weights[i] = std::max(mu[i] * (1.0 - mu[i]), 1e-10);
    }
    if (score_max() < tol) {
      converged = true;
      break;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double sw = std::sqrt(weights[i]);
      const double z = eta[i] + (y[i] - mu[i]) / weights[i];
      for (std::size_t j = 0; j < p; ++j) weighted_x(i, j) = sw * x.values(i, j);
      weighted_z[i] = sw * z;
    }
    PivotedQr qr(weighted_x);
    if (!qr.full_rank()) {
      throw Error(ErrorCode::RankDeficient,
                  "collinear columns: " + detail::join_labels(x, qr.deficient_columns()));
    }
    beta = qr.solve(weighted_z);

    double beta_norm = 0.0;
    bool finite = true;
    for (double b : beta) {
      beta_norm = std::max(beta_norm, std::fabs(b));
      finite = finite && std::isfinite(b);
    }
    if (!finite || beta_norm > 1e3) {
      throw Error(ErrorCode::Separation,
                  "coefficients diverged (max |beta| > 1e3); data are separated or nearly so");
    }
  }

  FitSummary fit;
  fit.family = Family::binomial;
  fit.converged = converged;
  fit.degrees_of_freedom = n - p;
  fit.residual_variance = 0.0;
  fit.coefficients = beta;

  // Fisher information at the final coefficients. A fitted probability that
  // is numerically 0 or 1 means a weight collapsed: the data are separated
  // (or as good as), and the "estimate" is a boundary artifact.
  for (std::size_t i = 0; i < n; ++i) {
    double e = 0.0;
    for (std::size_t j = 0; j < p; ++j) e += x.values(i, j) * beta[j];
    const double m = e >= 0.0 ? 1.0 / (1.0 + std::exp(-e)) : std::exp(e) / (1.0 + std::exp(e));
    if (m * (1.0 - m) <= 1e-10) {
      throw Error(ErrorCode::Separation,
                  "a fitted probability collapsed to 0/1; data are separated or nearly so");
    }
    const double sw = std::sqrt(m * (1.0 - m));
    for (std::size_t j = 0; j < p; ++j) weighted_x(i, j) = sw * x.values(i, j);
  }
  PivotedQr info_qr(weighted_x);
  if (!info_qr.full_rank()) {
    throw Error(ErrorCode::RankDeficient,
                "collinear columns: " + detail::join_labels(x, info_qr.deficient_columns()));
  }
  fit.covariance = info_qr.normal_matrix_inverse();
  detail::fill_inference(fit, TailReference::normal());
  return fit;
}

}  // namespace pddid
