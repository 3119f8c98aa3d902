#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "pddid/errors.hpp"

namespace pddid {

namespace detail {

/// Continued fraction for the regularized incomplete beta function
/// (modified Lentz). Converges quickly for x < (a+1)/(a+b+2).
inline double beta_cont_frac(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 1e-15;
  constexpr double kFpMin = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

/// Regularized incomplete beta I_x(a, b).
inline double inc_beta_reg(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cont_frac(a, b, x) / a;
  }
  return 1.0 - front * beta_cont_frac(b, a, 1.0 - x) / b;
}

}  // namespace detail

/// Reference distribution for a two-sided tail probability: either the
/// standard normal or Student t with the given degrees of freedom.
class TailReference {
 public:
  static TailReference normal() { return TailReference(true, 0.0); }
  static TailReference student_t(double df) {
    if (!(df >= 1.0)) {
      throw Error(ErrorCode::ConfigInvalid, "student_t requires df >= 1, got " + std::to_string(df));
    }
    return TailReference(false, df);
  }

  bool is_normal() const { return is_normal_; }
  double df() const { return df_; }

 private:
  TailReference(bool is_normal, double df) : is_normal_(is_normal), df_(df) {}
  bool is_normal_;
  double df_;
};

/// Two-sided tail probability 2 * (1 - CDF(|statistic|)).
/// Normal: erfc(|z| / sqrt(2)), accurate to a few ulp. Student t: the
/// identity 2 * (1 - F(|t|)) = I_{df/(df+t^2)}(df/2, 1/2).
inline double tail_p_value(double statistic, const TailReference& ref) {
  if (!std::isfinite(statistic)) {
    throw Error(ErrorCode::ConfigInvalid, "tail_p_value requires a finite statistic");
  }
  const double abs_stat = std::fabs(statistic);
  if (ref.is_normal()) {
    return std::erfc(abs_stat / 1.4142135623730950488);
  }
  const double df = ref.df();
  const double x = df / (df + abs_stat * abs_stat);
  return detail::inc_beta_reg(0.5 * df, 0.5, x);
}

}  // namespace pddid
