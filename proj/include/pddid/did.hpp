#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pddid/errors.hpp"
#include "pddid/glm.hpp"
#include "pddid/panel.hpp"

namespace pddid {

enum class DidMethod { original, detrending };
enum class TrendGranularity { per_group, per_arm };

inline const char* did_method_name(DidMethod m) {
  return m == DidMethod::original ? "original" : "detrending";
}

inline const char* trend_granularity_name(TrendGranularity g) {
  return g == TrendGranularity::per_group ? "per_group" : "per_arm";
}

/// Which regression to fit. `original` is the plain two-way dummy model;
/// `detrending` augments it with polynomial time-trend columns per trend
/// unit (group or arm). Trend fields are ignored for `original`.
struct ModelSpec {
  DidMethod method = DidMethod::original;
  Family family = Family::gaussian;
  TrendGranularity trend_granularity = TrendGranularity::per_group;
  int trend_degree = 1;
  bool include_covariates = false;
};

/// The fitted intervention effect: the coefficient of the interaction
/// column, pulled from the full fit by its label.
struct DidEstimate {
  double gamma_hat = 0.0;
  double se = 0.0;
  double p_value = 1.0;
  FitSummary fit;
  ModelSpec spec;
};

struct DesignBuild {
  DesignMatrix design;
  std::vector<double> response;
};

constexpr int kMaxTrendDegree = 5;

/// Assembles the regression design in fixed column order: intercept, arm
/// dummy, post dummy, interaction (labeled "gamma"), then for detrending the
/// trend columns (time/study_length)^d restricted to each trend unit, then
/// covariates. Time enters trend columns rescaled by the study length so the
/// trend block is conditioned like the dummy block; trend coefficients are
/// therefore in per-study-window units.
inline DesignBuild build_design(const PanelDataset& dataset, const ModelSpec& spec) {
  dataset.validate();
  const bool detrend = spec.method == DidMethod::detrending;
  if (detrend && (spec.trend_degree < 1 || spec.trend_degree > kMaxTrendDegree)) {
    throw Error(ErrorCode::ConfigInvalid,
                "trend_degree must be in [1, " + std::to_string(kMaxTrendDegree) + "]");
  }
  if (spec.include_covariates && dataset.covariate_names.empty()) {
    throw Error(ErrorCode::ConfigInvalid, "include_covariates set but the dataset has no covariates");
  }

  std::vector<std::string> trend_units;
  if (detrend) {
    if (spec.trend_granularity == TrendGranularity::per_group) {
      trend_units = dataset.group_order();
    } else {
      trend_units = {"intervention", "reference"};
    }
  }

  const std::size_t n = dataset.records.size();
  const std::size_t n_trend = trend_units.size() * (detrend ? spec.trend_degree : 0);
  const std::size_t n_cov = spec.include_covariates ? dataset.covariate_names.size() : 0;
  const std::size_t p = 4 + n_trend + n_cov;

  DesignBuild out;
  out.design.values = Matrix(n, p, 0.0);
  auto& labels = out.design.column_labels;
  labels = {"intercept", "arm", "post", "gamma"};
  for (const auto& unit : trend_units) {
    for (int d = 1; d <= spec.trend_degree; ++d) {
      labels.push_back("trend:" + unit + "^" + std::to_string(d));
    }
  }
  if (spec.include_covariates) {
    for (const auto& name : dataset.covariate_names) labels.push_back("z_" + name);
  }

  out.response.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& rec = dataset.records[i];
    const double a = rec.arm == Arm::intervention ? 1.0 : 0.0;
    const double b = dataset.is_post(rec.time) ? 1.0 : 0.0;
    auto& m = out.design.values;
    m(i, 0) = 1.0;
    m(i, 1) = a;
    m(i, 2) = b;
    m(i, 3) = a * b;
    std::size_t col = 4;
    if (detrend) {
      const double scaled_t = rec.time / dataset.study_length;
      for (const auto& unit : trend_units) {
        const bool in_unit = spec.trend_granularity == TrendGranularity::per_group
                                 ? rec.group_id == unit
                                 : unit == arm_name(rec.arm);
        double power = 1.0;
        for (int d = 1; d <= spec.trend_degree; ++d) {
          power *= scaled_t;
          m(i, col++) = in_unit ? power : 0.0;
        }
      }
    }
    if (spec.include_covariates) {
      for (double z : rec.covariates) m(i, col++) = z;
    }
    out.response[i] = rec.outcome;
  }
  return out;
}

namespace detail {

/// A rank failure that involves a trend column is reported as CollinearTrend
/// so callers can tell "your trend terms are redundant" from a genuinely
/// broken design.
[[noreturn]] inline void rethrow_rank_failure(const Error& e) {
  if (e.code() == ErrorCode::RankDeficient &&
      std::string(e.what()).find("trend:") != std::string::npos) {
    throw Error(ErrorCode::CollinearTrend, e.what());
  }
  throw e;
}

}  // namespace detail

/// Single-shot DID estimation: build the design, fit per family, report the
/// interaction coefficient with its classical SE and two-sided p-value.
inline DidEstimate estimate_did(const PanelDataset& dataset, const ModelSpec& spec) {
  DesignBuild build = build_design(dataset, spec);
  DidEstimate est;
  est.spec = spec;
  try {
    est.fit = spec.family == Family::gaussian
                  ? solve_least_squares(build.design, build.response)
                  : fit_logistic(build.design, build.response);
  } catch (const Error& e) {
    detail::rethrow_rank_failure(e);
  }
  const std::size_t k = build.design.column_index("gamma");
  est.gamma_hat = est.fit.coefficients[k];
  est.se = est.fit.standard_errors[k];
  est.p_value = est.fit.p_values[k];
  return est;
}

struct GammaIdentity {
  double beta1 = 0.0;  // post-period effect, intervention arm alone
  double beta0 = 0.0;  // post-period effect, reference arm alone
  double gamma = 0.0;  // beta1 - beta0
};

/// Fits the two per-arm reductions of the original model (outcome on
/// intercept + post dummy, one arm at a time). The difference of the two
/// post coefficients must reproduce the joint model's interaction
/// coefficient; tests use this as an independent route to gamma.
inline GammaIdentity gamma_identity_check(const PanelDataset& dataset) {
  dataset.validate();
  auto arm_post_coefficient = [&](Arm arm) {
    std::size_t n = 0;
    for (const auto& rec : dataset.records) n += rec.arm == arm ? 1 : 0;
    DesignMatrix x;
    x.values = Matrix(n, 2, 0.0);
    x.column_labels = {"intercept", "post"};
    std::vector<double> y(n);
    std::size_t row = 0;
    for (const auto& rec : dataset.records) {
      if (rec.arm != arm) continue;
      x.values(row, 0) = 1.0;
      x.values(row, 1) = dataset.is_post(rec.time) ? 1.0 : 0.0;
      y[row] = rec.outcome;
      ++row;
    }
    return solve_least_squares(x, y).coefficients[1];
  };
  GammaIdentity out;
  out.beta1 = arm_post_coefficient(Arm::intervention);
  out.beta0 = arm_post_coefficient(Arm::reference);
  out.gamma = out.beta1 - out.beta0;
  return out;
}

}  // namespace pddid
