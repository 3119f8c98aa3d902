#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pddid/did.hpp"
#include "pddid/errors.hpp"
#include "pddid/glm.hpp"
#include "pddid/panel.hpp"
#include "pddid/parallel.hpp"
#include "pddid/rng.hpp"

namespace pddid {

struct PermutationConfig {
  int m = 1000;  // replicate count M; >= 500 recommended
  std::uint64_t seed = 0;
  double alpha = 0.05;

  void validate() const {
    if (m < 2) throw Error(ErrorCode::ConfigInvalid, "permutation replicate count m must be >= 2");
    if (!(alpha > 0.0 && alpha < 1.0)) {
      throw Error(ErrorCode::ConfigInvalid, "alpha must lie in (0, 1)");
    }
    if (alpha * (m + 1) < 1.0) {
      throw Error(ErrorCode::ConfigInvalid,
                  "alpha * (m + 1) must be >= 1 for the interval to resolve; raise m or alpha");
    }
  }
};

/// The permutation distribution of the effect estimate: replicate estimates
/// sorted ascending, plus their mean.
struct EmpiricalNull {
  std::vector<double> draws;
  double mean = 0.0;
};

/// Permutational-detrending output: the point estimate, the empirical null,
/// the null interval shifted to center on the estimate, and the rank
/// p-value. `failures` counts replicates dropped because their refit failed.
struct PdDidResult {
  double gamma_hat = 0.0;
  EmpiricalNull null;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double p_value = 1.0;
  int failures = 0;
  PermutationConfig config;
  ModelSpec spec;
};

namespace detail {

/// Permutation strata: one slot list per group, intervention groups first,
/// then reference groups, each arm in first-appearance order. Keeping the
/// shuffle within groups means group-level outcome components stay attached
/// to their group, so the empirical null reflects only the payload-to-time
/// matching the permutation is meant to randomize.
inline std::vector<std::vector<std::size_t>> permutation_strata(const PanelDataset& dataset) {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::size_t> index;
  for (int pass = 0; pass < 2; ++pass) {
    const Arm arm = pass == 0 ? Arm::intervention : Arm::reference;
    for (const auto& rec : dataset.records) {
      if (rec.arm == arm && index.emplace(rec.group_id, order.size()).second) {
        order.push_back(rec.group_id);
      }
    }
  }
  std::vector<std::vector<std::size_t>> strata(order.size());
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    strata[index[dataset.records[i].group_id]].push_back(i);
  }
  return strata;
}

/// Fisher-Yates over each stratum in order; `swap_payload(a, b)` exchanges
/// the movable part of two records. One RNG stream yields one well-defined
/// arrangement.
template <typename SwapPayload>
inline void shuffle_strata(const std::vector<std::vector<std::size_t>>& strata, Rng& rng,
                           SwapPayload&& swap_payload) {
  for (const auto& slots : strata) {
    for (std::size_t i = slots.size(); i-- > 1;) {
      const std::size_t j = static_cast<std::size_t>(rng.bounded(i + 1));
      if (j != i) swap_payload(slots[i], slots[j]);
    }
  }
}

}  // namespace detail

/// Returns a copy of the dataset with the (outcome, covariates) payloads of
/// the intervention records and, independently, the reference records
/// shuffled uniformly at random, stratified by group: each payload moves to a
/// uniformly random slot of its own group. Slot structure (unit, group, arm,
/// time) is untouched, so the payload multisets per group and per arm are
/// preserved exactly and the matching between a payload and an observation
/// time becomes random.
inline PanelDataset permute_within_arms(const PanelDataset& dataset, Rng& rng) {
  PanelDataset out = dataset;
  const auto strata = detail::permutation_strata(dataset);
  detail::shuffle_strata(strata, rng, [&](std::size_t a, std::size_t b) {
    std::swap(out.records[a].outcome, out.records[b].outcome);
    std::swap(out.records[a].covariates, out.records[b].covariates);
  });
  return out;
}

/// Quantile of the empirical null by linear interpolation between order
/// statistics: with h = (m - 1) * prob + 1 (1-based), returns
/// draws[floor(h)] + frac(h) * (draws[floor(h) + 1] - draws[floor(h)]),
/// clamped at the extremes.
inline double empirical_quantile(const EmpiricalNull& null, double prob) {
  const auto& d = null.draws;
  if (d.empty()) throw Error(ErrorCode::ConfigInvalid, "empirical null has no draws");
  if (!(prob >= 0.0 && prob <= 1.0)) {
    throw Error(ErrorCode::ConfigInvalid, "quantile probability must lie in [0, 1]");
  }
  const std::size_t m = d.size();
  const double h = static_cast<double>(m - 1) * prob + 1.0;
  if (h <= 1.0) return d.front();
  if (h >= static_cast<double>(m)) return d.back();
  const std::size_t k = static_cast<std::size_t>(h);  // 1-based floor
  const double frac = h - static_cast<double>(k);
  return d[k - 1] + frac * (d[k] - d[k - 1]);
}

/// Two-sided add-one rank p-value: with c_hi = #{draws >= gamma_hat} and
/// c_lo = #{draws <= gamma_hat}, p = min(1, 2 * min(c_hi + 1, c_lo + 1) / (m + 1)).
/// Strictly positive; ties count on both sides.
inline double rank_p_value(double gamma_hat, const EmpiricalNull& null) {
  const auto& d = null.draws;
  if (d.empty()) throw Error(ErrorCode::ConfigInvalid, "empirical null has no draws");
  const auto lo = std::lower_bound(d.begin(), d.end(), gamma_hat);
  const auto hi = std::upper_bound(d.begin(), d.end(), gamma_hat);
  const std::size_t c_hi = static_cast<std::size_t>(d.end() - lo);
  const std::size_t c_lo = static_cast<std::size_t>(hi - d.begin());
  const double m1 = static_cast<double>(d.size() + 1);
  const double tail = static_cast<double>(std::min(c_hi, c_lo) + 1);
  return std::min(1.0, 2.0 * tail / m1);
}

/// Permutational detrending DID. Steps: (1) point estimate on the original
/// data; (2-3) m within-arm permutation refits building the empirical null;
/// (4) its alpha/2 and 1-alpha/2 quantiles; (5) interval shifted by the point
/// estimate; (6) rank p-value of the point estimate in the null.
///
/// Replicate j draws from the substream derive_stream(cfg.seed, j), and
/// aggregation sorts the draws, so the result is bit-identical for identical
/// (dataset, spec, cfg) regardless of worker count or execution order.
/// Replicates whose refit fails (e.g. separation under a binomial family) are
/// dropped and counted; more than 1% dropped aborts with
/// PermutationDegenerate.
inline PdDidResult pd_did(const PanelDataset& dataset, const ModelSpec& spec,
                          const PermutationConfig& cfg, int workers = 0) {
  cfg.validate();
  PdDidResult result;
  result.config = cfg;
  result.spec = spec;

  const DidEstimate base = estimate_did(dataset, spec);
  result.gamma_hat = base.gamma_hat;

  const auto strata = detail::permutation_strata(dataset);
  const std::size_t m = static_cast<std::size_t>(cfg.m);
  std::vector<std::optional<double>> replicate(m);

  // A covariate-free gaussian design is invariant under payload permutation,
  // so one factorization serves every replicate; only the response moves.
  const bool fixed_design =
      spec.family == Family::gaussian &&
      (!spec.include_covariates || dataset.covariate_names.empty());

  if (fixed_design) {
    const DesignBuild build = build_design(dataset, spec);
    const LeastSquaresPlan plan(build.design);
    const std::size_t gamma_col = build.design.column_index("gamma");
    parallel_for(m, workers, [&](std::size_t j) {
      Rng rng(derive_stream(cfg.seed, j));
      std::vector<double> y = build.response;
      detail::shuffle_strata(strata, rng,
                             [&](std::size_t a, std::size_t b) { std::swap(y[a], y[b]); });
      replicate[j] = plan.coefficients(y)[gamma_col];
    });
  } else {
    parallel_for(m, workers, [&](std::size_t j) {
      Rng rng(derive_stream(cfg.seed, j));
      const PanelDataset permuted = permute_within_arms(dataset, rng);
      try {
        replicate[j] = estimate_did(permuted, spec).gamma_hat;
      } catch (const Error&) {
        replicate[j] = std::nullopt;  // dropped; counted below
      }
    });
  }

  auto& null = result.null;
  null.draws.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    if (replicate[j].has_value()) {
      null.draws.push_back(*replicate[j]);
    } else {
      ++result.failures;
    }
  }
  if (result.failures > 0.01 * static_cast<double>(m)) {
    throw Error(ErrorCode::PermutationDegenerate,
                std::to_string(result.failures) + " of " + std::to_string(m) +
                    " permutation replicates failed to fit");
  }
  std::sort(null.draws.begin(), null.draws.end());
  double sum = 0.0;
  for (double v : null.draws) sum += v;
  null.mean = sum / static_cast<double>(null.draws.size());

  result.ci_low = empirical_quantile(null, cfg.alpha / 2.0) + result.gamma_hat;
  result.ci_high = empirical_quantile(null, 1.0 - cfg.alpha / 2.0) + result.gamma_hat;
  result.p_value = rank_p_value(result.gamma_hat, null);
  return result;
}

}  // namespace pddid
