#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pddid/errors.hpp"
#include "pddid/panel.hpp"
#include "pddid/rng.hpp"

namespace pddid {

/// Monte Carlo data-generating process: outcome = gamma * I + lambda_g * t +
/// alpha_g + u_g + v_i + w_it, with arm-symmetric trend slopes
/// lambda_g = +-trend_l / study_length, arm means +-alpha_arm, group effects
/// u_g ~ N(0, sigma_u^2), equicorrelated individual effects v_i (pairwise
/// correlation rho within a group), and a stationary AR(1) path w along each
/// individual's visits (marginal sd sigma_w, lag-1 correlation rho).
struct DgpConfig {
  double gamma = 0.0;
  double trend_l = 0.0;
  double rho = 0.0;
  double alpha_arm = 0.5;
  double sigma_u = 0.1;
  double sigma_v = 1.0;
  double sigma_w = 0.1;
  int groups_per_arm = 2;
  int n_per_group = 200;
  double study_length = 365.0;
  double cutoff = 182.0;
  int obs_min = 1;
  int obs_max = 7;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(rho >= 0.0 && rho < 1.0)) throw Error(ErrorCode::ConfigInvalid, "rho must lie in [0, 1)");
    if (sigma_u < 0.0 || sigma_v < 0.0 || sigma_w < 0.0) {
      throw Error(ErrorCode::ConfigInvalid, "sigma parameters must be nonnegative");
    }
    if (groups_per_arm < 1) throw Error(ErrorCode::ConfigInvalid, "groups_per_arm must be >= 1");
    if (n_per_group < 1) throw Error(ErrorCode::ConfigInvalid, "n_per_group must be >= 1");
    if (!(study_length > 0.0)) throw Error(ErrorCode::ConfigInvalid, "study_length must be positive");
    if (!(cutoff > 0.0 && cutoff < study_length)) {
      throw Error(ErrorCode::ConfigInvalid, "cutoff must lie strictly inside (0, study_length)");
    }
    const int max_days = static_cast<int>(study_length);
    if (obs_min < 1 || obs_min > obs_max) {
      throw Error(ErrorCode::ConfigInvalid, "need 1 <= obs_min <= obs_max");
    }
    if (obs_max > max_days) {
      throw Error(ErrorCode::ConfigInvalid,
                  "obs_max exceeds the number of whole days in the study window");
    }
  }
};

/// Equicorrelated normal effects: v_i = sqrt(rho) * a + sqrt(1 - rho) * b_i
/// with a, b_i independent N(0, sigma^2), giving Var(v_i) = sigma^2 and
/// pairwise correlation exactly rho.
inline std::vector<double> correlated_effects(int n, double rho, double sigma, Rng& rng) {
  const double shared = rng.normal(sigma);
  const double w_shared = std::sqrt(rho);
  const double w_own = std::sqrt(1.0 - rho);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto& v : out) v = w_shared * shared + w_own * rng.normal(sigma);
  return out;
}

/// Stationary AR(1): w_1 ~ N(0, sigma^2), w_j = rho * w_{j-1} + eta_j with
/// eta_j ~ N(0, sigma^2 (1 - rho^2)). Marginal variance sigma^2 at every
/// index, lag-1 correlation rho.
inline std::vector<double> ar1_path(int k, double rho, double sigma, Rng& rng) {
  std::vector<double> out(static_cast<std::size_t>(k));
  const double innovation_sd = sigma * std::sqrt(1.0 - rho * rho);
  out[0] = rng.normal(sigma);
  for (std::size_t j = 1; j < out.size(); ++j) {
    out[j] = rho * out[j - 1] + rng.normal(innovation_sd);
  }
  return out;
}

/// One simulated panel. Groups are laid out intervention-first (I1..Ik then
/// R1..Rk); each individual gets uniform{obs_min..obs_max} visits on distinct
/// integer days of the study window, sorted ascending, with the AR(1) path
/// running along that visit order.
inline PanelDataset simulate_panel(const DgpConfig& cfg, Rng& rng) {
  cfg.validate();
  PanelDataset ds;
  ds.study_length = cfg.study_length;
  ds.cutoff = cfg.cutoff;

  const int max_day = static_cast<int>(cfg.study_length);
  const int obs_span = cfg.obs_max - cfg.obs_min + 1;
  ds.records.reserve(static_cast<std::size_t>(2 * cfg.groups_per_arm * cfg.n_per_group) *
                     static_cast<std::size_t>((cfg.obs_min + cfg.obs_max) / 2 + 1));

  std::vector<int> days;
  for (int arm_idx = 0; arm_idx < 2; ++arm_idx) {
    const Arm arm = arm_idx == 0 ? Arm::intervention : Arm::reference;
    const double sign = arm == Arm::intervention ? 1.0 : -1.0;
    const double slope = sign * cfg.trend_l / cfg.study_length;
    const double level = sign * cfg.alpha_arm;
    for (int g = 0; g < cfg.groups_per_arm; ++g) {
      const std::string group_id =
          (arm == Arm::intervention ? "I" : "R") + std::to_string(g + 1);
      const double group_effect = rng.normal(cfg.sigma_u);
      const std::vector<double> individual_effects =
          correlated_effects(cfg.n_per_group, cfg.rho, cfg.sigma_v, rng);
      for (int i = 0; i < cfg.n_per_group; ++i) {
        const int n_obs = cfg.obs_min + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(obs_span)));
        days.clear();
        while (static_cast<int>(days.size()) < n_obs) {
          const int day = 1 + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(max_day)));
          if (std::find(days.begin(), days.end(), day) == days.end()) days.push_back(day);
        }
        std::sort(days.begin(), days.end());
        const std::vector<double> noise = ar1_path(n_obs, cfg.rho, cfg.sigma_w, rng);
        for (int v = 0; v < n_obs; ++v) {
          ObservationRecord rec;
          rec.unit_id = group_id + ":" + std::to_string(i + 1);
          rec.group_id = group_id;
          rec.arm = arm;
          rec.time = static_cast<double>(days[static_cast<std::size_t>(v)]);
          const double intervention_on =
              (arm == Arm::intervention && rec.time > cfg.cutoff) ? 1.0 : 0.0;
          rec.outcome = cfg.gamma * intervention_on + slope * rec.time + level + group_effect +
                        individual_effects[static_cast<std::size_t>(i)] +
                        noise[static_cast<std::size_t>(v)];
          ds.records.push_back(std::move(rec));
        }
      }
    }
  }
  return ds;
}

inline PanelDataset simulate_panel(const DgpConfig& cfg) {
  Rng rng(cfg.seed);
  return simulate_panel(cfg, rng);
}

}  // namespace pddid
