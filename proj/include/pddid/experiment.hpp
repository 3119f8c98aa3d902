#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pddid/did.hpp"
#include "pddid/dgp.hpp"
#include "pddid/errors.hpp"
#include "pddid/parallel.hpp"
#include "pddid/permutation.hpp"
#include "pddid/rng.hpp"

namespace pddid {

enum class AnalysisMethod { original, detrending, pd };

inline const char* analysis_method_name(AnalysisMethod m) {
  switch (m) {
    case AnalysisMethod::original: return "original";
    case AnalysisMethod::detrending: return "detrending";
    case AnalysisMethod::pd: return "pd";
  }
  return "?";
}

/// The scenario grid of a size/bias/power study: every (gamma, l, rho) cell
/// is simulated `replications` times and every requested method is applied
/// to the same datasets.
struct ScenarioGrid {
  std::vector<double> gammas{0.0};
  std::vector<double> ls{-0.2, 0.0, 0.2};
  std::vector<double> rhos{0.0, 0.5};
  int replications = 500;
  std::vector<AnalysisMethod> methods{AnalysisMethod::original, AnalysisMethod::detrending,
                                      AnalysisMethod::pd};
  PermutationConfig perm{.m = 200, .seed = 0, .alpha = 0.05};
  DgpConfig dgp_base;
  double alpha = 0.05;
  std::uint64_t master_seed = 0;

  void validate() const {
    if (gammas.empty() || ls.empty() || rhos.empty()) {
      throw Error(ErrorCode::ConfigInvalid, "gamma/l/rho lists must be nonempty");
    }
    if (replications < 1) throw Error(ErrorCode::ConfigInvalid, "replications must be >= 1");
    if (methods.empty()) throw Error(ErrorCode::ConfigInvalid, "at least one method is required");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::ConfigInvalid, "alpha must lie in (0, 1)");
    if (std::find(methods.begin(), methods.end(), AnalysisMethod::pd) != methods.end()) {
      perm.validate();
    }
  }
};

struct ExperimentRow {
  double gamma = 0.0;
  double l = 0.0;
  double rho = 0.0;
  AnalysisMethod method = AnalysisMethod::original;
  double mean_estimate = 0.0;
  double bias = 0.0;
  long rejection_count = 0;
  double rejection_rate = 0.0;
  int replications = 0;
  int failures = 0;
};

struct ExperimentReport {
  std::vector<ExperimentRow> rows;
  double alpha = 0.05;
  std::uint64_t master_seed = 0;
  int perm_m = 0;  // 0 when pd was not run
};

namespace detail {

constexpr std::uint64_t kPermSalt = 0x5045524dULL;  // distinguishes the pd substream

struct ReplicateOutcome {
  double estimate = 0.0;
  bool rejected = false;
  bool failed = false;
};

}  // namespace detail

/// Runs the grid. Replicate r of cell c simulates one panel from the
/// substream derive_stream(derive_stream(master_seed, c), r); all requested
/// methods analyze that same panel, so method contrasts within a cell are
/// paired. A rejection is p_value < alpha. Deterministic for a given grid,
/// independent of the worker count.
inline ExperimentReport run_grid(const ScenarioGrid& grid, int workers = 0) {
  grid.validate();
  const std::size_t n_cells = grid.gammas.size() * grid.ls.size() * grid.rhos.size();
  const std::size_t reps = static_cast<std::size_t>(grid.replications);
  const std::size_t n_methods = grid.methods.size();

  // outcome[(cell * reps + r) * n_methods + k]
  std::vector<detail::ReplicateOutcome> outcomes(n_cells * reps * n_methods);

  const ModelSpec original_spec{.method = DidMethod::original, .family = Family::gaussian};
  const ModelSpec detrending_spec{.method = DidMethod::detrending, .family = Family::gaussian};

  parallel_for(n_cells * reps, workers, [&](std::size_t task) {
    const std::size_t cell = task / reps;
    const std::size_t r = task % reps;
    const std::size_t gi = cell / (grid.ls.size() * grid.rhos.size());
    const std::size_t li = (cell / grid.rhos.size()) % grid.ls.size();
    const std::size_t ri = cell % grid.rhos.size();

    DgpConfig cfg = grid.dgp_base;
    cfg.gamma = grid.gammas[gi];
    cfg.trend_l = grid.ls[li];
    cfg.rho = grid.rhos[ri];
    cfg.seed = derive_stream(derive_stream(grid.master_seed, cell), r);
    const PanelDataset panel = simulate_panel(cfg);

    for (std::size_t k = 0; k < n_methods; ++k) {
      auto& slot = outcomes[task * n_methods + k];
      try {
        switch (grid.methods[k]) {
          case AnalysisMethod::original: {
            const DidEstimate est = estimate_did(panel, original_spec);
            slot = {est.gamma_hat, est.p_value < grid.alpha, false};
            break;
          }
          case AnalysisMethod::detrending: {
            const DidEstimate est = estimate_did(panel, detrending_spec);
            slot = {est.gamma_hat, est.p_value < grid.alpha, false};
            break;
          }
          case AnalysisMethod::pd: {
            PermutationConfig perm = grid.perm;
            perm.alpha = grid.alpha;
            perm.seed = derive_stream(cfg.seed, detail::kPermSalt);
            const PdDidResult res = pd_did(panel, detrending_spec, perm, /*workers=*/1);
            slot = {res.gamma_hat, res.p_value < grid.alpha, false};
            break;
          }
        }
      } catch (const Error&) {
        slot.failed = true;
      }
    }
  });

  ExperimentReport report;
  report.alpha = grid.alpha;
  report.master_seed = grid.master_seed;
  const bool has_pd =
      std::find(grid.methods.begin(), grid.methods.end(), AnalysisMethod::pd) != grid.methods.end();
  report.perm_m = has_pd ? grid.perm.m : 0;
  report.rows.reserve(n_cells * n_methods);

  for (std::size_t cell = 0; cell < n_cells; ++cell) {
    const std::size_t gi = cell / (grid.ls.size() * grid.rhos.size());
    const std::size_t li = (cell / grid.rhos.size()) % grid.ls.size();
    const std::size_t ri = cell % grid.rhos.size();
    for (std::size_t k = 0; k < n_methods; ++k) {
      ExperimentRow row;
      row.gamma = grid.gammas[gi];
      row.l = grid.ls[li];
      row.rho = grid.rhos[ri];
      row.method = grid.methods[k];
      row.replications = grid.replications;
      double sum = 0.0;
      for (std::size_t r = 0; r < reps; ++r) {
        const auto& slot = outcomes[(cell * reps + r) * n_methods + k];
        if (slot.failed) {
          ++row.failures;
          continue;
        }
        sum += slot.estimate;
        row.rejection_count += slot.rejected ? 1 : 0;
      }
      const int effective = row.replications - row.failures;
      row.mean_estimate = effective > 0 ? sum / effective : 0.0;
      row.bias = row.mean_estimate - row.gamma;
      row.rejection_rate =
          effective > 0 ? static_cast<double>(row.rejection_count) / effective : 0.0;
      report.rows.push_back(row);
    }
  }
  return report;
}

struct PowerPoint {
  double gamma = 0.0;
  double rejection_rate = 0.0;
  double mean_estimate = 0.0;
};

/// The (gamma, rejection rate, mean estimate) slice for one method at one
/// (l, rho), sorted by gamma; ready for charting.
inline std::vector<PowerPoint> power_curve(const ExperimentReport& report, AnalysisMethod method,
                                           double l, double rho) {
  std::vector<PowerPoint> out;
  for (const auto& row : report.rows) {
    if (row.method == method && row.l == l && row.rho == rho) {
      out.push_back({row.gamma, row.rejection_rate, row.mean_estimate});
    }
  }
  if (out.empty()) {
    throw Error(ErrorCode::SliceEmpty,
                std::string("report has no rows for method=") + analysis_method_name(method) +
                    " l=" + std::to_string(l) + " rho=" + std::to_string(rho));
  }
  std::sort(out.begin(), out.end(),
            [](const PowerPoint& a, const PowerPoint& b) { return a.gamma < b.gamma; });
  return out;
}

}  // namespace pddid
