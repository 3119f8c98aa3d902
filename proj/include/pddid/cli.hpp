#pragma once

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pddid/chart.hpp"
#include "pddid/csv.hpp"
#include "pddid/did.hpp"
#include "pddid/dgp.hpp"
#include "pddid/errors.hpp"
#include "pddid/experiment.hpp"
#include "pddid/permutation.hpp"
#include "pddid/report.hpp"

namespace pddid {

namespace cli_detail {

struct AnalysisOptions {
  std::string input;
  std::string output;
  double cutoff = 0.0;
  DidMethod method = DidMethod::original;
  Family family = Family::gaussian;
  TrendGranularity granularity = TrendGranularity::per_group;
  int trend_degree = 1;
  bool no_covariates = false;
};

inline void add_analysis_options(CLI::App* cmd, AnalysisOptions& opt) {
  cmd->add_option("input", opt.input, "panel CSV (unit_id,group_id,arm,time,outcome[,z_*...])")
      ->required();
  cmd->add_option("--cutoff", opt.cutoff,
                  "pre/post boundary in days; records with time > cutoff are post-period")
      ->required();
  cmd->add_option("--method", opt.method, "estimator")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, DidMethod>{{"original", DidMethod::original},
                                           {"detrending", DidMethod::detrending}},
          CLI::ignore_case));
  cmd->add_option("--family", opt.family, "outcome family")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, Family>{{"gaussian", Family::gaussian},
                                        {"binomial", Family::binomial}},
          CLI::ignore_case));
  cmd->add_option("--trend-granularity", opt.granularity, "one trend per group or per arm")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, TrendGranularity>{{"group", TrendGranularity::per_group},
                                                  {"arm", TrendGranularity::per_arm}},
          CLI::ignore_case));
  cmd->add_option("--trend-degree", opt.trend_degree, "polynomial degree of the detrending terms")
      ->check(CLI::Range(1, kMaxTrendDegree));
  cmd->add_flag("--no-covariates", opt.no_covariates, "ignore z_* columns even when present");
  cmd->add_option("-o,--output", opt.output, "write the JSON result here (default: stdout)");
}

inline ModelSpec model_spec_for(const AnalysisOptions& opt, const PanelDataset& ds) {
  ModelSpec spec;
  spec.method = opt.method;
  spec.family = opt.family;
  spec.trend_granularity = opt.granularity;
  spec.trend_degree = opt.trend_degree;
  spec.include_covariates = !opt.no_covariates && !ds.covariate_names.empty();
  return spec;
}

inline void add_dgp_options(CLI::App* cmd, DgpConfig& cfg) {
  cmd->add_option("--alpha-arm", cfg.alpha_arm, "arm mean level (+intervention, -reference)");
  cmd->add_option("--sigma-u", cfg.sigma_u, "group effect sd");
  cmd->add_option("--sigma-v", cfg.sigma_v, "individual effect sd");
  cmd->add_option("--sigma-w", cfg.sigma_w, "AR(1) observation noise sd");
  cmd->add_option("--groups-per-arm", cfg.groups_per_arm, "groups per arm");
  cmd->add_option("--n-per-group", cfg.n_per_group, "individuals per group");
  cmd->add_option("--study-length", cfg.study_length, "study window in days");
  cmd->add_option("--cutoff", cfg.cutoff, "pre/post boundary in days");
  cmd->add_option("--obs-min", cfg.obs_min, "minimum visits per individual");
  cmd->add_option("--obs-max", cfg.obs_max, "maximum visits per individual");
}

inline void emit(const std::string& body, const std::string& path) {
  if (path.empty()) {
    std::cout << body;
  } else {
    detail::write_text_file(path, body);
  }
}

inline std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace cli_detail

/// Entry point behind the pddid binary; args exclude the program name.
/// Exit status: 0 success, 2 usage error, 1 runtime failure. Diagnostics go
/// to stderr; data goes to the named files or stdout.
inline int run_cli(std::vector<std::string> args) {
  CLI::App app{"Difference-in-differences estimation with detrending and permutation inference"};
  app.require_subcommand(1);

  // --- fit ---
  cli_detail::AnalysisOptions fit_opt;
  CLI::App* fit_cmd = app.add_subcommand("fit", "estimate the intervention effect from a panel CSV");
  cli_detail::add_analysis_options(fit_cmd, fit_opt);

  // --- permtest ---
  cli_detail::AnalysisOptions perm_opt;
  perm_opt.method = DidMethod::detrending;
  PermutationConfig perm_cfg;
  CLI::App* perm_cmd =
      app.add_subcommand("permtest", "permutational detrending analysis of a panel CSV");
  cli_detail::add_analysis_options(perm_cmd, perm_opt);
  perm_cmd->add_option("--m", perm_cfg.m, "permutation replicates")->check(CLI::Range(2, 1000000));
  perm_cmd->add_option("--seed", perm_cfg.seed, "permutation RNG seed");
  perm_cmd->add_option("--alpha", perm_cfg.alpha, "interval level");

  // --- simulate ---
  DgpConfig sim_cfg;
  std::string sim_output;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "generate one synthetic panel as CSV");
  sim_cmd->add_option("--gamma", sim_cfg.gamma, "true intervention effect");
  sim_cmd->add_option("--l,--trend-l", sim_cfg.trend_l, "time-trend slope parameter l");
  sim_cmd->add_option("--rho", sim_cfg.rho, "individual-effect and AR(1) correlation");
  sim_cmd->add_option("--seed", sim_cfg.seed, "generator seed");
  cli_detail::add_dgp_options(sim_cmd, sim_cfg);
  sim_cmd->add_option("-o,--output", sim_output, "write the CSV here (default: stdout)");

  // --- experiment ---
  ScenarioGrid grid;
  std::vector<std::string> method_names{"original", "detrending", "pd"};
  std::string exp_output, exp_json, exp_chart;
  bool full_grid = false;
  CLI::App* exp_cmd =
      app.add_subcommand("experiment", "run a size/bias/power grid over (gamma, l, rho)");
  CLI::Option* gammas_opt =
      exp_cmd->add_option("--gammas", grid.gammas, "true effects (comma list)")->delimiter(',');
  CLI::Option* ls_opt =
      exp_cmd->add_option("--ls", grid.ls, "trend slope parameters (comma list)")->delimiter(',');
  CLI::Option* rhos_opt =
      exp_cmd->add_option("--rhos", grid.rhos, "correlations (comma list)")->delimiter(',');
  CLI::Option* reps_opt =
      exp_cmd->add_option("--replications", grid.replications, "datasets per cell");
  CLI::Option* m_opt = exp_cmd->add_option("--m", grid.perm.m, "permutation replicates for pd");
  exp_cmd->add_option("--methods", method_names, "subset of original,detrending,pd")->delimiter(',');
  exp_cmd->add_option("--alpha", grid.alpha, "rejection threshold");
  exp_cmd->add_option("--master-seed", grid.master_seed, "seed for the whole grid");
  exp_cmd->add_flag("--full-grid", full_grid,
                    "full 11x3 null grid at 1000 replications, m=1000 (hours, not minutes)");
  cli_detail::add_dgp_options(exp_cmd, grid.dgp_base);
  exp_cmd->add_option("-o,--output", exp_output, "write the report CSV here (default: stdout)");
  exp_cmd->add_option("--json", exp_json, "also write the report as JSON here");
  exp_cmd->add_option("--chart", exp_chart, "also write a power-curve SVG here");

  try {
    std::reverse(args.begin(), args.end());  // CLI11's vector parse pops from the back
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::cerr << "run with --help for usage\n";
    return 2;
  }

  try {
    if (fit_cmd->parsed()) {
      const PanelDataset ds = load_panel_csv(fit_opt.input, fit_opt.cutoff);
      const ModelSpec spec = cli_detail::model_spec_for(fit_opt, ds);
      const DesignBuild build = build_design(ds, spec);
      const DidEstimate est = estimate_did(ds, spec);
      cli_detail::emit(results_json(est, build.design), fit_opt.output);
      return 0;
    }
    if (perm_cmd->parsed()) {
      const PanelDataset ds = load_panel_csv(perm_opt.input, perm_opt.cutoff);
      const ModelSpec spec = cli_detail::model_spec_for(perm_opt, ds);
      if (spec.method == DidMethod::original) {
        std::cerr << "warning: permutation inference without detrending is sensitive to "
                     "trend differences between arms; consider --method detrending\n";
      }
      const PdDidResult res = pd_did(ds, spec, perm_cfg);
      cli_detail::emit(results_json(res), perm_opt.output);
      return 0;
    }
    if (sim_cmd->parsed()) {
      const PanelDataset ds = simulate_panel(sim_cfg);
      if (sim_output.empty()) {
        write_panel_csv(ds, std::cout);
      } else {
        write_panel_csv(ds, sim_output);
      }
      return 0;
    }
    if (exp_cmd->parsed()) {
      if (full_grid) {
        if (gammas_opt->count() == 0) grid.gammas = {0.0};
        if (ls_opt->count() == 0) {
          grid.ls = {-0.5, -0.4, -0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
        }
        if (rhos_opt->count() == 0) grid.rhos = {0.0, 0.5, 0.9};
        if (reps_opt->count() == 0) grid.replications = 1000;
        if (m_opt->count() == 0) grid.perm.m = 1000;
      }
      grid.methods.clear();
      for (const auto& name : method_names) {
        if (name == "original") {
          grid.methods.push_back(AnalysisMethod::original);
        } else if (name == "detrending") {
          grid.methods.push_back(AnalysisMethod::detrending);
        } else if (name == "pd") {
          grid.methods.push_back(AnalysisMethod::pd);
        } else {
          throw Error(ErrorCode::ConfigInvalid,
                      "unknown method '" + name + "' (expected original, detrending, pd)");
        }
      }
      const ExperimentReport report = run_grid(grid);
      cli_detail::emit(experiment_csv(report), exp_output);
      if (!exp_json.empty()) write_results_json(report, exp_json);
      if (!exp_chart.empty()) {
        // chart the first rho slice; label it when the grid has several
        std::vector<ChartCurve> curves;
        for (AnalysisMethod method : grid.methods) {
          for (double l : grid.ls) {
            ChartCurve curve;
            curve.label = std::string(analysis_method_name(method)) + " l=" + cli_detail::short_num(l);
            if (grid.rhos.size() > 1) {
              curve.label += " rho=" + cli_detail::short_num(grid.rhos.front());
            }
            for (const auto& pt : power_curve(report, method, l, grid.rhos.front())) {
              curve.points.emplace_back(pt.gamma, pt.rejection_rate);
            }
            curves.push_back(std::move(curve));
          }
        }
        render_power_chart(curves, exp_chart);
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;  // no subcommand parsed; require_subcommand should have caught this
}

inline int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  args.reserve(static_cast<std::size_t>(argc > 0 ? argc - 1 : 0));
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(std::move(args));
}

}  // namespace pddid
