// Test-side oracles and fixtures. Everything here is independent
// of the library's solution paths: the least-squares oracle goes through the
// normal equations by Gaussian elimination, the t-tail oracle integrates the
// density, the logistic oracle climbs the likelihood by coordinate
// refinement, and the DID oracle differences cell means.
#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pddid/glm.hpp"
#include "pddid/panel.hpp"
#include "pddid/rng.hpp"

namespace oracle {

/// min ||X b - y|| via the normal equations: form X'X and X'y explicitly and
/// solve by Gaussian elimination with partial pivoting.
inline std::vector<double> normal_equations_lsq(const pddid::Matrix& x, const std::vector<double>& y) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  std::vector<std::vector<double>> a(p, std::vector<double>(p + 1, 0.0));
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < n; ++r) s += x(r, i) * x(r, j);
      a[i][j] = s;
    }
    double s = 0.0;
    for (std::size_t r = 0; r < n; ++r) s += x(r, i) * y[r];
    a[i][p] = s;
  }
  for (std::size_t col = 0; col < p; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < p; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    }
    std::swap(a[col], a[pivot]);
    if (a[col][col] == 0.0) throw std::runtime_error("oracle: singular normal equations");
    for (std::size_t r = 0; r < p; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c <= p; ++c) a[r][c] -= f * a[col][c];
    }
  }
  std::vector<double> b(p);
  for (std::size_t i = 0; i < p; ++i) b[i] = a[i][p] / a[i][i];
  return b;
}

/// Two-sided Student-t tail probability by composite Simpson integration of
/// the density over [0, |t|]: p = 1 - 2 * integral.
inline double t_tail_by_quadrature(double t, double df) {
  const double abs_t = std::fabs(t);
  const double log_norm =
      std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) - 0.5 * std::log(df * 3.14159265358979323846);
  auto density = [&](double u) {
    return std::exp(log_norm - 0.5 * (df + 1.0) * std::log1p(u * u / df));
  };
  const int steps = 40000;  // even
  const double h = abs_t / steps;
  double acc = density(0.0) + density(abs_t);
  for (int k = 1; k < steps; ++k) acc += density(h * k) * (k % 2 == 1 ? 4.0 : 2.0);
  const double integral = acc * h / 3.0;
  return 1.0 - 2.0 * integral;
}

inline double logistic_loglik(const pddid::Matrix& x, const std::vector<double>& y,
                              const std::vector<double>& beta) {
  double ll = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double eta = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) eta += x(i, j) * beta[j];
    // log(1 + e^eta) without overflow
    const double log1pe = eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
    ll += y[i] * eta - log1pe;
  }
  return ll;
}

/// Maximum-likelihood logistic coefficients by cyclic coordinate refinement
/// with a shrinking step. Shares no machinery with the solver it checks.
inline std::vector<double> logistic_mle_by_search(const pddid::Matrix& x, const std::vector<double>& y) {
  std::vector<double> beta(x.cols(), 0.0);
  double best = logistic_loglik(x, y, beta);
  double step = 0.5;
  while (step > 1e-9) {
    bool improved = false;
    for (std::size_t j = 0; j < beta.size(); ++j) {
      for (double delta : {step, -step}) {
        std::vector<double> candidate = beta;
        candidate[j] += delta;
        const double ll = logistic_loglik(x, y, candidate);
        if (ll > best) {
          best = ll;
          beta = candidate;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return beta;
}

/// Cell-means difference-in-differences:
/// (mean post - mean pre | intervention) - (mean post - mean pre | reference).
inline double cell_means_did(const pddid::PanelDataset& ds) {
  double sum[2][2] = {{0, 0}, {0, 0}};
  double cnt[2][2] = {{0, 0}, {0, 0}};
  for (const auto& rec : ds.records) {
    const int a = rec.arm == pddid::Arm::intervention ? 1 : 0;
    const int b = ds.is_post(rec.time) ? 1 : 0;
    sum[a][b] += rec.outcome;
    cnt[a][b] += 1.0;
  }
  return (sum[1][1] / cnt[1][1] - sum[1][0] / cnt[1][0]) -
         (sum[0][1] / cnt[0][1] - sum[0][0] / cnt[0][0]);
}

/// Kolmogorov-Smirnov distance of a sample from the uniform distribution on
/// [0, 1].
inline double ks_distance_from_uniform(std::vector<double> sample) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double hi = (static_cast<double>(i) + 1.0) / n - sample[i];
    const double lo = sample[i] - static_cast<double>(i) / n;
    worst = std::max({worst, std::fabs(hi), std::fabs(lo)});
  }
  return worst;
}

/// Minimal XML well-formedness check: tags balance and nest properly,
/// attribute values are quoted, text contains no stray '<' or unterminated
/// entity. Enough to catch malformed SVG output.
inline bool xml_well_formed(const std::string& doc, std::string* why = nullptr) {
  auto fail = [&](const std::string& message) {
    if (why) *why = message;
    return false;
  };
  std::vector<std::string> stack;
  std::size_t i = 0;
  const std::size_t n = doc.size();
  while (i < n) {
    const char c = doc[i];
    if (c == '<') {
      if (i + 1 < n && doc[i + 1] == '?') {  // prolog
        const std::size_t end = doc.find("?>", i);
        if (end == std::string::npos) return fail("unterminated processing instruction");
        i = end + 2;
        continue;
      }
      if (i + 3 < n && doc.compare(i, 4, "<!--") == 0) {
        const std::size_t end = doc.find("-->", i);
        if (end == std::string::npos) return fail("unterminated comment");
        i = end + 3;
        continue;
      }
      bool closing = false;
      std::size_t j = i + 1;
      if (j < n && doc[j] == '/') {
        closing = true;
        ++j;
      }
      std::string name;
      while (j < n && (std::isalnum(static_cast<unsigned char>(doc[j])) || doc[j] == ':' ||
                       doc[j] == '-' || doc[j] == '_')) {
        name += doc[j++];
      }
      if (name.empty()) return fail("empty tag name");
      // scan to '>' honoring quotes
      bool self_closing = false;
      char quote = 0;
      for (; j < n; ++j) {
        const char d = doc[j];
        if (quote != 0) {
          if (d == quote) quote = 0;
          continue;
        }
        if (d == '"' || d == '\'') {
          quote = d;
        } else if (d == '<') {
          return fail("'<' inside tag");
        } else if (d == '>') {
          self_closing = j > 0 && doc[j - 1] == '/';
          break;
        }
      }
      if (j >= n) return fail("unterminated tag");
      if (closing) {
        if (stack.empty() || stack.back() != name) return fail("mismatched closing tag " + name);
        stack.pop_back();
      } else if (!self_closing) {
        stack.push_back(name);
      }
      i = j + 1;
    } else if (c == '&') {
      const std::size_t end = doc.find(';', i);
      if (end == std::string::npos || end - i > 8) return fail("unterminated entity");
      i = end + 1;
    } else {
      ++i;
    }
  }
  if (!stack.empty()) return fail("unclosed tag " + stack.back());
  return true;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::size_t count_occurrences(const std::string& haystack, const std::string& needle) {
  std::size_t count = 0;
  for (std::size_t pos = haystack.find(needle); pos != std::string::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

}  // namespace oracle

namespace fixtures {

/// Balanced 2x2 dataset: each (arm, period) cell holds `replicates` records
/// at the given cell means. Times: pre at day 50, post at day 300 of a
/// 365-day window with cutoff 182.
inline pddid::PanelDataset cell_means_panel(double pre_ref, double post_ref, double pre_int,
                                            double post_int, int replicates = 10) {
  pddid::PanelDataset ds;
  ds.study_length = 365.0;
  ds.cutoff = 182.0;
  int unit = 0;
  auto add = [&](pddid::Arm arm, double time, double outcome) {
    pddid::ObservationRecord rec;
    rec.unit_id = "u" + std::to_string(++unit);
    rec.group_id = arm == pddid::Arm::intervention ? "gI" : "gR";
    rec.arm = arm;
    rec.time = time;
    rec.outcome = outcome;
    ds.records.push_back(std::move(rec));
  };
  for (int r = 0; r < replicates; ++r) {
    add(pddid::Arm::reference, 50.0, pre_ref);
    add(pddid::Arm::reference, 300.0, post_ref);
    add(pddid::Arm::intervention, 50.0, pre_int);
    add(pddid::Arm::intervention, 300.0, post_int);
  }
  return ds;
}

/// Noise-free panel on the detrending model: outcome = 0.5 * A +
/// slope_l * (t / 365) * (A ? +1 : -1) + gamma * (A and post), one record
/// every fourth day per arm.
inline pddid::PanelDataset noiseless_trend_panel(double gamma, double slope_l) {
  pddid::PanelDataset ds;
  ds.study_length = 365.0;
  ds.cutoff = 182.0;
  int unit = 0;
  for (int arm_idx = 0; arm_idx < 2; ++arm_idx) {
    const pddid::Arm arm = arm_idx == 0 ? pddid::Arm::intervention : pddid::Arm::reference;
    const double sign = arm == pddid::Arm::intervention ? 1.0 : -1.0;
    for (int day = 1; day <= 365; day += 4) {
      pddid::ObservationRecord rec;
      rec.unit_id = "u" + std::to_string(++unit);
      rec.group_id = arm == pddid::Arm::intervention ? "gI" : "gR";
      rec.arm = arm;
      rec.time = static_cast<double>(day);
      const double post = day > 182 ? 1.0 : 0.0;
      rec.outcome = 0.5 * (arm == pddid::Arm::intervention ? 1.0 : 0.0) +
                    slope_l * (rec.time / 365.0) * sign +
                    gamma * (arm == pddid::Arm::intervention ? post : 0.0);
      ds.records.push_back(std::move(rec));
    }
  }
  return ds;
}

/// Random small panel: 2 groups per arm, `n_units` individuals per group,
/// 1-3 visits each, gaussian outcomes. Guaranteed nonempty cells via four
/// anchor records.
inline pddid::PanelDataset random_panel(pddid::Rng& rng, int n_units = 12, int n_covariates = 0) {
  pddid::PanelDataset ds;
  ds.study_length = 365.0;
  ds.cutoff = 182.0;
  for (int c = 0; c < n_covariates; ++c) ds.covariate_names.push_back("z" + std::to_string(c + 1));
  int unit = 0;
  auto add_record = [&](pddid::Arm arm, const std::string& group, double time) {
    pddid::ObservationRecord rec;
    rec.unit_id = "u" + std::to_string(unit);
    rec.group_id = group;
    rec.arm = arm;
    rec.time = time;
    rec.outcome = rng.normal();
    for (int c = 0; c < n_covariates; ++c) rec.covariates.push_back(rng.normal());
    ds.records.push_back(std::move(rec));
  };
  for (int arm_idx = 0; arm_idx < 2; ++arm_idx) {
    const pddid::Arm arm = arm_idx == 0 ? pddid::Arm::intervention : pddid::Arm::reference;
    for (int g = 0; g < 2; ++g) {
      const std::string group = (arm_idx == 0 ? "I" : "R") + std::to_string(g + 1);
      for (int i = 0; i < n_units; ++i) {
        ++unit;
        const int visits = 1 + static_cast<int>(rng.bounded(3));
        for (int v = 0; v < visits; ++v) {
          add_record(arm, group, 1.0 + static_cast<double>(rng.bounded(365)));
        }
      }
      // anchors so the four cells are always populated
      ++unit;
      add_record(arm, group, 50.0);
      add_record(arm, group, 300.0);
    }
  }
  return ds;
}

}  // namespace fixtures
