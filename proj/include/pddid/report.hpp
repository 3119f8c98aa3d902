#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "pddid/csv.hpp"
#include "pddid/did.hpp"
#include "pddid/errors.hpp"
#include "pddid/experiment.hpp"
#include "pddid/permutation.hpp"

namespace pddid {

namespace detail {

/// Minimal JSON emitter with insertion-ordered keys and %.17g floats. Result
/// documents have a pinned canonical byte layout, so identical results are
/// identical files; off-the-shelf writers reorder keys or shorten floats.
class JsonWriter {
 public:
  void begin_object() {
    comma();
    out_ += '{';
    stack_.push_back(false);
  }
  void end_object() {
    out_ += '}';
    stack_.pop_back();
    if (!stack_.empty()) stack_.back() = true;
  }
  void begin_array() {
    comma();
    out_ += '[';
    stack_.push_back(false);
  }
  void end_array() {
    out_ += ']';
    stack_.pop_back();
    if (!stack_.empty()) stack_.back() = true;
  }
  void key(const std::string& name) {
    comma();
    write_string(name);
    out_ += ':';
    pending_value_ = true;
  }
  void value(const std::string& v) {
    comma();
    write_string(v);
    mark();
  }
  void value(const char* v) { value(std::string(v)); }
  void value(double v) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::NonFinite, "refusing to serialize a non-finite value");
    }
    comma();
    char buf[40];  // canonical form: 17 significant digits, exact round trip
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out_ += buf;
    mark();
  }
  void value(long v) {
    comma();
    out_ += std::to_string(v);
    mark();
  }
  void value(int v) { value(static_cast<long>(v)); }
  void value(std::uint64_t v) {
    comma();
    out_ += std::to_string(v);
    mark();
  }
  void value(bool v) {
    comma();
    out_ += v ? "true" : "false";
    mark();
  }

  void field(const std::string& name, double v) { key(name); value(v); }
  void field(const std::string& name, const std::string& v) { key(name); value(v); }
  void field(const std::string& name, const char* v) { key(name); value(v); }
  void field(const std::string& name, long v) { key(name); value(v); }
  void field(const std::string& name, int v) { key(name); value(v); }
  void field(const std::string& name, std::uint64_t v) { key(name); value(v); }
  void field(const std::string& name, bool v) { key(name); value(v); }

  const std::string& str() const { return out_; }

 private:
  void comma() {
    if (pending_value_) {
      pending_value_ = false;
      return;
    }
    if (!stack_.empty() && stack_.back()) out_ += ',';
  }
  void mark() {
    if (!stack_.empty()) stack_.back() = true;
  }
  void write_string(const std::string& s) {
    out_ += '"';
    for (char c : s) {
      switch (c) {
        case '"': out_ += "\\\""; break;
        case '\\': out_ += "\\\\"; break;
        case '\n': out_ += "\\n"; break;
        case '\r': out_ += "\\r"; break;
        case '\t': out_ += "\\t"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "\\u%04x",
                          static_cast<unsigned>(static_cast<unsigned char>(c)));
            out_ += buf;
          } else {
            out_ += c;
          }
      }
    }
    out_ += '"';
  }

  std::string out_;
  std::vector<bool> stack_;  // per level: "an element has been written"
  bool pending_value_ = false;
};

inline void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  out << body;
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path + "'");
}

inline void begin_document(JsonWriter& w, const char* kind) {
  w.begin_object();
  w.field("schema_version", "1");
  w.field("kind", kind);
  w.key("payload");
}

}  // namespace detail

/// did_estimate document: the interaction estimate plus the full coefficient
/// table. seed_info is empty (fits are functions of their input file alone).
inline std::string results_json(const DidEstimate& est, const DesignMatrix& design) {
  detail::JsonWriter w;
  detail::begin_document(w, "did_estimate");
  w.begin_object();
  w.field("gamma_hat", est.gamma_hat);
  w.field("se", est.se);
  w.field("p_value", est.p_value);
  w.field("method", did_method_name(est.spec.method));
  w.field("family", family_name(est.fit.family));
  w.field("trend_granularity", trend_granularity_name(est.spec.trend_granularity));
  w.field("trend_degree", est.spec.trend_degree);
  w.field("include_covariates", est.spec.include_covariates);
  w.field("n", static_cast<long>(design.n()));
  w.field("degrees_of_freedom", static_cast<long>(est.fit.degrees_of_freedom));
  w.field("residual_variance", est.fit.residual_variance);
  w.field("converged", est.fit.converged);
  w.key("coefficients");
  w.begin_array();
  for (std::size_t k = 0; k < est.fit.coefficients.size(); ++k) {
    w.begin_object();
    w.field("name", design.column_labels[k]);
    w.field("estimate", est.fit.coefficients[k]);
    w.field("se", est.fit.standard_errors[k]);
    w.field("p_value", est.fit.p_values[k]);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  w.key("seed_info");
  w.begin_object();
  w.end_object();
  w.end_object();
  return w.str() + "\n";
}

/// pd_did_result document: point estimate, adjusted interval, rank p-value,
/// and the permutation bookkeeping (m, failures, null mean).
inline std::string results_json(const PdDidResult& res) {
  detail::JsonWriter w;
  detail::begin_document(w, "pd_did_result");
  w.begin_object();
  w.field("gamma_hat", res.gamma_hat);
  w.field("ci_low", res.ci_low);
  w.field("ci_high", res.ci_high);
  w.field("p_value", res.p_value);
  w.field("m", res.config.m);
  w.field("failures", res.failures);
  w.field("alpha", res.config.alpha);
  w.field("null_mean", res.null.mean);
  w.field("method", did_method_name(res.spec.method));
  w.field("family", family_name(res.spec.family));
  w.end_object();
  w.key("seed_info");
  w.begin_object();
  w.field("seed", res.config.seed);
  w.end_object();
  w.end_object();
  return w.str() + "\n";
}

/// experiment_report document: one row object per (cell, method).
inline std::string results_json(const ExperimentReport& report) {
  detail::JsonWriter w;
  detail::begin_document(w, "experiment_report");
  w.begin_object();
  w.field("alpha", report.alpha);
  w.key("rows");
  w.begin_array();
  for (const auto& row : report.rows) {
    w.begin_object();
    w.field("gamma", row.gamma);
    w.field("l", row.l);
    w.field("rho", row.rho);
    w.field("method", analysis_method_name(row.method));
    w.field("mean_estimate", row.mean_estimate);
    w.field("bias", row.bias);
    w.field("rejection_count", row.rejection_count);
    w.field("rejection_rate", row.rejection_rate);
    w.field("replications", row.replications);
    w.field("failures", row.failures);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  w.key("seed_info");
  w.begin_object();
  w.field("master_seed", report.master_seed);
  w.field("perm_m", report.perm_m);
  w.end_object();
  w.end_object();
  return w.str() + "\n";
}

inline void write_results_json(const DidEstimate& est, const DesignMatrix& design,
                               const std::string& path) {
  detail::write_text_file(path, results_json(est, design));
}

inline void write_results_json(const PdDidResult& res, const std::string& path) {
  detail::write_text_file(path, results_json(res));
}

inline void write_results_json(const ExperimentReport& report, const std::string& path) {
  detail::write_text_file(path, results_json(report));
}

/// Table-layout CSV of an experiment report. Header pinned:
/// gamma,l,rho,method,mean_estimate,bias,rejection_rate,replications,failures
inline std::string experiment_csv(const ExperimentReport& report) {
  std::string out = "gamma,l,rho,method,mean_estimate,bias,rejection_rate,replications,failures\n";
  for (const auto& row : report.rows) {
    out += detail::format_double(row.gamma);
    out += ',';
    out += detail::format_double(row.l);
    out += ',';
    out += detail::format_double(row.rho);
    out += ',';
    out += analysis_method_name(row.method);
    out += ',';
    out += detail::format_double(row.mean_estimate);
    out += ',';
    out += detail::format_double(row.bias);
    out += ',';
    out += detail::format_double(row.rejection_rate);
    out += ',';
    out += std::to_string(row.replications);
    out += ',';
    out += std::to_string(row.failures);
    out += '\n';
  }
  return out;
}

inline void write_experiment_csv(const ExperimentReport& report, const std::string& path) {
  detail::write_text_file(path, experiment_csv(report));
}

}  // namespace pddid
