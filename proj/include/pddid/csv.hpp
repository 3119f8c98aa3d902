#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pddid/errors.hpp"
#include "pddid/panel.hpp"

namespace pddid {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_number(const std::string& token, std::size_t line_no, const std::string& column) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw Error(ErrorCode::NonNumeric,
                "line " + std::to_string(line_no) + ", column '" + column + "': '" + token +
                    "' is not a number");
  }
  return value;
}

/// Shortest decimal that round-trips the double exactly.
inline std::string format_double(double v) {
  char buf[40];
  const auto result = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

}  // namespace detail

/// Reads a panel from CSV. Required columns (any order): unit_id, group_id,
/// arm, time, outcome; every additional column must be named z_<covariate>.
/// Arm labels are I/R (case-insensitive) or 1/0. The study length is the
/// maximum observed time; the cutoff is supplied by the caller. Row order is
/// preserved.
inline PanelDataset load_panel_csv(const std::string& path, double cutoff) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for reading");

  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::IoError, "'" + path + "' is empty (no header)");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = detail::split_csv_line(line);
  constexpr const char* required[] = {"unit_id", "group_id", "arm", "time", "outcome"};
  std::ptrdiff_t col_of[5] = {-1, -1, -1, -1, -1};
  std::vector<std::pair<std::size_t, std::string>> covariate_cols;  // (column, name)
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& name = header[c];
    bool matched = false;
    for (int k = 0; k < 5; ++k) {
      if (name == required[k]) {
        if (col_of[k] != -1) {
          throw Error(ErrorCode::UnknownColumn, "duplicate column '" + name + "'");
        }
        col_of[k] = static_cast<std::ptrdiff_t>(c);
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (name.rfind("z_", 0) == 0 && name.size() > 2) {
      covariate_cols.emplace_back(c, name.substr(2));
    } else {
      throw Error(ErrorCode::UnknownColumn,
                  "unexpected column '" + name + "' (covariates must be named z_<name>)");
    }
  }
  for (int k = 0; k < 5; ++k) {
    if (col_of[k] == -1) {
      throw Error(ErrorCode::MissingColumn, std::string("missing required column '") + required[k] + "'");
    }
  }

  PanelDataset ds;
  for (const auto& [c, name] : covariate_cols) ds.covariate_names.push_back(name);

  double max_time = 0.0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = detail::split_csv_line(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::NonNumeric, "line " + std::to_string(line_no) + ": expected " +
                                             std::to_string(header.size()) + " fields, got " +
                                             std::to_string(fields.size()));
    }
    ObservationRecord rec;
    rec.unit_id = fields[static_cast<std::size_t>(col_of[0])];
    rec.group_id = fields[static_cast<std::size_t>(col_of[1])];

    std::string arm = fields[static_cast<std::size_t>(col_of[2])];
    std::transform(arm.begin(), arm.end(), arm.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
    if (arm == "I" || arm == "1") {
      rec.arm = Arm::intervention;
    } else if (arm == "R" || arm == "0") {
      rec.arm = Arm::reference;
    } else {
      throw Error(ErrorCode::BadArmLabel,
                  "line " + std::to_string(line_no) + ": arm must be I/R or 1/0, got '" +
                      fields[static_cast<std::size_t>(col_of[2])] + "'");
    }

    rec.time = detail::parse_number(fields[static_cast<std::size_t>(col_of[3])], line_no, "time");
    rec.outcome = detail::parse_number(fields[static_cast<std::size_t>(col_of[4])], line_no, "outcome");
    rec.covariates.reserve(covariate_cols.size());
    for (const auto& [c, name] : covariate_cols) {
      rec.covariates.push_back(detail::parse_number(fields[c], line_no, "z_" + name));
    }
    max_time = std::max(max_time, rec.time);
    ds.records.push_back(std::move(rec));
  }

  ds.study_length = max_time;
  ds.cutoff = cutoff;
  if (!(ds.study_length > 0.0)) {
    throw Error(ErrorCode::ConfigInvalid, "'" + path + "' has no rows with positive time");
  }
  if (!(cutoff > 0.0 && cutoff < ds.study_length)) {
    throw Error(ErrorCode::ConfigInvalid,
                "cutoff must lie strictly inside (0, max time = " +
                    detail::format_double(ds.study_length) + ")");
  }

  // Arm consistency is a load-time error; the remaining invariants are
  // checked when an estimator touches the dataset.
  std::unordered_map<std::string, Arm> group_arm;
  for (const auto& rec : ds.records) {
    auto [it, inserted] = group_arm.emplace(rec.group_id, rec.arm);
    if (!inserted && it->second != rec.arm) {
      throw Error(ErrorCode::InconsistentArm, "group '" + rec.group_id + "' appears in both arms");
    }
  }
  return ds;
}

/// Inverse of load_panel_csv: header, then one row per record in order, arm
/// written as I/R, numbers in round-trip decimal form.
inline void write_panel_csv(const PanelDataset& ds, std::ostream& out) {
  out << "unit_id,group_id,arm,time,outcome";
  for (const auto& name : ds.covariate_names) out << ",z_" << name;
  out << "\n";
  for (const auto& rec : ds.records) {
    out << rec.unit_id << ',' << rec.group_id << ',' << (rec.arm == Arm::intervention ? 'I' : 'R')
        << ',' << detail::format_double(rec.time) << ',' << detail::format_double(rec.outcome);
    for (double z : rec.covariates) out << ',' << detail::format_double(z);
    out << "\n";
  }
}

inline void write_panel_csv(const PanelDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  write_panel_csv(ds, static_cast<std::ostream&>(out));
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path + "'");
}

}  // namespace pddid
