#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "pddid/errors.hpp"

namespace pddid {

enum class Arm { intervention, reference };

inline const char* arm_name(Arm a) {
  return a == Arm::intervention ? "intervention" : "reference";
}

/// One outcome measurement: individual `unit_id` of group `group_id`
/// (which belongs to one arm for the whole study) observed at `time` days
/// since study start.
struct ObservationRecord {
  std::string unit_id;
  std::string group_id;
  Arm arm = Arm::reference;
  double time = 0.0;
  double outcome = 0.0;
  std::vector<double> covariates;

  bool operator==(const ObservationRecord&) const = default;
};

/// The full panel plus its study-window metadata. `cutoff` splits the window:
/// a record is post-period iff time > cutoff (records exactly at the cutoff
/// are pre-period).
struct PanelDataset {
  std::vector<ObservationRecord> records;
  double study_length = 0.0;
  double cutoff = 0.0;
  std::vector<std::string> covariate_names;

  bool operator==(const PanelDataset&) const = default;

  bool is_post(double time) const { return time > cutoff; }

  /// Checks the dataset invariants: a positive study window with the cutoff
  /// inside it, every group in exactly one arm, finite outcomes and in-window
  /// times, covariate vectors of uniform length, and all four arm x period
  /// cells populated.
  void validate() const {
    if (!(study_length > 0.0)) {
      throw Error(ErrorCode::ConfigInvalid, "study_length must be positive");
    }
    if (!(cutoff > 0.0 && cutoff < study_length)) {
      throw Error(ErrorCode::ConfigInvalid, "cutoff must lie strictly inside (0, study_length)");
    }
    std::unordered_map<std::string, Arm> group_arm;
    bool cell[2][2] = {{false, false}, {false, false}};
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& rec = records[i];
      if (!(rec.time >= 0.0 && rec.time <= study_length)) {
        throw Error(ErrorCode::ConfigInvalid,
                    "record " + std::to_string(i) + " has time outside [0, study_length]");
      }
      if (!std::isfinite(rec.outcome)) {
        throw Error(ErrorCode::NonFinite, "record " + std::to_string(i) + " has a non-finite outcome");
      }
      if (rec.covariates.size() != covariate_names.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "record " + std::to_string(i) + " has " + std::to_string(rec.covariates.size()) +
                        " covariates; dataset declares " + std::to_string(covariate_names.size()));
      }
      for (double z : rec.covariates) {
        if (!std::isfinite(z)) {
          throw Error(ErrorCode::NonFinite, "record " + std::to_string(i) + " has a non-finite covariate");
        }
      }
      auto [it, inserted] = group_arm.emplace(rec.group_id, rec.arm);
      if (!inserted && it->second != rec.arm) {
        throw Error(ErrorCode::InconsistentArm, "group '" + rec.group_id + "' appears in both arms");
      }
      cell[rec.arm == Arm::intervention ? 1 : 0][is_post(rec.time) ? 1 : 0] = true;
    }
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        if (!cell[a][b]) {
          throw Error(ErrorCode::EmptyCell,
                      std::string("no records in the ") + (a ? "intervention" : "reference") + " arm " +
                          (b ? "post" : "pre") + "-period cell");
        }
      }
    }
  }

  /// Group ids in order of first appearance.
  std::vector<std::string> group_order() const {
    std::vector<std::string> order;
    std::unordered_map<std::string, bool> seen;
    for (const auto& rec : records) {
      if (!seen[rec.group_id]) {
        seen[rec.group_id] = true;
        order.push_back(rec.group_id);
      }
    }
    return order;
  }
};

}  // namespace pddid
