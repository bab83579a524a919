/**
 * @file sobol_report.hpp
 * @brief Result records shared by the exact pipeline, the brute-force oracle
 *        and the report writers.
 */
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bnsobol/model.hpp"

namespace bnsobol {

struct IndexEntry {
  VarId variable = 0;
  std::string name;
  std::optional<double> first;       ///< S_i
  std::optional<double> first_time;  ///< seconds
  std::optional<double> total;       ///< S^T_i
  std::optional<double> total_time;  ///< seconds
};

/// Closed index of a set of evidential variables.
struct ClosedEntry {
  std::vector<VarId> variables;
  std::vector<std::string> names;
  double value = 0.0;
  double time = 0.0;
};

struct SobolReport {
  std::string network_name;
  double expected_value = 0.0;
  double variance = 0.0;
  std::vector<IndexEntry> indices;  ///< ordered by variable id
  std::vector<ClosedEntry> closed;
  double total_time = 0.0;
  std::vector<std::string> warnings;
};

}  // namespace bnsobol
