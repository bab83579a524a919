/**
 * @file model.hpp
 * @brief Discrete Bayesian network data model and the output / evidential /
 *        chance partition used by the sensitivity analysis.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bnsobol/error.hpp"
#include "bnsobol/graph.hpp"

namespace bnsobol {

using VarId = int;
using VarSet = std::set<VarId>;

/// Absolute per-row tolerance on CPT normalization.
inline constexpr double kNormalizationTolerance = 1e-9;

struct Variable {
  VarId id = 0;
  std::string name;
  std::vector<std::string> domain;

  std::size_t cardinality() const noexcept { return domain.size(); }
  bool operator==(const Variable&) const = default;
};

/// Conditional probability table Pr(child | parents).
///
/// `table` is row-major over the listed parent order (first parent most
/// significant) with the child value varying fastest. Roots have no parents
/// and a single row.
struct Cpt {
  VarId child = 0;
  std::vector<VarId> parents;
  std::vector<double> table;

  bool operator==(const Cpt&) const = default;
};

class DiscreteBayesNet {
 public:
  DiscreteBayesNet() = default;

  /// Appends a variable and returns its id. The CPT starts empty.
  VarId add_variable(std::string name, std::vector<std::string> domain) {
    const auto id = static_cast<VarId>(variables_.size());
    variables_.push_back({id, std::move(name), std::move(domain)});
    cpts_.push_back({id, {}, {}});
    return id;
  }

  void set_cpt(VarId child, std::vector<VarId> parents, std::vector<double> table) {
    check(child);
    cpts_[child] = {child, std::move(parents), std::move(table)};
  }

  std::size_t size() const noexcept { return variables_.size(); }
  const std::vector<Variable>& variables() const noexcept { return variables_; }
  const std::vector<Cpt>& cpts() const noexcept { return cpts_; }
  const Variable& variable(VarId v) const { return variables_[check(v)]; }
  const Cpt& cpt(VarId v) const { return cpts_[check(v)]; }
  std::size_t cardinality(VarId v) const { return variable(v).cardinality(); }

  std::optional<VarId> find(std::string_view name) const {
    for (const auto& var : variables_)
      if (var.name == name) return var.id;
    return std::nullopt;
  }

  VarId index_of(std::string_view name) const {
    if (auto id = find(name)) return *id;
    throw Error(ErrorKind::InvalidArgument, "unknown variable '" + std::string(name) + "'");
  }

  std::optional<std::size_t> label_index(VarId v, std::string_view label) const {
    const auto& dom = variable(v).domain;
    auto it = std::find(dom.begin(), dom.end(), label);
    if (it == dom.end()) return std::nullopt;
    return static_cast<std::size_t>(it - dom.begin());
  }

  /// Parent lists as a graph; throws CyclicGraph on a directed cycle.
  graph::Dag dag() const {
    std::vector<std::vector<graph::Vertex>> lists;
    lists.reserve(cpts_.size());
    for (const auto& c : cpts_) lists.push_back(c.parents);
    return graph::Dag(std::move(lists));
  }

  VarSet roots() const {
    VarSet out;
    for (const auto& c : cpts_)
      if (c.parents.empty()) out.insert(c.child);
    return out;
  }

  std::string name;
  std::string description;

  bool operator==(const DiscreteBayesNet&) const = default;

 private:
  std::size_t check(VarId v) const {
    if (v < 0 || static_cast<std::size_t>(v) >= variables_.size())
      throw Error(ErrorKind::IndexOutOfRange, "variable id " + std::to_string(v));
    return static_cast<std::size_t>(v);
  }

  std::vector<Variable> variables_;
  std::vector<Cpt> cpts_;
};

/// Number of parent configurations of a CPT (product of parent cardinalities).
inline std::size_t row_count(const DiscreteBayesNet& bn, const Cpt& cpt) {
  std::size_t rows = 1;
  for (VarId p : cpt.parents) rows *= bn.cardinality(p);
  return rows;
}

/// Checks every structural and numerical invariant; reports the first violation.
inline ValidationResult validate_network(const DiscreteBayesNet& bn) {
  using R = ValidationResult;
  const auto n = static_cast<VarId>(bn.size());
  std::set<std::string> names;
  for (const auto& var : bn.variables()) {
    if (var.domain.size() < 2)
      return R::failure(ErrorKind::ShapeMismatch,
                        "variable '" + var.name + "' has fewer than two states", var.id);
    if (!names.insert(var.name).second)
      return R::failure(ErrorKind::SchemaError, "duplicate variable name '" + var.name + "'",
                        var.id);
    std::set<std::string> labels(var.domain.begin(), var.domain.end());
    if (labels.size() != var.domain.size())
      return R::failure(ErrorKind::SchemaError,
                        "duplicate label in domain of '" + var.name + "'", var.id);
  }
  for (const auto& cpt : bn.cpts()) {
    std::set<VarId> seen;
    for (VarId p : cpt.parents) {
      if (p < 0 || p >= n)
        return R::failure(ErrorKind::ShapeMismatch,
                          "parent id " + std::to_string(p) + " out of range", cpt.child);
      if (p == cpt.child)
        return R::failure(ErrorKind::CyclicGraph, "self loop", cpt.child);
      if (!seen.insert(p).second)
        return R::failure(ErrorKind::ShapeMismatch, "repeated parent", cpt.child);
    }
  }
  std::vector<std::vector<graph::Vertex>> lists;
  for (const auto& c : bn.cpts()) lists.push_back(c.parents);
  if (auto v = graph::find_cycle(lists))
    return R::failure(ErrorKind::CyclicGraph,
                      "directed cycle through '" + bn.variable(*v).name + "'", *v);

  for (const auto& cpt : bn.cpts()) {
    const auto& name = bn.variable(cpt.child).name;
    const std::size_t card = bn.cardinality(cpt.child);
    const std::size_t rows = row_count(bn, cpt);
    if (cpt.table.size() != rows * card)
      return R::failure(ErrorKind::ShapeMismatch,
                        "CPT of '" + name + "' has " + std::to_string(cpt.table.size()) +
                            " entries, expected " + std::to_string(rows * card),
                        cpt.child);
    for (std::size_t r = 0; r < rows; ++r) {
      double sum = 0.0;
      for (std::size_t k = 0; k < card; ++k) {
        const double p = cpt.table[r * card + k];
        if (!(p >= 0.0 && p <= 1.0))
          return R::failure(ErrorKind::UnnormalizedCpt,
                            "CPT of '" + name + "' has entry outside [0,1]", cpt.child);
        sum += p;
      }
      if (std::abs(sum - 1.0) > kNormalizationTolerance)
        return R::failure(ErrorKind::UnnormalizedCpt,
                          "CPT row " + std::to_string(r) + " of '" + name + "' sums to " +
                              std::to_string(sum),
                          cpt.child);
    }
  }
  return R::success();
}

/// Row index of a parent configuration, row-major over the CPT's parent order.
template <class StateOf>
std::size_t cpt_row(const DiscreteBayesNet& bn, const Cpt& cpt, StateOf&& state_of) {
  std::size_t row = 0;
  for (VarId p : cpt.parents) row = row * bn.cardinality(p) + state_of(p);
  return row;
}

/// Product of CPT entries for a full assignment (one state index per variable).
inline double joint_probability(const DiscreteBayesNet& bn, std::span<const std::size_t> states) {
  if (states.size() != bn.size())
    throw Error(ErrorKind::InvalidAssignment, "assignment covers " +
                                                  std::to_string(states.size()) + " of " +
                                                  std::to_string(bn.size()) + " variables");
  for (std::size_t v = 0; v < states.size(); ++v)
    if (states[v] >= bn.cardinality(static_cast<VarId>(v)))
      throw Error(ErrorKind::InvalidAssignment,
                  "state " + std::to_string(states[v]) + " out of domain of '" +
                      bn.variable(static_cast<VarId>(v)).name + "'");
  double p = 1.0;
  for (const auto& cpt : bn.cpts()) {
    const std::size_t row = cpt_row(bn, cpt, [&](VarId v) { return states[v]; });
    p *= cpt.table[row * bn.cardinality(cpt.child) + states[cpt.child]];
  }
  return p;
}

/// Label-based overload; every variable must be assigned by name.
inline double joint_probability(const DiscreteBayesNet& bn,
                                const std::map<std::string, std::string>& labels) {
  std::vector<std::size_t> states(bn.size());
  for (const auto& var : bn.variables()) {
    auto it = labels.find(var.name);
    if (it == labels.end())
      throw Error(ErrorKind::InvalidAssignment, "variable '" + var.name + "' not assigned");
    auto k = bn.label_index(var.id, it->second);
    if (!k)
      throw Error(ErrorKind::InvalidAssignment,
                  "label '" + it->second + "' not in domain of '" + var.name + "'");
    states[var.id] = *k;
  }
  return joint_probability(bn, states);
}

/// Output node O, evidential set E and chance set U (the complement).
struct AnalysisSpec {
  VarId output = 0;
  VarSet evidential;
  VarSet chance;
  std::map<std::string, double> value_map;

  /// Builds a spec with `chance` derived as the complement of {output} ∪ evidential.
  static AnalysisSpec make(const DiscreteBayesNet& bn, VarId output, VarSet evidential,
                           std::map<std::string, double> value_map) {
    AnalysisSpec s{output, std::move(evidential), {}, std::move(value_map)};
    for (VarId v = 0; v < static_cast<VarId>(bn.size()); ++v)
      if (v != output && !s.evidential.count(v)) s.chance.insert(v);
    return s;
  }

  bool operator==(const AnalysisSpec&) const = default;
};

inline ValidationResult validate_partition(const DiscreteBayesNet& bn, const AnalysisSpec& spec) {
  using R = ValidationResult;
  const auto n = static_cast<VarId>(bn.size());
  auto in_range = [&](VarId v) { return v >= 0 && v < n; };
  if (!in_range(spec.output))
    return R::failure(ErrorKind::IndexOutOfRange, "output id out of range", spec.output);
  for (VarId v : spec.evidential)
    if (!in_range(v)) return R::failure(ErrorKind::IndexOutOfRange, "evidential id out of range", v);
  for (VarId v : spec.chance)
    if (!in_range(v)) return R::failure(ErrorKind::IndexOutOfRange, "chance id out of range", v);

  if (spec.evidential.count(spec.output))
    return R::failure(ErrorKind::OverlappingPartition,
                      "output '" + bn.variable(spec.output).name + "' is also evidential",
                      spec.output);
  if (spec.chance.count(spec.output))
    return R::failure(ErrorKind::OverlappingPartition,
                      "output '" + bn.variable(spec.output).name + "' is also a chance node",
                      spec.output);
  for (VarId v : spec.evidential)
    if (spec.chance.count(v))
      return R::failure(ErrorKind::OverlappingPartition,
                        "'" + bn.variable(v).name + "' is both evidential and chance", v);
  for (VarId v = 0; v < n; ++v)
    if (v != spec.output && !spec.evidential.count(v) && !spec.chance.count(v))
      return R::failure(ErrorKind::OverlappingPartition,
                        "'" + bn.variable(v).name + "' is not covered by the partition", v);
  if (spec.evidential.empty())
    return R::failure(ErrorKind::EmptyEvidenceSet, "no evidential variables");
  for (const auto& label : bn.variable(spec.output).domain)
    if (!spec.value_map.count(label))
      return R::failure(ErrorKind::MissingValueMap,
                        "no value for output label '" + label + "'", spec.output);
  return R::success();
}

/// value_map applied to the output labels in domain order.
inline std::vector<double> output_values(const DiscreteBayesNet& bn, const AnalysisSpec& spec) {
  std::vector<double> out;
  for (const auto& label : bn.variable(spec.output).domain) {
    auto it = spec.value_map.find(label);
    if (it == spec.value_map.end())
      throw Error(ErrorKind::MissingValueMap, "no value for output label '" + label + "'");
    out.push_back(it->second);
  }
  return out;
}

}  // namespace bnsobol
