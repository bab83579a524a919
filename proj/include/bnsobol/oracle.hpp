/**
 * @file oracle.hpp
 * @brief Brute-force reference computations on the full joint table.
 *
 * Nothing here touches factors, networks or elimination: every quantity is a
 * plain summation over enumerated assignments, so results from this header
 * can validate the tensor network pipeline.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "bnsobol/error.hpp"
#include "bnsobol/model.hpp"
#include "bnsobol/sobol_report.hpp"

namespace bnsobol::oracle {

inline constexpr std::size_t kDefaultStateCap = 10'000'000;

struct JointTable {
  std::vector<VarId> order;          ///< variable ids, most significant first
  std::vector<std::size_t> cards;
  std::vector<double> probability;   ///< row-major over `order`
};

inline std::size_t state_space(const DiscreteBayesNet& bn, std::size_t cap) {
  std::size_t cells = 1;
  for (const auto& var : bn.variables()) {
    if (cells > cap / var.cardinality())
      throw Error(ErrorKind::StateSpaceTooLarge,
                  "joint state space exceeds cap of " + std::to_string(cap) + " cells");
    cells *= var.cardinality();
  }
  return cells;
}

/// Every full assignment with its joint probability.
inline JointTable enumerate_joint(const DiscreteBayesNet& bn, std::size_t cap = kDefaultStateCap) {
  const std::size_t cells = state_space(bn, cap);
  JointTable t;
  for (const auto& var : bn.variables()) {
    t.order.push_back(var.id);
    t.cards.push_back(var.cardinality());
  }
  t.probability.resize(cells);
  std::vector<std::size_t> states(bn.size(), 0);
  for (std::size_t k = 0; k < cells; ++k) {
    t.probability[k] = joint_probability(bn, states);
    for (std::size_t d = states.size(); d-- > 0;) {
      if (++states[d] < t.cards[d]) break;
      states[d] = 0;
    }
  }
  return t;
}

struct FunctionRow {
  std::vector<std::size_t> evidence;  ///< states of E in ascending id order
  double probability = 0.0;           ///< Pr(y_E)
  double value = 0.0;                 ///< f(y_E), 0 when Pr(y_E) = 0
  bool zero_probability = false;
};

/// Table of (y_E, Pr(y_E), f(y_E)), row-major over E in ascending id order.
inline std::vector<FunctionRow> brute_force_f(const DiscreteBayesNet& bn, const AnalysisSpec& spec,
                                              std::size_t cap = kDefaultStateCap) {
  const JointTable joint = enumerate_joint(bn, cap);
  const std::vector<VarId> ev(spec.evidential.begin(), spec.evidential.end());
  const std::vector<double> values = output_values(bn, spec);

  std::size_t rows = 1;
  for (VarId v : ev) rows *= bn.cardinality(v);
  std::vector<double> mass(rows, 0.0), weighted(rows, 0.0);

  std::vector<std::size_t> states(bn.size(), 0);
  for (std::size_t k = 0; k < joint.probability.size(); ++k) {
    std::size_t row = 0;
    for (VarId v : ev) row = row * bn.cardinality(v) + states[v];
    mass[row] += joint.probability[k];
    weighted[row] += joint.probability[k] * values[states[spec.output]];
    for (std::size_t d = states.size(); d-- > 0;) {
      if (++states[d] < joint.cards[d]) break;
      states[d] = 0;
    }
  }

  std::vector<FunctionRow> out(rows);
  std::vector<std::size_t> y(ev.size(), 0);
  for (std::size_t r = 0; r < rows; ++r) {
    out[r].evidence = y;
    out[r].probability = mass[r];
    out[r].zero_probability = mass[r] == 0.0;
    out[r].value = out[r].zero_probability ? 0.0 : weighted[r] / mass[r];
    for (std::size_t d = y.size(); d-- > 0;) {
      if (++y[d] < bn.cardinality(ev[d])) break;
      y[d] = 0;
    }
  }
  return out;
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

inline Moments moments(const std::vector<FunctionRow>& table) {
  // two passes: centered sums avoid cancellation when Var << mean^2
  double mean = 0.0;
  for (const auto& r : table) mean += r.probability * r.value;
  double var = 0.0;
  for (const auto& r : table) var += r.probability * (r.value - mean) * (r.value - mean);
  return {mean, var};
}

namespace detail {

/// Per-group mass and mass-weighted sum of f.
struct Group {
  double mass = 0.0, sum = 0.0;
  double mean() const { return mass > 0.0 ? sum / mass : 0.0; }
};

inline std::vector<std::size_t> key_of(const FunctionRow& r, const std::vector<bool>& in_group) {
  std::vector<std::size_t> key;
  for (std::size_t k = 0; k < r.evidence.size(); ++k)
    if (in_group[k]) key.push_back(r.evidence[k]);
  return key;
}

/// Groups rows by the states of the positions flagged in `in_group`.
inline std::map<std::vector<std::size_t>, Group> group_by(const std::vector<FunctionRow>& table,
                                                          const std::vector<bool>& in_group) {
  std::map<std::vector<std::size_t>, Group> groups;
  for (const auto& r : table) {
    auto& g = groups[key_of(r, in_group)];
    g.mass += r.probability;
    g.sum += r.probability * r.value;
  }
  return groups;
}

/// Var over the grouping variables of the conditional mean given the group.
inline double variance_of_conditional_mean(const std::vector<FunctionRow>& table,
                                           const std::vector<bool>& in_group, double mean) {
  double acc = 0.0;
  for (const auto& [key, g] : group_by(table, in_group))
    acc += g.mass * (g.mean() - mean) * (g.mean() - mean);
  return acc;
}

/// Expectation over the grouping variables of the conditional variance given the group.
inline double expected_conditional_variance(const std::vector<FunctionRow>& table,
                                            const std::vector<bool>& in_group) {
  const auto groups = group_by(table, in_group);
  double acc = 0.0;
  for (const auto& r : table) {
    const double d = r.value - groups.at(key_of(r, in_group)).mean();
    acc += r.probability * d * d;
  }
  return acc;
}

inline std::vector<bool> positions(const AnalysisSpec& spec, const VarSet& vars) {
  std::vector<bool> out;
  for (VarId v : spec.evidential) out.push_back(vars.count(v) > 0);
  return out;
}

}  // namespace detail

/// Closed index Var_a[E_{\a}[f]] / Var[f] by direct summation.
inline double brute_force_closed_index(const std::vector<FunctionRow>& table, const AnalysisSpec& spec,
                                       const VarSet& subset) {
  const Moments mom = moments(table);
  if (!(mom.variance > 1e-12))
    throw Error(ErrorKind::DegenerateOutput, "Var[f] = " + std::to_string(mom.variance));
  return detail::variance_of_conditional_mean(table, detail::positions(spec, subset), mom.mean) /
         mom.variance;
}

/**
 * E[f], Var[f], S_i = Var_i[E_{\i}[f]] / Var[f] and
 * S^T_i = E_{\i}[Var_i[f]] / Var[f] for every evidential i, with the exact
 * conditional weights derived from Pr(y_E).
 */
inline SobolReport brute_force_indices(const DiscreteBayesNet& bn, const AnalysisSpec& spec,
                                       std::size_t cap = kDefaultStateCap) {
  validate_network(bn).throw_if_failed();
  validate_partition(bn, spec).throw_if_failed();
  const auto table = brute_force_f(bn, spec, cap);
  const Moments mom = moments(table);
  if (!(mom.variance > 1e-12))
    throw Error(ErrorKind::DegenerateOutput, "Var[f] = " + std::to_string(mom.variance));

  SobolReport report;
  report.network_name = bn.name;
  report.expected_value = mom.mean;
  report.variance = mom.variance;
  for (VarId i : spec.evidential) {
    IndexEntry e;
    e.variable = i;
    e.name = bn.variable(i).name;
    const auto only_i = detail::positions(spec, {i});
    std::vector<bool> all_but_i(only_i.size());
    for (std::size_t k = 0; k < only_i.size(); ++k) all_but_i[k] = !only_i[k];
    e.first = detail::variance_of_conditional_mean(table, only_i, mom.mean) / mom.variance;
    e.total = detail::expected_conditional_variance(table, all_but_i) / mom.variance;
    e.first_time = 0.0;
    e.total_time = 0.0;
    report.indices.push_back(std::move(e));
  }
  return report;
}

struct McEstimate {
  VarId variable = 0;
  double first = 0.0, first_se = 0.0;
  double total = 0.0, total_se = 0.0;
};

struct McReport {
  double expected_value = 0.0;
  double variance = 0.0;
  std::vector<McEstimate> indices;
};

/**
 * Pick-freeze Monte Carlo estimates for independent (root) evidential inputs.
 *
 * Draws two independent input matrices A and B from the root priors and uses
 * the Saltelli (2010) first-order and Jansen total-effect estimators with
 * delta-method standard errors. f is read from the brute-force table.
 */
inline McReport mc_indices(const DiscreteBayesNet& bn, const AnalysisSpec& spec,
                           std::size_t samples, std::uint64_t seed,
                           std::size_t cap = kDefaultStateCap) {
  validate_network(bn).throw_if_failed();
  validate_partition(bn, spec).throw_if_failed();
  for (VarId v : spec.evidential)
    if (!bn.cpt(v).parents.empty())
      throw Error(ErrorKind::DependentInputsUnsupported,
                  "evidential variable '" + bn.variable(v).name + "' has parents");
  if (samples < 2) throw Error(ErrorKind::InvalidArgument, "need at least two samples");

  const auto table = brute_force_f(bn, spec, cap);
  const std::vector<VarId> ev(spec.evidential.begin(), spec.evidential.end());
  const std::size_t d = ev.size();

  std::mt19937_64 rng(seed);
  std::vector<std::discrete_distribution<std::size_t>> prior;
  for (VarId v : ev) prior.emplace_back(bn.cpt(v).table.begin(), bn.cpt(v).table.end());

  auto draw = [&] {
    std::vector<std::size_t> y(d);
    for (std::size_t k = 0; k < d; ++k) y[k] = prior[k](rng);
    return y;
  };
  auto f = [&](const std::vector<std::size_t>& y) {
    std::size_t row = 0;
    for (std::size_t k = 0; k < d; ++k) row = row * bn.cardinality(ev[k]) + y[k];
    return table[row].value;
  };

  std::vector<std::vector<std::size_t>> a(samples), b(samples);
  std::vector<double> fa(samples), fb(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    a[s] = draw();
    b[s] = draw();
    fa[s] = f(a[s]);
    fb[s] = f(b[s]);
  }
  double mean = 0.0;
  for (std::size_t s = 0; s < samples; ++s) mean += fa[s] + fb[s];
  mean /= static_cast<double>(2 * samples);
  std::vector<double> var_terms(samples);
  double var = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    var_terms[s] = 0.5 * ((fa[s] - mean) * (fa[s] - mean) + (fb[s] - mean) * (fb[s] - mean));
    var += var_terms[s];
  }
  var /= static_cast<double>(samples);
  if (!(var > 1e-12)) throw Error(ErrorKind::DegenerateOutput, "sample variance vanishes");

  // ratio estimator mean(x)/var with the linearized standard error of x - ratio * var_terms
  auto ratio = [&](const std::vector<double>& x, double& se) {
    double mx = 0.0;
    for (double v : x) mx += v;
    mx /= static_cast<double>(samples);
    const double r = mx / var;
    double ss = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
      const double z = x[s] - r * var_terms[s];
      ss += z * z;
    }
    se = std::sqrt(ss / static_cast<double>(samples - 1) / static_cast<double>(samples)) / var;
    return r;
  };

  McReport out;
  out.expected_value = mean;
  out.variance = var;
  std::vector<double> first_terms(samples), total_terms(samples);
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t s = 0; s < samples; ++s) {
      auto ab = a[s];
      ab[k] = b[s][k];
      const double fab = f(ab);
      first_terms[s] = fb[s] * (fab - fa[s]);
      total_terms[s] = 0.5 * (fa[s] - fab) * (fa[s] - fab);
    }
    McEstimate e;
    e.variable = ev[k];
    e.first = ratio(first_terms, e.first_se);
    e.total = ratio(total_terms, e.total_se);
    out.indices.push_back(e);
  }
  return out;
}

}  // namespace bnsobol::oracle
