/**
 * @file sobol.hpp
 * @brief Exact Sobol indices of f(y_E) = E[Y_O | y_E] through tensor network
 *        arithmetic.
 *
 * With T the function network and J = M_{\E} the evidence marginal:
 *
 *   E[f]              = sum of T over everything
 *   E[f^2]            = sum of square_wrt(T, E) / J over everything
 *   E_i[E_{\i}[f]^2]  = sum over y_i of T_{\i}(y_i)^2 / J_{\i}(y_i)
 *   E_{\i}[E_i[f]^2]  = sum of square_wrt(T summed over i, E \ {i}) / (J summed over i)
 *
 * and every index is (moment - E[f]^2) / Var[f], the total index through
 * S^T_i = 1 - Var_{\i}[E_i[f]] / Var[f].
 *
 * The second-moment contractions run on a centered copy of T whose output
 * values are shifted by -E[f]. Indices are affine invariant, and centering
 * removes the cancellation in moment - E[f]^2 when Var[f] << E[f]^2.
 */
#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "bnsobol/error.hpp"
#include "bnsobol/graph.hpp"
#include "bnsobol/model.hpp"
#include "bnsobol/network.hpp"
#include "bnsobol/sobol_report.hpp"

namespace bnsobol {

/// Var[f] at or below this is treated as a constant output.
inline constexpr double kDegenerateVariance = 1e-12;
/// Negative variances down to -this are rounding noise and clamp to 0.
inline constexpr double kVarianceClamp = 1e-9;
/// Indices below -this are flagged in the report warnings.
inline constexpr double kNegativeIndexWarning = 1e-6;

/// Everything the per-variable computations share. Immutable once built.
struct SobolModel {
  TensorNetwork function;  ///< T
  TensorNetwork centered;  ///< T with output values shifted by -E[f]
  TensorNetwork evidence;  ///< J = M_{\E}, universe E
  VarSet evidential;
  double expected_value = 0.0;
  double centered_mean = 0.0;  ///< E[f - E[f]], zero up to rounding
  double second_moment = 0.0;
  double variance = 0.0;
};

inline double expected_value(const TensorNetwork& function) { return contract_all(function); }

/// E[f^2]: square T w.r.t. E, divide by J and contract once over everything.
inline double second_moment(const TensorNetwork& function, const TensorNetwork& evidence) {
  return contract_all(quotient(square_wrt(function, evidence.variables()), evidence));
}

inline double clamp_variance(double raw) {
  return (raw < 0.0 && raw >= -kVarianceClamp) ? 0.0 : raw;
}

/// Var[f] = E[f^2] - E[f]^2 with E taken as the universe of `evidence`.
inline double global_variance(const TensorNetwork& function, const TensorNetwork& evidence) {
  const double mean = expected_value(function);
  return clamp_variance(second_moment(function, evidence) - mean * mean);
}

/// Builds T and J for a validated network and spec. Families outside the
/// ancestral closure of {O} ∪ E are barren and left out; they sum to one.
inline SobolModel prepare(const DiscreteBayesNet& bn, const AnalysisSpec& spec) {
  validate_network(bn).throw_if_failed();
  validate_partition(bn, spec).throw_if_failed();
  const graph::Dag dag = bn.dag();

  VarSet targets = spec.evidential;
  targets.insert(spec.output);
  const TensorNetwork mrf = ancestral_mrf(bn, graph::ancestral_closure(dag, targets));

  const TensorNetwork evidence_mrf = ancestral_mrf(bn, graph::ancestral_closure(dag, spec.evidential));
  VarSet hidden;
  for (VarId v : evidence_mrf.variables())
    if (!spec.evidential.count(v)) hidden.insert(v);

  SobolModel m;
  m.function = function_tn(mrf, bn, spec);
  m.evidence = marginalize(evidence_mrf, hidden);
  m.evidential = spec.evidential;
  m.expected_value = expected_value(m.function);

  std::vector<double> shifted = output_values(bn, spec);
  for (double& x : shifted) x -= m.expected_value;
  m.centered = function_tn(mrf, spec.output, std::move(shifted));
  m.centered_mean = expected_value(m.centered);
  const double central = second_moment(m.centered, m.evidence);
  m.variance = clamp_variance(central - m.centered_mean * m.centered_mean);
  m.second_moment = central + m.expected_value * (m.expected_value + 2.0 * m.centered_mean);
  return m;
}

namespace detail {

inline void require_indexable(const SobolModel& m) {
  if (!(m.variance > kDegenerateVariance))
    throw Error(ErrorKind::DegenerateOutput,
                "Var[f] = " + std::to_string(m.variance) + " (constant function of interest)");
}

inline void require_evidential(const SobolModel& m, const VarSet& vars) {
  if (vars.empty()) throw Error(ErrorKind::InvalidArgument, "empty variable set");
  for (VarId v : vars)
    if (!m.evidential.count(v))
      throw Error(ErrorKind::NotEvidential, "variable " + std::to_string(v) + " is not evidential");
}

/// E_a[E_{\a}[g]^2] for a set a of evidential variables, g = f - E[f].
inline double closed_moment(const SobolModel& m, const VarSet& subset) {
  if (subset.size() == 1) {
    // one-variable networks: collapse first, square the single factor
    const Factor t = collapse(m.centered, subset);
    const Factor j = collapse(m.evidence, subset);
    const Factor ratio = factor_div(factor_square(t), j);
    return std::accumulate(ratio.values().begin(), ratio.values().end(), 0.0);
  }
  VarSet rest_t, rest_j;
  for (VarId v : m.centered.variables())
    if (!subset.count(v)) rest_t.insert(v);
  for (VarId v : m.evidence.variables())
    if (!subset.count(v)) rest_j.insert(v);
  const TensorNetwork t = marginalize(m.centered, rest_t);
  const TensorNetwork j = marginalize(m.evidence, rest_j);
  return contract_all(quotient(square_wrt(t, subset), j));
}

/// E_{\i}[E_i[g]^2], g = f - E[f].
inline double total_moment(const SobolModel& m, VarId i) {
  VarSet others = m.evidential;
  others.erase(i);
  const TensorNetwork t = marginalize(m.centered, {i});
  const TensorNetwork j = marginalize(m.evidence, {i});
  return contract_all(quotient(square_wrt(t, others), j));
}

}  // namespace detail

/// S_a = Var_a[E_{\a}[f]] / Var[f] for a nonempty subset a of E.
inline double closed_index(const SobolModel& m, const VarSet& subset) {
  detail::require_evidential(m, subset);
  detail::require_indexable(m);
  const double mean_sq = m.centered_mean * m.centered_mean;
  return (detail::closed_moment(m, subset) - mean_sq) / m.variance;
}

/// First-order index (variance component) S_i.
inline double variance_component(const SobolModel& m, VarId i) { return closed_index(m, {i}); }

/// Total index S^T_i = 1 - Var_{\i}[E_i[f]] / Var[f].
inline double total_index(const SobolModel& m, VarId i) {
  detail::require_evidential(m, {i});
  detail::require_indexable(m);
  const double mean_sq = m.centered_mean * m.centered_mean;
  return 1.0 - (detail::total_moment(m, i) - mean_sq) / m.variance;
}

struct SobolOptions {
  bool first_order = true;
  bool total = true;
  std::vector<VarSet> closed;
  /// Worker threads for the per-variable loop; 0 picks hardware concurrency.
  unsigned threads = 0;
};

/**
 * Runs the full analysis: T and J are built once, then every evidential
 * variable gets its S_i and S^T_i (and every requested subset its closed
 * index). Per-variable work is independent and may run on several threads;
 * the report is ordered by variable id regardless.
 */
inline SobolReport compute_all(const DiscreteBayesNet& bn, const AnalysisSpec& spec,
                               const SobolOptions& options = {}) {
  using Clock = std::chrono::steady_clock;
  auto seconds_since = [](Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
  };
  const auto start = Clock::now();

  const SobolModel model = prepare(bn, spec);
  SobolReport report;
  report.network_name = bn.name;
  report.expected_value = model.expected_value;
  report.variance = model.variance;
  if (std::fpclassify(model.second_moment) == FP_SUBNORMAL)
    report.warnings.push_back("E[f^2] underflowed to a subnormal value");
  detail::require_indexable(model);

  const std::vector<VarId> vars(spec.evidential.begin(), spec.evidential.end());
  report.indices.resize(vars.size());
  report.closed.resize(options.closed.size());
  const std::size_t tasks = vars.size() + options.closed.size();
  std::vector<std::exception_ptr> errors(tasks);

  auto run = [&](std::size_t k) {
    try {
      if (k < vars.size()) {
        IndexEntry& e = report.indices[k];
        e.variable = vars[k];
        e.name = bn.variable(vars[k]).name;
        if (options.first_order) {
          const auto t0 = Clock::now();
          e.first = variance_component(model, vars[k]);
          e.first_time = seconds_since(t0);
        }
        if (options.total) {
          const auto t0 = Clock::now();
          e.total = total_index(model, vars[k]);
          e.total_time = seconds_since(t0);
        }
      } else {
        const VarSet& subset = options.closed[k - vars.size()];
        ClosedEntry& c = report.closed[k - vars.size()];
        c.variables.assign(subset.begin(), subset.end());
        for (VarId v : subset) c.names.push_back(bn.variable(v).name);
        const auto t0 = Clock::now();
        c.value = closed_index(model, subset);
        c.time = seconds_since(t0);
      }
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };

  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(std::max<std::size_t>(tasks, 1)));
  if (threads == 1) {
    for (std::size_t k = 0; k < tasks; ++k) run(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t k; (k = next.fetch_add(1)) < tasks;) run(k);
      });
  }
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);

  for (const auto& e : report.indices) {
    for (const auto& [label, value] : {std::pair{"S", e.first}, std::pair{"ST", e.total}})
      if (value && (*value < -kNegativeIndexWarning || !std::isfinite(*value)))
        report.warnings.push_back(std::string(label) + " of '" + e.name + "' is " +
                                  std::to_string(*value));
  }
  report.total_time = seconds_since(start);
  return report;
}

/// g maps one label per input (in input order) to an output label; nullopt
/// marks a configuration where g is undefined.
using UtilityFunction =
    std::function<std::optional<std::string>(const std::vector<std::string>&)>;

/**
 * Appends a deterministic node O with parents `inputs` whose CPT puts
 * probability one on g(y_inputs). Throws PartialFunction if g is undefined
 * or returns a label outside `out_domain` for some parent configuration.
 */
inline DiscreteBayesNet encode_utility_node(const DiscreteBayesNet& bn, const UtilityFunction& g,
                                            const std::vector<VarId>& inputs,
                                            std::vector<std::string> out_domain,
                                            std::string name = "O") {
  for (VarId v : inputs) (void)bn.variable(v);
  DiscreteBayesNet out = bn;
  const std::size_t card = out_domain.size();
  const VarId node = out.add_variable(std::move(name), out_domain);

  std::vector<std::size_t> state(inputs.size(), 0);
  std::size_t rows = 1;
  for (VarId v : inputs) rows *= bn.cardinality(v);
  std::vector<double> table(rows * card, 0.0);
  std::vector<std::string> labels(inputs.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < inputs.size(); ++k)
      labels[k] = bn.variable(inputs[k]).domain[state[k]];
    const auto result = g(labels);
    const auto it = result ? std::find(out_domain.begin(), out_domain.end(), *result)
                           : out_domain.end();
    if (it == out_domain.end()) {
      std::string config;
      for (const auto& l : labels) config += (config.empty() ? "" : ",") + l;
      throw Error(ErrorKind::PartialFunction, "utility undefined at (" + config + ")");
    }
    table[r * card + static_cast<std::size_t>(it - out_domain.begin())] = 1.0;
    for (std::size_t k = inputs.size(); k-- > 0;) {
      if (++state[k] < bn.cardinality(inputs[k])) break;
      state[k] = 0;
    }
  }
  out.set_cpt(node, inputs, std::move(table));
  return out;
}

}  // namespace bnsobol
