/**
 * @file network.hpp
 * @brief Tensor networks and their arithmetic: derivation from a Bayesian
 *        network, evidence restriction, marginalization by variable
 *        elimination, squaring and quotient.
 *
 * A network is a universe of variables (id -> cardinality) together with two
 * factor lists. The value of the network at a full assignment is the product
 * of its `factors` divided by the product of its `divisors`. Divisors are
 * never inverted on their own; they are divided in when a variable they touch
 * is eliminated, so the 0/0 = 0 convention of factor_div is applied with the
 * numerator at hand.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "bnsobol/error.hpp"
#include "bnsobol/factor.hpp"
#include "bnsobol/graph.hpp"
#include "bnsobol/model.hpp"

namespace bnsobol {

/// Partial assignment: variable id -> state index.
using Assignment = std::map<VarId, std::size_t>;

class TensorNetwork {
 public:
  TensorNetwork() = default;

  void add_variable(VarId v, std::size_t card) {
    if (card == 0) throw Error(ErrorKind::ShapeMismatch, "zero cardinality");
    auto [it, inserted] = universe_.emplace(v, card);
    if (!inserted && it->second != card)
      throw Error(ErrorKind::AxisCardinalityMismatch, "variable " + std::to_string(v));
    id_bound_ = std::max(id_bound_, v + 1);
  }

  void add_factor(Factor f) { factors_.push_back(checked(std::move(f))); }
  void add_divisor(Factor f) { divisors_.push_back(checked(std::move(f))); }

  const std::map<VarId, std::size_t>& universe() const noexcept { return universe_; }
  const std::vector<Factor>& factors() const noexcept { return factors_; }
  const std::vector<Factor>& divisors() const noexcept { return divisors_; }
  /// Replica id -> original id, filled by square_wrt.
  const std::map<VarId, VarId>& replica_map() const noexcept { return replica_map_; }
  /// One past the largest id this network (or any network it was derived from) used.
  VarId id_bound() const noexcept { return id_bound_; }

  bool contains(VarId v) const { return universe_.count(v) > 0; }

  std::size_t cardinality(VarId v) const {
    auto it = universe_.find(v);
    if (it == universe_.end()) throw Error(ErrorKind::UnknownAxis, "variable " + std::to_string(v));
    return it->second;
  }

  VarSet variables() const {
    VarSet out;
    for (const auto& [v, c] : universe_) out.insert(v);
    return out;
  }

  /// Universe as vertices, one hyperedge per factor or divisor with axes.
  graph::Hypergraph hypergraph() const {
    graph::Hypergraph h;
    h.vertices = variables();
    for (const auto* list : {&factors_, &divisors_})
      for (const auto& f : *list)
        if (!f.is_scalar()) h.edges.emplace_back(f.axes().begin(), f.axes().end());
    return h;
  }

 private:
  friend TensorNetwork restrict(const TensorNetwork&, const Assignment&);
  friend TensorNetwork eliminate_in_order(const TensorNetwork&, const std::vector<VarId>&);
  friend TensorNetwork square_wrt(const TensorNetwork&, const VarSet&);
  friend TensorNetwork quotient(const TensorNetwork&, const TensorNetwork&);

  Factor checked(Factor f) const {
    for (std::size_t k = 0; k < f.axes().size(); ++k) {
      auto it = universe_.find(f.axes()[k]);
      if (it == universe_.end())
        throw Error(ErrorKind::UnknownAxis,
                    "factor axis " + std::to_string(f.axes()[k]) + " not in universe");
      if (it->second != f.cards()[k])
        throw Error(ErrorKind::AxisCardinalityMismatch, "axis " + std::to_string(f.axes()[k]));
    }
    return f;
  }

  std::map<VarId, std::size_t> universe_;
  std::vector<Factor> factors_;
  std::vector<Factor> divisors_;
  std::map<VarId, VarId> replica_map_;
  VarId id_bound_ = 0;
};

/// Factor Pr(child | parents) of one CPT, over the family axes.
inline Factor cpt_factor(const DiscreteBayesNet& bn, const Cpt& cpt) {
  std::vector<VarId> axes = cpt.parents;
  axes.push_back(cpt.child);
  std::vector<std::size_t> cards;
  for (VarId v : axes) cards.push_back(bn.cardinality(v));
  return Factor(std::move(axes), std::move(cards), cpt.table);
}

/// MRF of a Bayesian network: one factor per node over its family.
inline TensorNetwork mrf_from_bn(const DiscreteBayesNet& bn) {
  TensorNetwork tn;
  for (const auto& var : bn.variables()) tn.add_variable(var.id, var.cardinality());
  for (const auto& cpt : bn.cpts()) tn.add_factor(cpt_factor(bn, cpt));
  return tn;
}

/// MRF restricted to the families of `nodes`, which must be ancestrally closed.
/// Summing the remaining (barren) families out contributes exactly 1, so any
/// marginal over `nodes` is unchanged.
inline TensorNetwork ancestral_mrf(const DiscreteBayesNet& bn, const VarSet& nodes) {
  TensorNetwork tn;
  for (VarId v : nodes) tn.add_variable(v, bn.cardinality(v));
  for (VarId v : nodes) tn.add_factor(cpt_factor(bn, bn.cpt(v)));
  return tn;
}

/// Copy of `mrf` with the single-axis factor phi(y_O) = values[y_O] appended.
inline TensorNetwork function_tn(const TensorNetwork& mrf, VarId output, std::vector<double> values) {
  TensorNetwork t = mrf;
  if (values.size() != mrf.cardinality(output))
    throw Error(ErrorKind::MissingValueMap, "value map covers " + std::to_string(values.size()) +
                                                " of " + std::to_string(mrf.cardinality(output)) +
                                                " output labels");
  const std::size_t card = values.size();
  t.add_factor(Factor({output}, {card}, std::move(values)));
  return t;
}

inline TensorNetwork function_tn(const TensorNetwork& mrf, const DiscreteBayesNet& bn,
                                 const AnalysisSpec& spec) {
  return function_tn(mrf, spec.output, output_values(bn, spec));
}

/// Slices every factor at the assigned states; assigned variables leave the universe.
inline TensorNetwork restrict(const TensorNetwork& tn, const Assignment& assignment) {
  for (const auto& [v, s] : assignment) {
    if (!tn.contains(v))
      throw Error(ErrorKind::InvalidAssignment, "variable " + std::to_string(v) + " not in network");
    if (s >= tn.cardinality(v))
      throw Error(ErrorKind::InvalidAssignment,
                  "state " + std::to_string(s) + " of variable " + std::to_string(v));
  }
  TensorNetwork out;
  out.id_bound_ = tn.id_bound_;
  out.replica_map_ = tn.replica_map_;
  for (const auto& [v, c] : tn.universe_)
    if (!assignment.count(v)) out.universe_.emplace(v, c);
  auto slice_all = [&](const Factor& f) {
    Factor g = f;
    for (const auto& [v, s] : assignment)
      if (g.has_axis(v)) g = g.slice(v, s);
    return g;
  };
  for (const auto& f : tn.factors_) out.factors_.push_back(slice_all(f));
  for (const auto& f : tn.divisors_) out.divisors_.push_back(slice_all(f));
  return out;
}

/// Variable elimination along an explicit order. Each step multiplies the
/// factors touching the variable, divides by the divisors touching it, and
/// sums the variable out. Untouched factors pass through unchanged.
inline TensorNetwork eliminate_in_order(const TensorNetwork& tn, const std::vector<VarId>& order) {
  TensorNetwork out = tn;
  for (VarId v : order) {
    auto it = out.universe_.find(v);
    if (it == out.universe_.end())
      throw Error(ErrorKind::UnknownAxis, "cannot eliminate variable " + std::to_string(v));
    const std::size_t card = it->second;

    Factor numerator;
    bool touched = false;
    std::vector<Factor> keep;
    for (auto& f : out.factors_) {
      if (f.has_axis(v)) {
        numerator = touched ? factor_product(numerator, f) : std::move(f);
        touched = true;
      } else {
        keep.push_back(std::move(f));
      }
    }
    out.factors_ = std::move(keep);

    Factor denominator;
    bool divided = false;
    std::vector<Factor> keep_div;
    for (auto& f : out.divisors_) {
      if (f.has_axis(v)) {
        denominator = divided ? factor_product(denominator, f) : std::move(f);
        divided = true;
      } else {
        keep_div.push_back(std::move(f));
      }
    }
    out.divisors_ = std::move(keep_div);

    if (!touched && !divided) {
      // a free variable contributes its cardinality to every sum
      out.factors_.push_back(Factor::scalar(static_cast<double>(card)));
    } else {
      Factor cell = divided ? factor_div(numerator, denominator) : std::move(numerator);
      if (!cell.has_axis(v)) {
        // only the numerator scalar was present; broadcast over v before summing
        cell = factor_product(cell, Factor({v}, {card}, std::vector<double>(card, 1.0)));
      }
      out.factors_.push_back(factor_sum_out(cell, {v}));
    }
    out.universe_.erase(it);
  }
  return out;
}

/// Minimal-weight elimination order for removing `eliminate` from `tn`.
inline std::vector<VarId> elimination_order(const TensorNetwork& tn, const VarSet& eliminate) {
  VarSet keep;
  for (const auto& [v, c] : tn.universe())
    if (!eliminate.count(v)) keep.insert(v);
  return graph::min_weight_order(tn.hypergraph(), tn.universe(), keep);
}

/// Sums `eliminate` out by variable elimination in minimal-weight order.
/// The result stays factored.
inline TensorNetwork marginalize(const TensorNetwork& tn, const VarSet& eliminate) {
  for (VarId v : eliminate)
    if (!tn.contains(v))
      throw Error(ErrorKind::UnknownAxis, "cannot eliminate variable " + std::to_string(v));
  return eliminate_in_order(tn, elimination_order(tn, eliminate));
}

/// Joins every factor (dividing by every divisor) into a single factor.
inline Factor join_all(const TensorNetwork& tn) {
  Factor num;
  for (const auto& f : tn.factors()) num = factor_product(num, f);
  if (tn.divisors().empty()) return num;
  Factor den;
  for (const auto& f : tn.divisors()) den = factor_product(den, f);
  return factor_div(num, den);
}

/// Marginalizes everything outside `keep` and joins the rest into one factor over `keep`.
inline Factor collapse(const TensorNetwork& tn, const VarSet& keep) {
  VarSet eliminate;
  for (const auto& [v, c] : tn.universe())
    if (!keep.count(v)) eliminate.insert(v);
  const TensorNetwork rest = marginalize(tn, eliminate);
  Factor joined = join_all(rest);
  // variables of `keep` untouched by any factor still span the result
  for (VarId v : keep) {
    if (!rest.contains(v))
      throw Error(ErrorKind::UnknownAxis, "variable " + std::to_string(v) + " not in network");
    if (!joined.has_axis(v)) {
      const std::size_t c = rest.cardinality(v);
      joined = factor_product(joined, Factor({v}, {c}, std::vector<double>(c, 1.0)));
    }
  }
  return joined;
}

/// Sum of the network over its whole universe.
inline double contract_all(const TensorNetwork& tn) {
  const TensorNetwork rest = marginalize(tn, tn.variables());
  return join_all(rest).values().front();
}

/**
 * Square of `tn` with respect to `shared`.
 *
 * Every non-shared variable v gets a replica v + stride (stride = id_bound of
 * `tn`) and every factor and divisor gets a mirrored copy with its
 * non-shared axes renamed to their replicas. Summing the result over all
 * non-shared variables and replicas yields, for every assignment of the
 * shared variables, the square of `tn` summed over its non-shared variables.
 */
inline TensorNetwork square_wrt(const TensorNetwork& tn, const VarSet& shared) {
  for (VarId v : shared)
    if (!tn.contains(v)) throw Error(ErrorKind::UnknownAxis, "variable " + std::to_string(v));
  const VarId stride = tn.id_bound_;
  TensorNetwork out = tn;
  std::map<VarId, VarId> rename;
  for (const auto& [v, c] : tn.universe_) {
    if (shared.count(v)) continue;
    const VarId r = v + stride;
    rename.emplace(v, r);
    out.universe_.emplace(r, c);
    out.replica_map_.emplace(r, v);
  }
  for (const auto& f : tn.factors_) out.factors_.push_back(f.relabel(rename));
  for (const auto& f : tn.divisors_) out.divisors_.push_back(f.relabel(rename));
  out.id_bound_ = 2 * stride;
  return out;
}

/// Pointwise quotient tn / divisor. The divisor's factors become divisors of
/// the result and its divisors become factors.
inline TensorNetwork quotient(const TensorNetwork& tn, const TensorNetwork& divisor) {
  for (const auto& [v, c] : divisor.universe_) {
    auto it = tn.universe_.find(v);
    if (it == tn.universe_.end())
      throw Error(ErrorKind::UnknownAxis,
                  "divisor variable " + std::to_string(v) + " not in dividend universe");
    if (it->second != c)
      throw Error(ErrorKind::AxisCardinalityMismatch, "variable " + std::to_string(v));
  }
  TensorNetwork out = tn;
  for (const auto& f : divisor.factors_) out.divisors_.push_back(f);
  for (const auto& f : divisor.divisors_) out.factors_.push_back(f);
  for (const auto& [r, v] : divisor.replica_map_) out.replica_map_.emplace(r, v);
  out.id_bound_ = std::max(tn.id_bound_, divisor.id_bound_);
  return out;
}

struct FunctionValue {
  double value = 0.0;
  bool zero_probability = false;
};

/// f(y_E) = E[Y_O | y_E], as a ratio of two restricted contractions.
inline FunctionValue evaluate_f(const TensorNetwork& mrf, const DiscreteBayesNet& bn,
                                const AnalysisSpec& spec, const Assignment& y_evidence) {
  for (VarId v : spec.evidential)
    if (!y_evidence.count(v))
      throw Error(ErrorKind::InvalidAssignment,
                  "evidential variable '" + bn.variable(v).name + "' not assigned");
  const double weighted = contract_all(restrict(function_tn(mrf, bn, spec), y_evidence));
  const double probability = contract_all(restrict(mrf, y_evidence));
  if (probability == 0.0) return {0.0, true};
  return {weighted / probability, false};
}

}  // namespace bnsobol
