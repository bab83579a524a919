// Fixtures and enumeration helpers shared by the unit tests and the
// acceptance runner. Nothing here uses variable elimination: tabulations
// walk every full assignment and multiply factor cells directly.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "bnsobol/bnsobol.hpp"

namespace bnsobol::fixtures {

/// E -> O, Pr(E) = (0.7, 0.3), Pr(O | E) = (0.8, 0.2 / 0.1, 0.9).
inline DiscreteBayesNet chain_network() {
  DiscreteBayesNet bn;
  bn.name = "chain";
  const VarId e = bn.add_variable("E", {"e0", "e1"});
  const VarId o = bn.add_variable("O", {"o0", "o1"});
  bn.set_cpt(e, {}, {0.7, 0.3});
  bn.set_cpt(o, {e}, {0.8, 0.2, 0.1, 0.9});
  return bn;
}

inline AnalysisSpec chain_spec(const DiscreteBayesNet& bn) {
  return AnalysisSpec::make(bn, 1, {0}, {{"o0", 0.0}, {"o1", 1.0}});
}

/// Edges 1->3, 1->4, 2->4, 3->5, 4->5 with vertex k stored as id k-1.
inline graph::Dag five_node_dag() {
  return graph::Dag::from_edges(5, {{0, 2}, {0, 3}, {1, 3}, {2, 4}, {3, 4}});
}

/// The same structure as a network with random binary CPTs.
inline DiscreteBayesNet five_node_network(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  DiscreteBayesNet bn;
  for (int k = 1; k <= 5; ++k) bn.add_variable("Y" + std::to_string(k), {"0", "1"});
  const graph::Dag dag = five_node_dag();
  for (VarId v = 0; v < 5; ++v) {
    const auto& ps = dag.parent_list(v);
    std::vector<double> table;
    for (std::size_t r = 0; r < (std::size_t{1} << ps.size()); ++r) {
      const double p = u(rng);
      table.insert(table.end(), {p, 1.0 - p});
    }
    bn.set_cpt(v, ps, table);
  }
  return bn;
}

/// Two independent binary roots A, B feeding a
/// deterministic node O = g(A, B) with g given by `truth` over (a, b).
inline DiscreteBayesNet two_input_network(const std::vector<int>& truth, double pa = 0.5,
                                          double pb = 0.5) {
  DiscreteBayesNet bn;
  const VarId a = bn.add_variable("A", {"0", "1"});
  const VarId b = bn.add_variable("B", {"0", "1"});
  int top = *std::max_element(truth.begin(), truth.end());
  std::vector<std::string> labels;
  for (int k = 0; k <= top; ++k) labels.push_back(std::to_string(k));
  const VarId o = bn.add_variable("O", labels);
  bn.set_cpt(a, {}, {1.0 - pa, pa});
  bn.set_cpt(b, {}, {1.0 - pb, pb});
  std::vector<double> table;
  for (int t : truth)
    for (int k = 0; k <= top; ++k) table.push_back(k == t ? 1.0 : 0.0);
  bn.set_cpt(o, {a, b}, table);
  return bn;
}

inline std::map<std::string, double> label_values(const DiscreteBayesNet& bn, VarId v) {
  std::map<std::string, double> out;
  const auto& dom = bn.variable(v).domain;
  for (std::size_t k = 0; k < dom.size(); ++k) out[dom[k]] = static_cast<double>(k);
  return out;
}

struct Instance {
  DiscreteBayesNet bn;
  AnalysisSpec spec;
};

struct InstanceShape {
  std::size_t min_nodes = 3;
  std::size_t max_nodes = 12;
  std::size_t max_parents = 3;
  std::size_t min_card = 2;
  std::size_t max_card = 3;
  std::size_t max_evidence = 6;
  /// Evidence drawn among roots only (independent inputs).
  bool roots_only = false;
};

/**
 * Random network plus analysis. The output is a non-root node, the
 * evidential set has 1..max_evidence other nodes and always contains an
 * ancestor of the output, so f is not constant by construction. When both
 * kinds are available the evidence mixes roots and non-roots. Output values
 * are random reals.
 */
inline Instance random_instance(std::uint64_t seed, const InstanceShape& shape = {}) {
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + 17);
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  const std::size_t n = pick(shape.min_nodes, shape.max_nodes);
  Instance inst;
  inst.bn = generate_random_bn(seed, n, shape.max_parents, {shape.min_card, shape.max_card});
  inst.bn.name = "instance-" + std::to_string(seed);
  const graph::Dag dag = inst.bn.dag();
  const VarSet roots = inst.bn.roots();

  std::vector<VarId> outputs;
  for (VarId v = 0; v < static_cast<VarId>(n); ++v)
    if (!roots.count(v)) outputs.push_back(v);
  if (outputs.empty()) return random_instance(seed + 1000003, shape);
  const VarId output = outputs[pick(0, outputs.size() - 1)];

  VarSet ancestors = graph::ancestral_closure(dag, {output});
  ancestors.erase(output);
  std::vector<VarId> candidates, root_c, nonroot_c, anc_c;
  for (VarId v = 0; v < static_cast<VarId>(n); ++v) {
    if (v == output) continue;
    if (shape.roots_only && !roots.count(v)) continue;
    candidates.push_back(v);
    (roots.count(v) ? root_c : nonroot_c).push_back(v);
    if (ancestors.count(v)) anc_c.push_back(v);
  }
  if (anc_c.empty()) return random_instance(seed + 1000003, shape);

  std::shuffle(candidates.begin(), candidates.end(), rng);
  const std::size_t k = pick(1, std::min(shape.max_evidence, candidates.size()));
  VarSet evidence(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k));
  auto ensure_one_of = [&](const std::vector<VarId>& pool) {
    if (pool.empty() || std::any_of(pool.begin(), pool.end(), [&](VarId v) { return evidence.count(v); }))
      return;
    if (evidence.size() >= shape.max_evidence) evidence.erase(std::prev(evidence.end()));
    evidence.insert(pool[pick(0, pool.size() - 1)]);
  };
  ensure_one_of(anc_c);
  if (!shape.roots_only && evidence.size() > 1) {
    ensure_one_of(root_c);
    ensure_one_of(nonroot_c);
    ensure_one_of(anc_c);
  }

  std::uniform_real_distribution<double> value(-2.0, 3.0);
  std::map<std::string, double> values;
  for (const auto& label : inst.bn.variable(output).domain) values[label] = value(rng);
  inst.spec = AnalysisSpec::make(inst.bn, output, std::move(evidence), std::move(values));
  return inst;
}

/// Random tensor network over variables 0..n-1 with `factors` factors of
/// 1..3 axes. Values are uniform in [lo, hi].
inline TensorNetwork random_tensor_network(std::mt19937_64& rng, std::size_t n, std::size_t factors,
                                           double lo, double hi) {
  std::uniform_int_distribution<std::size_t> card(2, 3);
  std::uniform_real_distribution<double> value(lo, hi);
  TensorNetwork tn;
  std::vector<std::size_t> cards(n);
  for (std::size_t v = 0; v < n; ++v) tn.add_variable(static_cast<VarId>(v), cards[v] = card(rng));
  std::vector<VarId> ids(n);
  for (std::size_t v = 0; v < n; ++v) ids[v] = static_cast<VarId>(v);
  for (std::size_t f = 0; f < factors; ++f) {
    std::shuffle(ids.begin(), ids.end(), rng);
    const std::size_t arity = std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(3, n))(rng);
    std::vector<VarId> axes(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(arity));
    std::vector<std::size_t> ac;
    std::size_t cells = 1;
    for (VarId a : axes) cells *= ac.emplace_back(cards[static_cast<std::size_t>(a)]);
    std::vector<double> values(cells);
    for (auto& x : values) x = value(rng);
    tn.add_factor(Factor(axes, ac, values));
  }
  return tn;
}

/// Same universe as `like`, fresh factors.
inline TensorNetwork random_tensor_network_like(std::mt19937_64& rng, const TensorNetwork& like,
                                                std::size_t factors, double lo, double hi) {
  std::uniform_real_distribution<double> value(lo, hi);
  TensorNetwork tn;
  std::vector<VarId> ids;
  for (const auto& [v, c] : like.universe()) {
    tn.add_variable(v, c);
    ids.push_back(v);
  }
  for (std::size_t f = 0; f < factors; ++f) {
    std::shuffle(ids.begin(), ids.end(), rng);
    const std::size_t arity = std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(3, ids.size()))(rng);
    std::vector<VarId> axes(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(arity));
    std::vector<std::size_t> ac;
    std::size_t cells = 1;
    for (VarId a : axes) cells *= ac.emplace_back(like.cardinality(a));
    std::vector<double> values(cells);
    for (auto& x : values) x = value(rng);
    tn.add_factor(Factor(axes, ac, values));
  }
  return tn;
}

/// Cells of a tabulation, keyed by the states of `keep` in ascending id order.
using Table = std::map<std::vector<std::size_t>, double>;

/// Value of the network at a full assignment: product of factors over
/// product of divisors, 0/0 counted as 0.
inline double evaluate(const TensorNetwork& tn, const Assignment& y) {
  double num = 1.0, den = 1.0;
  for (const auto& f : tn.factors()) num *= f.at(y);
  for (const auto& f : tn.divisors()) den *= f.at(y);
  if (den == 0.0) return 0.0;
  return num / den;
}

/// Sum of the network over everything outside `keep`, by brute force.
inline Table tabulate(const TensorNetwork& tn, const VarSet& keep) {
  std::vector<VarId> vars;
  std::vector<std::size_t> cards;
  for (const auto& [v, c] : tn.universe()) {
    vars.push_back(v);
    cards.push_back(c);
  }
  Table out;
  std::vector<std::size_t> state(vars.size(), 0);
  while (true) {
    Assignment y;
    std::vector<std::size_t> key;
    for (std::size_t k = 0; k < vars.size(); ++k) {
      y[vars[k]] = state[k];
      if (keep.count(vars[k])) key.push_back(state[k]);
    }
    out[key] += evaluate(tn, y);
    std::size_t d = vars.size();
    while (d > 0 && ++state[d - 1] == cards[d - 1]) state[--d] = 0;
    if (d == 0) break;
  }
  return out;
}

/// Tabulation of an eliminated network over its remaining universe.
inline Table tabulate_factor(const Factor& f) {
  Table out;
  std::vector<std::size_t> state(f.axes().size(), 0);
  for (std::size_t cell = 0; cell < f.size(); ++cell) {
    out[state] = f.values()[cell];
    for (std::size_t d = state.size(); d-- > 0;) {
      if (++state[d] < f.cards()[d]) break;
      state[d] = 0;
    }
  }
  return out;
}

/// max |a - b| / max(|a|, |b|, floor), with floor = 1e-12 times the largest
/// magnitude of `b` so cells that are zero up to rounding do not dominate.
inline double max_relative_error(const Table& a, const Table& b) {
  double scale = 0.0;
  for (const auto& [k, v] : b) scale = std::max(scale, std::abs(v));
  const double floor = std::max(scale * 1e-12, 1e-300);
  double worst = 0.0;
  for (const auto& [k, v] : b) {
    auto it = a.find(k);
    if (it == a.end()) return INFINITY;
    worst = std::max(worst, std::abs(it->second - v) / std::max({std::abs(it->second), std::abs(v), floor}));
  }
  return a.size() == b.size() ? worst : INFINITY;
}

inline double max_abs_error(const Table& a, const Table& b) {
  double worst = 0.0;
  for (const auto& [k, v] : b) {
    auto it = a.find(k);
    if (it == a.end()) return INFINITY;
    worst = std::max(worst, std::abs(it->second - v));
  }
  return a.size() == b.size() ? worst : INFINITY;
}

/// Every variable of `tn` outside `keep`.
inline VarSet complement(const TensorNetwork& tn, const VarSet& keep) {
  VarSet out;
  for (const auto& [v, c] : tn.universe())
    if (!keep.count(v)) out.insert(v);
  return out;
}

}  // namespace bnsobol::fixtures
