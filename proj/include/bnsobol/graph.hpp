/**
 * @file graph.hpp
 * @brief Directed acyclic graphs, moral graphs, hypergraphs and the
 *        minimal-weight elimination heuristic.
 */
#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "bnsobol/error.hpp"

namespace bnsobol::graph {

using Vertex = int;
using VertexSet = std::set<Vertex>;

/// Returns a vertex lying on a directed cycle of the parent relation, if any.
inline std::optional<Vertex> find_cycle(const std::vector<std::vector<Vertex>>& parent_lists) {
  const auto n = static_cast<Vertex>(parent_lists.size());
  // 0 = unvisited, 1 = on stack, 2 = done
  std::vector<int> state(parent_lists.size(), 0);
  for (Vertex root = 0; root < n; ++root) {
    if (state[root] != 0) continue;
    std::vector<std::pair<Vertex, std::size_t>> stack{{root, 0}};
    state[root] = 1;
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      if (next < parent_lists[v].size()) {
        const Vertex p = parent_lists[v][next++];
        if (p < 0 || p >= n) continue;
        if (state[p] == 1) return p;
        if (state[p] == 0) {
          state[p] = 1;
          stack.emplace_back(p, 0);
        }
      } else {
        state[v] = 2;
        stack.pop_back();
      }
    }
  }
  return std::nullopt;
}

/// DAG stored as parent lists; acyclicity is checked on construction.
class Dag {
 public:
  Dag() = default;

  explicit Dag(std::vector<std::vector<Vertex>> parent_lists) : parents_(std::move(parent_lists)) {
    const auto n = static_cast<Vertex>(parents_.size());
    for (Vertex v = 0; v < n; ++v)
      for (Vertex p : parents_[v])
        if (p < 0 || p >= n)
          throw Error(ErrorKind::IndexOutOfRange,
                      "parent " + std::to_string(p) + " of vertex " + std::to_string(v));
    if (auto v = find_cycle(parents_))
      throw Error(ErrorKind::CyclicGraph, "directed cycle through vertex " + std::to_string(*v));
    children_.resize(parents_.size());
    for (Vertex v = 0; v < n; ++v)
      for (Vertex p : parents_[v]) children_[p].push_back(v);
  }

  /// Builds a DAG from an edge list of (from, to) pairs.
  static Dag from_edges(std::size_t n, const std::vector<std::pair<Vertex, Vertex>>& edges) {
    std::vector<std::vector<Vertex>> lists(n);
    for (auto [from, to] : edges) {
      if (to < 0 || static_cast<std::size_t>(to) >= n)
        throw Error(ErrorKind::IndexOutOfRange, "edge target " + std::to_string(to));
      lists[to].push_back(from);
    }
    return Dag(std::move(lists));
  }

  std::size_t size() const noexcept { return parents_.size(); }
  const std::vector<Vertex>& parent_list(Vertex v) const { return parents_.at(check(v)); }
  const std::vector<Vertex>& child_list(Vertex v) const { return children_.at(check(v)); }

  /// Kahn order; ties resolved by smallest vertex id.
  std::vector<Vertex> topological_order() const {
    std::vector<std::size_t> indegree(size());
    for (std::size_t v = 0; v < size(); ++v) indegree[v] = parents_[v].size();
    std::set<Vertex> ready;
    for (std::size_t v = 0; v < size(); ++v)
      if (indegree[v] == 0) ready.insert(static_cast<Vertex>(v));
    std::vector<Vertex> order;
    order.reserve(size());
    while (!ready.empty()) {
      const Vertex v = *ready.begin();
      ready.erase(ready.begin());
      order.push_back(v);
      for (Vertex c : children_[v])
        if (--indegree[c] == 0) ready.insert(c);
    }
    return order;
  }

 private:
  std::size_t check(Vertex v) const {
    if (v < 0 || static_cast<std::size_t>(v) >= parents_.size())
      throw Error(ErrorKind::IndexOutOfRange, "vertex " + std::to_string(v));
    return static_cast<std::size_t>(v);
  }

  std::vector<std::vector<Vertex>> parents_;
  std::vector<std::vector<Vertex>> children_;
};

inline VertexSet parents(const Dag& dag, Vertex v) {
  const auto& p = dag.parent_list(v);
  return {p.begin(), p.end()};
}

inline VertexSet children(const Dag& dag, Vertex v) {
  const auto& c = dag.child_list(v);
  return {c.begin(), c.end()};
}

/// Vertices reachable from v along directed edges, v excluded.
inline VertexSet descendants(const Dag& dag, Vertex v) {
  VertexSet seen;
  std::vector<Vertex> stack(dag.child_list(v).begin(), dag.child_list(v).end());
  while (!stack.empty()) {
    const Vertex u = stack.back();
    stack.pop_back();
    if (!seen.insert(u).second) continue;
    for (Vertex c : dag.child_list(u)) stack.push_back(c);
  }
  return seen;
}

/// V minus descendants(v). Contains v itself and its ancestors.
inline VertexSet non_descendants(const Dag& dag, Vertex v) {
  const VertexSet desc = descendants(dag, v);
  VertexSet out;
  for (Vertex u = 0; u < static_cast<Vertex>(dag.size()); ++u)
    if (!desc.count(u)) out.insert(u);
  return out;
}

/// Ancestors of every vertex in `targets`, plus the targets themselves.
inline VertexSet ancestral_closure(const Dag& dag, const VertexSet& targets) {
  VertexSet seen;
  std::vector<Vertex> stack(targets.begin(), targets.end());
  while (!stack.empty()) {
    const Vertex u = stack.back();
    stack.pop_back();
    if (!seen.insert(u).second) continue;
    for (Vertex p : dag.parent_list(u)) stack.push_back(p);
  }
  return seen;
}

/// Simple undirected graph on vertices 0..n-1; edges stored as (lo, hi).
struct UndirectedGraph {
  std::size_t vertex_count = 0;
  std::set<std::pair<Vertex, Vertex>> edges;

  void add_edge(Vertex a, Vertex b) {
    if (a == b) return;
    edges.insert(std::minmax(a, b));
  }
  bool adjacent(Vertex a, Vertex b) const { return edges.count(std::minmax(a, b)) > 0; }

  VertexSet neighbors(Vertex v) const {
    VertexSet out;
    for (auto [a, b] : edges) {
      if (a == v) out.insert(b);
      if (b == v) out.insert(a);
    }
    return out;
  }

  bool operator==(const UndirectedGraph&) const = default;
};

/// Symmetrized DAG edges plus an edge between every pair of co-parents.
inline UndirectedGraph moralize(const Dag& dag) {
  UndirectedGraph g{dag.size(), {}};
  for (Vertex v = 0; v < static_cast<Vertex>(dag.size()); ++v) {
    const auto& ps = dag.parent_list(v);
    for (std::size_t a = 0; a < ps.size(); ++a) {
      g.add_edge(ps[a], v);
      for (std::size_t b = a + 1; b < ps.size(); ++b) g.add_edge(ps[a], ps[b]);
    }
  }
  return g;
}

/// The moral graph with directions dropped. Same edge set as moralize().
inline UndirectedGraph skeleton(const Dag& dag) { return moralize(dag); }

/// Maximal cliques (Bron-Kerbosch with pivoting), sorted lexicographically.
inline std::vector<VertexSet> maximal_cliques(const UndirectedGraph& g) {
  std::vector<VertexSet> adj(g.vertex_count);
  for (auto [a, b] : g.edges) {
    adj[a].insert(b);
    adj[b].insert(a);
  }
  std::vector<VertexSet> out;
  auto recurse = [&](auto&& self, VertexSet r, VertexSet p, VertexSet x) -> void {
    if (p.empty() && x.empty()) {
      out.push_back(std::move(r));
      return;
    }
    Vertex pivot = !p.empty() ? *p.begin() : *x.begin();
    std::size_t best = 0;
    for (const auto* s : {&p, &x})
      for (Vertex u : *s) {
        std::size_t c = 0;
        for (Vertex w : p) c += adj[u].count(w);
        if (c >= best) {
          best = c;
          pivot = u;
        }
      }
    std::vector<Vertex> candidates;
    for (Vertex v : p)
      if (!adj[pivot].count(v)) candidates.push_back(v);
    for (Vertex v : candidates) {
      VertexSet r2 = r, p2, x2;
      r2.insert(v);
      for (Vertex w : p)
        if (adj[v].count(w)) p2.insert(w);
      for (Vertex w : x)
        if (adj[v].count(w)) x2.insert(w);
      self(self, std::move(r2), std::move(p2), std::move(x2));
      p.erase(v);
      x.insert(v);
    }
  };
  VertexSet all;
  for (std::size_t v = 0; v < g.vertex_count; ++v) all.insert(static_cast<Vertex>(v));
  recurse(recurse, {}, all, {});
  std::sort(out.begin(), out.end());
  return out;
}

/// Separators S_k = C_k ∩ (C_1 ∪ ... ∪ C_{k-1}) for k >= 2 of an ordered clique sequence.
inline std::vector<VertexSet> clique_separators(const std::vector<VertexSet>& cliques) {
  std::vector<VertexSet> out;
  VertexSet seen;
  for (std::size_t k = 0; k < cliques.size(); ++k) {
    if (k > 0) {
      VertexSet s;
      std::set_intersection(cliques[k].begin(), cliques[k].end(), seen.begin(), seen.end(),
                            std::inserter(s, s.end()));
      out.push_back(std::move(s));
    }
    seen.insert(cliques[k].begin(), cliques[k].end());
  }
  return out;
}

struct Hypergraph {
  VertexSet vertices;
  std::vector<VertexSet> edges;

  /// Every hyperedge must be nonempty and contained in the vertex set.
  bool valid() const {
    return std::all_of(edges.begin(), edges.end(), [&](const VertexSet& e) {
      return !e.empty() && std::includes(vertices.begin(), vertices.end(), e.begin(), e.end());
    });
  }
};

/// One hyperedge {v} ∪ parents(v) per vertex, in vertex order.
inline Hypergraph family_hypergraph(const Dag& dag) {
  Hypergraph h;
  for (Vertex v = 0; v < static_cast<Vertex>(dag.size()); ++v) {
    h.vertices.insert(v);
    VertexSet family = parents(dag, v);
    family.insert(v);
    h.edges.push_back(std::move(family));
  }
  return h;
}

/**
 * Greedy minimal-weight elimination order of `h.vertices \ keep`.
 *
 * At every step the eliminable vertex whose current neighbours have the
 * smallest cardinality product is chosen (ties: smallest id); its neighbours
 * are then joined, which is the same as replacing its incident hyperedges by
 * their union minus the vertex. Vertices missing from `cardinalities` count
 * as cardinality 1.
 */
inline std::vector<Vertex> min_weight_order(const Hypergraph& h,
                                            const std::map<Vertex, std::size_t>& cardinalities,
                                            const VertexSet& keep) {
  std::map<Vertex, VertexSet> adj;
  for (Vertex v : h.vertices) adj[v];
  for (const auto& e : h.edges)
    for (Vertex a : e)
      for (Vertex b : e)
        if (a != b) adj[a].insert(b);

  auto card = [&](Vertex v) -> double {
    auto it = cardinalities.find(v);
    return it == cardinalities.end() ? 1.0 : static_cast<double>(it->second);
  };

  VertexSet remaining;
  for (Vertex v : h.vertices)
    if (!keep.count(v)) remaining.insert(v);

  std::vector<Vertex> order;
  order.reserve(remaining.size());
  while (!remaining.empty()) {
    Vertex best = *remaining.begin();
    double best_weight = std::numeric_limits<double>::infinity();
    for (Vertex v : remaining) {
      double w = 1.0;
      for (Vertex u : adj[v]) w *= card(u);
      if (w < best_weight) {
        best_weight = w;
        best = v;
      }
    }
    const VertexSet nbrs = adj[best];
    for (Vertex a : nbrs) {
      adj[a].erase(best);
      for (Vertex b : nbrs)
        if (a != b) adj[a].insert(b);
    }
    adj.erase(best);
    remaining.erase(best);
    order.push_back(best);
  }
  return order;
}

}  // namespace bnsobol::graph
