/**
 * @file ingest.hpp
 * @brief Reading and writing networks: the discrete subset of the Bayesian
 *        Interchange Format (read-only), the native JSON document, and seeded
 *        random networks for tests and benchmarks.
 */
#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bnsobol/error.hpp"
#include "bnsobol/graph.hpp"
#include "bnsobol/model.hpp"

namespace bnsobol {

// ---------------------------------------------------------------------------
// BIF

namespace bif_detail {

struct Token {
  enum Kind { Word, String, Number, Punct, End } kind = End;
  std::string text;
  std::size_t line = 1, column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_space();
    Token t;
    t.line = line_;
    t.column = column_;
    if (pos_ >= text_.size()) return t;
    const char c = text_[pos_];
    if (c == '"') {
      get();
      while (pos_ < text_.size() && text_[pos_] != '"') t.text += get();
      if (pos_ >= text_.size()) fail(t, "unterminated string");
      get();
      t.kind = Token::String;
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' ||
               ((c == '-' || c == '+') && pos_ + 1 < text_.size() &&
                (std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) || text_[pos_ + 1] == '.'))) {
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                     text_[pos_] == '.' || text_[pos_] == '-' || text_[pos_] == '+' ||
                                     text_[pos_] == '_'))
        t.text += get();
      t.kind = Token::Number;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                     text_[pos_] == '_' || text_[pos_] == '-' || text_[pos_] == '.'))
        t.text += get();
      t.kind = Token::Word;
    } else {
      t.text = std::string(1, get());
      t.kind = Token::Punct;
    }
    return t;
  }

  [[noreturn]] static void fail(const Token& at, const std::string& what) {
    throw Error(ErrorKind::SyntaxError, "line " + std::to_string(at.line) + ", column " +
                                            std::to_string(at.column) + ": " + what);
  }

 private:
  char get() {
    const char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    return c;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == '|') {
        get();
      } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') {
        while (pos_ < text_.size() && text_[pos_] != '\n') get();
      } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '*') {
        get();
        get();
        while (pos_ + 1 < text_.size() && !(text_[pos_] == '*' && text_[pos_ + 1] == '/')) get();
        if (pos_ + 1 >= text_.size()) {
          Token t;
          t.line = line_;
          t.column = column_;
          fail(t, "unterminated comment");
        }
        get();
        get();
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0, line_ = 1, column_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lex_(text) { advance(); }

  DiscreteBayesNet parse() {
    DiscreteBayesNet bn;
    std::vector<bool> has_cpt;
    while (cur_.kind != Token::End) {
      const Token head = expect_word();
      if (head.text == "network") {
        bn.name = name_token();
        skip_block();
      } else if (head.text == "variable") {
        parse_variable(bn);
        has_cpt.push_back(false);
      } else if (head.text == "probability") {
        const Token at_block = cur_;
        const VarId child = parse_probability(bn);
        if (has_cpt[child]) Lexer::fail(at_block, "second probability block for '" + bn.variable(child).name + "'");
        has_cpt[child] = true;
      } else {
        Lexer::fail(head, "unexpected '" + head.text + "'");
      }
    }
    for (const auto& var : bn.variables())
      if (!has_cpt[var.id])
        throw Error(ErrorKind::SchemaError, "no probability block for '" + var.name + "'");
    validate_network(bn).throw_if_failed();
    return bn;
  }

 private:
  void advance() { cur_ = lex_.next(); }

  Token take() {
    if (cur_.kind == Token::End) Lexer::fail(cur_, "unexpected end of document");
    Token t = cur_;
    advance();
    return t;
  }

  Token expect_word() {
    Token t = take();
    if (t.kind != Token::Word) Lexer::fail(t, "expected a keyword, got '" + t.text + "'");
    return t;
  }

  void expect(std::string_view punct) {
    Token t = take();
    if (t.kind != Token::Punct || t.text != punct)
      Lexer::fail(t, "expected '" + std::string(punct) + "', got '" + t.text + "'");
  }

  bool at(std::string_view punct) const { return cur_.kind == Token::Punct && cur_.text == punct; }

  std::string name_token() {
    Token t = take();
    if (t.kind == Token::Punct) Lexer::fail(t, "expected a name, got '" + t.text + "'");
    return t.text;
  }

  double number() {
    Token t = take();
    if (t.kind != Token::Number) Lexer::fail(t, "expected a number, got '" + t.text + "'");
    try {
      std::size_t used = 0;
      const double v = std::stod(t.text, &used);
      if (used != t.text.size()) throw std::invalid_argument(t.text);
      return v;
    } catch (const std::exception&) {
      Lexer::fail(t, "malformed number '" + t.text + "'");
    }
  }

  /// Skips a `{ ... }` block (network properties carry nothing we model).
  void skip_block() {
    expect("{");
    int depth = 1;
    while (depth > 0) {
      Token t = take();
      if (t.kind == Token::Punct && t.text == "{") ++depth;
      if (t.kind == Token::Punct && t.text == "}") --depth;
    }
  }

  /// Skips `property ... ;`.
  void skip_statement() {
    while (!at(";")) take();
    expect(";");
  }

  void parse_variable(DiscreteBayesNet& bn) {
    const std::string name = name_token();
    if (bn.find(name)) Lexer::fail(cur_, "duplicate variable '" + name + "'");
    expect("{");
    std::optional<std::vector<std::string>> domain;
    while (!at("}")) {
      const Token kw = expect_word();
      if (kw.text == "property") {
        skip_statement();
      } else if (kw.text == "type") {
        const Token kind = expect_word();
        if (kind.text != "discrete")
          throw Error(ErrorKind::UnsupportedFeature,
                      "variable '" + name + "' has type '" + kind.text + "'");
        expect("[");
        const double k = number();
        expect("]");
        expect("{");
        std::vector<std::string> labels;
        while (!at("}")) labels.push_back(name_token());
        expect("}");
        expect(";");
        if (static_cast<double>(labels.size()) != k)
          Lexer::fail(kw, "variable '" + name + "' declares " + std::to_string(static_cast<long>(k)) +
                              " states but lists " + std::to_string(labels.size()));
        domain = std::move(labels);
      } else {
        throw Error(ErrorKind::UnsupportedFeature, "'" + kw.text + "' in variable '" + name + "'");
      }
    }
    expect("}");
    if (!domain) throw Error(ErrorKind::SchemaError, "variable '" + name + "' has no type");
    bn.add_variable(name, std::move(*domain));
  }

  VarId lookup(const DiscreteBayesNet& bn, const Token& t) {
    if (auto v = bn.find(t.text)) return *v;
    Lexer::fail(t, "unknown variable '" + t.text + "'");
  }

  VarId parse_probability(DiscreteBayesNet& bn) {
    expect("(");
    const VarId child = lookup(bn, take());
    std::vector<VarId> parents;
    while (!at(")")) parents.push_back(lookup(bn, take()));
    expect(")");
    const std::size_t card = bn.cardinality(child);
    std::size_t rows = 1;
    for (VarId p : parents) rows *= bn.cardinality(p);

    std::vector<double> table(rows * card, 0.0);
    std::vector<bool> filled(rows, false);
    std::optional<std::vector<double>> fallback;
    expect("{");
    while (!at("}")) {
      if (at("(")) {
        const Token open = take();
        std::size_t row = 0;
        for (VarId p : parents) {
          const Token label = take();
          auto k = bn.label_index(p, label.text);
          if (!k) Lexer::fail(label, "'" + label.text + "' is not a state of '" + bn.variable(p).name + "'");
          row = row * bn.cardinality(p) + *k;
        }
        expect(")");
        for (std::size_t k = 0; k < card; ++k) table[row * card + k] = number();
        expect(";");
        if (filled[row]) Lexer::fail(open, "repeated parent configuration");
        filled[row] = true;
        continue;
      }
      const Token kw = expect_word();
      if (kw.text == "table") {
        if (!parents.empty())
          throw Error(ErrorKind::UnsupportedFeature,
                      "'table' form for '" + bn.variable(child).name + "', which has parents");
        for (std::size_t k = 0; k < card; ++k) table[k] = number();
        expect(";");
        filled[0] = true;
      } else if (kw.text == "default") {
        std::vector<double> d(card);
        for (auto& x : d) x = number();
        expect(";");
        fallback = std::move(d);
      } else if (kw.text == "property") {
        skip_statement();
      } else {
        throw Error(ErrorKind::UnsupportedFeature, "'" + kw.text + "' in probability block");
      }
    }
    expect("}");
    for (std::size_t r = 0; r < rows; ++r) {
      if (filled[r]) continue;
      if (!fallback)
        throw Error(ErrorKind::SchemaError, "probability block of '" + bn.variable(child).name +
                                                "' misses parent configuration " + std::to_string(r));
      std::copy(fallback->begin(), fallback->end(), table.begin() + static_cast<std::ptrdiff_t>(r * card));
    }
    bn.set_cpt(child, std::move(parents), std::move(table));
    return child;
  }

  Lexer lex_;
  Token cur_;
};

}  // namespace bif_detail

/// Parses the discrete subset of BIF. The result always passes validate_network.
inline DiscreteBayesNet parse_bif(std::string_view text) { return bif_detail::Parser(text).parse(); }

// ---------------------------------------------------------------------------
// Native document

struct NativeDocument {
  DiscreteBayesNet network;
  std::optional<AnalysisSpec> spec;
  std::string name;
  std::string description;

  bool operator==(const NativeDocument&) const = default;
};

namespace native_detail {

using nlohmann::json;

[[noreturn]] inline void schema_error(const std::string& field, const std::string& what) {
  throw Error(ErrorKind::SchemaError, "field '" + field + "': " + what);
}

inline const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) schema_error(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

inline std::string string_of(const json& j, const std::string& path) {
  if (!j.is_string()) schema_error(path, "expected a string");
  return j.get<std::string>();
}

inline VarId variable_ref(const DiscreteBayesNet& bn, const json& j, const std::string& path) {
  const std::string name = string_of(j, path);
  auto v = bn.find(name);
  if (!v) schema_error(path, "unknown variable '" + name + "'");
  return *v;
}

}  // namespace native_detail

/**
 * Parses a native document:
 *
 *   { "name": ..., "description": ...,
 *     "variables": [ {"name": ..., "domain": [labels]} ],
 *     "cpts": [ {"child": name, "parents": [names], "table": [numbers]} ],
 *     "spec": {"output": name, "evidential": [names], "value_map": {label: number}} }
 *
 * `spec`, `name` and `description` are optional. Tables are row-major over
 * the listed parent order with the child varying fastest.
 */
inline NativeDocument load_native(std::string_view text) {
  using namespace native_detail;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::SchemaError, std::string("document: ") + e.what());
  }
  if (!root.is_object()) schema_error("document", "expected an object");

  NativeDocument doc;
  if (root.contains("name")) doc.name = string_of(root["name"], "name");
  if (root.contains("description")) doc.description = string_of(root["description"], "description");
  doc.network.name = doc.name;
  doc.network.description = doc.description;

  const json& vars = field(root, "variables", "");
  if (!vars.is_array()) schema_error("variables", "expected an array");
  for (std::size_t k = 0; k < vars.size(); ++k) {
    const std::string path = "variables[" + std::to_string(k) + "]";
    const std::string name = string_of(field(vars[k], "name", path), path + ".name");
    if (doc.network.find(name)) schema_error(path + ".name", "duplicate variable '" + name + "'");
    const json& dom = field(vars[k], "domain", path);
    if (!dom.is_array()) schema_error(path + ".domain", "expected an array");
    std::vector<std::string> labels;
    for (const auto& l : dom) labels.push_back(string_of(l, path + ".domain"));
    doc.network.add_variable(name, std::move(labels));
  }

  const json& cpts = field(root, "cpts", "");
  if (!cpts.is_array()) schema_error("cpts", "expected an array");
  std::vector<bool> seen(doc.network.size(), false);
  for (std::size_t k = 0; k < cpts.size(); ++k) {
    const std::string path = "cpts[" + std::to_string(k) + "]";
    const VarId child = variable_ref(doc.network, field(cpts[k], "child", path), path + ".child");
    if (seen[child]) schema_error(path + ".child", "second CPT for '" + doc.network.variable(child).name + "'");
    seen[child] = true;
    std::vector<VarId> parents;
    const json& ps = field(cpts[k], "parents", path);
    if (!ps.is_array()) schema_error(path + ".parents", "expected an array");
    for (const auto& p : ps) parents.push_back(variable_ref(doc.network, p, path + ".parents"));
    const json& tab = field(cpts[k], "table", path);
    if (!tab.is_array()) schema_error(path + ".table", "expected an array");
    std::vector<double> table;
    for (const auto& x : tab) {
      if (!x.is_number()) schema_error(path + ".table", "expected numbers");
      table.push_back(x.get<double>());
    }
    doc.network.set_cpt(child, std::move(parents), std::move(table));
  }
  for (const auto& var : doc.network.variables())
    if (!seen[var.id]) schema_error("cpts", "no CPT for '" + var.name + "'");
  if (auto r = validate_network(doc.network); !r)
    schema_error(r.node ? "cpts[" + doc.network.variable(*r.node).name + "]" : "cpts",
                 std::string(to_string(r.kind)) + ": " + r.message);

  if (root.contains("spec") && !root["spec"].is_null()) {
    const json& s = root["spec"];
    const VarId output = variable_ref(doc.network, field(s, "output", "spec"), "spec.output");
    VarSet evidential;
    const json& ev = field(s, "evidential", "spec");
    if (!ev.is_array()) schema_error("spec.evidential", "expected an array");
    for (const auto& e : ev) evidential.insert(variable_ref(doc.network, e, "spec.evidential"));
    std::map<std::string, double> value_map;
    const json& vm = field(s, "value_map", "spec");
    if (!vm.is_object()) schema_error("spec.value_map", "expected an object");
    for (const auto& [label, value] : vm.items()) {
      if (!value.is_number()) schema_error("spec.value_map." + label, "expected a number");
      value_map[label] = value.get<double>();
    }
    doc.spec = AnalysisSpec::make(doc.network, output, std::move(evidential), std::move(value_map));
  }
  return doc;
}

inline std::string save_native(const NativeDocument& doc) {
  using nlohmann::ordered_json;
  const DiscreteBayesNet& bn = doc.network;
  ordered_json root;
  root["name"] = doc.name;
  root["description"] = doc.description;
  root["variables"] = ordered_json::array();
  for (const auto& var : bn.variables())
    root["variables"].push_back({{"name", var.name}, {"domain", var.domain}});
  root["cpts"] = ordered_json::array();
  for (const auto& cpt : bn.cpts()) {
    std::vector<std::string> parents;
    for (VarId p : cpt.parents) parents.push_back(bn.variable(p).name);
    root["cpts"].push_back(
        {{"child", bn.variable(cpt.child).name}, {"parents", parents}, {"table", cpt.table}});
  }
  if (doc.spec) {
    std::vector<std::string> ev;
    for (VarId v : doc.spec->evidential) ev.push_back(bn.variable(v).name);
    ordered_json vm = ordered_json::object();
    for (const auto& label : bn.variable(doc.spec->output).domain)
      if (auto it = doc.spec->value_map.find(label); it != doc.spec->value_map.end())
        vm[label] = it->second;
    for (const auto& [label, value] : doc.spec->value_map)
      if (!vm.contains(label)) vm[label] = value;
    root["spec"] = {{"output", bn.variable(doc.spec->output).name},
                    {"evidential", ev},
                    {"value_map", vm}};
  }
  return root.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Random networks

namespace random_detail {

inline std::vector<double> dirichlet_row(std::mt19937_64& rng, std::size_t k) {
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> row(k);
  double sum = 0.0;
  for (auto& x : row) sum += (x = expo(rng));
  for (auto& x : row) x /= sum;
  return row;
}

inline DiscreteBayesNet build(std::uint64_t seed, std::size_t n, std::size_t roots,
                              std::size_t max_parents, std::size_t lo, std::size_t hi) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "node count must be at least 1");
  if (lo < 2 || hi < lo) throw Error(ErrorKind::InvalidArgument, "cardinality range must satisfy 2 <= lo <= hi");

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  DiscreteBayesNet bn;
  bn.name = "random-" + std::to_string(seed);
  std::uniform_int_distribution<std::size_t> card_dist(lo, hi);
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t k = card_dist(rng);
    std::vector<std::string> labels;
    for (std::size_t s = 0; s < k; ++s) labels.push_back(std::to_string(s));
    bn.add_variable("X" + std::to_string(v), std::move(labels));
  }
  for (std::size_t pos = 0; pos < n; ++pos) {
    const auto child = static_cast<VarId>(order[pos]);
    const std::size_t cap = std::min(max_parents, pos);
    std::size_t count = 0;
    if (pos >= roots && cap > 0) {
      const std::size_t min_count = roots > 0 ? 1 : 0;
      count = std::uniform_int_distribution<std::size_t>(min_count, cap)(rng);
    }
    std::vector<std::size_t> earlier(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(pos));
    std::shuffle(earlier.begin(), earlier.end(), rng);
    std::vector<VarId> parents;
    for (std::size_t k = 0; k < count; ++k) parents.push_back(static_cast<VarId>(earlier[k]));
    std::sort(parents.begin(), parents.end());

    const std::size_t card = bn.cardinality(child);
    std::size_t rows = 1;
    for (VarId p : parents) rows *= bn.cardinality(p);
    std::vector<double> table;
    table.reserve(rows * card);
    for (std::size_t r = 0; r < rows; ++r) {
      auto row = dirichlet_row(rng, card);
      table.insert(table.end(), row.begin(), row.end());
    }
    bn.set_cpt(child, std::move(parents), std::move(table));
  }
  return bn;
}

}  // namespace random_detail

/**
 * Random DAG over a shuffled topological order. Each node draws a parent
 * count uniformly in [0, min(max_parents, #earlier)] and then that many
 * distinct parents uniformly among earlier nodes; CPT rows are Dirichlet(1).
 * Cardinalities are uniform in [lo, hi]; labels are "0".."k-1".
 */
inline DiscreteBayesNet generate_random_bn(std::uint64_t seed, std::size_t n, std::size_t max_parents,
                                           std::pair<std::size_t, std::size_t> cardinality_range) {
  return random_detail::build(seed, n, 0, max_parents, cardinality_range.first, cardinality_range.second);
}

/// Variant where the first `roots` nodes of the topological order are the
/// only roots: every later node gets between 1 and max_parents parents.
inline DiscreteBayesNet generate_rooted_bn(std::uint64_t seed, std::size_t roots, std::size_t n,
                                           std::size_t max_parents,
                                           std::pair<std::size_t, std::size_t> cardinality_range) {
  if (roots < 1 || roots > n) throw Error(ErrorKind::InvalidArgument, "root count must be in [1, n]");
  if (roots < n && max_parents < 1)
    throw Error(ErrorKind::InvalidArgument, "non-root nodes need max_parents >= 1");
  return random_detail::build(seed, n, roots, max_parents, cardinality_range.first,
                              cardinality_range.second);
}

/**
 * Default analysis: evidential = roots, output = a sink of maximal depth
 * (ties: smallest id), value_map = label index. Returns nullopt when no
 * non-root sink exists.
 */
inline std::optional<AnalysisSpec> default_spec(const DiscreteBayesNet& bn) {
  const graph::Dag dag = bn.dag();
  std::vector<std::size_t> depth(bn.size(), 0);
  for (graph::Vertex v : dag.topological_order())
    for (graph::Vertex p : dag.parent_list(v)) depth[v] = std::max(depth[v], depth[p] + 1);
  std::optional<VarId> best;
  for (VarId v = 0; v < static_cast<VarId>(bn.size()); ++v) {
    if (!dag.child_list(v).empty() || dag.parent_list(v).empty()) continue;
    if (!best || depth[v] > depth[*best]) best = v;
  }
  if (!best) return std::nullopt;
  std::map<std::string, double> values;
  const auto& dom = bn.variable(*best).domain;
  for (std::size_t k = 0; k < dom.size(); ++k) values[dom[k]] = static_cast<double>(k);
  return AnalysisSpec::make(bn, *best, bn.roots(), std::move(values));
}

}  // namespace bnsobol
