/**
 * @file report.hpp
 * @brief Report writers (table, CSV, JSON) and the Graphviz DOT rendering of
 *        total indices.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bnsobol/error.hpp"
#include "bnsobol/model.hpp"
#include "bnsobol/sobol_report.hpp"

namespace bnsobol {

inline constexpr int kReportSchemaVersion = 1;

struct ReportOptions {
  /// Prints every timing as zero; used for byte-stable output.
  bool timings = true;
};

namespace report_detail {

inline std::string fixed(double x, int digits) {
  // no "-0.000" for values that round to zero
  if (std::abs(x) < 0.5 * std::pow(10.0, -digits)) x = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

inline std::string fixed(const std::optional<double>& x, int digits) {
  return x ? fixed(*x, digits) : std::string();
}

inline double timing(double t, const ReportOptions& opt) {
  return opt.timings ? std::round(t * 1e5) / 1e5 : 0.0;
}

inline std::optional<double> timing(const std::optional<double>& t, const ReportOptions& opt) {
  if (!t) return std::nullopt;
  return timing(*t, opt);
}

inline std::string joined(const std::vector<std::string>& names, const std::string& sep) {
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : sep) + n;
  return out;
}

inline std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace report_detail

/// CSV with header `variable,S,S_time,ST,ST_time`; closed indices follow as
/// rows named `A+B` with the total columns left empty.
inline std::string format_csv(const SobolReport& r, const ReportOptions& opt = {}) {
  using namespace report_detail;
  std::string out = "variable,S,S_time,ST,ST_time\n";
  for (const auto& e : r.indices)
    out += e.name + "," + fixed(e.first, 10) + "," + fixed(timing(e.first_time, opt), 5) + "," +
           fixed(e.total, 10) + "," + fixed(timing(e.total_time, opt), 5) + "\n";
  for (const auto& c : r.closed)
    out += joined(c.names, "+") + "," + fixed(c.value, 10) + "," + fixed(timing(c.time, opt), 5) + ",,\n";
  return out;
}

inline nlohmann::ordered_json report_json(const SobolReport& r, const ReportOptions& opt = {}) {
  using nlohmann::ordered_json;
  using namespace report_detail;
  auto opt_num = [](const std::optional<double>& x) -> ordered_json {
    return x ? ordered_json(*x) : ordered_json(nullptr);
  };
  ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["network_name"] = r.network_name;
  j["expected_value"] = r.expected_value;
  j["variance"] = r.variance;
  j["indices"] = ordered_json::array();
  for (const auto& e : r.indices)
    j["indices"].push_back({{"variable", e.name},
                            {"S", opt_num(e.first)},
                            {"S_time", opt_num(timing(e.first_time, opt))},
                            {"ST", opt_num(e.total)},
                            {"ST_time", opt_num(timing(e.total_time, opt))}});
  if (!r.closed.empty()) {
    j["closed"] = ordered_json::array();
    for (const auto& c : r.closed)
      j["closed"].push_back({{"variables", c.names}, {"S", c.value}, {"S_time", timing(c.time, opt)}});
  }
  return j;
}

inline std::string format_json(const SobolReport& r, const ReportOptions& opt = {}) {
  return report_json(r, opt).dump(2) + "\n";
}

/// Aligned human-readable table.
inline std::string format_table(const SobolReport& r, const ReportOptions& opt = {}) {
  using namespace report_detail;
  std::size_t width = 8;
  for (const auto& e : r.indices) width = std::max(width, e.name.size());
  for (const auto& c : r.closed) width = std::max(width, joined(c.names, "+").size());
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.insert(0, w - s.size(), ' ');
    return s;
  };
  auto left = [](std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
  };
  std::string out;
  if (!r.network_name.empty()) out += "network: " + r.network_name + "\n";
  out += "E[f]   = " + fixed(r.expected_value, 10) + "\n";
  out += "Var[f] = " + fixed(r.variance, 10) + "\n\n";
  out += left("variable", width) + pad("S", 14) + pad("Time (S)", 12) + pad("ST", 14) +
         pad("Time (ST)", 12) + "\n";
  for (const auto& e : r.indices)
    out += left(e.name, width) + pad(fixed(e.first, 10), 14) +
           pad(fixed(timing(e.first_time, opt), 5), 12) + pad(fixed(e.total, 10), 14) +
           pad(fixed(timing(e.total_time, opt), 5), 12) + "\n";
  if (!r.closed.empty()) {
    out += "\nclosed indices\n";
    for (const auto& c : r.closed)
      out += left(joined(c.names, "+"), width) + pad(fixed(c.value, 10), 14) +
             pad(fixed(timing(c.time, opt), 5), 12) + "\n";
  }
  return out;
}

/// Reads a JSON report back; variables are matched to `bn` by name.
inline SobolReport parse_report_json(const std::string& text, const DiscreteBayesNet& bn) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::SchemaError, std::string("report: ") + e.what());
  }
  auto need = [&](const json& obj, const char* key) -> const json& {
    if (!obj.is_object() || !obj.contains(key))
      throw Error(ErrorKind::SchemaError, std::string("report field '") + key + "' missing");
    return obj.at(key);
  };
  auto opt = [](const json& v) -> std::optional<double> {
    if (v.is_null()) return std::nullopt;
    if (!v.is_number()) throw Error(ErrorKind::SchemaError, "report: expected a number");
    return v.get<double>();
  };
  if (need(j, "schema_version") != kReportSchemaVersion)
    throw Error(ErrorKind::SchemaError, "report: unsupported schema_version");
  SobolReport r;
  r.network_name = need(j, "network_name").get<std::string>();
  r.expected_value = need(j, "expected_value").get<double>();
  r.variance = need(j, "variance").get<double>();
  for (const auto& e : need(j, "indices")) {
    IndexEntry entry;
    entry.name = need(e, "variable").get<std::string>();
    auto id = bn.find(entry.name);
    if (!id) throw Error(ErrorKind::SchemaError, "report variable '" + entry.name + "' not in network");
    entry.variable = *id;
    entry.first = opt(need(e, "S"));
    entry.first_time = opt(need(e, "S_time"));
    entry.total = opt(need(e, "ST"));
    entry.total_time = opt(need(e, "ST_time"));
    r.indices.push_back(std::move(entry));
  }
  return r;
}

/**
 * Graphviz rendering: chance nodes gray, the output orange, evidential nodes
 * filled on a white-to-red ramp over [0, max S^T] and labelled with S^T.
 */
inline std::string format_dot(const DiscreteBayesNet& bn, const AnalysisSpec& spec, const SobolReport& r) {
  using report_detail::dot_quote;
  std::map<VarId, double> total;
  double max_total = 0.0;
  for (const auto& e : r.indices)
    if (e.total) {
      total[e.variable] = *e.total;
      max_total = std::max(max_total, *e.total);
    }

  std::string out = "digraph " + dot_quote(bn.name.empty() ? "network" : bn.name) + " {\n";
  out += "  node [style=filled, fontname=\"Helvetica\"];\n";
  for (const auto& var : bn.variables()) {
    std::string label = var.name;
    std::string color;
    if (var.id == spec.output) {
      color = "orange";
    } else if (spec.evidential.count(var.id)) {
      auto it = total.find(var.id);
      double t = 0.0;
      if (it != total.end()) {
        label += "\\nST=" + report_detail::fixed(it->second, 3);
        if (max_total > 0.0) t = std::clamp(it->second / max_total, 0.0, 1.0);
      }
      const int fade = static_cast<int>(std::lround(255.0 * (1.0 - t)));
      char hex[8];
      std::snprintf(hex, sizeof hex, "#ff%02x%02x", fade, fade);
      color = hex;
    } else {
      color = "gray";
    }
    out += "  " + dot_quote(var.name) + " [label=" + dot_quote(label) + ", fillcolor=" +
           dot_quote(color) + "];\n";
  }
  for (const auto& cpt : bn.cpts())
    for (VarId p : cpt.parents)
      out += "  " + dot_quote(bn.variable(p).name) + " -> " + dot_quote(bn.variable(cpt.child).name) + ";\n";
  out += "}\n";
  return out;
}

}  // namespace bnsobol
