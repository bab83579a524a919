// bnsobol: exact Sobol indices for discrete Bayesian networks.
//
// Exit codes: 0 success, 2 parse/validation/argument errors, 3 constant output,
// 4 state space over the cap, 1 anything else. Diagnostics go to stderr as a
// single line.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bnsobol/bnsobol.hpp"

namespace {

using namespace bnsobol;

struct Config {
  std::string network;
  std::string input_format;  // bif | native, empty = by extension
  std::string output;
  std::string evidence;      // "roots" or comma-separated names
  std::vector<std::string> value_map;  // label=value
  std::string indices = "first,total";
  std::string format = "table";
  unsigned threads = 0;
  bool no_timings = false;
  // oracle
  bool compare = false;
  std::size_t max_states = oracle::kDefaultStateCap;
  // dot
  std::string from_report;
  // gen
  std::uint64_t seed = 0;
  long long nodes = -1;
  std::size_t max_parents = 3;
  std::string cardinality = "2";
  long long roots = -1;
};

struct Selection {
  bool first = false;
  bool total = false;
  std::vector<VarSet> closed;
};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateOutput:
      return 3;
    case ErrorKind::StateSpaceTooLarge:
      return 4;
    case ErrorKind::DivisionByZero:
    case ErrorKind::DependentInputsUnsupported:
      return 1;
    default:
      return 2;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

std::optional<double> parse_number(const std::string& s) {
  std::size_t used = 0;
  try {
    const double x = std::stod(s, &used);
    if (used == s.size() && std::isfinite(x)) return x;
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

VarId lookup(const DiscreteBayesNet& bn, const std::string& name) {
  auto v = bn.find(name);
  if (!v) throw Error(ErrorKind::InvalidArgument, "unknown variable '" + name + "'");
  return *v;
}

NativeDocument load(const Config& cfg) {
  std::string fmt = cfg.input_format;
  if (fmt.empty()) {
    const auto dot = cfg.network.rfind('.');
    fmt = (dot != std::string::npos && cfg.network.substr(dot) == ".bif") ? "bif" : "native";
  }
  const std::string text = read_file(cfg.network);
  if (fmt == "native") return load_native(text);
  NativeDocument doc;
  doc.network = parse_bif(text);
  doc.name = doc.network.name;
  return doc;
}

/// Resolves the analysis from the document's own spec overlaid with flags.
AnalysisSpec resolve_spec(const NativeDocument& doc, const Config& cfg) {
  const DiscreteBayesNet& bn = doc.network;
  std::optional<VarId> output;
  VarSet evidential;
  std::map<std::string, double> values;
  if (doc.spec) {
    output = doc.spec->output;
    evidential = doc.spec->evidential;
    values = doc.spec->value_map;
  }
  if (!cfg.output.empty()) {
    if (output && *output != lookup(bn, cfg.output)) values.clear();
    output = lookup(bn, cfg.output);
  }
  if (!output) throw Error(ErrorKind::InvalidArgument, "no output node: pass --output");
  if (cfg.evidence == "roots" || (cfg.evidence.empty() && !doc.spec)) {
    evidential = bn.roots();
    evidential.erase(*output);
  } else if (!cfg.evidence.empty()) {
    evidential.clear();
    for (const auto& name : split(cfg.evidence, ',')) evidential.insert(lookup(bn, name));
  }
  for (const auto& entry : cfg.value_map) {
    const auto eq = entry.rfind('=');
    const auto x = eq == std::string::npos ? std::nullopt : parse_number(entry.substr(eq + 1));
    if (!x) throw Error(ErrorKind::InvalidArgument, "value map entry '" + entry + "' is not label=number");
    values[entry.substr(0, eq)] = *x;
  }
  if (values.empty()) {
    // numeric labels stand for themselves
    std::map<std::string, double> numeric;
    for (const auto& label : bn.variable(*output).domain)
      if (auto x = parse_number(label)) numeric[label] = *x;
    if (numeric.size() == bn.cardinality(*output)) values = std::move(numeric);
  }
  AnalysisSpec spec = AnalysisSpec::make(bn, *output, std::move(evidential), std::move(values));
  validate_partition(bn, spec).throw_if_failed();
  return spec;
}

Selection parse_selection(const DiscreteBayesNet& bn, const std::string& text) {
  Selection sel;
  for (const auto& item : split(text, ',')) {
    if (item == "first") {
      sel.first = true;
    } else if (item == "total") {
      sel.total = true;
    } else if (item.rfind("closed:", 0) == 0) {
      VarSet set;
      for (const auto& name : split(item.substr(7), '+')) set.insert(lookup(bn, name));
      if (set.empty()) throw Error(ErrorKind::InvalidArgument, "empty closed index set");
      sel.closed.push_back(std::move(set));
    } else {
      throw Error(ErrorKind::InvalidArgument, "unknown index kind '" + item + "'");
    }
  }
  if (!sel.first && !sel.total && sel.closed.empty())
    throw Error(ErrorKind::InvalidArgument, "no indices selected");
  return sel;
}

std::string render(const SobolReport& r, const Config& cfg) {
  const ReportOptions opt{!cfg.no_timings};
  if (cfg.format == "csv") return format_csv(r, opt);
  if (cfg.format == "json") return format_json(r, opt);
  return format_table(r, opt);
}

SobolReport run_compute(const NativeDocument& doc, const AnalysisSpec& spec, const Config& cfg,
                        const Selection& sel) {
  SobolOptions opts;
  opts.first_order = sel.first;
  opts.total = sel.total;
  opts.closed = sel.closed;
  opts.threads = cfg.threads;
  SobolReport r = compute_all(doc.network, spec, opts);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  return r;
}

int cmd_compute(const Config& cfg) {
  const NativeDocument doc = load(cfg);
  const AnalysisSpec spec = resolve_spec(doc, cfg);
  const Selection sel = parse_selection(doc.network, cfg.indices);
  std::cout << render(run_compute(doc, spec, cfg, sel), cfg);
  return 0;
}

int cmd_oracle(const Config& cfg) {
  const NativeDocument doc = load(cfg);
  const AnalysisSpec spec = resolve_spec(doc, cfg);
  const SobolReport brute = oracle::brute_force_indices(doc.network, spec, cfg.max_states);
  if (!cfg.compare) {
    std::cout << render(brute, cfg);
    return 0;
  }
  const SobolReport exact = run_compute(doc, spec, cfg, Selection{true, true, {}});
  double dev_s = 0.0, dev_st = 0.0;
  for (std::size_t k = 0; k < brute.indices.size(); ++k) {
    dev_s = std::max(dev_s, std::abs(*brute.indices[k].first - *exact.indices[k].first));
    dev_st = std::max(dev_st, std::abs(*brute.indices[k].total - *exact.indices[k].total));
  }
  const double dev_mean = std::abs(brute.expected_value - exact.expected_value);
  const double dev_var = std::abs(brute.variance - exact.variance);
  const double dev = std::max({dev_s, dev_st, dev_mean, dev_var});
  if (cfg.format == "json") {
    auto j = report_json(brute, ReportOptions{!cfg.no_timings});
    j["comparison"] = {{"max_abs_deviation", dev},
                       {"expected_value", dev_mean},
                       {"variance", dev_var},
                       {"S", dev_s},
                       {"ST", dev_st}};
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  char line[160];
  std::snprintf(line, sizeof line, "max abs deviation from exact: %.3e (S %.3e, ST %.3e)\n", dev,
                dev_s, dev_st);
  std::cout << render(brute, cfg);
  // CSV stays a single table; the comparison line goes to stderr there
  (cfg.format == "csv" ? std::cerr : std::cout) << (cfg.format == "csv" ? "" : "\n") << line;
  return 0;
}

int cmd_dot(const Config& cfg) {
  const NativeDocument doc = load(cfg);
  const AnalysisSpec spec = resolve_spec(doc, cfg);
  const SobolReport r = cfg.from_report.empty()
                            ? run_compute(doc, spec, cfg, Selection{false, true, {}})
                            : parse_report_json(read_file(cfg.from_report), doc.network);
  std::cout << format_dot(doc.network, spec, r);
  return 0;
}

int cmd_gen(const Config& cfg) {
  if (cfg.nodes < 1) throw Error(ErrorKind::InvalidArgument, "--nodes must be at least 1");
  std::size_t lo = 0, hi = 0;
  const auto dash = cfg.cardinality.find('-');
  const auto a = parse_number(cfg.cardinality.substr(0, dash));
  const auto b = dash == std::string::npos ? a : parse_number(cfg.cardinality.substr(dash + 1));
  if (!a || !b || *a != std::floor(*a) || *b != std::floor(*b) || *a < 2 || *b < *a)
    throw Error(ErrorKind::InvalidArgument, "--cardinality must be k or lo-hi with 2 <= lo <= hi");
  lo = static_cast<std::size_t>(*a);
  hi = static_cast<std::size_t>(*b);
  const auto n = static_cast<std::size_t>(cfg.nodes);
  NativeDocument doc;
  doc.network = cfg.roots < 0
                    ? generate_random_bn(cfg.seed, n, cfg.max_parents, {lo, hi})
                    : generate_rooted_bn(cfg.seed, static_cast<std::size_t>(cfg.roots), n,
                                         cfg.max_parents, {lo, hi});
  doc.name = doc.network.name;
  doc.spec = default_spec(doc.network);
  if (!doc.spec) std::cerr << "warning: no non-root sink; document has no analysis spec\n";
  std::cout << save_native(doc);
  return 0;
}

void add_input_options(CLI::App* sub, Config& cfg) {
  sub->add_option("--network", cfg.network, "Network file (.bif or native JSON)")->required();
  sub->add_option("--input-format", cfg.input_format, "bif | native (default: by extension)")
      ->check(CLI::IsMember({"bif", "native"}));
  sub->add_option("--output", cfg.output, "Output node name");
  sub->add_option("--evidence", cfg.evidence, "'roots' or comma-separated evidential names");
  sub->add_option("--value-map", cfg.value_map, "label=value for the output node (repeatable)");
}

void add_report_options(CLI::App* sub, Config& cfg) {
  sub->add_option("--format", cfg.format, "Report format")->check(CLI::IsMember({"table", "csv", "json"}));
  sub->add_option("--threads", cfg.threads, "Worker threads (0 = all cores)");
  sub->add_flag("--no-timings", cfg.no_timings, "Print all timings as zero");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact variance-based sensitivity analysis of discrete Bayesian networks"};
  app.require_subcommand(1);
  Config cfg;

  auto* compute = app.add_subcommand("compute", "Exact first-order, total and closed indices");
  add_input_options(compute, cfg);
  add_report_options(compute, cfg);
  compute->add_option("--indices", cfg.indices, "first,total,closed:A+B (comma-separated)");

  auto* orc = app.add_subcommand("oracle", "Brute-force indices by joint enumeration");
  add_input_options(orc, cfg);
  add_report_options(orc, cfg);
  orc->add_flag("--compare", cfg.compare, "Also report the deviation from the exact pipeline");
  orc->add_option("--max-states", cfg.max_states, "Joint state-space cap");

  auto* dot = app.add_subcommand("dot", "Graphviz rendering colored by total index");
  add_input_options(dot, cfg);
  dot->add_option("--from-report", cfg.from_report, "Use a saved JSON report instead of computing");
  dot->add_option("--threads", cfg.threads, "Worker threads (0 = all cores)");

  auto* gen = app.add_subcommand("gen", "Random network with a default analysis spec");
  gen->add_option("--seed", cfg.seed, "RNG seed");
  gen->add_option("--nodes", cfg.nodes, "Node count")->required();
  gen->add_option("--max-parents", cfg.max_parents, "Maximum parents per node");
  gen->add_option("--cardinality", cfg.cardinality, "k or lo-hi");
  gen->add_option("--roots", cfg.roots, "Exact number of roots");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*compute) return cmd_compute(cfg);
    if (*orc) return cmd_oracle(cfg);
    if (*dot) return cmd_dot(cfg);
    return cmd_gen(cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
