#include <gtest/gtest.h>

#include <random>

#include "bnsobol/oracle.hpp"
#include "bnsobol/sobol.hpp"
#include "support.hpp"

namespace {

using namespace bnsobol;
using namespace bnsobol::fixtures;

InstanceShape eight_nodes() {
  InstanceShape s;
  s.min_nodes = s.max_nodes = 8;
  return s;
}

/// P -> A, P -> B with A and B copying P with probability 0.9, and O = A.
DiscreteBayesNet common_parent_network() {
  DiscreteBayesNet bn;
  const VarId p = bn.add_variable("P", {"0", "1"});
  const VarId a = bn.add_variable("A", {"0", "1"});
  const VarId b = bn.add_variable("B", {"0", "1"});
  const VarId o = bn.add_variable("O", {"0", "1"});
  bn.set_cpt(p, {}, {0.4, 0.6});
  bn.set_cpt(a, {p}, {0.9, 0.1, 0.1, 0.9});
  bn.set_cpt(b, {p}, {0.85, 0.15, 0.2, 0.8});
  bn.set_cpt(o, {a}, {1.0, 0.0, 0.0, 1.0});
  return bn;
}

TEST(Moments, ChainExpectationAndVariance) {
  const DiscreteBayesNet bn = chain_network();
  const SobolModel m = prepare(bn, chain_spec(bn));
  EXPECT_NEAR(m.expected_value, 0.41, 1e-15);
  EXPECT_NEAR(m.variance, 0.1029, 1e-15);
}

TEST(Moments, ConstantValueMap) {
  const DiscreteBayesNet bn = chain_network();
  const AnalysisSpec spec = AnalysisSpec::make(bn, 1, {0}, {{"o0", 1.5}, {"o1", 1.5}});
  const SobolModel m = prepare(bn, spec);
  EXPECT_NEAR(m.expected_value, 1.5, 1e-15);
  EXPECT_NEAR(m.variance, 0.0, 1e-12);
  try {
    variance_component(m, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateOutput);
  }
  EXPECT_THROW(total_index(m, 0), Error);
  EXPECT_THROW(compute_all(bn, spec), Error);
}

TEST(Moments, ExpectationIsLinearInValueMap) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Instance inst = random_instance(seed);
    AnalysisSpec scaled = inst.spec;
    for (auto& [label, value] : scaled.value_map) value *= -3.0;
    EXPECT_NEAR(prepare(inst.bn, scaled).expected_value, -3.0 * prepare(inst.bn, inst.spec).expected_value,
                1e-12);
  }
}

TEST(Moments, MatchOracleOnRandomNetworks) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Instance inst = random_instance(seed, eight_nodes());
    const auto table = oracle::brute_force_f(inst.bn, inst.spec);
    const auto mom = oracle::moments(table);
    const SobolModel m = prepare(inst.bn, inst.spec);
    EXPECT_NEAR(m.expected_value, mom.mean, 1e-10);
    EXPECT_NEAR(m.variance, mom.variance, 1e-9);
  }
}

TEST(Moments, TwoStageAndSquareFirstAgree) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Instance inst = random_instance(seed);
    const SobolModel m = prepare(inst.bn, inst.spec);
    // square, marginalize to E, divide by Pr(y_E), then sum over E
    const TensorNetwork sq = square_wrt(m.function, inst.spec.evidential);
    const TensorNetwork on_e = marginalize(sq, complement(sq, inst.spec.evidential));
    const double two_stage = contract_all(quotient(on_e, m.evidence));
    EXPECT_NEAR(two_stage, m.second_moment, 1e-10);
    EXPECT_NEAR(second_moment(m.function, m.evidence), m.second_moment, 1e-15);
  }
}

TEST(Moments, GlobalVarianceHelper) {
  const DiscreteBayesNet bn = chain_network();
  const SobolModel m = prepare(bn, chain_spec(bn));
  EXPECT_NEAR(global_variance(m.function, m.evidence), 0.1029, 1e-15);
  EXPECT_EQ(clamp_variance(-1e-10), 0.0);
  EXPECT_LT(clamp_variance(-1e-6), 0.0);
}

TEST(Indices, ChainHasFullIndices) {
  const DiscreteBayesNet bn = chain_network();
  const SobolReport r = compute_all(bn, chain_spec(bn));
  ASSERT_EQ(r.indices.size(), 1u);
  EXPECT_NEAR(*r.indices[0].first, 1.0, 1e-12);
  EXPECT_NEAR(*r.indices[0].total, 1.0, 1e-12);
  EXPECT_NEAR(r.variance, 0.1029, 1e-15);
  EXPECT_EQ(r.indices[0].name, "E");
  EXPECT_TRUE(r.warnings.empty());
}

TEST(Indices, SingleEvidentialVariableHasFullIndices) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Instance inst = random_instance(seed);
    const VarId keep = *inst.spec.evidential.begin();
    inst.spec = AnalysisSpec::make(inst.bn, inst.spec.output, {keep}, inst.spec.value_map);
    const SobolModel m = prepare(inst.bn, inst.spec);
    if (m.variance <= kDegenerateVariance) continue;
    EXPECT_NEAR(variance_component(m, keep), 1.0, 1e-9);
    EXPECT_NEAR(total_index(m, keep), 1.0, 1e-9);
  }
}

TEST(Indices, AdditiveSeparableHasNoInteraction) {
  // O = A + B with independent roots
  const DiscreteBayesNet bn = two_input_network({0, 1, 1, 2}, 0.3, 0.6);
  const AnalysisSpec spec = AnalysisSpec::make(bn, 2, {0, 1}, label_values(bn, 2));
  const SobolReport r = compute_all(bn, spec);
  for (const auto& e : r.indices) EXPECT_NEAR(*e.first, *e.total, 1e-9);
  EXPECT_NEAR(*r.indices[0].first + *r.indices[1].first, 1.0, 1e-9);
}

TEST(Indices, XorIsPureInteraction) {
  const DiscreteBayesNet bn = two_input_network({0, 1, 1, 0});
  const AnalysisSpec spec = AnalysisSpec::make(bn, 2, {0, 1}, label_values(bn, 2));
  const SobolReport r = compute_all(bn, spec);
  for (const auto& e : r.indices) {
    EXPECT_NEAR(*e.first, 0.0, 1e-9);
    EXPECT_NEAR(*e.total, 1.0, 1e-9);
  }
}

TEST(Indices, IrrelevantIndependentInputHasZeroTotal) {
  DiscreteBayesNet bn = two_input_network({0, 1, 1, 2}, 0.3, 0.6);
  const VarId x = bn.add_variable("X", {"a", "b", "c"});
  bn.set_cpt(x, {}, {0.2, 0.5, 0.3});
  const AnalysisSpec spec = AnalysisSpec::make(bn, 2, {0, 1, x}, label_values(bn, 2));
  const SobolModel m = prepare(bn, spec);
  EXPECT_NEAR(total_index(m, x), 0.0, 1e-10);
  EXPECT_NEAR(variance_component(m, x), 0.0, 1e-10);
}

TEST(Indices, MatchOracleOnRandomNetworks) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Instance inst = random_instance(seed, eight_nodes());
    const SobolReport exact = compute_all(inst.bn, inst.spec);
    const SobolReport brute = oracle::brute_force_indices(inst.bn, inst.spec);
    ASSERT_EQ(exact.indices.size(), brute.indices.size());
    for (std::size_t k = 0; k < exact.indices.size(); ++k) {
      EXPECT_EQ(exact.indices[k].variable, brute.indices[k].variable);
      EXPECT_NEAR(*exact.indices[k].first, *brute.indices[k].first, 1e-8) << "seed " << seed;
      EXPECT_NEAR(*exact.indices[k].total, *brute.indices[k].total, 1e-8) << "seed " << seed;
    }
  }
}

TEST(Indices, IndependentInputsAreOrdered) {
  InstanceShape shape;
  shape.roots_only = true;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Instance inst = random_instance(seed, shape);
    const SobolReport r = compute_all(inst.bn, inst.spec);
    double sum = 0.0;
    for (const auto& e : r.indices) {
      EXPECT_GE(*e.first, -1e-10);
      EXPECT_LE(*e.first, *e.total + 1e-10);
      sum += *e.first;
    }
    EXPECT_LE(sum, 1.0 + 1e-9);
  }
}

TEST(Indices, DependentInputsCanReverseTheOrder) {
  const DiscreteBayesNet bn = common_parent_network();
  const AnalysisSpec spec = AnalysisSpec::make(bn, 3, {1, 2}, label_values(bn, 3));
  const SobolReport exact = compute_all(bn, spec);
  const SobolReport brute = oracle::brute_force_indices(bn, spec);
  bool reversed = false;
  for (std::size_t k = 0; k < exact.indices.size(); ++k) {
    reversed = reversed || *exact.indices[k].first > *exact.indices[k].total;
    EXPECT_NEAR(*exact.indices[k].first, *brute.indices[k].first, 1e-8);
    EXPECT_NEAR(*exact.indices[k].total, *brute.indices[k].total, 1e-8);
  }
  EXPECT_TRUE(reversed);
  // B carries information about A only through P; f does not depend on B given A
  EXPECT_NEAR(*exact.indices[1].total, 0.0, 1e-12);
  EXPECT_GT(*exact.indices[1].first, 0.1);
}

TEST(Indices, AffineInvariance) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Instance inst = random_instance(seed);
    AnalysisSpec moved = inst.spec;
    for (auto& [label, value] : moved.value_map) value = 2.0 * value + 5.0;
    const SobolReport a = compute_all(inst.bn, inst.spec);
    const SobolReport b = compute_all(inst.bn, moved);
    EXPECT_NEAR(b.expected_value, 2.0 * a.expected_value + 5.0, 1e-9);
    EXPECT_NEAR(b.variance, 4.0 * a.variance, 1e-9);
    for (std::size_t k = 0; k < a.indices.size(); ++k) {
      EXPECT_NEAR(*a.indices[k].first, *b.indices[k].first, 1e-9);
      EXPECT_NEAR(*a.indices[k].total, *b.indices[k].total, 1e-9);
    }
  }
}

TEST(Indices, FreezingNegligibleInputsIsSound) {
  InstanceShape shape;
  shape.roots_only = true;
  shape.max_nodes = 9;
  int frozen = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const Instance inst = random_instance(seed, shape);
    const SobolModel m = prepare(inst.bn, inst.spec);
    const auto table = oracle::brute_force_f(inst.bn, inst.spec);
    const std::vector<VarId> ev(inst.spec.evidential.begin(), inst.spec.evidential.end());
    for (std::size_t i = 0; i < ev.size(); ++i) {
      if (total_index(m, ev[i]) > 1e-10) continue;
      ++frozen;
      std::map<std::vector<std::size_t>, double> f;
      for (const auto& row : table) f[row.evidence] = row.value;
      for (const auto& row : table) {
        auto y = row.evidence;
        y[i] = 0;
        EXPECT_LE(std::abs(row.value - f.at(y)), 1e-6);
      }
    }
  }
  EXPECT_GT(frozen, 0);
}

TEST(ClosedIndex, SingletonEqualsVarianceComponent) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Instance inst = random_instance(seed);
    const SobolModel m = prepare(inst.bn, inst.spec);
    for (VarId i : inst.spec.evidential) EXPECT_NEAR(closed_index(m, {i}), variance_component(m, i), 1e-12);
  }
}

TEST(ClosedIndex, WholeEvidenceSetIsOne) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Instance inst = random_instance(seed);
    const SobolModel m = prepare(inst.bn, inst.spec);
    EXPECT_NEAR(closed_index(m, inst.spec.evidential), 1.0, 1e-9);
  }
}

TEST(ClosedIndex, PairsMatchOracle) {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Instance inst = random_instance(seed);
    if (inst.spec.evidential.size() < 2) continue;
    const SobolModel m = prepare(inst.bn, inst.spec);
    const auto table = oracle::brute_force_f(inst.bn, inst.spec);
    const std::vector<VarId> ev(inst.spec.evidential.begin(), inst.spec.evidential.end());
    const VarSet pair{ev.front(), ev.back()};
    EXPECT_NEAR(closed_index(m, pair), oracle::brute_force_closed_index(table, inst.spec, pair), 1e-8);
    ++checked;
  }
  EXPECT_GT(checked, 10);
}

TEST(ClosedIndex, RejectsNonEvidentialAndEmpty) {
  const DiscreteBayesNet bn = chain_network();
  const SobolModel m = prepare(bn, chain_spec(bn));
  try {
    closed_index(m, {1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotEvidential);
  }
  EXPECT_THROW(closed_index(m, {}), Error);
}

TEST(ComputeAll, ThreadCountDoesNotChangeResults) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Instance inst = random_instance(seed);
    SobolOptions one, many;
    one.threads = 1;
    many.threads = 4;
    const auto a = compute_all(inst.bn, inst.spec, one);
    const auto b = compute_all(inst.bn, inst.spec, many);
    for (std::size_t k = 0; k < a.indices.size(); ++k) {
      EXPECT_EQ(a.indices[k].variable, b.indices[k].variable);
      EXPECT_EQ(*a.indices[k].first, *b.indices[k].first);
      EXPECT_EQ(*a.indices[k].total, *b.indices[k].total);
    }
  }
}

TEST(ComputeAll, SelectionAndOrdering) {
  const Instance inst = random_instance(3);
  SobolOptions opt;
  opt.total = false;
  opt.closed = {inst.spec.evidential};
  const SobolReport r = compute_all(inst.bn, inst.spec, opt);
  VarId previous = -1;
  for (const auto& e : r.indices) {
    EXPECT_GT(e.variable, previous);
    previous = e.variable;
    EXPECT_TRUE(e.first.has_value());
    EXPECT_FALSE(e.total.has_value());
    EXPECT_FALSE(e.total_time.has_value());
    EXPECT_GE(*e.first_time, 0.0);
  }
  ASSERT_EQ(r.closed.size(), 1u);
  EXPECT_NEAR(r.closed[0].value, 1.0, 1e-9);
}

TEST(ComputeAll, PrunedBarrenNodesDoNotMatter) {
  // descendants of O outside E are barren; adding them must not change anything
  const DiscreteBayesNet bn = chain_network();
  DiscreteBayesNet bigger = bn;
  const VarId d = bigger.add_variable("D", {"0", "1", "2"});
  bigger.set_cpt(d, {1}, {0.2, 0.3, 0.5, 0.1, 0.1, 0.8});
  const AnalysisSpec spec = AnalysisSpec::make(bigger, 1, {0}, {{"o0", 0.0}, {"o1", 1.0}});
  const SobolModel m = prepare(bigger, spec);
  EXPECT_FALSE(m.function.contains(d));
  EXPECT_NEAR(m.variance, 0.1029, 1e-15);
}

TEST(UtilityEncoding, IdentityReproducesDirectOutput) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Instance inst = random_instance(seed);
    const VarId out = inst.spec.output;
    const auto& domain = inst.bn.variable(out).domain;
    const DiscreteBayesNet enc = encode_utility_node(
        inst.bn, [](const std::vector<std::string>& y) { return std::optional<std::string>(y[0]); }, {out},
        domain, "G");
    const VarId g = static_cast<VarId>(inst.bn.size());
    VarSet chance = inst.spec.chance;
    const AnalysisSpec direct = inst.spec;
    const AnalysisSpec via = AnalysisSpec::make(enc, g, inst.spec.evidential, inst.spec.value_map);
    const SobolReport a = compute_all(inst.bn, direct);
    const SobolReport b = compute_all(enc, via);
    for (std::size_t k = 0; k < a.indices.size(); ++k) {
      EXPECT_NEAR(*a.indices[k].first, *b.indices[k].first, 1e-10);
      EXPECT_NEAR(*a.indices[k].total, *b.indices[k].total, 1e-10);
    }
  }
}

TEST(UtilityEncoding, SumOfThreeTernaryOutputs) {
  DiscreteBayesNet bn;
  const std::vector<std::string> lmh{"low", "medium", "high"};
  const VarId r1 = bn.add_variable("R1", {"0", "1"});
  const VarId r2 = bn.add_variable("R2", {"0", "1", "2"});
  bn.set_cpt(r1, {}, {0.35, 0.65});
  bn.set_cpt(r2, {}, {0.2, 0.5, 0.3});
  std::mt19937_64 rng(4);
  std::vector<VarId> outs;
  for (const auto& [name, parents] : std::vector<std::pair<std::string, std::vector<VarId>>>{
           {"O1", {r1}}, {"O2", {r1, r2}}, {"O3", {r2}}}) {
    const VarId o = bn.add_variable(name, lmh);
    std::size_t rows = 1;
    for (VarId p : parents) rows *= bn.cardinality(p);
    std::vector<double> table;
    std::uniform_real_distribution<double> u(0.1, 1.0);
    for (std::size_t r = 0; r < rows; ++r) {
      const double a = u(rng), b = u(rng), c = u(rng);
      table.insert(table.end(), {a / (a + b + c), b / (a + b + c), c / (a + b + c)});
    }
    bn.set_cpt(o, parents, table);
    outs.push_back(o);
  }
  auto level = [&](const std::string& s) { return static_cast<int>(std::find(lmh.begin(), lmh.end(), s) - lmh.begin()); };
  const UtilityFunction sum = [&](const std::vector<std::string>& y) {
    return std::optional<std::string>(std::to_string(level(y[0]) + level(y[1]) + level(y[2])));
  };
  std::vector<std::string> domain;
  for (int k = 0; k <= 6; ++k) domain.push_back(std::to_string(k));
  const DiscreteBayesNet enc = encode_utility_node(bn, sum, outs, domain);
  ASSERT_TRUE(validate_network(enc).ok);
  const VarId o = static_cast<VarId>(bn.size());
  EXPECT_EQ(enc.cardinality(o), 7u);
  const Cpt& cpt = enc.cpt(o);
  for (std::size_t r = 0; r < 27; ++r)
    EXPECT_EQ(std::count(cpt.table.begin() + static_cast<std::ptrdiff_t>(7 * r),
                         cpt.table.begin() + static_cast<std::ptrdiff_t>(7 * r + 7), 1.0),
              1);
  const AnalysisSpec spec = AnalysisSpec::make(enc, o, {r1, r2}, label_values(enc, o));
  const SobolReport exact = compute_all(enc, spec);
  const SobolReport brute = oracle::brute_force_indices(enc, spec);
  for (std::size_t k = 0; k < exact.indices.size(); ++k) {
    EXPECT_NEAR(*exact.indices[k].first, *brute.indices[k].first, 1e-8);
    EXPECT_NEAR(*exact.indices[k].total, *brute.indices[k].total, 1e-8);
  }
}

TEST(UtilityEncoding, PartialFunctionRejected) {
  const DiscreteBayesNet bn = chain_network();
  const UtilityFunction partial = [](const std::vector<std::string>& y) -> std::optional<std::string> {
    if (y[0] == "e1") return std::nullopt;
    return "yes";
  };
  try {
    encode_utility_node(bn, partial, {0}, {"yes", "no"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::PartialFunction);
  }
  const UtilityFunction outside = [](const std::vector<std::string>&) { return std::optional<std::string>("maybe"); };
  EXPECT_THROW(encode_utility_node(bn, outside, {0}, {"yes", "no"}), Error);
}

}  // namespace
