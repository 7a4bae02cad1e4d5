/* Copyright 2026 The Tenergy Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "tenergy/footprint.h"

#include <functional>
#include <random>

#include <gtest/gtest.h>

#include "tenergy/errors.h"
#include "test_support.h"

namespace tenergy {
namespace {

const DeviceId kCpu(DeviceKind::kCpu, 0);

EnergyFootprint fp(std::initializer_list<std::pair<const char*, double>> kv) {
  EnergyFootprint f;
  for (const auto& [k, v] : kv) f[parse_qtn(k)] = v;
  return f;
}

TEST(SummarizeTest, CollapsesTransformerLayers) {
  const auto stef =
      summarize(fp({{"bert/encoder/layer_0/output/dense/MatMul", 5},
                    {"bert/encoder/layer_1/output/dense/MatMul", 3}}));
  EXPECT_EQ(stef, fp({{"bert/encoder/transformer/output/dense/MatMul", 8}}));
}

TEST(SummarizeTest, IdentityWithoutMatches) {
  const auto f = fp({{"a/X", 1}, {"layer/Y", 2}, {"layer_x/Z", 3},
                     {"a/layer_1", 4}});
  EXPECT_EQ(summarize(f), f);
}

TEST(SummarizeTest, CustomPattern) {
  const auto f = fp({{"albert/encoder/group_0/inner_1/X", 1},
                     {"albert/encoder/group_0/inner_2/X", 2}});
  EXPECT_EQ(summarize(f, "inner_[0-9]+"),
            fp({{"albert/encoder/group_0/transformer/X", 3}}));
  EXPECT_THROW(summarize(f, "("), PreconditionError);
}

TEST(SummarizeTest, PreservesMassAndIsIdempotent) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto f = testing::random_footprint(rng, 1, 20);
    const auto s = summarize(f);
    EXPECT_LE(testing::relative_error(total(s), total(f)), 1e-12);
    EXPECT_EQ(summarize(s), s);
  }
}

TEST(ToEddTest, SumsAndShares) {
  const Edd edd = to_edd(fp({{"a/X", 1}, {"a/Y", 3}}));
  ASSERT_EQ(edd.root.children.size(), 1u);
  const EddNode& a = edd.root.children[0];
  EXPECT_EQ(a.name, "a");
  EXPECT_EQ(a.kind, EddNodeKind::kComposite);
  EXPECT_EQ(a.energy, 4.0);
  EXPECT_EQ(a.share, 1.0);
  ASSERT_EQ(a.children.size(), 2u);
  EXPECT_EQ(a.children[0].name, "X");
  EXPECT_EQ(a.children[0].kind, EddNodeKind::kTensor);
  EXPECT_DOUBLE_EQ(a.children[0].share, 0.25);
  EXPECT_DOUBLE_EQ(a.children[1].share, 0.75);
}

TEST(ToEddTest, RejectsTensorCompositeCollision) {
  try {
    to_edd(fp({{"a/X", 1}, {"a/X/Y", 1}}));
    FAIL() << "expected StructuralError";
  } catch (const StructuralError& e) {
    EXPECT_NE(std::string(e.what()).find("'a/X'"), std::string::npos);
  }
  EXPECT_THROW(to_edd(fp({{"a/X/Y", 1}, {"a/X", 1}, {"b", 1}})),
               StructuralError);
}

TEST(ToEddTest, ZeroEnergyGivesZeroShares) {
  const Edd edd = to_edd(fp({{"a/X", 0}, {"a/Y", 0}}));
  for (const auto& c : edd.root.children[0].children) EXPECT_EQ(c.share, 0.0);
  EXPECT_TRUE(to_edd({}).root.children.empty());
}

// Brute-force oracle: a composite at `prefix` holds every entry whose name
// starts with "prefix/".
double subtree_sum(const EnergyFootprint& f, const std::string& prefix) {
  double sum = 0.0;
  for (const auto& [name, v] : f) {
    if (prefix.empty() || name.shorthand().rfind(prefix + "/", 0) == 0) {
      sum += v;
    }
  }
  return sum;
}

void check_tree(const EnergyFootprint& f, const EddNode& node,
                const std::string& path) {
  if (node.kind == EddNodeKind::kTensor) {
    EXPECT_EQ(node.energy, f.at(parse_qtn(path)));
    return;
  }
  EXPECT_LE(testing::relative_error(node.energy, subtree_sum(f, path)), 1e-9)
      << path;
  double shares = 0.0;
  for (const auto& c : node.children) {
    shares += c.share;
    check_tree(f, c, path.empty() ? c.name : path + "/" + c.name);
  }
  if (node.energy > 0.0) EXPECT_NEAR(shares, 1.0, 1e-12) << path;
}

TEST(ToEddTest, CompositeEnergyIsSubtreeSum) {
  std::mt19937_64 rng(5);
  int built = 0;
  for (int i = 0; i < 400 && built < 200; ++i) {
    const auto f = testing::random_footprint(rng, 1, 15);
    Edd edd;
    try {
      edd = to_edd(f);
    } catch (const StructuralError&) {
      continue;
    }
    ++built;
    check_tree(f, edd.root, "");
  }
  EXPECT_GE(built, 100);

  const auto nested = fp({{"m/enc/l0/X", 1}, {"m/enc/l0/Y", 2},
                          {"m/enc/l1/X", 3}, {"m/head/Z", 4}, {"W", 5}});
  const Edd edd = to_edd(nested);
  check_tree(nested, edd.root, "");
  EXPECT_EQ(edd.root.energy, 15.0);
}

TEST(ToEddTest, AttachesTopologyEdges) {
  const auto f = fp({{"m/a/X", 1}, {"m/b/Y", 1}, {"m/b/Z", 1}});
  const Edd edd = to_edd(f, {{"m", "a", "b"},
                             {"m/b", "Y", "Z"},
                             {"m", "a", "missing"},
                             {"nope", "a", "b"},
                             {"m/a/X", "p", "q"}});
  EXPECT_EQ(edd.dropped_edges, 3u);
  const EddNode& m = edd.root.children[0];
  ASSERT_EQ(m.dataflow.size(), 1u);
  EXPECT_EQ(m.dataflow[0].from, "a");
  EXPECT_EQ(m.children[1].dataflow.size(), 1u);
}

TensorEvent ev(std::int64_t ts, std::int64_t dur, const std::string& op) {
  return {Timestamp{ts}, Duration{dur}, kCpu, parse_qtn(op)};
}

AccountingOptions seconds_tick() {
  AccountingOptions o;
  o.tick_len = Duration{1'000'000};
  return o;
}

TEST(ComputeStpfTest, ConstantPowerAlone) {
  const DevicePowerTrace power({{kCpu, {{Timestamp{0}, 10.0}}}});
  const auto stpf = compute_stpf({ev(0, 1, "X")}, power, seconds_tick());
  const auto& e = stpf.at(parse_qtn("X"));
  EXPECT_DOUBLE_EQ(e.watts, 10.0);
  EXPECT_DOUBLE_EQ(e.active_seconds, 2.0);
}

TEST(ComputeStpfTest, SharedTicksHalvePower) {
  const DevicePowerTrace power({{kCpu, {{Timestamp{0}, 10.0}}}});
  const auto stpf =
      compute_stpf({ev(0, 1, "X"), ev(0, 1, "Y")}, power, seconds_tick());
  for (const char* k : {"X", "Y"}) {
    EXPECT_DOUBLE_EQ(stpf.at(parse_qtn(k)).watts, 5.0);
    EXPECT_DOUBLE_EQ(stpf.at(parse_qtn(k)).active_seconds, 2.0);
  }
}

TEST(ComputeStpfTest, PowerTimesTimeIsSummarizedEnergy) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 100; ++i) {
    const SynthOutput s = generate(testing::random_small_spec(rng));
    const auto stpf = compute_stpf(s.events, s.power);
    const auto stef = summarize(gen_footprint_optimized(s.events, s.power).tef);
    for (const auto& [name, e] : stpf) {
      EXPECT_LE(testing::relative_error(e.watts * e.active_seconds,
                                        stef.at(name)),
                1e-9);
    }
  }
}

TEST(TopKTest, OrdersByValueThenName) {
  auto r = top_k(fp({{"X", 3}, {"Y", 5}}), 1);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].key.shorthand(), "Y");
  EXPECT_EQ(r[0].value, 5.0);
  EXPECT_EQ(r[0].dispersion, 0.0);

  r = top_k(fp({{"Y", 2}, {"X", 2}}), 2);
  EXPECT_EQ(r[0].key.shorthand(), "X");
  EXPECT_EQ(r[1].key.shorthand(), "Y");

  EXPECT_EQ(top_k(fp({{"X", 1}, {"Y", 2}}), 10).size(), 2u);
  EXPECT_THROW(top_k(fp({{"X", 1}}), 0), PreconditionError);
}

TEST(TopKTest, MultiRunMeanAndSampleDeviation) {
  const std::vector<EnergyFootprint> runs = {fp({{"X", 1}, {"Y", 4}}),
                                             fp({{"X", 3}})};
  const auto r = top_k(runs, 5);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].key.shorthand(), "X");
  EXPECT_DOUBLE_EQ(r[0].value, 2.0);
  EXPECT_DOUBLE_EQ(r[0].dispersion, std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(r[1].value, 2.0);
  EXPECT_DOUBLE_EQ(r[1].dispersion, std::sqrt(8.0));
}

}  // namespace
}  // namespace tenergy
