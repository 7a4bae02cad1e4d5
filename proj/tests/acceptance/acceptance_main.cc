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

// Acceptance gate. Runs every release criterion, prints one PASS/FAIL line
// per criterion, and exits non-zero if any failed or overran its budget.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tenergy/accountant.h"
#include "tenergy/errors.h"
#include "tenergy/footprint.h"
#include "tenergy/io.h"
#include "tenergy/similarity.h"
#include "tenergy/synth.h"
#include "test_support.h"

namespace tenergy {
namespace {

namespace fs = std::filesystem;
using testing::relative_error;

const std::string kCli = TENERGY_CLI;
const std::string kData = TENERGY_TEST_DATA;
const std::string kGolden = TENERGY_GOLDEN;

// Collects the first few failures of a criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (failures_++ < 5) messages_ += (messages_.empty() ? "" : "; ") + what;
  }
  bool ok() const { return failures_ == 0; }
  std::string summary() const {
    return std::to_string(failures_) + " failure(s): " + messages_;
  }

 private:
  int failures_ = 0;
  std::string messages_;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

EnergyFootprint as_footprint(const std::map<std::string, double>& m) {
  EnergyFootprint f;
  for (const auto& [k, v] : m) f[parse_qtn(k)] = v;
  return f;
}

void half_rate_pcc(Check& c) {
  const std::string pair = kData + "/rate_pair/";
  const auto a = io::read_footprint(pair + "stef_full_rate.json");
  const auto b = io::read_footprint(pair + "stef_half_rate.json");
  const auto r = pcc(a, b);
  c.expect(r.n_keys == 9, "expected 9 keys, got " + std::to_string(r.n_keys));
  c.expect(!r.degenerate && std::abs(r.value - 0.9958) <= 1e-4,
           "pcc " + fmt(r.value) + " not within 1e-4 of 0.9958");
}

void summarization(Check& c) {
  const auto stef =
      summarize(io::read_footprint(kData + "/summarize_tef.json"));
  c.expect(stef.size() == 1, "expected one entry");
  const auto it =
      stef.find(parse_qtn("bert/encoder/transformer/output/dense/MatMul"));
  c.expect(it != stef.end() && it->second == 8.0, "transformer entry != 8");
}

// Shared by the equivalence and conservation criteria.
struct OracleRun {
  Check equivalence;
  Check conservation;
  int instances = 0;
};

OracleRun& oracle_run() {
  static OracleRun run = [] {
    OracleRun r;
    std::mt19937_64 rng(20240601);
    for (int i = 0; i < 1000; ++i) {
      const SynthSpec spec = testing::random_small_spec(rng);
      const SynthOutput s = generate(spec);
      std::size_t samples = 0;
      for (const auto& [d, list] : s.power.devices()) samples += list.size();
      const std::string tag = "instance " + std::to_string(i);
      r.equivalence.expect(s.events.size() <= 50 && samples <= 50 &&
                               flat_tick_count(s.events) <= 100000,
                           tag + " exceeds the size envelope");
      ++r.instances;

      const auto naive =
          aggregate(gen_footprint_naive(s.events, s.power).ticks);
      const auto opt = gen_footprint_optimized(s.events, s.power);
      r.equivalence.expect(naive.size() == opt.tef.size(),
                           tag + " key sets differ");
      for (const auto& [k, v] : naive) {
        const auto it = opt.tef.find(k);
        r.equivalence.expect(
            it != opt.tef.end() && relative_error(it->second, v) <= 1e-9,
            tag + " " + k.shorthand());
      }

      const auto oracle = testing::brute_force(s.events, s.power, 1e-6);
      r.conservation.expect(relative_error(total(opt.tef), oracle.total) <=
                                1e-9,
                            tag + ": " + fmt(total(opt.tef)) + " vs " +
                                fmt(oracle.total));
    }
    return r;
  }();
  return run;
}

void oracle_equivalence(Check& c) {
  const auto& r = oracle_run();
  c.expect(r.instances == 1000, "ran " + std::to_string(r.instances));
  if (!r.equivalence.ok()) c.expect(false, r.equivalence.summary());
}

void conservation(Check& c) {
  const auto& r = oracle_run();
  if (!r.conservation.ok()) c.expect(false, r.conservation.summary());
}

EnergyFootprint scaled(const EnergyFootprint& f, double alpha) {
  EnergyFootprint out;
  for (const auto& [k, v] : f) out[k] = alpha * v;
  return out;
}

void similarity_suite(Check& c) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> alpha(1e-3, 1e3);
  for (int i = 0; i < 200; ++i) {
    const auto a = testing::random_footprint(rng);
    const auto b = testing::random_footprint(rng);
    const auto ab = pcc(a, b), ba = pcc(b, a);
    c.expect(ab.degenerate == ba.degenerate && ab.value == ba.value,
             "pcc symmetry case " + std::to_string(i));
    if (!ab.degenerate) {
      const auto s = pcc(scaled(a, alpha(rng)), b);
      c.expect(std::abs(s.value - ab.value) <= 1e-12,
               "pcc scaling case " + std::to_string(i));
    }
    c.expect(med(a, b).value == -med(b, a).value,
             "med antisymmetry case " + std::to_string(i));

    std::vector<EnergyFootprint> copies(1 + i % 6, a);
    for (const auto& p : assw(copies, a)) {
      c.expect(!p.similarity.degenerate && p.similarity.value == 1.0,
               "assw identical case " + std::to_string(i));
    }
  }
  for (int i = 0; i < 200; ++i) {
    SynthSpec spec = testing::random_small_spec(rng);
    spec.tensor_names = {"MatMul", "Add", "Softmax"};
    spec.layers = 1;
    spec.backward = false;
    const SynthOutput s = generate(spec);
    const Duration base{spec.sampling_period_us};
    const auto points = asss(s.events, s.power, {base}, base);
    c.expect(points.size() == 1 && !points[0].similarity.degenerate &&
                 points[0].similarity.value == 1.0,
             "asss base case " + std::to_string(i));
  }
}

double subtree_sum(const EnergyFootprint& f, const std::string& prefix) {
  double sum = 0.0;
  for (const auto& [name, v] : f) {
    if (prefix.empty() || name.shorthand().rfind(prefix + "/", 0) == 0) {
      sum += v;
    }
  }
  return sum;
}

void check_edd(Check& c, const EnergyFootprint& f, const EddNode& node,
               const std::string& path) {
  if (node.kind == EddNodeKind::kTensor) {
    c.expect(node.energy == f.at(parse_qtn(path)), "tensor " + path);
    return;
  }
  c.expect(relative_error(node.energy, subtree_sum(f, path)) <= 1e-9,
           "subtree sum at '" + path + "'");
  double shares = 0.0;
  for (const auto& child : node.children) {
    shares += child.share;
    check_edd(c, f, child,
              path.empty() ? child.name : path + "/" + child.name);
  }
  if (node.energy > 0.0) {
    c.expect(std::abs(shares - 1.0) <= 1e-12, "share sum at '" + path + "'");
  }
}

void structural_suite(Check& c) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto f = testing::random_footprint(rng, 1, 20);
    const auto s = summarize(f);
    c.expect(summarize(s) == s, "idempotence case " + std::to_string(i));
    c.expect(relative_error(total(s), total(f)) <= 1e-12,
             "mass case " + std::to_string(i));
  }
  int built = 0;
  while (built < 200) {
    // Trees from generated traces never mix tensor and composite names.
    const auto tef = generate(testing::random_small_spec(rng)).expected;
    const auto stef = summarize(tef);
    check_edd(c, tef, to_edd(tef).root, "");
    check_edd(c, stef, to_edd(stef).root, "");
    ++built;
  }
  for (int i = 0; i < 200; ++i) {
    std::vector<EnergyFootprint> runs(1 + i % 4);
    for (auto& r : runs) r = testing::random_footprint(rng);
    // Force ties so the name tie-break is exercised.
    runs[0][parse_qtn("tie/A")] = 5.0;
    runs[0][parse_qtn("tie/B")] = 5.0;
    const auto full = top_k(runs, 1000);
    const auto again = top_k(runs, 1000);
    bool ordered = true;
    for (std::size_t j = 1; j < full.size(); ++j) {
      const auto& p = full[j - 1];
      const auto& q = full[j];
      ordered &= p.value > q.value || (p.value == q.value && p.key < q.key);
    }
    c.expect(ordered, "top_k order case " + std::to_string(i));
    bool same = full.size() == again.size();
    for (std::size_t j = 0; same && j < full.size(); ++j) {
      same = full[j].key == again[j].key && full[j].value == again[j].value;
    }
    c.expect(same, "top_k repeatability case " + std::to_string(i));
    const std::size_t k = 1 + i % 5;
    const auto prefix = top_k(runs, k);
    for (std::size_t j = 0; j < prefix.size(); ++j) {
      c.expect(prefix[j].key == full[j].key,
               "top_k prefix case " + std::to_string(i));
    }
  }
}

void read_fixture(const fs::path& path) {
  const std::string name = path.filename().string();
  if (name.rfind("events_", 0) == 0) {
    io::read_events(path);
  } else if (name.rfind("power_", 0) == 0) {
    io::read_power(path);
  } else {
    io::read_topology(path);
  }
}

void format_suite(Check& c) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 100; ++i) {
    const SynthSpec spec = testing::random_small_spec(rng);
    const SynthOutput a = generate(spec), b = generate(spec);
    const std::string tag = " case " + std::to_string(i);
    const auto stef_a = summarize(a.expected), stef_b = summarize(b.expected);
    std::vector<std::pair<std::string, std::string>> renders = {
        {io::render_events(a.events), io::render_events(b.events)},
        {io::render_power(a.power), io::render_power(b.power)},
        {io::render_footprint(a.expected, io::Format::kJson),
         io::render_footprint(b.expected, io::Format::kJson)},
        {io::render_footprint(a.expected, io::Format::kCsv),
         io::render_footprint(b.expected, io::Format::kCsv)},
        {io::render_edd(to_edd(stef_a), io::Format::kDot),
         io::render_edd(to_edd(stef_b), io::Format::kDot)},
        {io::render_edd(to_edd(stef_a), io::Format::kJson),
         io::render_edd(to_edd(stef_b), io::Format::kJson)},
        {io::render_stpf_json(compute_stpf(a.events, a.power)),
         io::render_stpf_json(compute_stpf(b.events, b.power))},
        {io::render_ranking_csv(top_k(a.expected, 5)),
         io::render_ranking_csv(top_k(b.expected, 5))},
    };
    for (const auto& [x, y] : renders) c.expect(x == y, "writer bytes" + tag);

    std::istringstream ev(renders[0].first), pw(renders[1].first);
    c.expect(io::render_events(io::read_events(ev, "e")) == renders[0].first,
             "events round trip" + tag);
    c.expect(io::render_power(io::read_power(pw, "p")) == renders[1].first,
             "power round trip" + tag);
    const auto tef = io::parse_footprint(renders[2].first, "t");
    c.expect(io::render_footprint(tef, io::Format::kJson) == renders[2].first,
             "footprint round trip" + tag);
    Edd edd;
    edd.root = io::parse_edd_json(renders[5].first, "edd");
    c.expect(io::render_edd(edd, io::Format::kJson) == renders[5].first,
             "edd round trip" + tag);
  }
  std::vector<LabeledFootprint> runs;
  for (int i = 0; i < 4; ++i) {
    runs.push_back({"r" + std::to_string(i), testing::random_footprint(rng)});
  }
  const std::string csv =
      io::render_matrix(stability_matrix(runs), io::Format::kCsv);
  c.expect(io::render_matrix(io::parse_matrix_csv(csv, Metric::kPcc, "m"),
                             io::Format::kCsv) == csv,
           "matrix round trip");

  const auto fixtures =
      testing::read_malformed_manifest(kData + "/malformed/MANIFEST.tsv");
  c.expect(fixtures.size() == 20,
           "expected 20 fixtures, found " + std::to_string(fixtures.size()));
  for (const auto& f : fixtures) {
    const fs::path path = kData + "/malformed/" + f.file;
    try {
      read_fixture(path);
      c.expect(false, f.file + " accepted");
    } catch (const ParseError& e) {
      const std::string what = e.what();
      const std::string at = path.string() + ":" + std::to_string(f.line) + ":";
      c.expect(e.line() == f.line && what.find(at) != std::string::npos &&
                   what.find(f.reason) != std::string::npos,
               f.file + ": " + what);
    }
  }
}

int run_cli(const std::string& args) {
  const std::string cmd = "TENERGY_LOG=quiet '" + kCli + "' " + args;
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void cli_end_to_end(Check& c) {
  const fs::path work = fs::temp_directory_path() / "tenergy_acceptance_e2e";
  fs::remove_all(work);
  fs::create_directories(work / "stefs");
  const auto p = [&](const std::string& rel) { return (work / rel).string(); };
  int rc = 0;
  for (const char* run : {"a", "b"}) {
    const std::string r = run;
    const std::string spec =
        kData + (r == "a" ? "/e2e_spec.json" : "/e2e_spec_rerun.json");
    rc |= run_cli("synth --spec " + spec + " --outdir " + p(r));
    rc |= run_cli("account -e " + p(r + "/events.jsonl") + " -p " +
                  p(r + "/power.csv") + " -o " + p(r + "/tef.json"));
    rc |= run_cli("summarize -i " + p(r + "/tef.json") + " -o " +
                  p("stefs/run_" + r + ".json"));
  }
  rc |= run_cli("edd -i " + p("stefs/run_a.json") + " --topology " + kData +
                "/e2e_topology.jsonl -o " + p("edd.dot"));
  rc |= run_cli("compare --matrix " + p("stefs") + " -o " + p("matrix.csv"));
  c.expect(rc == 0, "a command failed");
  if (rc != 0) return;

  const auto same = [&](const std::string& produced, const std::string& gold) {
    c.expect(io::read_file(produced) == io::read_file(kGolden + "/" + gold),
             produced + " differs from golden " + gold);
  };
  same(p("a/tef.json"), "expected_tef.json");
  same(p("a/expected_tef.json"), "expected_tef.json");
  same(p("edd.dot"), "edd.dot");
  same(p("matrix.csv"), "matrix.csv");

  // The golden itself must agree with the independent oracle.
  const auto golden = io::read_footprint(kGolden + "/expected_tef.json");
  const auto oracle = testing::brute_force(io::read_events(p("a/events.jsonl")),
                                           io::read_power(p("a/power.csv")),
                                           1e-6);
  c.expect(golden.size() == oracle.tef.size(), "golden key set");
  for (const auto& [k, v] : as_footprint(oracle.tef)) {
    const auto it = golden.find(k);
    c.expect(it != golden.end() && relative_error(it->second, v) <= 1e-8,
             "golden " + k.shorthand());
  }
  fs::remove_all(work);
}

struct Criterion {
  const char* name;
  double budget_seconds;
  std::function<void(Check&)> body;
};

}  // namespace
}  // namespace tenergy

int main() {
  using tenergy::Check;
  using tenergy::Criterion;
  const std::vector<Criterion> criteria = {
      {"half-rate-pcc", 1, tenergy::half_rate_pcc},
      {"summarization-fixture", 1, tenergy::summarization},
      {"oracle-equivalence", 60, tenergy::oracle_equivalence},
      {"conservation", 60, tenergy::conservation},
      {"similarity-properties", 30, tenergy::similarity_suite},
      {"structural-properties", 30, tenergy::structural_suite},
      {"format-suite", 10, tenergy::format_suite},
      {"cli-end-to-end", 10, tenergy::cli_end_to_end},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    check.expect(secs <= c.budget_seconds, "over the time budget");
    std::printf("%s %-24s %8.3fs / %.0fs%s%s\n", check.ok() ? "PASS" : "FAIL",
                c.name, secs, c.budget_seconds, check.ok() ? "" : "  ",
                check.ok() ? "" : check.summary().c_str());
    failed += check.ok() ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n",
              static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
