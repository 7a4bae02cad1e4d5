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

// tenergy: tensor-level energy accounting from event and power traces.
//
//   tenergy account   --events E --power P --out tef.json
//   tenergy summarize --in tef.json --out stef.json
//   tenergy edd       --in tef.json --out edd.dot [--format dot|json]
//   tenergy compare   --a x.json --b y.json | --matrix DIR  [--metric pcc|med]
//   tenergy precision --mode asss|assw ...
//   tenergy synth     --spec spec.json --outdir DIR
//   tenergy top       --in f.json [--in g.json ...] -k 10
//
// Exit codes: 0 success, 1 input or parse error, 2 structural or semantic
// error. Diagnostics go to stderr; TENERGY_LOG=quiet|info|debug controls
// how much.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tenergy/accountant.h"
#include "tenergy/errors.h"
#include "tenergy/footprint.h"
#include "tenergy/io.h"
#include "tenergy/similarity.h"
#include "tenergy/synth.h"

namespace fs = std::filesystem;
using namespace tenergy;

namespace {

enum class Verbosity { kQuiet, kInfo, kDebug };

Verbosity verbosity() {
  static const Verbosity v = [] {
    const char* env = std::getenv("TENERGY_LOG");
    const std::string level = env ? env : "info";
    if (level == "quiet") return Verbosity::kQuiet;
    if (level == "debug") return Verbosity::kDebug;
    return Verbosity::kInfo;
  }();
  return v;
}

void info(const std::string& msg) {
  if (verbosity() != Verbosity::kQuiet) std::cerr << msg << "\n";
}

void debug(const std::string& msg) {
  if (verbosity() == Verbosity::kDebug) std::cerr << msg << "\n";
}

struct Output {
  std::string path;
  bool to_stdout = false;

  void add_to(CLI::App* cmd, const std::string& what) {
    cmd->add_option("--out,-o", path, what);
    cmd->add_flag("--stdout", to_stdout, "Write the result to standard output");
  }

  void emit(const std::string& content) const {
    if (to_stdout) {
      std::cout << content;
      return;
    }
    if (path.empty()) throw ParseError("no --out path given");
    io::write_file(path, content);
    debug("wrote " + path);
  }
};

AccountingOptions accounting_options(std::int64_t tick_us) {
  if (tick_us < 1) throw ParseError("--tick-us must be >= 1");
  AccountingOptions options;
  options.tick_len = Duration{tick_us};
  return options;
}

void report_diagnostics(const AccountingDiagnostics& d) {
  info("diagnostics: pre_sample_ticks=" + std::to_string(d.pre_sample_ticks) +
       " uncovered_ticks=" + std::to_string(d.uncovered_ticks) +
       " clipped_events=" + std::to_string(d.clipped_events));
  if (d.uncovered_ticks > 0) {
    info("warning: some events ran on devices without power samples");
  }
}

void report_read(const io::ReadReport& report, const std::string& what) {
  if (report.skipped == 0) return;
  info("warning: skipped " + std::to_string(report.skipped) + " malformed " +
       what + " records");
  for (const auto& p : report.problems) debug("  " + p);
}

struct AccountArgs {
  std::string events;
  std::string power;
  Output out;
  std::int64_t tick_us = 1;
  bool naive = false;
  std::uint64_t naive_limit = 10'000'000;
  bool lenient = false;
  std::string stpf_path;
  std::string forward_path;
  std::string backward_path;
  std::string backward_prefix = "gradients";
  std::string pattern = std::string(kDefaultLayerPattern);
  std::optional<std::int64_t> window_begin;
  std::optional<std::int64_t> window_end;
};

int run_account(const AccountArgs& a) {
  io::ReadOptions read_options{a.lenient};
  io::ReadReport event_report, power_report;
  const EventTrace events =
      io::read_events(a.events, read_options, &event_report);
  const DevicePowerTrace power =
      io::read_power(a.power, read_options, &power_report);
  report_read(event_report, "event");
  report_read(power_report, "power");

  AccountingOptions options = accounting_options(a.tick_us);
  options.naive_tick_limit = a.naive_limit;
  if (a.window_begin) options.window_begin = Timestamp{*a.window_begin};
  if (a.window_end) options.window_end = Timestamp{*a.window_end};

  EnergyFootprint tef;
  AccountingDiagnostics diag;
  std::map<DeviceId, double> device_energy;
  if (a.naive) {
    auto naive = gen_footprint_naive(events, power, options);
    tef = aggregate(naive.ticks);
    diag = naive.diagnostics;
    device_energy = std::move(naive.device_energy);
  } else {
    auto acc = gen_footprint_optimized(events, power, options);
    tef = std::move(acc.tef);
    diag = acc.diagnostics;
    device_energy = std::move(acc.device_energy);
  }

  a.out.emit(io::render_footprint(tef, io::Format::kJson));
  for (const auto& [device, joules] : device_energy) {
    info(device.label() + ": " + io::format_real(joules) + " J");
  }
  info("total: " + io::format_real(total(tef)) + " J over " +
       std::to_string(tef.size()) + " tensors");
  report_diagnostics(diag);

  if (!a.stpf_path.empty()) {
    io::write_file(a.stpf_path,
                   io::render_stpf_json(
                       compute_stpf(events, power, options, a.pattern)));
  }
  if (!a.forward_path.empty() || !a.backward_path.empty()) {
    const PassSplit split = split_passes(tef, a.backward_prefix);
    if (!a.forward_path.empty()) io::write_tef(split.forward, a.forward_path);
    if (!a.backward_path.empty()) {
      io::write_tef(split.backward, a.backward_path);
    }
    info("forward: " + io::format_real(total(split.forward)) +
         " J, backward: " + io::format_real(total(split.backward)) + " J");
  }
  return 0;
}

Metric parse_metric(const std::string& s) {
  if (s == "pcc") return Metric::kPcc;
  if (s == "med") return Metric::kMed;
  throw ParseError("unknown metric '" + s + "'");
}

std::vector<LabeledFootprint> read_directory(const std::string& dir) {
  if (!fs::is_directory(dir)) {
    throw ParseError("'" + dir + "' is not a directory");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<LabeledFootprint> out;
  for (const auto& f : files) {
    out.push_back({f.stem().string(), io::read_footprint(f)});
  }
  return out;
}

std::vector<Duration> parse_periods(const std::vector<std::int64_t>& raw) {
  std::vector<Duration> out;
  for (auto p : raw) {
    if (p < 1) throw ParseError("sampling periods must be >= 1 us");
    out.push_back(Duration{p});
  }
  return out;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"Tensor-level energy accounting for deep-learning traces"};
  app.require_subcommand(1);

  AccountArgs account;
  auto* account_cmd =
      app.add_subcommand("account", "Attribute device energy to tensors");
  account_cmd->add_option("--events,-e", account.events, "events.jsonl")
      ->required();
  account_cmd->add_option("--power,-p", account.power, "power.csv")->required();
  account.out.add_to(account_cmd, "tef.json output");
  account_cmd->add_option("--tick-us", account.tick_us,
                          "Microseconds per timestamp unit");
  account_cmd->add_flag("--naive", account.naive,
                        "Use the per-tick reference algorithm");
  account_cmd->add_option("--naive-limit", account.naive_limit,
                          "Largest flattened tick count --naive accepts");
  account_cmd->add_flag("--lenient", account.lenient,
                        "Skip malformed records instead of failing");
  account_cmd->add_option("--stpf", account.stpf_path,
                          "Also write the summarized power footprint");
  account_cmd->add_option("--pattern", account.pattern,
                          "Layer pattern used for --stpf");
  account_cmd->add_option("--forward", account.forward_path,
                          "Write forward-pass entries here");
  account_cmd->add_option("--backward", account.backward_path,
                          "Write backward-pass entries here");
  account_cmd->add_option("--backward-prefix", account.backward_prefix,
                          "Outermost layer holding the backward pass");
  account_cmd->add_option("--window-begin", account.window_begin,
                          "First tick of the session window");
  account_cmd->add_option("--window-end", account.window_end,
                          "Last tick of the session window");

  std::string summarize_in;
  Output summarize_out;
  std::string summarize_pattern = std::string(kDefaultLayerPattern);
  auto* summarize_cmd =
      app.add_subcommand("summarize", "Collapse repeated layers");
  summarize_cmd->add_option("--in,-i", summarize_in, "tef.json")->required();
  summarize_out.add_to(summarize_cmd, "stef.json output");
  summarize_cmd->add_option("--pattern", summarize_pattern,
                            "Regex matching a whole layer segment");

  std::string edd_in, edd_format = "dot", edd_topology;
  Output edd_out;
  auto* edd_cmd =
      app.add_subcommand("edd", "Build an energy distribution diagram");
  edd_cmd->add_option("--in,-i", edd_in, "tef.json or stef.json")->required();
  edd_out.add_to(edd_cmd, "edd.dot or edd.json output");
  edd_cmd->add_option("--format", edd_format, "dot or json");
  edd_cmd->add_option("--topology", edd_topology, "Dataflow sidecar (jsonl)");

  std::string cmp_a, cmp_b, cmp_dir, cmp_metric = "pcc", cmp_format = "csv";
  Output cmp_out;
  auto* compare_cmd = app.add_subcommand("compare", "Compare footprints");
  auto* opt_a = compare_cmd->add_option("--a", cmp_a, "First footprint");
  auto* opt_b = compare_cmd->add_option("--b", cmp_b, "Second footprint");
  auto* opt_dir = compare_cmd->add_option(
      "--matrix", cmp_dir, "Directory of footprints for a pairwise matrix");
  opt_a->needs(opt_b);
  opt_b->needs(opt_a);
  opt_dir->excludes(opt_a)->excludes(opt_b);
  compare_cmd->add_option("--metric", cmp_metric, "pcc or med");
  compare_cmd->add_option("--format", cmp_format, "Matrix format: csv or json");
  cmp_out.add_to(compare_cmd, "Result path");

  std::string prec_mode, prec_events, prec_power, prec_base_path;
  std::string prec_pattern = std::string(kDefaultLayerPattern);
  std::vector<std::int64_t> prec_periods;
  std::int64_t prec_base_period = 0, prec_tick_us = 1;
  std::vector<std::string> prec_runs;
  Output prec_out;
  auto* precision_cmd =
      app.add_subcommand("precision", "Sampling precision curves");
  precision_cmd->add_option("--mode", prec_mode, "asss or assw")->required();
  precision_cmd->add_option("--events,-e", prec_events, "asss: events.jsonl");
  precision_cmd->add_option("--power,-p", prec_power, "asss: power.csv");
  precision_cmd->add_option("--periods", prec_periods,
                            "asss: sampling periods in us")
      ->delimiter(',');
  precision_cmd->add_option("--base-period", prec_base_period,
                            "asss: native sampling period in us");
  precision_cmd->add_option("--tick-us", prec_tick_us,
                            "Microseconds per timestamp unit");
  precision_cmd->add_option("--pattern", prec_pattern, "Layer pattern");
  precision_cmd->add_option("--runs", prec_runs,
                            "assw: per-run summarized footprints, in order");
  precision_cmd->add_option("--base", prec_base_path,
                            "assw: baseline (default: mean of all runs)");
  prec_out.add_to(precision_cmd, "Curve CSV output");

  std::string synth_spec, synth_outdir;
  std::int64_t synth_tick_us = 1;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic trace");
  synth_cmd->add_option("--spec", synth_spec, "Spec JSON")->required();
  synth_cmd->add_option("--outdir", synth_outdir, "Output directory")
      ->required();
  synth_cmd->add_option("--tick-us", synth_tick_us,
                        "Microseconds per timestamp unit");

  std::vector<std::string> top_in;
  std::size_t top_k_value = 10;
  Output top_out;
  auto* top_cmd = app.add_subcommand("top", "Rank the largest entries");
  top_cmd->add_option("--in,-i", top_in, "Footprints, one per run")
      ->required();
  top_cmd->add_option("-k", top_k_value, "Entries to keep");
  top_out.add_to(top_cmd, "Ranking CSV output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*account_cmd) return run_account(account);

  if (*summarize_cmd) {
    const auto tef = io::read_footprint(summarize_in);
    const auto stef = summarize(tef, summarize_pattern);
    summarize_out.emit(io::render_footprint(stef, io::Format::kJson));
    info("summarized " + std::to_string(tef.size()) + " entries into " +
         std::to_string(stef.size()));
    return 0;
  }

  if (*edd_cmd) {
    const io::Format format = io::parse_format(edd_format);
    if (format == io::Format::kCsv) {
      throw ParseError("diagrams can only be written as dot or json");
    }
    std::vector<TopologyEdge> topology;
    if (!edd_topology.empty()) topology = io::read_topology(edd_topology);
    const Edd edd = to_edd(io::read_footprint(edd_in), topology);
    if (edd.dropped_edges > 0) {
      info("warning: " + std::to_string(edd.dropped_edges) +
           " topology edges did not match the diagram");
    }
    edd_out.emit(io::render_edd(edd, format));
    return 0;
  }

  if (*compare_cmd) {
    const Metric metric = parse_metric(cmp_metric);
    if (!cmp_dir.empty()) {
      const auto m = stability_matrix(read_directory(cmp_dir), metric);
      const io::Format format = io::parse_format(cmp_format);
      cmp_out.emit(io::render_matrix(m, format));
      info(std::to_string(m.labels.size()) + "x" +
           std::to_string(m.labels.size()) + " " + metric_name(metric) +
           " matrix");
      return 0;
    }
    if (cmp_a.empty()) throw ParseError("compare needs --a/--b or --matrix");
    const auto r = compare(metric, io::read_footprint(cmp_a),
                           io::read_footprint(cmp_b));
    if (r.degenerate) {
      info(metric_name(metric) + " undefined (zero variance) over " +
           std::to_string(r.n_keys) + " keys");
    } else {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.4f", r.value);
      info(metric_name(metric) + " " + buf + " over " +
           std::to_string(r.n_keys) + " keys");
    }
    if (cmp_out.to_stdout || !cmp_out.path.empty()) {
      cmp_out.emit(io::render_comparison_json(r));
    }
    return 0;
  }

  if (*precision_cmd) {
    if (prec_mode == "asss") {
      if (prec_events.empty() || prec_power.empty() || prec_periods.empty() ||
          prec_base_period < 1) {
        throw ParseError(
            "asss needs --events, --power, --periods and --base-period");
      }
      SparsingOptions options;
      options.accounting = accounting_options(prec_tick_us);
      options.layer_pattern = prec_pattern;
      const auto points =
          asss(io::read_events(prec_events), io::read_power(prec_power),
               parse_periods(prec_periods), Duration{prec_base_period},
               options);
      prec_out.emit(io::render_sparsing_csv(points));
      return 0;
    }
    if (prec_mode == "assw") {
      if (prec_runs.empty()) throw ParseError("assw needs --runs");
      std::vector<EnergyFootprint> runs;
      for (const auto& r : prec_runs) runs.push_back(io::read_footprint(r));
      const EnergyFootprint base = prec_base_path.empty()
                                       ? mean_footprint(runs)
                                       : io::read_footprint(prec_base_path);
      prec_out.emit(io::render_widening_csv(assw(runs, base)));
      return 0;
    }
    throw ParseError("unknown precision mode '" + prec_mode + "'");
  }

  if (*synth_cmd) {
    const SynthSpec spec = parse_synth_spec(io::read_file(synth_spec));
    const SynthOutput out = generate(spec, accounting_options(synth_tick_us));
    fs::create_directories(synth_outdir);
    const fs::path dir(synth_outdir);
    io::write_events(out.events, dir / "events.jsonl");
    io::write_power(out.power, dir / "power.csv");
    io::write_tef(out.expected, dir / "expected_tef.json");
    info("generated " + std::to_string(out.events.size()) + " events, " +
         std::to_string(out.power.sample_count()) + " power samples");
    return 0;
  }

  if (*top_cmd) {
    std::vector<EnergyFootprint> runs;
    for (const auto& p : top_in) runs.push_back(io::read_footprint(p));
    top_out.emit(io::render_ranking_csv(top_k(runs, top_k_value)));
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
