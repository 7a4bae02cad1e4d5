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

#include "tenergy/accountant.h"

#include <algorithm>
#include <numeric>
#include <utility>
#include <vector>

#include "tenergy/errors.h"

namespace tenergy {

namespace {

// Half-open tick span [begin, end) covered by one event occurrence.
struct Coverage {
  std::int64_t begin;
  std::int64_t end;
  const TensorEvent* event;
};

void check_event(const TensorEvent& e) {
  if (e.dur.micros < 1) {
    throw PreconditionError("event '" + e.op.shorthand() +
                            "' has non-positive duration");
  }
}

// Applies the session window. Events entirely outside it are dropped.
std::vector<Coverage> coverage_of(const EventTrace& trace,
                                  const AccountingOptions& options,
                                  AccountingDiagnostics& diag) {
  std::vector<Coverage> out;
  out.reserve(trace.size());
  for (const auto& e : trace) {
    check_event(e);
    std::int64_t begin = e.ts.micros;
    std::int64_t end = e.ts.micros + e.dur.micros + 1;
    bool clipped = false;
    if (options.window_begin && begin < options.window_begin->micros) {
      begin = options.window_begin->micros;
      clipped = true;
    }
    if (options.window_end && end > options.window_end->micros + 1) {
      end = options.window_end->micros + 1;
      clipped = true;
    }
    if (clipped) ++diag.clipped_events;
    if (begin < end) out.push_back({begin, end, &e});
  }
  return out;
}

std::size_t align_index(std::int64_t tick, const std::vector<PowerSample>& s,
                        bool& pre_sample) {
  auto it = std::upper_bound(
      s.begin(), s.end(), tick,
      [](std::int64_t t, const PowerSample& p) { return t < p.ts.micros; });
  if (it == s.begin()) {
    pre_sample = true;
    return 0;
  }
  pre_sample = false;
  return static_cast<std::size_t>(std::distance(s.begin(), it) - 1);
}

}  // namespace

Alignment now(Timestamp t, std::span<const Timestamp> samples) {
  if (samples.empty()) {
    throw PreconditionError("cannot align against an empty sample set");
  }
  auto it = std::upper_bound(samples.begin(), samples.end(), t);
  if (it == samples.begin()) return {samples.front(), true};
  return {*std::prev(it), false};
}

DeviceFlatTrace flatten(const EventTrace& trace) {
  DeviceFlatTrace ft;
  for (const auto& e : trace) {
    check_event(e);
    auto& ticks = ft[e.device];
    for (std::int64_t t = e.ts.micros; t <= e.ts.micros + e.dur.micros; ++t) {
      ++ticks[t][e.op];
    }
  }
  return ft;
}

std::uint64_t flat_tick_count(const EventTrace& trace) {
  std::uint64_t n = 0;
  for (const auto& e : trace) {
    if (e.dur.micros > 0) n += static_cast<std::uint64_t>(e.dur.micros) + 1;
  }
  return n;
}

EnergyFootprint build_tick_footprint(const OpMultiset& ops, double watts,
                                     Duration tick_len) {
  std::size_t occurrences = 0;
  for (const auto& [op, count] : ops) occurrences += count;
  if (occurrences == 0) {
    throw PreconditionError("cannot split tick energy among zero operations");
  }
  const double share =
      watts * tick_len.seconds() / static_cast<double>(occurrences);
  EnergyFootprint out;
  for (const auto& [op, count] : ops) {
    if (count > 0) out[op] = share * static_cast<double>(count);
  }
  return out;
}

NaiveAccounting gen_footprint_naive(const EventTrace& trace,
                                    const DevicePowerTrace& power,
                                    const AccountingOptions& options) {
  if (flat_tick_count(trace) > options.naive_tick_limit) {
    throw PreconditionError(
        "trace flattens to " + std::to_string(flat_tick_count(trace)) +
        " ticks, above the reference limit of " +
        std::to_string(options.naive_tick_limit));
  }
  NaiveAccounting result;
  auto& diag = result.diagnostics;

  // Flatten over the windowed coverage; identical to flatten() when no window
  // is set.
  DeviceFlatTrace ft;
  for (const auto& c : coverage_of(trace, options, diag)) {
    auto& ticks = ft[c.event->device];
    for (std::int64_t t = c.begin; t < c.end; ++t) ++ticks[t][c.event->op];
  }

  for (const auto& [device, ticks] : ft) {
    const auto* samples = power.find(device);
    if (samples == nullptr) {
      diag.uncovered_ticks += ticks.size();
      continue;
    }
    double& device_total = result.device_energy[device];
    for (const auto& [tick, ops] : ticks) {
      bool pre_sample = false;
      const auto& sample = (*samples)[align_index(tick, *samples, pre_sample)];
      if (pre_sample) ++diag.pre_sample_ticks;
      const double watts = sample.effective_watts();
      device_total += watts * options.tick_len.seconds();
      auto& slot = result.ticks[tick];
      for (const auto& [op, energy] :
           build_tick_footprint(ops, watts, options.tick_len)) {
        slot[op] += energy;
      }
    }
  }
  return result;
}

EnergyFootprint aggregate(const TickFootprint& ticks) {
  EnergyFootprint out;
  for (const auto& [tick, footprint] : ticks) {
    for (const auto& [op, energy] : footprint) out[op] += energy;
  }
  return out;
}

namespace {

struct Boundary {
  std::int64_t at;
  std::size_t op;  // index into the per-device name table
  int delta;       // +1 start, -1 end
};

// Sweeps one device. Within each span between consecutive boundaries (event
// starts, event ends, sample timestamps) the active multiset and the aligned
// sample are fixed, so the span is charged in one step.
void sweep_device(const std::vector<const Coverage*>& coverage,
                  const std::vector<PowerSample>* samples,
                  const AccountingOptions& options, Accounting& result) {
  std::vector<Qtn> names;
  std::map<Qtn, std::size_t> name_index;
  std::vector<Boundary> boundaries;
  boundaries.reserve(coverage.size() * 2);
  for (const auto* c : coverage) {
    auto [it, inserted] = name_index.try_emplace(c->event->op, names.size());
    if (inserted) names.push_back(c->event->op);
    boundaries.push_back({c->begin, it->second, +1});
    boundaries.push_back({c->end, it->second, -1});
  }
  std::sort(boundaries.begin(), boundaries.end(),
            [](const Boundary& a, const Boundary& b) { return a.at < b.at; });

  std::vector<std::int64_t> points;
  points.reserve(boundaries.size() + (samples ? samples->size() : 0));
  for (const auto& b : boundaries) points.push_back(b.at);
  if (samples != nullptr) {
    for (const auto& s : *samples) points.push_back(s.ts.micros);
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  const double tick_seconds = options.tick_len.seconds();
  std::vector<double> energy(names.size(), 0.0);
  std::vector<double> active(names.size(), 0.0);
  std::vector<bool> touched(names.size(), false);
  std::map<std::size_t, std::int64_t> live;  // name index -> occurrences
  std::int64_t occurrences = 0;
  std::size_t next_boundary = 0;
  std::size_t sample = 0;
  double device_total = 0.0;

  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const std::int64_t begin = points[i];
    const std::int64_t end = points[i + 1];
    while (next_boundary < boundaries.size() &&
           boundaries[next_boundary].at == begin) {
      const auto& b = boundaries[next_boundary++];
      auto& count = live[b.op];
      count += b.delta;
      occurrences += b.delta;
      if (count == 0) live.erase(b.op);
    }
    if (occurrences == 0) continue;
    const auto len = static_cast<std::uint64_t>(end - begin);
    if (samples == nullptr) {
      result.diagnostics.uncovered_ticks += len;
      continue;
    }
    while (sample + 1 < samples->size() &&
           (*samples)[sample + 1].ts.micros <= begin) {
      ++sample;
    }
    if ((*samples)[0].ts.micros > begin) {
      result.diagnostics.pre_sample_ticks += len;
    }
    const double span_energy = (*samples)[sample].effective_watts() *
                               static_cast<double>(len) * tick_seconds;
    device_total += span_energy;
    const double per_occurrence =
        span_energy / static_cast<double>(occurrences);
    const double span_seconds = static_cast<double>(len) * tick_seconds;
    for (const auto& [op, count] : live) {
      energy[op] += per_occurrence * static_cast<double>(count);
      active[op] += span_seconds * static_cast<double>(count);
      touched[op] = true;
    }
  }

  if (samples == nullptr) return;
  result.device_energy[coverage.front()->event->device] += device_total;
  for (std::size_t op = 0; op < names.size(); ++op) {
    if (!touched[op]) continue;
    result.tef[names[op]] += energy[op];
    result.active_seconds[names[op]] += active[op];
  }
}

}  // namespace

Accounting gen_footprint_optimized(const EventTrace& trace,
                                   const DevicePowerTrace& power,
                                   const AccountingOptions& options) {
  Accounting result;
  const auto coverage = coverage_of(trace, options, result.diagnostics);
  std::map<DeviceId, std::vector<const Coverage*>> by_device;
  for (const auto& c : coverage) by_device[c.event->device].push_back(&c);
  for (const auto& [device, list] : by_device) {
    sweep_device(list, power.find(device), options, result);
  }
  return result;
}

PassSplit split_passes(const EnergyFootprint& tef,
                       const std::string& backward_prefix) {
  PassSplit split;
  for (const auto& [name, energy] : tef) {
    const bool backward =
        !name.path().empty() && name.path().front() == backward_prefix;
    (backward ? split.backward : split.forward).emplace(name, energy);
  }
  return split;
}

double total(const EnergyFootprint& f) {
  return std::accumulate(
      f.begin(), f.end(), 0.0,
      [](double acc, const auto& kv) { return acc + kv.second; });
}

}  // namespace tenergy
