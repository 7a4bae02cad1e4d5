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

#include "tenergy/similarity.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "tenergy/errors.h"
#include "tenergy/footprint.h"

namespace tenergy {

namespace {

// Both footprints laid out over their key union, in key order.
struct Aligned {
  std::vector<double> a;
  std::vector<double> b;
};

Aligned align(const EnergyFootprint& a, const EnergyFootprint& b) {
  Aligned out;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      out.a.push_back(ia->second);
      out.b.push_back(0.0);
      ++ia;
    } else if (ia == a.end() || ib->first < ia->first) {
      out.a.push_back(0.0);
      out.b.push_back(ib->second);
      ++ib;
    } else {
      out.a.push_back(ia->second);
      out.b.push_back(ib->second);
      ++ia;
      ++ib;
    }
  }
  return out;
}

double mean(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

}  // namespace

std::string metric_name(Metric m) { return m == Metric::kPcc ? "pcc" : "med"; }

ComparisonResult pcc(const EnergyFootprint& a, const EnergyFootprint& b) {
  const Aligned v = align(a, b);
  const std::size_t n = v.a.size();
  if (n < 2) {
    throw PreconditionError("correlation needs at least two keys, got " +
                            std::to_string(n));
  }
  const double mean_a = mean(v.a);
  const double mean_b = mean(v.b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = v.a[i] - mean_a;
    const double db = v.b[i] - mean_b;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  ComparisonResult r{Metric::kPcc, 0.0, n, false};
  if (saa == 0.0 || sbb == 0.0) {
    r.degenerate = true;
    return r;
  }
  r.value = std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
  return r;
}

ComparisonResult med(const EnergyFootprint& a, const EnergyFootprint& b) {
  const Aligned v = align(a, b);
  ComparisonResult r{Metric::kMed, 0.0, v.a.size(), false};
  if (v.a.empty()) return r;
  double sum = 0.0;
  for (std::size_t i = 0; i < v.a.size(); ++i) sum += v.a[i] - v.b[i];
  r.value = sum / static_cast<double>(v.a.size());
  return r;
}

ComparisonResult compare(Metric metric, const EnergyFootprint& a,
                         const EnergyFootprint& b) {
  return metric == Metric::kPcc ? pcc(a, b) : med(a, b);
}

SimilarityMatrix stability_matrix(const std::vector<LabeledFootprint>& stefs,
                                  Metric metric) {
  if (stefs.size() < 2) {
    throw PreconditionError("a comparison matrix needs at least two entries");
  }
  SimilarityMatrix m;
  m.metric = metric;
  const std::size_t n = stefs.size();
  m.cells.assign(n, std::vector<ComparisonResult>(n));
  for (const auto& s : stefs) m.labels.push_back(s.label);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      m.cells[i][j] = compare(metric, stefs[i].footprint, stefs[j].footprint);
    }
  }
  return m;
}

DevicePowerTrace downsample(const DevicePowerTrace& power, Duration period) {
  if (period.micros < 1) {
    throw PreconditionError("sampling period must be at least 1 us");
  }
  std::map<DeviceId, std::vector<PowerSample>> out;
  for (const auto& [device, samples] : power.devices()) {
    auto& kept = out[device];
    for (const auto& s : samples) {
      const std::int64_t bin = s.ts.micros / period.micros;
      if (!kept.empty() && kept.back().ts.micros / period.micros == bin) {
        kept.back() = s;
      } else {
        kept.push_back(s);
      }
    }
  }
  return DevicePowerTrace(std::move(out));
}

std::vector<SparsingPoint> asss(const EventTrace& trace,
                                const DevicePowerTrace& power,
                                const std::vector<Duration>& periods,
                                Duration base_period,
                                const SparsingOptions& options) {
  if (periods.empty()) {
    throw PreconditionError("sample sparsing needs at least one period");
  }
  const auto stef_at = [&](Duration period) {
    return summarize(
        gen_footprint_optimized(trace, downsample(power, period),
                                options.accounting)
            .tef,
        options.layer_pattern);
  };
  const EnergyFootprint base = stef_at(base_period);
  std::vector<SparsingPoint> out;
  out.reserve(periods.size());
  for (const auto& period : periods) {
    if (period < base_period) {
      throw PreconditionError("sampling period " +
                              std::to_string(period.micros) +
                              " us is shorter than the base period");
    }
    out.push_back({period, pcc(stef_at(period), base)});
  }
  return out;
}

namespace {

// Running mean over the key union, missing entries counting as zero. Folding
// one run at a time keeps the mean of identical runs exact.
void fold_into_mean(EnergyFootprint& mean, const EnergyFootprint& run,
                    std::size_t n) {
  const double k = static_cast<double>(n);
  for (const auto& [name, v] : run) mean.try_emplace(name, 0.0);
  for (auto& [name, m] : mean) {
    const auto it = run.find(name);
    const double x = it == run.end() ? 0.0 : it->second;
    m += (x - m) / k;
  }
}

}  // namespace

EnergyFootprint mean_footprint(std::span<const EnergyFootprint> runs) {
  EnergyFootprint out;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    fold_into_mean(out, runs[i], i + 1);
  }
  return out;
}

std::vector<WideningPoint> assw(const std::vector<EnergyFootprint>& stefs,
                                const EnergyFootprint& base) {
  if (stefs.empty()) {
    throw PreconditionError("sample widening needs at least one footprint");
  }
  std::vector<WideningPoint> out;
  out.reserve(stefs.size());
  EnergyFootprint mean;
  for (std::size_t n = 1; n <= stefs.size(); ++n) {
    fold_into_mean(mean, stefs[n - 1], n);
    out.push_back({n, pcc(mean, base)});
  }
  return out;
}

}  // namespace tenergy
