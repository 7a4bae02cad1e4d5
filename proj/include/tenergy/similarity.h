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

#ifndef TENERGY_SIMILARITY_H_
#define TENERGY_SIMILARITY_H_

// Comparison of footprints across runs and variants.
//
// Footprints are aligned on the union of their keys; a key missing from one
// side contributes 0 there.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tenergy/accountant.h"
#include "tenergy/trace_model.h"

namespace tenergy {

enum class Metric { kPcc, kMed };

std::string metric_name(Metric m);

struct ComparisonResult {
  Metric metric = Metric::kPcc;
  // Meaningless when `degenerate` is set.
  double value = 0.0;
  std::size_t n_keys = 0;
  // PCC only: one side has zero variance over the key union.
  bool degenerate = false;
};

// Pearson correlation over the key union. Throws PreconditionError when the
// union has fewer than two keys.
ComparisonResult pcc(const EnergyFootprint& a, const EnergyFootprint& b);

// Mean over the key union of a[k] - b[k]. Zero for two empty footprints.
ComparisonResult med(const EnergyFootprint& a, const EnergyFootprint& b);

ComparisonResult compare(Metric metric, const EnergyFootprint& a,
                         const EnergyFootprint& b);

struct LabeledFootprint {
  std::string label;
  EnergyFootprint footprint;
};

// cells[i][j] = metric(footprints[i], footprints[j]). For MED the row
// variant is the minuend.
struct SimilarityMatrix {
  Metric metric = Metric::kPcc;
  std::vector<std::string> labels;
  std::vector<std::vector<ComparisonResult>> cells;
};

// Throws PreconditionError with fewer than two entries.
SimilarityMatrix stability_matrix(const std::vector<LabeledFootprint>& stefs,
                                  Metric metric = Metric::kPcc);

// Keeps, per device, the latest sample of every period-aligned bin
// [k * period, (k + 1) * period).
DevicePowerTrace downsample(const DevicePowerTrace& power, Duration period);

struct SparsingPoint {
  Duration period;
  ComparisonResult similarity;
};

struct SparsingOptions {
  AccountingOptions accounting;
  std::string layer_pattern = "layer_[0-9]+";
};

// Accounting similarity under sample sparsing: for each period, the
// summarized footprint computed from the power trace downsampled to that
// period is correlated against the one computed at `base_period`.
// Throws PreconditionError on an empty period list or a period shorter than
// the base.
std::vector<SparsingPoint> asss(const EventTrace& trace,
                                const DevicePowerTrace& power,
                                const std::vector<Duration>& periods,
                                Duration base_period,
                                const SparsingOptions& options = {});

struct WideningPoint {
  std::size_t runs;
  ComparisonResult similarity;
};

// Element-wise mean over the key union.
EnergyFootprint mean_footprint(std::span<const EnergyFootprint> runs);

// Accounting similarity under sample widening: the mean of the first n runs,
// for n = 1..size, correlated against `base`.
std::vector<WideningPoint> assw(const std::vector<EnergyFootprint>& stefs,
                                const EnergyFootprint& base);

}  // namespace tenergy

#endif  // TENERGY_SIMILARITY_H_
