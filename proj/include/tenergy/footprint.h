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

#ifndef TENERGY_FOOTPRINT_H_
#define TENERGY_FOOTPRINT_H_

// Views derived from a tensor energy footprint: layer summarization,
// energy distribution trees, power footprints, and rankings.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tenergy/accountant.h"
#include "tenergy/trace_model.h"

namespace tenergy {

// Segment substituted for every layer that matches the summarization pattern.
inline constexpr std::string_view kSummarizedLayer = "transformer";
inline constexpr std::string_view kDefaultLayerPattern = "layer_[0-9]+";

// Rewrites every composite-layer segment that fully matches `pattern` (an
// ECMAScript regex) to "transformer" and sums the entries that collide.
// Throws PreconditionError on an invalid pattern.
EnergyFootprint summarize(const EnergyFootprint& tef,
                          const std::string& pattern =
                              std::string(kDefaultLayerPattern));

enum class EddNodeKind { kComposite, kTensor };

struct DataflowEdge {
  std::string from;
  std::string to;
};

struct EddNode {
  std::string name;
  EddNodeKind kind = EddNodeKind::kComposite;
  double energy = 0.0;
  // energy / parent energy; 0 when the parent has no energy.
  double share = 0.0;
  std::vector<EddNode> children;  // sorted by name
  std::vector<DataflowEdge> dataflow;  // among `children`
};

// One dataflow edge from a topology sidecar. `parent` is the shorthand path
// of the enclosing layer, or empty for the top level.
struct TopologyEdge {
  std::string parent;
  std::string from;
  std::string to;
};

// The program root is a synthetic composite named "program" whose children
// are the outermost layers and tensors.
struct Edd {
  EddNode root;
  // Topology edges whose parent or endpoints are not in the tree.
  std::size_t dropped_edges = 0;
};

inline constexpr std::string_view kEddRootName = "program";

// Throws StructuralError when a name is both a tensor and a composite layer.
Edd to_edd(const EnergyFootprint& tef,
           const std::vector<TopologyEdge>& topology = {});

struct PowerEntry {
  double watts = 0.0;
  double active_seconds = 0.0;
  double joules = 0.0;
};

using PowerFootprint = std::map<Qtn, PowerEntry>;

// Time-weighted mean power per summarized name: attributed energy divided by
// the time the name was active (once per concurrent occurrence). Names with
// zero active time are omitted.
PowerFootprint compute_stpf(const EventTrace& trace,
                            const DevicePowerTrace& power,
                            const AccountingOptions& options = {},
                            const std::string& pattern =
                                std::string(kDefaultLayerPattern));

// Projects a power footprint onto its watts column.
EnergyFootprint watts_of(const PowerFootprint& stpf);

struct RankedEntry {
  Qtn key;
  double value = 0.0;
  // Sample standard deviation across runs; 0 for a single run.
  double dispersion = 0.0;
};

// Entries ranked by descending mean value across `runs` (a name missing from
// a run counts as 0), ties broken by name. Throws PreconditionError when
// k == 0 or `runs` is empty.
std::vector<RankedEntry> top_k(const std::vector<EnergyFootprint>& runs,
                               std::size_t k);
std::vector<RankedEntry> top_k(const EnergyFootprint& f, std::size_t k);

}  // namespace tenergy

#endif  // TENERGY_FOOTPRINT_H_
