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

#include <algorithm>
#include <cmath>
#include <map>
#include <regex>
#include <utility>

#include "tenergy/errors.h"

namespace tenergy {

namespace {

std::regex compile_pattern(const std::string& pattern) {
  try {
    return std::regex(pattern, std::regex::ECMAScript);
  } catch (const std::regex_error& e) {
    throw PreconditionError("invalid layer pattern '" + pattern +
                            "': " + e.what());
  }
}

Qtn summarize_name(const Qtn& q, const std::regex& re) {
  std::vector<std::string> path = q.path();
  bool changed = false;
  for (auto& segment : path) {
    if (std::regex_match(segment, re)) {
      segment = std::string(kSummarizedLayer);
      changed = true;
    }
  }
  return changed ? Qtn(std::move(path), q.tensor()) : q;
}

// Mutable build tree keyed by child name.
struct BuildNode {
  EddNodeKind kind = EddNodeKind::kComposite;
  double energy = 0.0;
  std::map<std::string, BuildNode> children;
};

std::string join(const std::vector<std::string>& parts, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) out += '/';
    out += parts[i];
  }
  return out;
}

EddNode freeze(const std::string& name, const BuildNode& node) {
  EddNode out;
  out.name = name;
  out.kind = node.kind;
  if (node.kind == EddNodeKind::kTensor) {
    out.energy = node.energy;
    return out;
  }
  out.children.reserve(node.children.size());
  for (const auto& [child_name, child] : node.children) {
    out.children.push_back(freeze(child_name, child));
    out.energy += out.children.back().energy;
  }
  for (auto& child : out.children) {
    child.share = out.energy > 0.0 ? child.energy / out.energy : 0.0;
  }
  return out;
}

EddNode* find_composite(EddNode& root, const std::string& path) {
  EddNode* node = &root;
  if (path.empty()) return node;
  std::size_t start = 0;
  while (true) {
    const auto slash = path.find('/', start);
    const std::string segment =
        path.substr(start, slash == std::string::npos ? std::string::npos
                                                       : slash - start);
    auto it = std::find_if(
        node->children.begin(), node->children.end(),
        [&](const EddNode& c) { return c.name == segment; });
    if (it == node->children.end() || it->kind != EddNodeKind::kComposite) {
      return nullptr;
    }
    node = &*it;
    if (slash == std::string::npos) return node;
    start = slash + 1;
  }
}

}  // namespace

EnergyFootprint summarize(const EnergyFootprint& tef,
                          const std::string& pattern) {
  const std::regex re = compile_pattern(pattern);
  EnergyFootprint out;
  for (const auto& [name, energy] : tef) {
    out[summarize_name(name, re)] += energy;
  }
  return out;
}

Edd to_edd(const EnergyFootprint& tef,
           const std::vector<TopologyEdge>& topology) {
  BuildNode root;
  for (const auto& [name, energy] : tef) {
    const auto segments = name.segments();
    BuildNode* node = &root;
    for (std::size_t i = 0; i < segments.size(); ++i) {
      const bool leaf = i + 1 == segments.size();
      auto [it, inserted] = node->children.try_emplace(segments[i]);
      BuildNode& child = it->second;
      if (inserted) {
        child.kind = leaf ? EddNodeKind::kTensor : EddNodeKind::kComposite;
      } else if (leaf || child.kind == EddNodeKind::kTensor) {
        throw StructuralError("'" + join(segments, i + 1) +
                              "' is both a tensor and a composite layer");
      }
      if (leaf) child.energy = energy;
      node = &child;
    }
  }

  Edd edd;
  edd.root = freeze(std::string(kEddRootName), root);
  edd.root.share = 1.0;
  for (const auto& edge : topology) {
    EddNode* parent = find_composite(edd.root, edge.parent);
    const auto has_child = [&](const std::string& n) {
      return std::any_of(parent->children.begin(), parent->children.end(),
                         [&](const EddNode& c) { return c.name == n; });
    };
    if (parent == nullptr || !has_child(edge.from) || !has_child(edge.to)) {
      ++edd.dropped_edges;
      continue;
    }
    parent->dataflow.push_back({edge.from, edge.to});
  }
  return edd;
}

PowerFootprint compute_stpf(const EventTrace& trace,
                            const DevicePowerTrace& power,
                            const AccountingOptions& options,
                            const std::string& pattern) {
  const Accounting acc = gen_footprint_optimized(trace, power, options);
  const EnergyFootprint energy = summarize(acc.tef, pattern);
  const EnergyFootprint time = summarize(acc.active_seconds, pattern);
  PowerFootprint out;
  for (const auto& [name, seconds] : time) {
    if (!(seconds > 0.0)) continue;
    const double joules = energy.at(name);
    out[name] = PowerEntry{joules / seconds, seconds, joules};
  }
  return out;
}

EnergyFootprint watts_of(const PowerFootprint& stpf) {
  EnergyFootprint out;
  for (const auto& [name, entry] : stpf) out[name] = entry.watts;
  return out;
}

std::vector<RankedEntry> top_k(const std::vector<EnergyFootprint>& runs,
                               std::size_t k) {
  if (k == 0) throw PreconditionError("top-k needs k >= 1");
  if (runs.empty()) throw PreconditionError("top-k needs at least one run");

  std::map<Qtn, std::vector<double>> values;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (const auto& [name, v] : runs[r]) {
      auto& column = values[name];
      column.resize(runs.size(), 0.0);
      column[r] = v;
    }
  }

  std::vector<RankedEntry> ranked;
  ranked.reserve(values.size());
  const double n = static_cast<double>(runs.size());
  for (auto& [name, column] : values) {
    double mean = 0.0;
    for (double v : column) mean += v;
    mean /= n;
    double dispersion = 0.0;
    if (runs.size() > 1) {
      double ss = 0.0;
      for (double v : column) ss += (v - mean) * (v - mean);
      dispersion = std::sqrt(ss / (n - 1.0));
    }
    ranked.push_back({name, mean, dispersion});
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const RankedEntry& a, const RankedEntry& b) {
              if (a.value != b.value) return a.value > b.value;
              return a.key < b.key;
            });
  if (ranked.size() > k) {
    ranked.erase(ranked.begin() + static_cast<std::ptrdiff_t>(k), ranked.end());
  }
  return ranked;
}

std::vector<RankedEntry> top_k(const EnergyFootprint& f, std::size_t k) {
  return top_k(std::vector<EnergyFootprint>{f}, k);
}

}  // namespace tenergy
