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

#ifndef TENERGY_IO_H_
#define TENERGY_IO_H_

// On-disk formats.
//
//   events.jsonl   {"ts":int,"dur":int,"device":str,"op":str} per line
//   power.csv      header "device,ts,watts" or "device,ts,watts,fraction"
//   tef.json       {"<name>": joules, ...}
//   edd.json       {name, kind, energy, share, children[]} recursively
//   edd.dot        Graphviz digraph; composites are rounded boxes
//   matrix.csv     labels along the first row and column
//   topology.jsonl {"parent":str,"from":str,"to":str} per line
//
// Writers are deterministic: keys are sorted, and reals are rendered with 9
// significant digits. Readers are strict by default and throw ParseError
// carrying the 1-based line of the offending record.

#include <cstddef>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "tenergy/accountant.h"
#include "tenergy/footprint.h"
#include "tenergy/similarity.h"
#include "tenergy/trace_model.h"

namespace tenergy::io {

struct ReadOptions {
  // Skip malformed records instead of failing; they are counted in the
  // report.
  bool lenient = false;
};

struct ReadReport {
  std::size_t records = 0;
  std::size_t skipped = 0;
  // "<source>:<line>: <reason>" for every skipped record.
  std::vector<std::string> problems;
};

enum class Format { kJson, kDot, kCsv };

// Throws ParseError for anything other than "json", "dot", or "csv".
Format parse_format(const std::string& name);

// "%.9g", with negative zero rendered as "0". Throws on non-finite input.
std::string format_real(double v);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

// Events.
EventTrace read_events(std::istream& in, const std::string& source,
                       const ReadOptions& options = {},
                       ReadReport* report = nullptr);
EventTrace read_events(const std::filesystem::path& path,
                       const ReadOptions& options = {},
                       ReadReport* report = nullptr);
std::string render_events(const EventTrace& trace);
void write_events(const EventTrace& trace, const std::filesystem::path& path);

// Power.
DevicePowerTrace read_power(std::istream& in, const std::string& source,
                            const ReadOptions& options = {},
                            ReadReport* report = nullptr);
DevicePowerTrace read_power(const std::filesystem::path& path,
                            const ReadOptions& options = {},
                            ReadReport* report = nullptr);
std::string render_power(const DevicePowerTrace& power);
void write_power(const DevicePowerTrace& power,
                 const std::filesystem::path& path);

// Footprints (TEF and STEF share one layout).
EnergyFootprint parse_footprint(const std::string& text,
                                const std::string& source);
EnergyFootprint read_footprint(const std::filesystem::path& path);
std::string render_footprint(const EnergyFootprint& f, Format format);
void write_tef(const EnergyFootprint& tef, const std::filesystem::path& path,
               Format format = Format::kJson);
void write_stef(const EnergyFootprint& stef, const std::filesystem::path& path,
                Format format = Format::kJson);

std::string render_stpf_json(const PowerFootprint& stpf);

// Energy distribution diagrams.
std::string render_edd(const Edd& edd, Format format);
void write_edd(const Edd& edd, const std::filesystem::path& path,
               Format format);
EddNode parse_edd_json(const std::string& text, const std::string& source);

std::vector<TopologyEdge> read_topology(std::istream& in,
                                        const std::string& source);
std::vector<TopologyEdge> read_topology(const std::filesystem::path& path);

// Comparison matrices. CSV leaves degenerate cells empty.
std::string render_matrix(const SimilarityMatrix& m, Format format);
void write_matrix(const SimilarityMatrix& m, const std::filesystem::path& path,
                  Format format = Format::kCsv);
SimilarityMatrix parse_matrix_csv(const std::string& text, Metric metric,
                                  const std::string& source);

std::string render_comparison_json(const ComparisonResult& r);
std::string render_sparsing_csv(const std::vector<SparsingPoint>& points);
std::string render_widening_csv(const std::vector<WideningPoint>& points);
std::string render_ranking_csv(const std::vector<RankedEntry>& ranking);

}  // namespace tenergy::io

#endif  // TENERGY_IO_H_
