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

#include "tenergy/io.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tenergy/errors.h"

namespace tenergy::io {

namespace {

using nlohmann::json;

std::string where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

std::string quote(const std::string& s) { return json(s).dump(); }

// Splits on '\n'. A single trailing newline does not start a new line.
std::vector<std::string> split_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), last, out);
  return !s.empty() && ec == std::errc() && ptr == last;
}

bool parse_double(std::string_view s, double& out) {
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), last, out);
  return !s.empty() && ec == std::errc() && ptr == last && std::isfinite(out);
}

bool has_reserved_segment(const Qtn& q) {
  if (q.tensor() == kSummarizedLayer) return true;
  for (const auto& s : q.path()) {
    if (s == kSummarizedLayer) return true;
  }
  return false;
}

// Runs `parse` over each non-empty line, applying the strict/lenient policy.
template <typename Fn>
void for_each_record(const std::vector<std::string>& lines,
                     const std::string& source, const ReadOptions& options,
                     ReadReport* report, std::size_t first_line, Fn&& parse) {
  ReadReport local;
  ReadReport& r = report ? *report : local;
  for (std::size_t i = first_line; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    try {
      if (lines[i].empty()) {
        throw ParseError(where(source, line_no) + "empty line", line_no);
      }
      parse(lines[i], line_no);
      ++r.records;
    } catch (const ParseError& e) {
      if (!options.lenient) throw;
      ++r.skipped;
      r.problems.push_back(e.what());
    }
  }
}

TensorEvent parse_event_line(const std::string& text, const std::string& src,
                             std::size_t line) {
  const std::string at = where(src, line);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(at + "malformed JSON (" + e.what() + ")", line);
  }
  if (!j.is_object()) throw ParseError(at + "record is not an object", line);
  for (const auto& [key, value] : j.items()) {
    if (key != "ts" && key != "dur" && key != "device" && key != "op") {
      throw ParseError(at + "unknown field '" + key + "'", line);
    }
  }
  for (const char* key : {"ts", "dur", "device", "op"}) {
    if (!j.contains(key)) {
      throw ParseError(at + "missing field '" + key + "'", line);
    }
  }
  if (!j["ts"].is_number_integer() || !j["dur"].is_number_integer()) {
    throw ParseError(at + "ts and dur must be integers", line);
  }
  if (!j["device"].is_string() || !j["op"].is_string()) {
    throw ParseError(at + "device and op must be strings", line);
  }
  const auto ts = j["ts"].get<std::int64_t>();
  const auto dur = j["dur"].get<std::int64_t>();
  if (ts < 0) throw ParseError(at + "ts must be >= 0", line);
  if (dur < 1) throw ParseError(at + "dur must be >= 1", line);
  if (ts > INT64_MAX / 2 || dur > INT64_MAX / 2) {
    throw ParseError(at + "ts or dur out of range", line);
  }
  try {
    const DeviceId device = DeviceId::Parse(j["device"].get<std::string>());
    Qtn op = parse_qtn(j["op"].get<std::string>());
    if (has_reserved_segment(op)) {
      throw ParseError("op '" + op.shorthand() + "' uses the reserved name '" +
                       std::string(kSummarizedLayer) + "'");
    }
    return TensorEvent{Timestamp{ts}, Duration{dur}, device, std::move(op)};
  } catch (const ParseError& e) {
    throw ParseError(at + e.what(), line);
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  return in;
}

void render_edd_json(const EddNode& node, int indent, std::ostringstream& out) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  const std::string inner = pad + "  ";
  out << pad << "{\n";
  out << inner << "\"name\": " << quote(node.name) << ",\n";
  out << inner << "\"kind\": \""
      << (node.kind == EddNodeKind::kComposite ? "composite" : "tensor")
      << "\",\n";
  out << inner << "\"energy\": " << format_real(node.energy) << ",\n";
  out << inner << "\"share\": " << format_real(node.share) << ",\n";
  if (!node.dataflow.empty()) {
    out << inner << "\"dataflow\": [";
    for (std::size_t i = 0; i < node.dataflow.size(); ++i) {
      out << (i ? ", " : "") << "{\"from\": " << quote(node.dataflow[i].from)
          << ", \"to\": " << quote(node.dataflow[i].to) << "}";
    }
    out << "],\n";
  }
  out << inner << "\"children\": [";
  if (node.children.empty()) {
    out << "]\n";
  } else {
    out << "\n";
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      render_edd_json(node.children[i], indent + 4, out);
      out << (i + 1 < node.children.size() ? ",\n" : "\n");
    }
    out << inner << "]\n";
  }
  out << pad << "}";
}

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

void render_edd_dot(const EddNode& parent, const std::string& parent_id,
                    int& next_id, std::ostringstream& nodes,
                    std::ostringstream& edges) {
  std::map<std::string, std::string> ids;
  for (const auto& child : parent.children) {
    const std::string id = "n" + std::to_string(next_id++);
    ids[child.name] = id;
    nodes << "  " << id << " [label=\"" << dot_escape(child.name) << "\\n"
          << format_real(child.energy) << " J\\n"
          << format_real(child.share * 100.0) << "%\"";
    if (child.kind == EddNodeKind::kComposite) {
      nodes << ", shape=box, style=rounded";
    } else {
      nodes << ", shape=ellipse";
    }
    nodes << "];\n";
    if (!parent_id.empty()) edges << "  " << parent_id << " -> " << id << ";\n";
    render_edd_dot(child, id, next_id, nodes, edges);
  }
  for (const auto& flow : parent.dataflow) {
    edges << "  " << ids.at(flow.from) << " -> " << ids.at(flow.to)
          << " [style=dashed];\n";
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_row(const std::string& row,
                                       const std::string& src,
                                       std::size_t line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < row.size(); ++i) {
    const char c = row[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < row.size() && row[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted) throw ParseError(where(src, line) + "unterminated quote", line);
  fields.push_back(std::move(field));
  return fields;
}

std::string cell_value(const ComparisonResult& r) {
  return r.degenerate ? std::string() : format_real(r.value);
}

}  // namespace

Format parse_format(const std::string& name) {
  if (name == "json") return Format::kJson;
  if (name == "dot") return Format::kDot;
  if (name == "csv") return Format::kCsv;
  throw ParseError("unknown output format '" + name + "'");
}

std::string format_real(double v) {
  if (!std::isfinite(v)) {
    throw PreconditionError("cannot render a non-finite value");
  }
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string read_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw ParseError("failed writing '" + path.string() + "'");
}

EventTrace read_events(std::istream& in, const std::string& source,
                       const ReadOptions& options, ReadReport* report) {
  EventTrace trace;
  for_each_record(split_lines(in), source, options, report, 0,
                  [&](const std::string& text, std::size_t line) {
                    trace.push_back(parse_event_line(text, source, line));
                  });
  return trace;
}

EventTrace read_events(const std::filesystem::path& path,
                       const ReadOptions& options, ReadReport* report) {
  auto in = open_input(path);
  return read_events(in, path.string(), options, report);
}

std::string render_events(const EventTrace& trace) {
  std::ostringstream out;
  for (const auto& e : trace) {
    out << "{\"ts\":" << e.ts.micros << ",\"dur\":" << e.dur.micros
        << ",\"device\":" << quote(e.device.label())
        << ",\"op\":" << quote(e.op.shorthand()) << "}\n";
  }
  return out.str();
}

void write_events(const EventTrace& trace, const std::filesystem::path& path) {
  write_file(path, render_events(trace));
}

DevicePowerTrace read_power(std::istream& in, const std::string& source,
                            const ReadOptions& options, ReadReport* report) {
  const auto lines = split_lines(in);
  if (lines.empty()) throw ParseError(where(source, 1) + "missing header", 1);
  bool with_fraction = false;
  if (lines[0] == "device,ts,watts,fraction") {
    with_fraction = true;
  } else if (lines[0] != "device,ts,watts") {
    throw ParseError(where(source, 1) +
                         "header must be 'device,ts,watts' or "
                         "'device,ts,watts,fraction'",
                     1);
  }
  std::map<DeviceId, std::vector<PowerSample>> samples;
  for_each_record(
      lines, source, options, report, 1,
      [&](const std::string& text, std::size_t line) {
        const std::string at = where(source, line);
        const auto fields = split_csv_row(text, source, line);
        const std::size_t expected = with_fraction ? 4 : 3;
        if (fields.size() != expected) {
          throw ParseError(at + "expected " + std::to_string(expected) +
                               " fields, got " + std::to_string(fields.size()),
                           line);
        }
        DeviceId device;
        try {
          device = DeviceId::Parse(fields[0]);
        } catch (const ParseError& e) {
          throw ParseError(at + e.what(), line);
        }
        PowerSample s;
        if (!parse_int(fields[1], s.ts.micros) || s.ts.micros < 0) {
          throw ParseError(at + "ts must be a non-negative integer", line);
        }
        if (!parse_double(fields[2], s.watts) || s.watts < 0.0) {
          throw ParseError(at + "watts must be a non-negative number", line);
        }
        if (with_fraction &&
            (!parse_double(fields[3], s.fraction) || s.fraction < 0.0 ||
             s.fraction > 1.0)) {
          throw ParseError(at + "fraction must be within [0, 1]", line);
        }
        auto& list = samples[device];
        if (!list.empty() && list.back().ts >= s.ts) {
          throw ParseError(at + (list.back().ts == s.ts ? "duplicate"
                                                        : "non-increasing") +
                               " timestamp " + std::to_string(s.ts.micros) +
                               " for " + device.label(),
                           line);
        }
        list.push_back(s);
      });
  return DevicePowerTrace(std::move(samples));
}

DevicePowerTrace read_power(const std::filesystem::path& path,
                            const ReadOptions& options, ReadReport* report) {
  auto in = open_input(path);
  return read_power(in, path.string(), options, report);
}

std::string render_power(const DevicePowerTrace& power) {
  bool with_fraction = false;
  for (const auto& [device, samples] : power.devices()) {
    for (const auto& s : samples) with_fraction |= s.fraction != 1.0;
  }
  std::ostringstream out;
  out << (with_fraction ? "device,ts,watts,fraction\n" : "device,ts,watts\n");
  for (const auto& [device, samples] : power.devices()) {
    for (const auto& s : samples) {
      out << device.label() << ',' << s.ts.micros << ','
          << format_real(s.watts);
      if (with_fraction) out << ',' << format_real(s.fraction);
      out << '\n';
    }
  }
  return out.str();
}

void write_power(const DevicePowerTrace& power,
                 const std::filesystem::path& path) {
  write_file(path, render_power(power));
}

EnergyFootprint parse_footprint(const std::string& text,
                                const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ": malformed JSON (" + e.what() + ")");
  }
  if (!j.is_object()) {
    throw ParseError(source + ": footprint must be a JSON object");
  }
  EnergyFootprint f;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) {
      throw ParseError(source + ": value of '" + key + "' is not a number");
    }
    const double v = value.get<double>();
    if (!std::isfinite(v) || v < 0.0) {
      throw ParseError(source + ": value of '" + key +
                       "' must be finite and non-negative");
    }
    try {
      f.emplace(parse_qtn(key), v);
    } catch (const ParseError& e) {
      throw ParseError(source + ": " + e.what());
    }
  }
  return f;
}

EnergyFootprint read_footprint(const std::filesystem::path& path) {
  return parse_footprint(read_file(path), path.string());
}

std::string render_footprint(const EnergyFootprint& f, Format format) {
  std::ostringstream out;
  switch (format) {
    case Format::kJson: {
      if (f.empty()) return "{}\n";
      out << "{\n";
      std::size_t i = 0;
      for (const auto& [name, v] : f) {
        out << "  " << quote(name.shorthand()) << ": " << format_real(v)
            << (++i < f.size() ? ",\n" : "\n");
      }
      out << "}\n";
      return out.str();
    }
    case Format::kCsv:
      out << "name,value\n";
      for (const auto& [name, v] : f) {
        out << csv_field(name.shorthand()) << ',' << format_real(v) << '\n';
      }
      return out.str();
    case Format::kDot:
      break;
  }
  throw PreconditionError("footprints cannot be written as DOT");
}

void write_tef(const EnergyFootprint& tef, const std::filesystem::path& path,
               Format format) {
  write_file(path, render_footprint(tef, format));
}

void write_stef(const EnergyFootprint& stef, const std::filesystem::path& path,
                Format format) {
  write_file(path, render_footprint(stef, format));
}

std::string render_stpf_json(const PowerFootprint& stpf) {
  if (stpf.empty()) return "{}\n";
  std::ostringstream out;
  out << "{\n";
  std::size_t i = 0;
  for (const auto& [name, e] : stpf) {
    out << "  " << quote(name.shorthand()) << ": {\"watts\": "
        << format_real(e.watts)
        << ", \"active_s\": " << format_real(e.active_seconds)
        << ", \"joules\": " << format_real(e.joules) << "}"
        << (++i < stpf.size() ? ",\n" : "\n");
  }
  out << "}\n";
  return out.str();
}

std::string render_edd(const Edd& edd, Format format) {
  std::ostringstream out;
  switch (format) {
    case Format::kJson:
      render_edd_json(edd.root, 0, out);
      out << "\n";
      return out.str();
    case Format::kDot: {
      std::ostringstream nodes, edges;
      int next_id = 0;
      render_edd_dot(edd.root, "", next_id, nodes, edges);
      out << "digraph edd {\n"
          << "  node [fontname=\"Helvetica\"];\n"
          << nodes.str() << edges.str() << "}\n";
      return out.str();
    }
    case Format::kCsv:
      break;
  }
  throw PreconditionError("diagrams can only be written as JSON or DOT");
}

void write_edd(const Edd& edd, const std::filesystem::path& path,
               Format format) {
  write_file(path, render_edd(edd, format));
}

namespace {

EddNode edd_from_json(const json& j, const std::string& source) {
  const auto fail = [&](const std::string& why) -> EddNode {
    throw ParseError(source + ": " + why);
  };
  if (!j.is_object()) return fail("diagram node is not an object");
  for (const char* key : {"name", "kind", "energy", "share", "children"}) {
    if (!j.contains(key)) {
      return fail(std::string("missing field '") + key + "'");
    }
  }
  EddNode node;
  node.name = j["name"].get<std::string>();
  const auto kind = j["kind"].get<std::string>();
  if (kind == "composite") {
    node.kind = EddNodeKind::kComposite;
  } else if (kind == "tensor") {
    node.kind = EddNodeKind::kTensor;
  } else {
    return fail("unknown node kind '" + kind + "'");
  }
  node.energy = j["energy"].get<double>();
  node.share = j["share"].get<double>();
  for (const auto& child : j["children"]) {
    node.children.push_back(edd_from_json(child, source));
  }
  if (j.contains("dataflow")) {
    for (const auto& e : j["dataflow"]) {
      node.dataflow.push_back(
          {e.at("from").get<std::string>(), e.at("to").get<std::string>()});
    }
  }
  return node;
}

}  // namespace

EddNode parse_edd_json(const std::string& text, const std::string& source) {
  try {
    return edd_from_json(json::parse(text), source);
  } catch (const json::exception& e) {
    throw ParseError(source + ": " + e.what());
  }
}

std::vector<TopologyEdge> read_topology(std::istream& in,
                                        const std::string& source) {
  std::vector<TopologyEdge> edges;
  for_each_record(
      split_lines(in), source, {}, nullptr, 0,
      [&](const std::string& text, std::size_t line) {
        const std::string at = where(source, line);
        json j;
        try {
          j = json::parse(text);
        } catch (const json::parse_error& e) {
          throw ParseError(at + "malformed JSON (" + e.what() + ")", line);
        }
        if (!j.is_object() || j.size() != 3) {
          throw ParseError(at + "edge must have exactly parent, from, to",
                           line);
        }
        for (const char* key : {"parent", "from", "to"}) {
          if (!j.contains(key) || !j[key].is_string()) {
            throw ParseError(at + "field '" + key + "' must be a string",
                             line);
          }
        }
        edges.push_back({j["parent"].get<std::string>(),
                         j["from"].get<std::string>(),
                         j["to"].get<std::string>()});
      });
  return edges;
}

std::vector<TopologyEdge> read_topology(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_topology(in, path.string());
}

std::string render_matrix(const SimilarityMatrix& m, Format format) {
  std::ostringstream out;
  switch (format) {
    case Format::kCsv:
      for (const auto& label : m.labels) out << ',' << csv_field(label);
      out << '\n';
      for (std::size_t i = 0; i < m.labels.size(); ++i) {
        out << csv_field(m.labels[i]);
        for (const auto& cell : m.cells[i]) out << ',' << cell_value(cell);
        out << '\n';
      }
      return out.str();
    case Format::kJson:
      out << "{\n  \"metric\": \"" << metric_name(m.metric)
          << "\",\n  \"labels\": [";
      for (std::size_t i = 0; i < m.labels.size(); ++i) {
        out << (i ? ", " : "") << quote(m.labels[i]);
      }
      out << "],\n  \"cells\": [\n";
      for (std::size_t i = 0; i < m.cells.size(); ++i) {
        out << "    [";
        for (std::size_t j = 0; j < m.cells[i].size(); ++j) {
          const auto& c = m.cells[i][j];
          out << (j ? ", " : "")
              << (c.degenerate ? "null" : format_real(c.value));
        }
        out << (i + 1 < m.cells.size() ? "],\n" : "]\n");
      }
      out << "  ]\n}\n";
      return out.str();
    case Format::kDot:
      break;
  }
  throw PreconditionError("matrices can only be written as CSV or JSON");
}

void write_matrix(const SimilarityMatrix& m, const std::filesystem::path& path,
                  Format format) {
  write_file(path, render_matrix(m, format));
}

SimilarityMatrix parse_matrix_csv(const std::string& text, Metric metric,
                                  const std::string& source) {
  std::istringstream in(text);
  const auto lines = split_lines(in);
  if (lines.empty()) throw ParseError(where(source, 1) + "empty matrix", 1);
  SimilarityMatrix m;
  m.metric = metric;
  auto header = split_csv_row(lines[0], source, 1);
  if (header.empty() || !header[0].empty()) {
    throw ParseError(where(source, 1) + "header must start with an empty cell",
                     1);
  }
  m.labels.assign(header.begin() + 1, header.end());
  const std::size_t n = m.labels.size();
  if (lines.size() != n + 1) {
    throw ParseError(where(source, lines.size()) + "expected " +
                         std::to_string(n) + " rows",
                     lines.size());
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t line = i + 2;
    const auto row = split_csv_row(lines[i + 1], source, line);
    if (row.size() != n + 1 || row[0] != m.labels[i]) {
      throw ParseError(where(source, line) + "row does not match header",
                       line);
    }
    std::vector<ComparisonResult> cells;
    for (std::size_t j = 1; j <= n; ++j) {
      ComparisonResult c{metric, 0.0, 0, false};
      if (row[j].empty()) {
        c.degenerate = true;
      } else if (!parse_double(row[j], c.value)) {
        throw ParseError(where(source, line) + "bad cell '" + row[j] + "'",
                         line);
      }
      cells.push_back(c);
    }
    m.cells.push_back(std::move(cells));
  }
  return m;
}

std::string render_comparison_json(const ComparisonResult& r) {
  std::ostringstream out;
  out << "{\"metric\": \"" << metric_name(r.metric) << "\", \"value\": "
      << (r.degenerate ? "null" : format_real(r.value))
      << ", \"n_keys\": " << r.n_keys
      << ", \"degenerate\": " << (r.degenerate ? "true" : "false") << "}\n";
  return out.str();
}

std::string render_sparsing_csv(const std::vector<SparsingPoint>& points) {
  std::ostringstream out;
  out << "period_us,pcc\n";
  for (const auto& p : points) {
    out << p.period.micros << ',' << cell_value(p.similarity) << '\n';
  }
  return out.str();
}

std::string render_widening_csv(const std::vector<WideningPoint>& points) {
  std::ostringstream out;
  out << "runs,pcc\n";
  for (const auto& p : points) {
    out << p.runs << ',' << cell_value(p.similarity) << '\n';
  }
  return out.str();
}

std::string render_ranking_csv(const std::vector<RankedEntry>& ranking) {
  std::ostringstream out;
  out << "rank,name,value,dispersion\n";
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    out << i + 1 << ',' << csv_field(ranking[i].key.shorthand()) << ','
        << format_real(ranking[i].value) << ','
        << format_real(ranking[i].dispersion) << '\n';
  }
  return out.str();
}

}  // namespace tenergy::io
