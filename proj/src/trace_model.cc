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

#include "tenergy/trace_model.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <utility>

#include "tenergy/errors.h"

namespace tenergy {

namespace {

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool valid_segment(std::string_view s) {
  return !s.empty() && s.find('/') == std::string_view::npos;
}

}  // namespace

DeviceId DeviceId::Parse(std::string_view label) {
  const auto colon = label.find(':');
  if (colon == std::string_view::npos) {
    throw ParseError("device label '" + std::string(label) +
                     "' is not of the form <kind>:<index>");
  }
  const std::string kind = to_lower(label.substr(0, colon));
  const std::string_view digits = label.substr(colon + 1);

  DeviceKind parsed_kind;
  if (kind == "cpu") {
    parsed_kind = DeviceKind::kCpu;
  } else if (kind == "gpu") {
    parsed_kind = DeviceKind::kGpu;
  } else if (kind == "other") {
    parsed_kind = DeviceKind::kOther;
  } else {
    throw ParseError("device label '" + std::string(label) +
                     "' has unknown kind '" + kind + "'");
  }

  std::uint32_t index = 0;
  const char* first = digits.data();
  const char* last = digits.data() + digits.size();
  auto [ptr, ec] = std::from_chars(first, last, index);
  if (digits.empty() || ec != std::errc() || ptr != last) {
    throw ParseError("device label '" + std::string(label) +
                     "' has invalid index");
  }
  return DeviceId(parsed_kind, index);
}

std::string DeviceId::label() const {
  std::string kind;
  switch (kind_) {
    case DeviceKind::kCpu:
      kind = "cpu";
      break;
    case DeviceKind::kGpu:
      kind = "gpu";
      break;
    case DeviceKind::kOther:
      kind = "other";
      break;
  }
  return kind + ":" + std::to_string(index_);
}

std::string normalize_device_label(std::string_view label) {
  return DeviceId::Parse(label).label();
}

Qtn::Qtn(std::vector<std::string> path, std::string tensor)
    : path_(std::move(path)), tensor_(std::move(tensor)) {
  for (const auto& segment : path_) {
    if (!valid_segment(segment)) {
      throw PreconditionError("invalid composite layer name '" + segment +
                              "'");
    }
    shorthand_ += segment;
    shorthand_ += '/';
  }
  if (!valid_segment(tensor_)) {
    throw PreconditionError("invalid tensor name '" + tensor_ + "'");
  }
  shorthand_ += tensor_;
}

std::vector<std::string> Qtn::segments() const {
  std::vector<std::string> out = path_;
  out.push_back(tensor_);
  return out;
}

Qtn parse_qtn(std::string_view shorthand) {
  if (shorthand.empty()) throw ParseError("empty tensor name");
  std::vector<std::string> segments;
  std::size_t start = 0;
  while (true) {
    const auto slash = shorthand.find('/', start);
    const auto end = slash == std::string_view::npos ? shorthand.size() : slash;
    if (end == start) {
      throw ParseError("tensor name '" + std::string(shorthand) +
                       "' has an empty segment at position " +
                       std::to_string(segments.size() + 1));
    }
    segments.emplace_back(shorthand.substr(start, end - start));
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  std::string tensor = std::move(segments.back());
  segments.pop_back();
  return Qtn(std::move(segments), std::move(tensor));
}

std::string render_qtn(const Qtn& q) { return q.shorthand(); }

DevicePowerTrace::DevicePowerTrace(
    std::map<DeviceId, std::vector<PowerSample>> samples)
    : samples_(std::move(samples)) {
  for (auto& [device, list] : samples_) {
    for (const auto& s : list) {
      if (!(s.watts >= 0.0) || !std::isfinite(s.watts)) {
        throw PreconditionError("negative or non-finite power on " +
                                device.label());
      }
      if (!(s.fraction >= 0.0 && s.fraction <= 1.0)) {
        throw PreconditionError("attribution fraction outside [0, 1] on " +
                                device.label());
      }
    }
    std::stable_sort(list.begin(), list.end(),
                     [](const PowerSample& a, const PowerSample& b) {
                       return a.ts < b.ts;
                     });
    for (std::size_t i = 1; i < list.size(); ++i) {
      if (list[i].ts == list[i - 1].ts) {
        throw ParseError("duplicate power timestamp " +
                         std::to_string(list[i].ts.micros) + " on " +
                         device.label());
      }
    }
  }
  std::erase_if(samples_, [](const auto& kv) { return kv.second.empty(); });
}

const std::vector<PowerSample>* DevicePowerTrace::find(
    const DeviceId& device) const {
  auto it = samples_.find(device);
  return it == samples_.end() ? nullptr : &it->second;
}

std::size_t DevicePowerTrace::sample_count() const {
  std::size_t n = 0;
  for (const auto& [device, list] : samples_) n += list.size();
  return n;
}

}  // namespace tenergy
