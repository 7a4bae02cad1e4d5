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

#ifndef TENERGY_TRACE_MODEL_H_
#define TENERGY_TRACE_MODEL_H_

// Domain vocabulary shared by every module: timestamps, devices, qualified
// tensor names, tensor events, and per-device power traces.
//
// All time values are integer microseconds relative to a per-trace epoch.

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace tenergy {

struct Timestamp {
  std::int64_t micros = 0;

  friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

struct Duration {
  std::int64_t micros = 0;

  friend auto operator<=>(const Duration&, const Duration&) = default;
  double seconds() const { return static_cast<double>(micros) * 1e-6; }
};

enum class DeviceKind { kCpu, kGpu, kOther };

// A power-metered device, e.g. "cpu:0" or "gpu:1".
class DeviceId {
 public:
  DeviceId() = default;
  DeviceId(DeviceKind kind, std::uint32_t index) : kind_(kind), index_(index) {}

  // Accepts "<kind>:<index>" with kind in {cpu, gpu, other}, case-insensitive.
  // Throws ParseError otherwise.
  static DeviceId Parse(std::string_view label);

  DeviceKind kind() const { return kind_; }
  std::uint32_t index() const { return index_; }
  // Normalized lowercase form.
  std::string label() const;

  friend auto operator<=>(const DeviceId&, const DeviceId&) = default;

 private:
  DeviceKind kind_ = DeviceKind::kCpu;
  std::uint32_t index_ = 0;
};

// Normalizes a device label ("GPU:01" -> "gpu:1").
std::string normalize_device_label(std::string_view label);

// Qualified tensor name: the nesting of composite layers around a tensor
// operation, written in shorthand as "bert/encoder/layer_0/MatMul".
//
// Ordering and equality follow the shorthand string, so sorted containers
// of names come out in the same order as their rendered keys.
class Qtn {
 public:
  // Throws PreconditionError when any segment is empty or contains '/'.
  Qtn(std::vector<std::string> path, std::string tensor);

  const std::vector<std::string>& path() const { return path_; }
  const std::string& tensor() const { return tensor_; }
  const std::string& shorthand() const { return shorthand_; }
  // path + tensor, in order.
  std::vector<std::string> segments() const;

  friend bool operator==(const Qtn& a, const Qtn& b) {
    return a.shorthand_ == b.shorthand_;
  }
  friend std::strong_ordering operator<=>(const Qtn& a, const Qtn& b) {
    return a.shorthand_ <=> b.shorthand_;
  }

 private:
  std::vector<std::string> path_;
  std::string tensor_;
  std::string shorthand_;
};

// Throws ParseError naming the 1-based position of the first empty segment.
Qtn parse_qtn(std::string_view shorthand);
std::string render_qtn(const Qtn& q);

struct TensorEvent {
  Timestamp ts;
  Duration dur;
  DeviceId device;
  Qtn op;
};

// Events in ingestion order.
using EventTrace = std::vector<TensorEvent>;

struct PowerSample {
  Timestamp ts;
  double watts = 0.0;
  // Share of the device's power attributable to the monitored program.
  double fraction = 1.0;

  double effective_watts() const { return watts * fraction; }
};

// Power samples per device, each list sorted by strictly increasing ts.
class DevicePowerTrace {
 public:
  DevicePowerTrace() = default;
  // Sorts each device's samples. Throws ParseError on duplicate timestamps
  // within a device and PreconditionError on negative power or a fraction
  // outside [0, 1].
  explicit DevicePowerTrace(
      std::map<DeviceId, std::vector<PowerSample>> samples);

  const std::map<DeviceId, std::vector<PowerSample>>& devices() const {
    return samples_;
  }
  // nullptr when the device has no samples.
  const std::vector<PowerSample>* find(const DeviceId& device) const;
  bool empty() const { return samples_.empty(); }
  std::size_t sample_count() const;

 private:
  std::map<DeviceId, std::vector<PowerSample>> samples_;
};

}  // namespace tenergy

#endif  // TENERGY_TRACE_MODEL_H_
