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

#ifndef TENERGY_SYNTH_H_
#define TENERGY_SYNTH_H_

// Seeded generator of event/power trace pairs with BERT-like tensor names
// ("<root>/encoder/layer_<i>/block_<j>/<tensor>") and the footprint the
// reference accountant assigns to them.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "tenergy/accountant.h"
#include "tenergy/trace_model.h"

namespace tenergy {

struct ConstantPower {
  double watts = 1.0;
};

// `low_watts` before `switch_us`, `high_watts` from then on.
struct TwoPhasePower {
  double low_watts = 1.0;
  double high_watts = 2.0;
  std::int64_t switch_us = 0;
};

// watts0 + slope * t, t in seconds, floored at 0.
struct RampPower {
  double watts0 = 1.0;
  double slope_watts_per_s = 0.0;
};

using PowerModel = std::variant<ConstantPower, TwoPhasePower, RampPower>;

struct SynthSpec {
  std::uint64_t seed = 0;
  std::vector<DeviceId> devices{DeviceId(DeviceKind::kCpu, 0)};
  std::string root = "bert";
  int layers = 2;
  int tensors_per_layer = 2;
  // Terminal names emitted inside every block.
  std::vector<std::string> tensor_names{"MatMul"};
  // Event durations are drawn uniformly from [min, max] microseconds.
  std::int64_t min_duration_us = 1;
  std::int64_t max_duration_us = 10;
  // Idle gap after each event, drawn uniformly from [0, max].
  std::int64_t max_gap_us = 0;
  // Parallel lanes per device; events are dealt round-robin onto lanes.
  int concurrency = 1;
  PowerModel power = ConstantPower{};
  std::int64_t sampling_period_us = 4000;
  // First sample time; events before it exercise pre-sample alignment.
  std::int64_t power_start_us = 0;
  double fraction = 1.0;
  // Also emit a mirrored "gradients/..." backward pass.
  bool backward = false;
};

struct SynthOutput {
  EventTrace events;
  DevicePowerTrace power;
  // Reference footprint: aggregate(gen_footprint_naive(events, power)).
  EnergyFootprint expected;
};

// Throws ParseError naming the first invalid field.
void validate(const SynthSpec& spec);

// Reads a spec from a JSON object with the same field names as SynthSpec
// (devices as labels; power as {"model": "constant"|"two_phase"|"ramp", ...}).
// Unknown or ill-typed fields raise ParseError naming the field.
SynthSpec parse_synth_spec(const std::string& json_text);

SynthOutput generate(const SynthSpec& spec,
                     const AccountingOptions& options = {});

}  // namespace tenergy

#endif  // TENERGY_SYNTH_H_
