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

#include "tenergy/synth.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include <json.hpp>

#include "tenergy/errors.h"
#include "tenergy/footprint.h"

namespace tenergy {

namespace {

using nlohmann::json;

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
  throw ParseError("synth spec field '" + field + "' " + why);
}

bool valid_name(const std::string& s) {
  return !s.empty() && s.find('/') == std::string::npos &&
         s != kSummarizedLayer;
}

double watts_at(const PowerModel& model, std::int64_t ts) {
  return std::visit(
      [ts](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, ConstantPower>) {
          return m.watts;
        } else if constexpr (std::is_same_v<M, TwoPhasePower>) {
          return ts < m.switch_us ? m.low_watts : m.high_watts;
        } else {
          return std::max(
              0.0, m.watts0 + m.slope_watts_per_s *
                                  static_cast<double>(ts) * 1e-6);
        }
      },
      model);
}

std::int64_t uniform(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(rng() % span);
}

template <typename T>
T field(const json& j, const std::string& name,
        const std::string& prefix = "") {
  try {
    return j.at(name).get<T>();
  } catch (const json::exception&) {
    bad_field(prefix + name, "is missing or has the wrong type");
  }
}

}  // namespace

void validate(const SynthSpec& spec) {
  if (spec.devices.empty()) bad_field("devices", "must list at least one");
  if (std::set<DeviceId>(spec.devices.begin(), spec.devices.end()).size() !=
      spec.devices.size()) {
    bad_field("devices", "must not repeat a device");
  }
  if (!valid_name(spec.root)) bad_field("root", "is not a valid layer name");
  if (spec.layers < 1) bad_field("layers", "must be >= 1");
  if (spec.tensors_per_layer < 1) {
    bad_field("tensors_per_layer", "must be >= 1");
  }
  if (spec.tensor_names.empty()) bad_field("tensor_names", "must not be empty");
  if (std::set<std::string>(spec.tensor_names.begin(),
                            spec.tensor_names.end())
          .size() != spec.tensor_names.size()) {
    bad_field("tensor_names", "must not repeat a name");
  }
  for (const auto& n : spec.tensor_names) {
    if (!valid_name(n)) bad_field("tensor_names", "contains '" + n + "'");
  }
  if (spec.min_duration_us < 1) bad_field("min_duration_us", "must be >= 1");
  if (spec.max_duration_us < spec.min_duration_us) {
    bad_field("max_duration_us", "must be >= min_duration_us");
  }
  if (spec.max_gap_us < 0) bad_field("max_gap_us", "must be >= 0");
  if (spec.concurrency < 1) bad_field("concurrency", "must be >= 1");
  if (spec.sampling_period_us < 1) {
    bad_field("sampling_period_us", "must be >= 1");
  }
  if (spec.power_start_us < 0) bad_field("power_start_us", "must be >= 0");
  if (!(spec.fraction >= 0.0 && spec.fraction <= 1.0)) {
    bad_field("fraction", "must be within [0, 1]");
  }
  std::visit(
      [](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, ConstantPower>) {
          if (!(m.watts >= 0.0)) bad_field("power.watts", "must be >= 0");
        } else if constexpr (std::is_same_v<M, TwoPhasePower>) {
          if (!(m.low_watts >= 0.0)) {
            bad_field("power.low_watts", "must be >= 0");
          }
          if (!(m.high_watts >= 0.0)) {
            bad_field("power.high_watts", "must be >= 0");
          }
        } else {
          if (!(m.watts0 >= 0.0)) bad_field("power.watts0", "must be >= 0");
          if (!std::isfinite(m.slope_watts_per_s)) {
            bad_field("power.slope_watts_per_s", "must be finite");
          }
        }
      },
      spec.power);
}

SynthSpec parse_synth_spec(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("synth spec is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("synth spec must be a JSON object");

  SynthSpec spec;
  for (const auto& [key, value] : j.items()) {
    if (key == "seed") {
      spec.seed = field<std::uint64_t>(j, "seed");
    } else if (key == "devices") {
      spec.devices.clear();
      for (const auto& label : field<std::vector<std::string>>(j, "devices")) {
        try {
          spec.devices.push_back(DeviceId::Parse(label));
        } catch (const ParseError& e) {
          bad_field("devices", e.what());
        }
      }
    } else if (key == "root") {
      spec.root = field<std::string>(j, "root");
    } else if (key == "layers") {
      spec.layers = field<int>(j, "layers");
    } else if (key == "tensors_per_layer") {
      spec.tensors_per_layer = field<int>(j, "tensors_per_layer");
    } else if (key == "tensor_names") {
      spec.tensor_names = field<std::vector<std::string>>(j, "tensor_names");
    } else if (key == "min_duration_us") {
      spec.min_duration_us = field<std::int64_t>(j, "min_duration_us");
    } else if (key == "max_duration_us") {
      spec.max_duration_us = field<std::int64_t>(j, "max_duration_us");
    } else if (key == "max_gap_us") {
      spec.max_gap_us = field<std::int64_t>(j, "max_gap_us");
    } else if (key == "concurrency") {
      spec.concurrency = field<int>(j, "concurrency");
    } else if (key == "sampling_period_us") {
      spec.sampling_period_us = field<std::int64_t>(j, "sampling_period_us");
    } else if (key == "power_start_us") {
      spec.power_start_us = field<std::int64_t>(j, "power_start_us");
    } else if (key == "fraction") {
      spec.fraction = field<double>(j, "fraction");
    } else if (key == "backward") {
      spec.backward = field<bool>(j, "backward");
    } else if (key == "power") {
      if (!value.is_object()) bad_field("power", "must be an object");
      const auto model = field<std::string>(value, "model", "power.");
      const auto check_keys = [&](std::set<std::string> allowed) {
        allowed.insert("model");
        for (const auto& [k, v] : value.items()) {
          if (!allowed.count(k)) bad_field("power." + k, "is not recognized");
        }
      };
      if (model == "constant") {
        check_keys({"watts"});
        spec.power = ConstantPower{field<double>(value, "watts", "power.")};
      } else if (model == "two_phase") {
        check_keys({"low_watts", "high_watts", "switch_us"});
        spec.power =
            TwoPhasePower{field<double>(value, "low_watts", "power."),
                          field<double>(value, "high_watts", "power."),
                          field<std::int64_t>(value, "switch_us", "power.")};
      } else if (model == "ramp") {
        check_keys({"watts0", "slope_watts_per_s"});
        spec.power =
            RampPower{field<double>(value, "watts0", "power."),
                      field<double>(value, "slope_watts_per_s", "power.")};
      } else {
        bad_field("power.model", "must be constant, two_phase, or ramp");
      }
    } else {
      bad_field(key, "is not recognized");
    }
  }
  validate(spec);
  return spec;
}

SynthOutput generate(const SynthSpec& spec, const AccountingOptions& options) {
  validate(spec);
  std::mt19937_64 rng(spec.seed);

  std::vector<Qtn> sequence;
  for (int layer = 0; layer < spec.layers; ++layer) {
    for (int block = 0; block < spec.tensors_per_layer; ++block) {
      for (const auto& name : spec.tensor_names) {
        sequence.emplace_back(
            std::vector<std::string>{spec.root, "encoder",
                                     "layer_" + std::to_string(layer),
                                     "block_" + std::to_string(block)},
            name);
      }
    }
  }
  if (spec.backward) {
    const std::size_t forward = sequence.size();
    for (std::size_t i = forward; i-- > 0;) {
      std::vector<std::string> path = sequence[i].path();
      path.insert(path.begin(), "gradients");
      sequence.emplace_back(std::move(path), sequence[i].tensor());
    }
  }

  SynthOutput out;
  std::int64_t horizon = 0;
  for (const auto& device : spec.devices) {
    std::vector<std::int64_t> lanes(static_cast<std::size_t>(spec.concurrency));
    for (auto& cursor : lanes) cursor = uniform(rng, 0, spec.max_gap_us);
    for (std::size_t k = 0; k < sequence.size(); ++k) {
      auto& cursor = lanes[k % lanes.size()];
      const std::int64_t dur =
          uniform(rng, spec.min_duration_us, spec.max_duration_us);
      out.events.push_back(
          TensorEvent{Timestamp{cursor}, Duration{dur}, device, sequence[k]});
      horizon = std::max(horizon, cursor + dur);
      cursor += dur + 1 + uniform(rng, 0, spec.max_gap_us);
    }
  }

  std::map<DeviceId, std::vector<PowerSample>> samples;
  for (const auto& device : spec.devices) {
    auto& list = samples[device];
    std::int64_t ts = spec.power_start_us;
    do {
      list.push_back({Timestamp{ts}, watts_at(spec.power, ts), spec.fraction});
      ts += spec.sampling_period_us;
    } while (ts <= horizon);
  }
  out.power = DevicePowerTrace(std::move(samples));
  out.expected =
      aggregate(gen_footprint_naive(out.events, out.power, options).ticks);
  return out;
}

}  // namespace tenergy
