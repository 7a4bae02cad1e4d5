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

#ifndef TENERGY_ACCOUNTANT_H_
#define TENERGY_ACCOUNTANT_H_

// Attribution of device energy to tensor operations.
//
// Every event covers the closed tick range [ts, ts + dur]. At each tick where
// at least one operation is active on a device, the device's power is read
// from the most recent sample at or before that tick and split equally among
// the operation occurrences active there. Concurrent occurrences of the same
// name each receive their own share.
//
// Two implementations are provided. gen_footprint_naive() materializes every
// tick and is only meant as a reference for small inputs.
// gen_footprint_optimized() sweeps over event and sample boundaries and is
// the production path; both agree to within floating-point reassociation.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>

#include "tenergy/trace_model.h"

namespace tenergy {

// Name -> joules (or watts / seconds for the power and time variants).
using EnergyFootprint = std::map<Qtn, double>;

// Occurrence counts of the operations active at one tick.
using OpMultiset = std::map<Qtn, std::size_t>;

using DeviceFlatTrace =
    std::map<DeviceId, std::map<std::int64_t, OpMultiset>>;

// Tick -> per-name energy at that tick, summed over devices.
using TickFootprint = std::map<std::int64_t, EnergyFootprint>;

struct AccountingDiagnostics {
  // Active ticks that precede the first power sample of their device and were
  // charged at that first sample's power.
  std::uint64_t pre_sample_ticks = 0;
  // Active ticks on devices without any power samples. They carry no energy.
  std::uint64_t uncovered_ticks = 0;
  // Events trimmed or dropped by the session window.
  std::uint64_t clipped_events = 0;

  friend bool operator==(const AccountingDiagnostics&,
                         const AccountingDiagnostics&) = default;
};

struct AccountingOptions {
  // Wall time represented by one timestamp unit.
  Duration tick_len{1};
  // Inclusive tick range outside of which event coverage is discarded.
  std::optional<Timestamp> window_begin;
  std::optional<Timestamp> window_end;
  // gen_footprint_naive() refuses traces that flatten to more ticks.
  std::uint64_t naive_tick_limit = 10'000'000;
};

struct NaiveAccounting {
  TickFootprint ticks;
  AccountingDiagnostics diagnostics;
  std::map<DeviceId, double> device_energy;
};

struct Accounting {
  EnergyFootprint tef;
  // Seconds each name was active, counted once per concurrent occurrence.
  EnergyFootprint active_seconds;
  AccountingDiagnostics diagnostics;
  // Total joules attributed per powered device.
  std::map<DeviceId, double> device_energy;
};

struct Alignment {
  Timestamp ts;
  // True when no sample precedes the query and the earliest one was used.
  bool pre_sample = false;
};

// Largest sample timestamp <= t, falling back to the earliest sample.
// `samples` must be sorted ascending; throws PreconditionError when empty.
Alignment now(Timestamp t, std::span<const Timestamp> samples);

DeviceFlatTrace flatten(const EventTrace& trace);

// Number of (event, tick) pairs flatten() would produce.
std::uint64_t flat_tick_count(const EventTrace& trace);

// Splits `watts * tick_len` equally among the occurrences in `ops`.
EnergyFootprint build_tick_footprint(const OpMultiset& ops, double watts,
                                     Duration tick_len);

NaiveAccounting gen_footprint_naive(const EventTrace& trace,
                                    const DevicePowerTrace& power,
                                    const AccountingOptions& options = {});

EnergyFootprint aggregate(const TickFootprint& ticks);

Accounting gen_footprint_optimized(const EventTrace& trace,
                                   const DevicePowerTrace& power,
                                   const AccountingOptions& options = {});

struct PassSplit {
  EnergyFootprint forward;
  EnergyFootprint backward;
};

// Entries whose outermost layer is `backward_prefix` form the backward pass.
PassSplit split_passes(const EnergyFootprint& tef,
                       const std::string& backward_prefix = "gradients");

double total(const EnergyFootprint& f);

}  // namespace tenergy

#endif  // TENERGY_ACCOUNTANT_H_
