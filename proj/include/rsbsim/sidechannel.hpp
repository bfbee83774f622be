/*
 * Copyright 2026 The rsbsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Cache timing measurement: Flush+Reload over a page-strided probe array,
// Prime+Probe over LLC eviction sets, threshold calibration and nibble
// decoding.

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rsbsim/core.hpp"

namespace rsbsim {

// Line used by calibrate_threshold; nothing else maps it.
inline constexpr Addr kCalibrationAddr = Addr{0x3F} << 32;

struct ProbeArray {
  Addr base = 0;
  std::size_t n_slots = 128;
  std::size_t stride = kPageSize;

  Addr slot_addr(std::size_t i) const { return base + i * stride; }
  void validate(const CacheConfig& cache) const;
};

struct MeasurementResult {
  std::vector<Cycles> latencies;
  std::vector<std::size_t> hot;  // ascending
  Cycles threshold = 0;
};

MeasurementResult classify(std::vector<Cycles> latencies, Cycles threshold);

// Timing perturbation applied to each reload: with probability flip_prob the
// measured latency lands on the other side of the threshold.
struct ReloadNoise {
  double flip_prob = 0.0;
};

void flush_all(Machine& m, const ProbeArray& pa);

// Times one load per slot, visiting slots in a random order when `rng` is
// given. Each reload costs the load latency plus the two RDTSC reads.
MeasurementResult reload_and_time(Machine& m, const ProbeArray& pa, Cycles threshold,
                                  std::mt19937_64* rng = nullptr, ReloadNoise noise = {});

// Midpoint of a measured cached load and a measured uncached load.
Cycles calibrate_threshold(Machine& m);

std::optional<std::uint8_t> decode_nibbles(const std::vector<std::size_t>& low_hot,
                                           const std::vector<std::size_t>& high_hot);

// Prime+Probe: fills the LLC set of every slot with attacker lines, then
// reports a slot hot when any of its set's lines was displaced.
void prime(Machine& m, const ProbeArray& pa);
MeasurementResult probe(Machine& m, const ProbeArray& pa);

// Rows of `trial,slot,latency,hot`, without a header.
std::string measurement_csv(std::size_t trial, const MeasurementResult& r);

}  // namespace rsbsim
