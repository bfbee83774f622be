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

#include "rsbsim/sidechannel.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace rsbsim {

void ProbeArray::validate(const CacheConfig& cache) const {
  if (n_slots == 0) throw std::invalid_argument("probe array needs at least one slot");
  if (stride < cache.line_size) throw std::invalid_argument("probe stride must be at least one cache line");
}

MeasurementResult classify(std::vector<Cycles> latencies, Cycles threshold) {
  MeasurementResult r;
  r.threshold = threshold;
  for (std::size_t i = 0; i < latencies.size(); ++i) {
    if (latencies[i] < threshold) r.hot.push_back(i);
  }
  r.latencies = std::move(latencies);
  return r;
}

void flush_all(Machine& m, const ProbeArray& pa) {
  for (std::size_t i = 0; i < pa.n_slots; ++i) m.caches.clflush(pa.slot_addr(i));
  m.cycle += pa.n_slots;
}

MeasurementResult reload_and_time(Machine& m, const ProbeArray& pa, Cycles threshold, std::mt19937_64* rng,
                                  ReloadNoise noise) {
  std::vector<std::size_t> order(pa.n_slots);
  std::iota(order.begin(), order.end(), 0);
  if (rng) std::shuffle(order.begin(), order.end(), *rng);
  std::vector<Cycles> lat(pa.n_slots);
  const auto& c = m.caches.config();
  for (std::size_t slot : order) {
    Cycles t = m.caches.touch(pa.slot_addr(slot));
    m.cycle += t + 2;
    if (rng && noise.flip_prob > 0.0 && std::uniform_real_distribution<double>(0.0, 1.0)(*rng) < noise.flip_prob) {
      t = t < threshold ? c.lat_mem : c.lat_l1;
    }
    lat[slot] = t;
  }
  return classify(std::move(lat), threshold);
}

Cycles calibrate_threshold(Machine& m) {
  m.caches.touch(kCalibrationAddr);
  const Cycles cached = m.caches.touch(kCalibrationAddr);
  m.caches.clflush(kCalibrationAddr);
  const Cycles uncached = m.caches.touch(kCalibrationAddr);
  m.caches.clflush(kCalibrationAddr);
  m.cycle += cached + uncached;
  return (cached + uncached) / 2;
}

std::optional<std::uint8_t> decode_nibbles(const std::vector<std::size_t>& low_hot,
                                           const std::vector<std::size_t>& high_hot) {
  if (low_hot.size() != 1 || high_hot.size() != 1) return std::nullopt;
  if (low_hot[0] > 0xf || high_hot[0] > 0xf) return std::nullopt;
  return static_cast<std::uint8_t>((high_hot[0] << 4) | low_hot[0]);
}

namespace {

// The lines left resident in an LLC set after walking its eviction set.
std::vector<Addr> resident_tail(const CacheHierarchy& h, std::size_t set) {
  auto lines = h.eviction_addresses(set);
  lines.erase(lines.begin(), lines.end() - static_cast<std::ptrdiff_t>(h.config().llc_ways));
  return lines;
}

}  // namespace

void prime(Machine& m, const ProbeArray& pa) {
  std::vector<std::size_t> sets;
  for (std::size_t i = 0; i < pa.n_slots; ++i) sets.push_back(m.caches.llc_set_of(pa.slot_addr(i)));
  std::sort(sets.begin(), sets.end());
  sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
  for (std::size_t s : sets) {
    for (Addr a : m.caches.eviction_addresses(s)) m.cycle += m.caches.touch(a);
  }
}

MeasurementResult probe(Machine& m, const ProbeArray& pa) {
  const auto& c = m.caches.config();
  const Cycles threshold = (c.lat_llc + c.lat_mem) / 2;
  std::map<std::size_t, Cycles> worst;
  std::vector<Cycles> lat(pa.n_slots);
  for (std::size_t i = 0; i < pa.n_slots; ++i) {
    const std::size_t set = m.caches.llc_set_of(pa.slot_addr(i));
    auto it = worst.find(set);
    if (it == worst.end()) {
      Cycles w = 0;
      for (Addr a : resident_tail(m.caches, set)) {
        const Cycles t = m.caches.touch(a);
        m.cycle += t + 2;
        w = std::max(w, t);
      }
      it = worst.emplace(set, w).first;
    }
    // A displaced line means the victim touched the set: report it as fast,
    // matching Flush+Reload's polarity.
    lat[i] = it->second >= threshold ? c.lat_l1 : c.lat_mem;
  }
  return classify(std::move(lat), (c.lat_l1 + c.lat_mem) / 2);
}

std::string measurement_csv(std::size_t trial, const MeasurementResult& r) {
  std::ostringstream os;
  std::size_t h = 0;
  for (std::size_t i = 0; i < r.latencies.size(); ++i) {
    while (h < r.hot.size() && r.hot[h] < i) ++h;
    const bool hot = h < r.hot.size() && r.hot[h] == i;
    os << trial << ',' << i << ',' << r.latencies[i] << ',' << (hot ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace rsbsim
