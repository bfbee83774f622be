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

#include "rsbsim/mem.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace rsbsim {

void CacheConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw std::invalid_argument(std::string(name) + " must be positive");
  };
  positive(line_size, "cache.line_size");
  positive(l1_sets, "cache.l1_sets");
  positive(l1_ways, "cache.l1_ways");
  positive(llc_sets, "cache.llc_sets");
  positive(llc_ways, "cache.llc_ways");
  if (!std::has_single_bit(line_size)) throw std::invalid_argument("cache.line_size must be a power of two");
  if (llc_sets % l1_sets != 0) throw std::invalid_argument("cache.llc_sets must be a multiple of cache.l1_sets");
  if (lat_l1 == 0 || lat_llc == 0 || lat_mem == 0) throw std::invalid_argument("cache latencies must be positive");
}

std::uint8_t PhysicalMemory::read_byte(Addr addr) const {
  auto it = pages_.find(addr / kPageSize);
  if (it == pages_.end()) return 0;
  return it->second[addr % kPageSize];
}

void PhysicalMemory::write_byte(Addr addr, std::uint8_t value) {
  auto [it, inserted] = pages_.try_emplace(addr / kPageSize);
  if (inserted) it->second.fill(0);
  it->second[addr % kPageSize] = value;
}

Word PhysicalMemory::read(Addr addr, int width) const {
  Word v = 0;
  for (int i = 0; i < width; ++i) v |= Word{read_byte(addr + i)} << (8 * i);
  return v;
}

void PhysicalMemory::write(Addr addr, Word value, int width) {
  for (int i = 0; i < width; ++i) write_byte(addr + i, static_cast<std::uint8_t>(value >> (8 * i)));
}

void PhysicalMemory::clear_range(Addr lo, Addr hi) {
  for (auto& [page, bytes] : pages_) {
    const Addr start = page * kPageSize, end = start + kPageSize;
    if (end <= lo || start >= hi) continue;
    std::fill(bytes.begin() + static_cast<std::ptrdiff_t>(std::max(lo, start) - start),
              bytes.begin() + static_cast<std::ptrdiff_t>(std::min(hi, end) - start), std::uint8_t{0});
  }
}

void PhysicalMemory::load_segment(const DataSegment& seg) {
  for (std::size_t i = 0; i < seg.bytes.size(); ++i) write_byte(seg.address + i, seg.bytes[i]);
}

bool operator==(const PhysicalMemory& a, const PhysicalMemory& b) {
  // Pages that were allocated but hold only zeros compare equal to absent ones.
  auto covered = [](const PhysicalMemory& x, const PhysicalMemory& y) {
    static const PhysicalMemory::Page kZero{};
    for (const auto& [page, bytes] : x.pages_) {
      auto it = y.pages_.find(page);
      const auto& other = it == y.pages_.end() ? kZero : it->second;
      if (bytes != other) return false;
    }
    return true;
  };
  return covered(a, b) && covered(b, a);
}

CacheLevel::CacheLevel(std::size_t sets, std::size_t ways)
    : sets_(sets), ways_(ways), ways_storage_(sets * ways) {
  for (std::size_t s = 0; s < sets; ++s) {
    for (std::size_t w = 0; w < ways; ++w) ways_storage_[s * ways + w].age = static_cast<std::uint32_t>(w);
  }
}

std::optional<std::size_t> CacheLevel::find(Addr line) const {
  const std::size_t base = set_of(line) * ways_;
  for (std::size_t w = 0; w < ways_; ++w) {
    const auto& way = ways_storage_[base + w];
    if (way.valid && way.line == line) return w;
  }
  return std::nullopt;
}

void CacheLevel::make_mru(std::size_t set, std::size_t way) {
  Way* ways = &ways_storage_[set * ways_];
  const auto age = ways[way].age;
  for (std::size_t w = 0; w < ways_; ++w) {
    if (ways[w].age < age) ++ways[w].age;
  }
  ways[way].age = 0;
}

bool CacheLevel::touch(Addr line) {
  auto w = find(line);
  if (!w) return false;
  make_mru(set_of(line), *w);
  return true;
}

std::optional<Addr> CacheLevel::insert(Addr line) {
  const std::size_t set = set_of(line);
  Way* ways = &ways_storage_[set * ways_];
  std::size_t victim = 0;
  for (std::size_t w = 1; w < ways_; ++w) {
    if (ways[w].age > ways[victim].age) victim = w;
  }
  std::optional<Addr> evicted;
  if (ways[victim].valid) evicted = ways[victim].line;
  ways[victim].valid = true;
  ways[victim].line = line;
  make_mru(set, victim);
  return evicted;
}

bool CacheLevel::invalidate(Addr line) {
  auto w = find(line);
  if (!w) return false;
  Way* ways = &ways_storage_[set_of(line) * ways_];
  const auto age = ways[*w].age;
  for (std::size_t i = 0; i < ways_; ++i) {
    if (ways[i].age > age) --ways[i].age;
  }
  ways[*w].valid = false;
  ways[*w].age = static_cast<std::uint32_t>(ways_ - 1);
  return true;
}

std::vector<Addr> CacheLevel::lines_in_set(std::size_t set) const {
  std::vector<std::pair<std::uint32_t, Addr>> resident;
  for (std::size_t w = 0; w < ways_; ++w) {
    const auto& way = ways_storage_[set * ways_ + w];
    if (way.valid) resident.emplace_back(way.age, way.line);
  }
  std::sort(resident.begin(), resident.end());
  std::vector<Addr> out;
  for (const auto& [age, line] : resident) out.push_back(line);
  return out;
}

bool CacheLevel::ages_are_permutations() const {
  for (std::size_t s = 0; s < sets_; ++s) {
    std::vector<bool> seen(ways_, false);
    for (std::size_t w = 0; w < ways_; ++w) {
      const auto age = ways_storage_[s * ways_ + w].age;
      if (age >= ways_ || seen[age]) return false;
      seen[age] = true;
    }
  }
  return true;
}

CacheHierarchy::CacheHierarchy(const CacheConfig& config)
    : config_(config),
      line_shift_(static_cast<unsigned>(std::countr_zero(config.line_size))),
      l1_(config.l1_sets, config.l1_ways),
      llc_(config.llc_sets, config.llc_ways) {
  config_.validate();
}

Cycles CacheHierarchy::touch(Addr addr) {
  const Addr line = line_of(addr);
  if (l1_.touch(line)) {
    llc_.touch(line);
    return config_.lat_l1;
  }
  if (llc_.touch(line)) {
    l1_.insert(line);
    return config_.lat_llc;
  }
  if (auto evicted = llc_.insert(line)) l1_.invalidate(*evicted);
  l1_.insert(line);
  return config_.lat_mem;
}

HitLevel CacheHierarchy::level_of(Addr addr) const {
  const Addr line = line_of(addr);
  if (l1_.contains(line)) return HitLevel::L1;
  if (llc_.contains(line)) return HitLevel::LLC;
  return HitLevel::Memory;
}

Cycles CacheHierarchy::latency_of(HitLevel level) const {
  switch (level) {
    case HitLevel::L1: return config_.lat_l1;
    case HitLevel::LLC: return config_.lat_llc;
    case HitLevel::Memory: return config_.lat_mem;
  }
  return config_.lat_mem;
}

void CacheHierarchy::clflush(Addr addr) {
  const Addr line = line_of(addr);
  l1_.invalidate(line);
  llc_.invalidate(line);
}

std::vector<Addr> CacheHierarchy::eviction_addresses(std::size_t llc_set) const {
  if (llc_set >= config_.llc_sets) throw std::out_of_range("llc set index out of range");
  const Addr base_line = line_of(kEvictionBase);
  const std::size_t count = config_.l1_ways + config_.llc_ways;
  std::vector<Addr> out;
  out.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    out.push_back((base_line + llc_set + j * config_.llc_sets) << line_shift_);
  }
  return out;
}

bool CacheHierarchy::invariants_hold() const {
  if (!l1_.ages_are_permutations() || !llc_.ages_are_permutations()) return false;
  for (std::size_t s = 0; s < l1_.sets(); ++s) {
    for (Addr line : l1_.lines_in_set(s)) {
      if (!llc_.contains(line)) return false;
    }
  }
  return true;
}

AccessResult access(CacheHierarchy& h, PhysicalMemory& m, Addr addr, bool is_write,
                    bool speculative, Word write_value, int width) {
  AccessResult r;
  r.latency = h.touch(addr);
  if (is_write) {
    if (!speculative) m.write(addr, write_value, width);
  } else {
    r.value = m.read(addr, width);
  }
  return r;
}

void clflush(CacheHierarchy& h, Addr addr) { h.clflush(addr); }

void evict_set_by_walking(CacheHierarchy& h, PhysicalMemory& m, std::size_t set_index) {
  for (Addr a : h.eviction_addresses(set_index)) access(h, m, a, false, false);
}

}  // namespace rsbsim
