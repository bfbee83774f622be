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

// Two-level inclusive cache hierarchy with LRU replacement and a latency
// model, plus sparse byte-addressed physical memory.

#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "rsbsim/isa.hpp"

namespace rsbsim {

using Cycles = std::uint64_t;

inline constexpr std::size_t kPageSize = 4096;

// Lines used by evict_set_by_walking live here; nothing else maps this range.
inline constexpr Addr kEvictionBase = Addr{0x40} << 32;

struct CacheConfig {
  std::size_t line_size = 64;
  std::size_t l1_sets = 64;
  std::size_t l1_ways = 8;
  std::size_t llc_sets = 1024;
  std::size_t llc_ways = 16;
  Cycles lat_l1 = 4;
  Cycles lat_llc = 40;
  Cycles lat_mem = 200;

  // Throws std::invalid_argument when a field is out of range. LLC sets must
  // be a multiple of L1 sets so eviction lines can target both levels.
  void validate() const;
};

enum class HitLevel { L1, LLC, Memory };

class PhysicalMemory {
 public:
  std::uint8_t read_byte(Addr addr) const;
  void write_byte(Addr addr, std::uint8_t value);

  // Little-endian access of `width` bytes (1..8).
  Word read(Addr addr, int width) const;
  void write(Addr addr, Word value, int width);

  void load_segment(const DataSegment& seg);

  // Zeroes [lo, hi).
  void clear_range(Addr lo, Addr hi);

  std::size_t resident_pages() const { return pages_.size(); }

  friend bool operator==(const PhysicalMemory& a, const PhysicalMemory& b);

 private:
  using Page = std::array<std::uint8_t, kPageSize>;
  std::unordered_map<Addr, Page> pages_;
};

// One set-associative level. Ages within a set are always a permutation of
// 0..ways-1, with invalid ways holding the oldest ages.
class CacheLevel {
 public:
  CacheLevel(std::size_t sets, std::size_t ways);

  std::size_t sets() const { return sets_; }
  std::size_t ways() const { return ways_; }
  std::size_t set_of(Addr line) const { return line % sets_; }

  bool contains(Addr line) const { return find(line).has_value(); }
  // Marks `line` most recently used if present.
  bool touch(Addr line);
  // Inserts a line that is not present; returns the evicted line, if any.
  std::optional<Addr> insert(Addr line);
  bool invalidate(Addr line);

  // Resident lines of a set, most recently used first.
  std::vector<Addr> lines_in_set(std::size_t set) const;
  bool ages_are_permutations() const;

  friend bool operator==(const CacheLevel&, const CacheLevel&) = default;

 private:
  struct Way {
    bool valid = false;
    Addr line = 0;
    std::uint32_t age = 0;
    friend bool operator==(const Way&, const Way&) = default;
  };

  std::optional<std::size_t> find(Addr line) const;
  void make_mru(std::size_t set, std::size_t way);

  std::size_t sets_;
  std::size_t ways_;
  std::vector<Way> ways_storage_;
};

class CacheHierarchy {
 public:
  explicit CacheHierarchy(const CacheConfig& config = {});

  const CacheConfig& config() const { return config_; }

  Addr line_of(Addr addr) const { return addr >> line_shift_; }
  std::size_t l1_set_of(Addr addr) const { return l1_.set_of(line_of(addr)); }
  std::size_t llc_set_of(Addr addr) const { return llc_.set_of(line_of(addr)); }

  // Brings the line into both levels and returns the access latency.
  Cycles touch(Addr addr);
  // Where the line currently lives, without changing any state.
  HitLevel level_of(Addr addr) const;
  Cycles latency_of(HitLevel level) const;

  void clflush(Addr addr);

  // Addresses touched by evict_set_by_walking for an LLC set: l1_ways lines
  // followed by llc_ways lines, all mapping to that LLC set and to the
  // corresponding L1 set.
  std::vector<Addr> eviction_addresses(std::size_t llc_set) const;

  const CacheLevel& l1() const { return l1_; }
  const CacheLevel& llc() const { return llc_; }

  // Every L1-resident line is LLC-resident and LRU ages are well formed.
  bool invariants_hold() const;

  friend bool operator==(const CacheHierarchy& a, const CacheHierarchy& b) {
    return a.l1_ == b.l1_ && a.llc_ == b.llc_;
  }

 private:
  CacheConfig config_;
  unsigned line_shift_;
  CacheLevel l1_;
  CacheLevel llc_;
};

struct AccessResult {
  Word value = 0;
  Cycles latency = 0;
};

// Performs a timed access. Speculative writes update cache state and return a
// latency but leave memory untouched.
AccessResult access(CacheHierarchy& h, PhysicalMemory& m, Addr addr, bool is_write,
                    bool speculative, Word write_value = 0, int width = 8);

void clflush(CacheHierarchy& h, Addr addr);

// Walks l1_ways + llc_ways distinct lines mapping to `set_index` so that any
// line previously resident in that set is evicted from both levels.
void evict_set_by_walking(CacheHierarchy& h, PhysicalMemory& m, std::size_t set_index);

}  // namespace rsbsim
