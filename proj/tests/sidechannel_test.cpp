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

#include <gtest/gtest.h>

#include <algorithm>
#include <map>

namespace rsbsim {
namespace {

constexpr ProbeArray kAscii{0x100000, 128, kPageSize};
constexpr ProbeArray kNibble{0x200000, 16, kPageSize};

TEST(FlushReload, FlushedSlotsAreAllSlow) {
  Machine m;
  for (std::size_t i = 0; i < kAscii.n_slots; i += 3) m.caches.touch(kAscii.slot_addr(i));
  flush_all(m, kAscii);
  flush_all(m, kAscii);
  auto r = reload_and_time(m, kAscii, 102);
  for (Cycles c : r.latencies) EXPECT_EQ(c, m.config.cache.lat_mem);
  EXPECT_TRUE(r.hot.empty());
}

TEST(FlushReload, FlushLeavesOtherLinesAlone) {
  Machine m;
  std::mt19937_64 rng(4);
  for (int i = 0; i < 3000; ++i) m.caches.touch(rng() % (1u << 22));
  const CacheHierarchy before = m.caches;
  flush_all(m, kAscii);
  auto is_probe = [](Addr line) {
    for (std::size_t i = 0; i < kAscii.n_slots; ++i) {
      if (kAscii.slot_addr(i) >> 6 == line) return true;
    }
    return false;
  };
  auto strip = [&](std::vector<Addr> v) {
    v.erase(std::remove_if(v.begin(), v.end(), is_probe), v.end());
    return v;
  };
  for (std::size_t s = 0; s < before.l1().sets(); ++s) {
    EXPECT_EQ(strip(before.l1().lines_in_set(s)), m.caches.l1().lines_in_set(s));
  }
  for (std::size_t s = 0; s < before.llc().sets(); ++s) {
    EXPECT_EQ(strip(before.llc().lines_in_set(s)), m.caches.llc().lines_in_set(s));
  }
}

TEST(FlushReload, HotSetIsExactlyTheTouchedSlots) {
  Machine m;
  const Cycles threshold = calibrate_threshold(m);
  flush_all(m, kAscii);
  EXPECT_TRUE(reload_and_time(m, kAscii, threshold).hot.empty());
  flush_all(m, kAscii);
  m.caches.touch(kAscii.slot_addr(0x54));
  EXPECT_EQ(reload_and_time(m, kAscii, threshold).hot, std::vector<std::size_t>{0x54});
  flush_all(m, kAscii);
  m.caches.touch(kAscii.slot_addr(3));
  m.caches.touch(kAscii.slot_addr(90));
  std::mt19937_64 rng(1);
  EXPECT_EQ(reload_and_time(m, kAscii, threshold, &rng).hot, (std::vector<std::size_t>{3, 90}));
}

TEST(Calibration, MidpointOfConfiguredLatencies) {
  Machine m;
  EXPECT_EQ(calibrate_threshold(m), 102u);
  MachineConfig c;
  c.cache.lat_l1 = 10;
  c.cache.lat_mem = 300;
  Machine slow(c);
  const Cycles t = calibrate_threshold(slow);
  EXPECT_EQ(t, 155u);
  flush_all(slow, kNibble);
  slow.caches.touch(kNibble.slot_addr(5));
  EXPECT_EQ(reload_and_time(slow, kNibble, t).hot, std::vector<std::size_t>{5});
}

TEST(Nibbles, Decode) {
  EXPECT_EQ(decode_nibbles({0x7}, {0x4}), 0x47);
  EXPECT_EQ(decode_nibbles({}, {0x4}), std::nullopt);
  EXPECT_EQ(decode_nibbles({1, 2}, {0x4}), std::nullopt);
}

TEST(Nibbles, MajorityVoteRecoversByteUnderNoise) {
  Machine m;
  std::mt19937_64 rng(12);
  const Cycles threshold = calibrate_threshold(m);
  for (int byte : {0x00, 0x47, 0xff, 0x9c}) {
    std::map<int, int> votes;
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<std::size_t> halves[2];
      for (int half = 0; half < 2; ++half) {
        flush_all(m, kNibble);
        m.caches.touch(kNibble.slot_addr(half == 0 ? byte & 0xf : byte >> 4));
        halves[half] = reload_and_time(m, kNibble, threshold, &rng, {0.02}).hot;
      }
      if (auto b = decode_nibbles(halves[0], halves[1])) ++votes[*b];
    }
    auto best = std::max_element(votes.begin(), votes.end(),
                                 [](const auto& a, const auto& b) { return a.second < b.second; });
    ASSERT_NE(best, votes.end());
    EXPECT_EQ(best->first, byte);
  }
}

TEST(PrimeProbe, AgreesWithFlushReload) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 50; ++t) {
    Machine fr, pp;
    flush_all(fr, kNibble);
    prime(pp, kNibble);
    std::vector<std::size_t> touched;
    for (std::size_t i = 0; i < kNibble.n_slots; ++i) {
      if (rng() % 4 == 0) {
        touched.push_back(i);
        fr.caches.touch(kNibble.slot_addr(i));
        pp.caches.touch(kNibble.slot_addr(i));
      }
    }
    auto a = reload_and_time(fr, kNibble, 102).hot;
    auto b = probe(pp, kNibble).hot;
    EXPECT_EQ(a, touched);
    EXPECT_EQ(a, b);
  }
}

TEST(Csv, Rows) {
  auto r = classify({200, 4, 200}, 102);
  EXPECT_EQ(measurement_csv(7, r), "7,0,200,0\n7,1,4,1\n7,2,200,0\n");
}

}  // namespace
}  // namespace rsbsim
