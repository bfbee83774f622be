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

#include <set>

#include <gtest/gtest.h>

#include "rsbsim/config.hpp"

namespace rsbsim {
namespace {

TEST(RunConfig, DefaultsMatchScenarioDefaults) {
  const RunConfig rc;
  const ScenarioConfig from_keys = rc.scenario();
  const ScenarioConfig plain;
  EXPECT_EQ(from_keys.machine.rsb_size, plain.machine.rsb_size);
  EXPECT_EQ(from_keys.machine.rsb_variant, RsbVariant::Cyclic);
  EXPECT_EQ(from_keys.machine.cache.lat_mem, plain.machine.cache.lat_mem);
  EXPECT_EQ(from_keys.sched.kernel_call_depth, 3u);
  EXPECT_EQ(from_keys.cycles_per_ms, 10'000u);
  EXPECT_EQ(from_keys.text, std::string(kPangram));
  EXPECT_EQ(from_keys.trials, 1u);  // cross-process default: one sentence
}

TEST(RunConfig, EchoListsEveryKeyOnce) {
  const RunConfig rc;
  const auto echo = rc.echo();
  ASSERT_EQ(echo.size(), config_keys().size());
  std::set<std::string> seen;
  for (const auto& [k, v] : echo) EXPECT_TRUE(seen.insert(k).second) << k;
  for (const char* k : {"scenario.name", "scenario.trials", "scenario.seed", "noise.flip_prob",
                        "victim.flush_stack", "rsb.variant", "sched.jitter", "time.cycles_per_ms"}) {
    EXPECT_TRUE(seen.count(k)) << k;
  }
}

TEST(RunConfig, UnknownKeyIsRejectedWithItsName) {
  RunConfig rc;
  try {
    rc.set("rsb.sise", "4");
    FAIL() << "accepted an unknown key";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "rsb.sise");
  }
  EXPECT_THROW(rc.parse("cache.lat_l2 = 9\n"), ConfigError);
}

TEST(RunConfig, BadValuesAreRejected) {
  RunConfig rc;
  EXPECT_THROW(rc.set("rsb.variant", "ring"), ConfigError);
  EXPECT_THROW(rc.set("rsb.size", "-1"), ConfigError);
  EXPECT_THROW(rc.set("sched.jitter", "1.5"), ConfigError);
  EXPECT_THROW(rc.set("victim.flush_stack", "maybe"), ConfigError);
  EXPECT_THROW(rc.set("scenario.name", "spectre"), ConfigError);
  EXPECT_THROW(rc.parse("just words\n"), ConfigError);
  EXPECT_EQ(rc.get("rsb.variant"), "cyclic");
}

TEST(RunConfig, FileThenOverrides) {
  RunConfig rc;
  rc.parse("# preset\nrsb.variant = stop   # trailing comment\nrsb.size = 0x20\nsched.jitter=0.25\n");
  rc.set("rsb.variant", "btb");
  const ScenarioConfig c = rc.scenario();
  EXPECT_EQ(c.machine.rsb_variant, RsbVariant::BtbFallback);
  EXPECT_EQ(c.machine.rsb_size, 32u);
  EXPECT_DOUBLE_EQ(c.sched.jitter, 0.25);
}

TEST(RunConfig, TrialsAutoDependsOnScenario) {
  RunConfig rc;
  rc.set("scenario.name", "in-process");
  EXPECT_EQ(rc.scenario().trials, 100u);
  rc.set("scenario.trials", "7");
  EXPECT_EQ(rc.scenario().trials, 7u);
}

TEST(RunConfig, InvalidCacheGeometryFailsOnUse) {
  RunConfig rc;
  rc.set("cache.llc_sets", "100");
  EXPECT_THROW(rc.scenario(), ConfigError);
}

TEST(InputEvents, ParsesPairs) {
  const auto ev = parse_input_events("1000:a, 2000:b,3000: ");
  ASSERT_EQ(ev.size(), 3u);
  EXPECT_EQ(ev[0].at_cycle, 1000u);
  EXPECT_EQ(ev[0].ch, 'a');
  EXPECT_EQ(ev[2].ch, ' ');
  EXPECT_THROW(parse_input_events("2000:a,1000:b"), std::invalid_argument);
  EXPECT_THROW(parse_input_events("x:a"), std::invalid_argument);
}

TEST(Flags, MirrorKeys) {
  EXPECT_EQ(flag_for_key("rsb.variant"), "rsb-variant");
  EXPECT_EQ(flag_for_key("sched.flush_rsb_on_switch"), "sched-flush-rsb-on-switch");
}

}  // namespace
}  // namespace rsbsim
