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

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "rsbsim/scenarios.hpp"

namespace rsbsim {
namespace {

// Full-matrix edit distance, written independently of the library's
// single-row version.
std::size_t edit_distance_matrix(const std::string& a, const std::string& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1])});
    }
  }
  return d[a.size()][b.size()];
}

TEST(Levenshtein, KnownValues) {
  EXPECT_EQ(levenshtein("abc", "abc"), 0u);
  EXPECT_EQ(levenshtein("", "abc"), 3u);
  EXPECT_EQ(levenshtein("abc", ""), 3u);
  EXPECT_EQ(levenshtein("kitten", "sitting"), 3u);
  EXPECT_EQ(levenshtein("flaw", "lawn"), 2u);
}

TEST(Levenshtein, AgreesWithMatrixOracle) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> len(0, 12), ch('a', 'd');
  for (int i = 0; i < 2000; ++i) {
    std::string a(len(rng), ' '), b(len(rng), ' ');
    for (char& c : a) c = static_cast<char>(ch(rng));
    for (char& c : b) c = static_cast<char>(ch(rng));
    ASSERT_EQ(levenshtein(a, b), edit_distance_matrix(a, b)) << a << " / " << b;
    ASSERT_EQ(levenshtein(a, b), levenshtein(b, a));
  }
}

TEST(Precision, Bounds) {
  EXPECT_DOUBLE_EQ(precision("", ""), 1.0);
  EXPECT_DOUBLE_EQ(precision("abcd", "abcd"), 1.0);
  EXPECT_DOUBLE_EQ(precision("abcd", ""), 0.0);
  EXPECT_DOUBLE_EQ(precision("abcd", "abce"), 0.75);
}

TEST(Triggers, CyclicShowsAllFour) {
  ScenarioConfig c;
  const TriggerReport r = demo_triggers(c);
  ASSERT_EQ(r.triggers.size(), 4u);
  EXPECT_EQ(r.applicable_triggers(), 4u);
  EXPECT_EQ(r.mispredicted_triggers(), 4u);
  for (const auto& t : r.triggers) {
    EXPECT_FALSE(t.highlighted.empty()) << t.name;
    for (const auto& h : t.highlighted) EXPECT_TRUE(h.mispredicted) << t.name;
  }
}

TEST(Triggers, OverflowNotApplicableWithoutCyclicRsb) {
  for (RsbVariant v : {RsbVariant::StopOnUnderflow, RsbVariant::BtbFallback}) {
    ScenarioConfig c;
    c.machine.rsb_variant = v;
    const TriggerReport r = demo_triggers(c);
    EXPECT_EQ(r.applicable_triggers(), 3u);
    EXPECT_EQ(r.mispredicted_triggers(), 3u);
    EXPECT_FALSE(r.triggers[3].applicable);
  }
}

ScenarioConfig cross_config(const std::string& text) {
  ScenarioConfig c;
  c.text = text;
  c.trials = 1;
  return c;
}

TEST(CrossProcess, SingleKeystrokeLightsItsSlot) {
  const SentenceResult r = run_cross_process_sentence(cross_config("T"), 0);
  ASSERT_EQ(r.keystrokes.size(), 1u);
  EXPECT_EQ(r.recovered, "T");
  bool seen = false;
  for (const auto& hot : r.keystrokes[0].observations) {
    if (hot == std::vector<std::size_t>{'T'}) seen = true;
  }
  EXPECT_TRUE(seen);
}

TEST(CrossProcess, DeterministicRecoversSentence) {
  const ScenarioReport r = run_cross_process(cross_config(std::string(kPangram)));
  EXPECT_EQ(r.recovered, std::string(kPangram));
  EXPECT_DOUBLE_EQ(r.precision, 1.0);
}

TEST(CrossProcess, VictimAloneLeaksNothing) {
  const SentenceResult r = run_cross_process_sentence(cross_config("abc"), 0, false);
  EXPECT_EQ(r.hot_slots, 0u);
  EXPECT_EQ(r.recovered, "");
}

TEST(CrossProcess, FlushOnSwitchLeaksNothing) {
  ScenarioConfig c = cross_config("hello");
  c.sched.flush_rsb_on_switch = true;
  const SentenceResult r = run_cross_process_sentence(c, 0);
  EXPECT_EQ(r.hot_slots, 0u);
  EXPECT_EQ(r.recovered, "");
}

TEST(CrossProcess, SameSeedSameResult) {
  ScenarioConfig c = cross_config("jitter");
  c.sched.jitter = 0.3;
  c.seed = 5;
  const SentenceResult a = run_cross_process_sentence(c, 3);
  const SentenceResult b = run_cross_process_sentence(c, 3);
  EXPECT_EQ(a.recovered, b.recovered);
  EXPECT_EQ(a.cycles, b.cycles);
}

ScenarioConfig in_process_config(std::size_t bytes, std::size_t trials) {
  ScenarioConfig c;
  c.secret_len = bytes;
  c.trials = trials;
  return c;
}

TEST(InProcess, ArchitecturalPathStaysInSandbox) {
  for (bool indirect : {false, true}) {
    for (bool high : {false, true}) {
      const Program p = build_in_process(64, 16, indirect, high);
      Machine m = in_process_machine(in_process_config(16, 1));
      m.regs.pc = p.entry;
      m.regs.sp = m.config.stack_top;
      m.regs.set(kTargetReg, indirect ? kAbsoluteSecret : kSecretOffset);
      m.mapped = {MemoryRange{kHeapBase, kHeapSize},
                  MemoryRange{m.config.stack_top - m.config.stack_size, m.config.stack_size},
                  MemoryRange{kVictimContext, 0x2000}};
      const SequentialResult r = run_sequential(p, std::move(m));
      EXPECT_EQ(r.status, RunStatus::Halted) << (r.machine.fault ? r.machine.fault->describe() : "");
    }
  }
}

TEST(InProcess, LeaksPlantedBytes) {
  for (bool indirect : {false, true}) {
    ScenarioConfig c = in_process_config(6, 5);
    c.indirect = indirect;
    const ScenarioReport r = run_in_process(c);
    EXPECT_EQ(r.recovered, std::string(kPangram).substr(0, 6)) << "indirect " << indirect;
    EXPECT_DOUBLE_EQ(r.byte_accuracy, 1.0);
    ASSERT_FALSE(r.notes.empty());
    EXPECT_EQ(r.notes[0], "probe reloads per byte per trial: 32");
  }
}

TEST(InProcess, NoLeakWhenSecretIsUnmapped) {
  ScenarioConfig c = in_process_config(1, 3);
  const InProcessPrograms programs = build_in_process(c);
  Machine m = in_process_machine(c);
  m.mapped = {MemoryRange{kHeapBase, kHeapSize},
              MemoryRange{m.config.stack_top - m.config.stack_size, m.config.stack_size},
              MemoryRange{kVictimContext, 0x2000}};
  std::mt19937_64 rng(1);
  const ByteLeak leak = leak_byte(m, programs, c, kSecretOffset, rng);
  EXPECT_FALSE(leak.value.has_value());
}

TEST(InProcess, HardeningStopsLeak) {
  for (int pass = 0; pass < 2; ++pass) {
    ScenarioConfig c = in_process_config(4, 5);
    c.retpoline = pass == 0;
    c.fence_after_call = pass == 1;
    const ScenarioReport r = run_in_process(c);
    EXPECT_DOUBLE_EQ(r.byte_accuracy, 0.0) << "pass " << pass;
  }
}

TEST(InProcess, RequiresCyclicRsb) {
  ScenarioConfig c = in_process_config(1, 1);
  c.machine.rsb_variant = RsbVariant::StopOnUnderflow;
  EXPECT_THROW(run_in_process(c), std::invalid_argument);
}

TEST(InProcess, JobsDoNotChangeNoisyResult) {
  ScenarioConfig c = in_process_config(6, 10);
  c.flip_prob = 0.3;
  const ScenarioReport one = run_in_process(c);
  c.jobs = 3;
  const ScenarioReport three = run_in_process(c);
  EXPECT_EQ(one.recovered, three.recovered);
  EXPECT_EQ(one.cycles, three.cycles);
}

Program assemble_shipped(const std::string& name) {
  std::ifstream in(std::string(RSBSIM_PROGRAMS_DIR) + "/" + name);
  EXPECT_TRUE(in) << name;
  std::ostringstream buf;
  buf << in.rdbuf();
  return assemble(buf.str());
}

void expect_same_program(const Program& a, const Program& b, const std::string& name) {
  EXPECT_EQ(disassemble(a), disassemble(b)) << name;
  EXPECT_EQ(a.entry, b.entry) << name;
}

TEST(ShippedPrograms, AllAssemble) {
  std::size_t n = 0;
  for (const auto& e : std::filesystem::directory_iterator(RSBSIM_PROGRAMS_DIR)) {
    if (e.path().extension() != ".s") continue;
    EXPECT_NO_THROW(assemble_shipped(e.path().filename().string())) << e.path();
    ++n;
  }
  EXPECT_GE(n, 5u);
}

TEST(ShippedPrograms, MatchScenarioBuilders) {
  const CrossProcessPrograms cp = build_cross_process(ScenarioConfig{});
  expect_same_program(assemble_shipped("cross_process_victim.s"), cp.victim, "victim");
  expect_same_program(assemble_shipped("cross_process_attacker.s"), cp.attacker, "attacker");
  expect_same_program(assemble_shipped("cross_process_measurer.s"), cp.measurer, "measurer");
  expect_same_program(assemble_shipped("in_process_low.s"), build_in_process(64, 16, false, false), "in-process");
  expect_same_program(assemble_shipped("in_process_indirect_low.s"), build_in_process(64, 16, true, false),
                      "in-process indirect");
}

}  // namespace
}  // namespace rsbsim
