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

// Attack reproductions and trigger demonstrations, each producing a
// structured report.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rsbsim/core.hpp"
#include "rsbsim/os.hpp"
#include "rsbsim/sidechannel.hpp"

namespace rsbsim {

inline constexpr std::string_view kPangram = "The quick brown fox jumps over the lazy dog";

std::size_t levenshtein(std::string_view a, std::string_view b);

// 1 - distance / max(len), clamped to [0, 1]; two empty strings score 1.
double precision(std::string_view truth, std::string_view recovered);

struct ScenarioConfig {
  MachineConfig machine;
  SchedulerConfig sched;
  std::uint64_t seed = 1;
  // Trials per byte (in-process) or sentences (cross-process).
  std::size_t trials = 100;
  double flip_prob = 0.0;
  // Chance per reload pass that one random probe slot is filled by unrelated
  // activity before it is timed.
  double spurious_fill = 0.0;
  bool victim_flush_stack = true;
  std::uint64_t cycles_per_ms = 10'000;
  std::uint64_t cadence_ms = 50;
  std::string text = std::string(kPangram);
  // Explicit keystroke schedule; when empty, `text` is typed every cadence_ms.
  std::vector<InputEvent> events;
  // In-process attack.
  std::size_t n_a = 64;
  std::size_t secret_len = 1024;
  bool indirect = false;
  // Hardening applied to the victim program(s).
  bool retpoline = false;
  bool fence_after_call = false;
  unsigned jobs = 1;
  bool record_trace = false;
};

// One return resolution at speculation depth 0.
struct Resolution {
  CodeAddr ret_pc = 0;
  std::optional<CodeAddr> predicted;
  CodeAddr actual = 0;
  bool mispredicted = false;
  // Human-readable names for the addresses, e.g. "h+1".
  std::string predicted_name;
  std::string actual_name;
};

struct TriggerResult {
  std::string name;
  std::string description;
  bool applicable = true;
  std::vector<Resolution> resolutions;
  // The mispredictions this trigger is meant to show, in order.
  std::vector<Resolution> highlighted;

  std::size_t mispredictions() const;
};

struct TriggerReport {
  RsbVariant variant = RsbVariant::Cyclic;
  std::vector<TriggerResult> triggers;
  Trace trace;

  std::size_t mispredicted_triggers() const;
  std::size_t applicable_triggers() const;
  std::string text() const;
};

// Runs the four trigger programs: (a) exception-style unwind, (b) context
// switch, (c) return address overwrite, (d) cyclic overflow (Cyclic only).
TriggerReport demo_triggers(const ScenarioConfig& config);

struct ByteResult {
  std::size_t trial = 0;
  std::size_t byte_index = 0;
  int expected = 0;
  std::optional<int> recovered;
  bool correct() const { return recovered && *recovered == expected; }
};

struct ScenarioReport {
  std::string name;
  std::string ground_truth;
  std::string recovered;
  std::size_t levenshtein_distance = 0;
  double precision = 0.0;
  // Fraction of bytes recovered exactly (position by position).
  double byte_accuracy = 0.0;
  // Averages over all sentences/trials; distance and precision above are for
  // the first sentence only.
  std::size_t sentences = 1;
  double mean_precision = 0.0;
  double mean_distance = 0.0;
  double bytes_per_second_sim = 0.0;
  Cycles cycles = 0;
  // Probe slots classified hot over the whole run (cross-process).
  std::size_t hot_slots = 0;
  std::vector<ByteResult> per_byte;
  std::vector<std::pair<std::string, std::string>> config_echo;
  std::vector<std::string> notes;
  // Formatted trace of the first run when ScenarioConfig::record_trace is set.
  std::string trace_text;

  std::string text() const;
  // `trial,byte_index,expected,recovered,correct` with a header row.
  std::string csv() const;
};

// Cross-process attack: an attacker fills the RSB with the victim's gadget
// address and yields; the victim wakes inside its read syscall and its return
// chain speculatively runs `shl r0, 12; load r1, [r12 + r0]`; a measurer
// times the 128 shared probe pages.
inline constexpr Addr kCrossProbeBase = 0x100'0000;
inline constexpr MemoryRange kCrossShared{kCrossProbeBase, 0x10'0000};
inline constexpr MemoryRange kAttackerRange{0x1000'0000, 0x10'0000};
inline constexpr MemoryRange kVictimRange{0x2000'0000, 0x10'0000};
inline constexpr MemoryRange kMeasurerRange{0x3000'0000, 0x10'0000};
// Where the measurer stores its 128 RDTSC differences.
inline constexpr Addr kMeasurerResults = kMeasurerRange.base;

struct CrossProcessPrograms {
  Program attacker;
  Program victim;
  Program measurer;
  CodeAddr gadget = 0;
};

CrossProcessPrograms build_cross_process(const ScenarioConfig& config);

// The keystrokes fed to the victim: config.events, or config.text at the
// configured cadence.
std::vector<InputEvent> cross_process_events(const ScenarioConfig& config);

struct KeystrokeResult {
  char expected = 0;
  std::optional<int> recovered;
  // Hot sets seen by the measurer between this keystroke and the next.
  std::vector<std::vector<std::size_t>> observations;
};

struct SentenceResult {
  std::string recovered;
  std::vector<KeystrokeResult> keystrokes;
  Cycles cycles = 0;
  std::size_t hot_slots = 0;
  SystemTrace trace;
};

// One sentence with the attacker present (`with_attacker`) or absent.
SentenceResult run_cross_process_sentence(const ScenarioConfig& config, std::size_t sentence,
                                          bool with_attacker = true);

// Runs config.trials sentences of config.text and reports the mean
// precision; per-keystroke accuracy goes into byte_accuracy.
ScenarioReport run_cross_process(const ScenarioConfig& config);

// In-process attack: A recurses n_a times and calls B, which recurses to fill
// the RSB with its own post-call site. Once B unwinds, every return of A is
// predicted into B's post-call code, which speculatively reads an unmasked
// offset and touches one of 16 probe pages selected by a nibble of the byte.
inline constexpr Addr kHeapBase = 0x4000'0000;
inline constexpr Addr kHeapSize = 0x10'0000;
inline constexpr Addr kHeapMask = kHeapSize - 1;
// Probe pages and the scratch area, as offsets from the heap base.
inline constexpr Addr kProbeOffset = 0x4000;
inline constexpr Addr kScratchOffset = 0x8'0000;
// Secret buffers: just past the sandbox (reached by an offset from the heap
// base) and at an absolute address (reached by the indirect variant).
inline constexpr Addr kSecretOffset = 0x20'0000;
inline constexpr Addr kAbsoluteSecret = 0x5000'0000;
// Pointer blocks whose word at +24 holds a base address: the victim's points
// at the heap, the attacker's holds zero.
inline constexpr Addr kVictimContext = 0x3000'0000;
inline constexpr Addr kAttackerContext = 0x3000'1000;
// Stack frames of A span a page so that its return addresses share an L1 set.
inline constexpr Addr kFrameBytes = 4088;

// Registers the harness sets before each run: the address or offset to leak
// goes in r10.
inline constexpr unsigned kTargetReg = 10;

Program build_in_process(std::size_t n_a, std::size_t n_b, bool indirect, bool high_nibble);

struct InProcessPrograms {
  Program low;
  Program high;
};

// Builds both nibble programs with the hardening selected in `config`.
InProcessPrograms build_in_process(const ScenarioConfig& config);

// Fresh machine for the in-process attack: secret planted where the selected
// variant reads it, context blocks written, unrestricted address space.
Machine in_process_machine(const ScenarioConfig& config);

struct ByteLeak {
  std::optional<int> value;
  std::size_t reloads = 0;
  Cycles cycles = 0;
  // Per-trial decoded value, when both nibbles of that trial decoded.
  std::vector<std::optional<int>> per_trial;
};

// Leaks the byte at `target` (an offset from the heap base, or an absolute
// address in the indirect variant) over config.trials trials.
ByteLeak leak_byte(Machine& m, const InProcessPrograms& programs, const ScenarioConfig& config,
                   Addr target, std::mt19937_64& rng, Trace* trace = nullptr);

// Leaks config.secret_len bytes of config.text (repeated) planted outside the
// sandbox. Requires a cyclic RSB whose size B fills exactly.
ScenarioReport run_in_process(const ScenarioConfig& config);

}  // namespace rsbsim
