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

// Program rewriting mitigations and a differential checker that runs the
// original and rewritten programs on the sequential engine.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rsbsim/core.hpp"

namespace rsbsim {

enum class HardeningKind { Retpoline, FenceAfterCall };

struct HardeningStats {
  HardeningKind kind = HardeningKind::Retpoline;
  std::size_t rewritten = 0;
};

// Label prefixes of the trap construct; their presence marks a RET as
// already hardened.
inline constexpr std::string_view kRetpolineSpecPrefix = "__retpoline_spec_";
inline constexpr std::string_view kRetpolineNewPrefix = "__retpoline_new_";

// Replaces every RET with
//   call new; spec: pause; jmp spec; new: add sp, 8; ret
// so the final RET's prediction is always the trap at `spec`.
Program apply_retpoline(const Program& p, HardeningStats* stats = nullptr);

// Inserts FENCE after every call that is not already followed by one.
Program apply_fence_after_call(const Program& p, HardeningStats* stats = nullptr);

// Extra initial state layered on top of Machine::for_program.
struct ProgramInput {
  std::vector<std::pair<RegId, Word>> regs;
  std::vector<DataSegment> memory;
};

struct EquivalenceReport {
  bool equivalent = true;
  std::optional<std::size_t> failing_input;
  std::string divergence;
  Cycles original_cycles = 0;
  Cycles hardened_cycles = 0;

  bool overhead_non_negative() const { return hardened_cycles >= original_cycles; }
};

// Runs both programs on every input and compares general registers, sp, the
// stop status and all memory outside the stack. Return addresses on the stack
// and pc values are code layout and legitimately differ.
EquivalenceReport verify_equivalence(const Program& original, const Program& hardened,
                                     const std::vector<ProgramInput>& inputs,
                                     const MachineConfig& config = {});

}  // namespace rsbsim
