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

// Execution engines: an in-order reference interpreter and a speculative
// engine that predicts returns through the RSB, runs ahead on the predicted
// path inside speculation frames, and commits or rolls back when the true
// return address arrives from the stack.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rsbsim/isa.hpp"
#include "rsbsim/mem.hpp"
#include "rsbsim/predictor.hpp"

namespace rsbsim {

struct CoreConfig {
  std::size_t max_spec_depth = 8;
  std::uint64_t max_spec_instructions = 64;
  // Instructions a frame may run when its stack load hits L1 and the
  // resolution would otherwise coincide with the frame opening.
  std::uint64_t min_spec_on_hit = 2;
  bool fence_drains = true;
};

struct MemoryRange {
  Addr base = 0;
  Addr length = 0;

  bool contains(Addr addr, std::size_t width = 1) const {
    return addr >= base && addr - base < length && width <= length - (addr - base);
  }
};

struct MachineConfig {
  CacheConfig cache;
  CoreConfig core;
  std::size_t rsb_size = kDefaultRsbSize;
  RsbVariant rsb_variant = RsbVariant::Cyclic;
  std::size_t btb_size = kDefaultBtbSize;
  Addr stack_top = 0x8000'0000;
  Addr stack_size = 0x10'0000;
  // Instruction budget of the sequential engine.
  std::uint64_t sequential_budget = 10'000'000;
};

enum class FaultKind { UnmappedAccess, StackUnderflow, InvalidPc, BadSyscall };

struct Fault {
  FaultKind kind;
  CodeAddr pc = 0;
  Addr addr = 0;

  std::string describe() const;
  friend bool operator==(const Fault&, const Fault&) = default;
};

// An architecturally executed RET and what the predictor said about it.
struct ReturnRecord {
  CodeAddr ret_pc = 0;
  std::optional<CodeAddr> predicted;
  CodeAddr actual = 0;

  bool mispredicted() const { return predicted && *predicted != actual; }
  friend bool operator==(const ReturnRecord&, const ReturnRecord&) = default;
};

struct SpeculationFrame {
  struct BufferedStore {
    Addr addr;
    std::uint8_t value;
  };

  // Architectural state to restore on a misprediction; pc is the true target.
  RegisterFile checkpoint;
  CodeAddr ret_pc = 0;
  CodeAddr predicted_pc = 0;
  CodeAddr resume_pc = 0;
  Cycles opened_at = 0;
  Cycles resolve_at = 0;
  std::uint64_t min_instructions = 0;
  std::uint64_t instructions_executed = 0;
  // Instructions run while this frame was innermost; retired on commit.
  std::uint64_t pending_retire = 0;
  // Returns resolved on this frame's path, kept only with Machine::log_returns.
  std::vector<ReturnRecord> returns;
  // Stores made while this frame was the innermost one, oldest first.
  std::vector<BufferedStore> stores;

  bool mispredicted() const { return predicted_pc != resume_pc; }
};

class Machine {
 public:
  explicit Machine(const MachineConfig& config = {});

  // Machine with data segments loaded, sp at the stack top and pc at entry.
  static Machine for_program(const Program& program, const MachineConfig& config = {});

  RegisterFile regs;
  PhysicalMemory mem;
  CacheHierarchy caches;
  ReturnStackBuffer rsb;
  BranchTargetBuffer btb;
  Cycles cycle = 0;
  std::vector<SpeculationFrame> spec_stack;
  MachineConfig config;

  // Address ranges an architectural access may touch. Empty means unrestricted.
  std::vector<MemoryRange> mapped;

  bool halted = false;
  std::optional<Fault> fault;
  // Syscall number of an architecturally executed SYSCALL awaiting service.
  std::optional<std::int64_t> pending_syscall;
  std::uint64_t instructions_retired = 0;

  // When set, every architectural RET is appended to return_log in program
  // order once its frame (if any) is no longer speculative.
  bool log_returns = false;
  std::vector<ReturnRecord> return_log;

  bool is_mapped(Addr addr, std::size_t width) const;
  bool speculating() const { return !spec_stack.empty(); }
  bool stopped() const { return halted || fault.has_value(); }

  // Reads through buffered speculative stores, youngest first.
  Word read_forwarded(Addr addr, int width, bool* forwarded = nullptr) const;
};

enum class EventKind { Commit, Spec, SpecEnter, SpecCommit, SpecSquash, Stall };

std::string_view to_string(EventKind kind);

struct TraceEvent {
  Cycles cycle = 0;
  std::size_t depth = 0;
  CodeAddr pc = 0;
  std::string_view mnemonic;
  EventKind kind = EventKind::Commit;
  // Return resolution details for SpecEnter/SpecCommit/SpecSquash and for
  // unpredicted returns (Stall).
  std::optional<CodeAddr> predicted;
  std::optional<CodeAddr> actual;
};

using Trace = std::vector<TraceEvent>;

// Tab-separated: cycle, depth, pc, mnemonic, event[, predicted->actual].
std::string format_trace(const Trace& trace);
std::string format_event(const TraceEvent& e);

struct StepReport {
  bool executed = false;  // an instruction issued (as opposed to a stall)
  CodeAddr pc = 0;
  std::size_t depth = 0;
};

// Executes one instruction, or stalls until the next frame resolution.
StepReport step_speculative(Machine& m, const Program& p, Trace* trace = nullptr);

// Restores the innermost frame's checkpoint and discards its buffered stores.
// Cache, RSB and BTB state are left alone.
void rollback(Machine& m);

enum class RunStatus { Halted, Faulted, BudgetExhausted };

std::string_view to_string(RunStatus s);

struct RunResult {
  Machine machine;
  Trace trace;
  RunStatus status;
};

// Drives the speculative engine until HALT, a fault, or the cycle budget.
// Syscalls are serviced standalone: EXIT halts, SCHED_YIELD is a no-op and
// READ_CHAR returns 0.
RunResult run(const Program& p, Machine init, Cycles budget, bool record_trace = true);

// In-order execution without prediction or speculation. Stops at HALT, a
// fault, or after config.sequential_budget instructions (reported by
// `budget_exhausted`).
struct SequentialResult {
  Machine machine;
  RunStatus status;
};
SequentialResult run_sequential(const Program& p, Machine init);

// Registers, memory and stop status agree. Caches, predictors and cycle
// counts are not compared.
bool same_architectural_state(const Machine& a, const Machine& b);

// Services a pending syscall for standalone runs; returns false if the number
// is unknown (the machine is then faulted).
bool service_standalone_syscall(Machine& m);

// Runs the speculative engine until a syscall is pending, the machine stops,
// or `cycle_limit` is reached with no open speculation frame.
void run_until_event(Machine& m, const Program& p, Cycles cycle_limit, Trace* trace);

}  // namespace rsbsim
