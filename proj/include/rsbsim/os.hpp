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

// Multi-process model on one logical core. All processes share a single
// Machine, so caches, memory, the RSB and the BTB carry over across context
// switches; only the register file is saved and restored.

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rsbsim/core.hpp"

namespace rsbsim {

enum class ProcState { Ready, Running, BlockedOnInput, Exited };

std::string_view to_string(ProcState s);

struct Process {
  int pid = 0;
  std::string name;
  Program program;
  RegisterFile context;
  MemoryRange private_range;
  // The stack grows down from the end of the private range.
  Addr stack_top = 0;
  ProcState state = ProcState::Ready;
  int affinity = 0;
  std::optional<Fault> fault;
  std::uint64_t yields = 0;
  // This process's share of Machine::return_log when return logging is on.
  std::vector<ReturnRecord> return_log;
};

struct SchedulerConfig {
  Cycles quantum = 1'000'000;
  std::size_t kernel_call_depth = 3;
  bool flush_rsb_on_switch = false;
  // Probability that a yield hands the core to a random Ready process
  // instead of the round-robin successor.
  double jitter = 0.0;
  Cycles switch_cycles = 100;

  void validate() const;
};

struct InputEvent {
  Cycles at_cycle = 0;
  std::uint8_t ch = 0;
};

// Kernel return addresses pushed during a switch lie in this range.
inline constexpr CodeAddr kKernelCodeBase = 0xFFFF'0000;
inline constexpr CodeAddr kBenignKernelAddr = kKernelCodeBase + 0xF000;

enum class SwitchReason { Yield, Block, Exit, Quantum, Wakeup };

std::string_view to_string(SwitchReason r);

struct SwitchEvent {
  Cycles cycle = 0;
  int from = -1;
  int to = -1;
  SwitchReason reason = SwitchReason::Yield;
};

struct SystemTrace {
  // Indexed by pid.
  std::vector<Trace> per_process;
  std::vector<SwitchEvent> switches;

  // Switch events and per-process events merged in cycle order, one per line.
  std::string format() const;
};

enum class SystemStatus { AllExited, Idle, BudgetExhausted };

std::string_view to_string(SystemStatus s);

// Applies the kernel's RSB footprint of one context switch.
void kernel_switch_rsb(ReturnStackBuffer& rsb, BranchTargetBuffer& btb, const SchedulerConfig& cfg);

class System {
 public:
  System(const MachineConfig& machine, const SchedulerConfig& sched, MemoryRange shared, std::uint64_t seed);

  // Loads the program's data segments and creates a Ready process with pc at
  // the program entry and sp at the top of its private range.
  int add_process(std::string name, Program program, MemoryRange private_range);

  void set_input(std::vector<InputEvent> events);

  // Called after a process issues SCHED_YIELD, before the next process is
  // picked. The machine's register file still holds the yielding process.
  std::function<void(System&, int pid)> on_yield;

  SystemStatus run(Cycles budget, bool record_trace);

  Machine& machine() { return machine_; }
  const Machine& machine() const { return machine_; }
  Process& process(int pid) { return procs_.at(pid); }
  const std::vector<Process>& processes() const { return procs_; }
  const SystemTrace& trace() const { return trace_; }
  const SchedulerConfig& scheduler() const { return sched_; }
  MemoryRange shared_range() const { return shared_; }
  std::optional<int> running() const { return current_; }
  std::size_t pending_input() const { return input_.size(); }

 private:
  void dispatch_syscall(Process& p, std::int64_t number);
  void deliver_input();
  // Chooses the next process after `from` leaves the core; returns false if
  // nothing is runnable and no input is pending.
  bool schedule(int from, SwitchReason reason);
  void switch_to(int from, int to, SwitchReason reason);
  void load(int pid);

  Machine machine_;
  SchedulerConfig sched_;
  MemoryRange shared_;
  std::mt19937_64 rng_;
  std::vector<Process> procs_;
  std::deque<InputEvent> input_;
  std::optional<int> current_;
  Cycles slice_start_ = 0;
  SystemTrace trace_;
  bool record_ = true;
};

}  // namespace rsbsim
