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

#include "rsbsim/os.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace rsbsim {

std::string_view to_string(ProcState s) {
  switch (s) {
    case ProcState::Ready: return "ready";
    case ProcState::Running: return "running";
    case ProcState::BlockedOnInput: return "blocked";
    case ProcState::Exited: return "exited";
  }
  return "?";
}

std::string_view to_string(SwitchReason r) {
  switch (r) {
    case SwitchReason::Yield: return "yield";
    case SwitchReason::Block: return "block";
    case SwitchReason::Exit: return "exit";
    case SwitchReason::Quantum: return "quantum";
    case SwitchReason::Wakeup: return "wakeup";
  }
  return "?";
}

std::string_view to_string(SystemStatus s) {
  switch (s) {
    case SystemStatus::AllExited: return "all-exited";
    case SystemStatus::Idle: return "idle";
    case SystemStatus::BudgetExhausted: return "budget-exhausted";
  }
  return "?";
}

void SchedulerConfig::validate() const {
  if (quantum == 0) throw std::invalid_argument("sched.quantum must be positive");
  if (jitter < 0.0 || jitter > 1.0) throw std::invalid_argument("sched.jitter must be in [0, 1]");
}

std::string SystemTrace::format() const {
  struct Line {
    Cycles cycle;
    std::string text;
  };
  std::vector<Line> lines;
  for (std::size_t pid = 0; pid < per_process.size(); ++pid) {
    for (const auto& e : per_process[pid]) lines.push_back({e.cycle, std::to_string(pid) + '\t' + format_event(e)});
  }
  for (const auto& s : switches) {
    std::ostringstream os;
    os << "-\t" << s.cycle << "\tswitch\t" << s.from << "->" << s.to << '\t' << to_string(s.reason);
    lines.push_back({s.cycle, os.str()});
  }
  std::stable_sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) { return a.cycle < b.cycle; });
  std::string out;
  for (const auto& l : lines) {
    out += l.text;
    out += '\n';
  }
  return out;
}

void kernel_switch_rsb(ReturnStackBuffer& rsb, BranchTargetBuffer& btb, const SchedulerConfig& cfg) {
  if (cfg.flush_rsb_on_switch) {
    rsb.flush_fill(kBenignKernelAddr);
    return;
  }
  const std::size_t k = cfg.kernel_call_depth;
  for (std::size_t i = 0; i < k; ++i) rsb.push(kKernelCodeBase + i);
  for (std::size_t i = k; i-- > 0;) rsb.predict_pop(btb, kKernelCodeBase + 0x100 + i);
}

System::System(const MachineConfig& machine, const SchedulerConfig& sched, MemoryRange shared, std::uint64_t seed)
    : machine_(machine), sched_(sched), shared_(shared), rng_(seed) {
  sched_.validate();
}

int System::add_process(std::string name, Program program, MemoryRange private_range) {
  Process p;
  p.pid = static_cast<int>(procs_.size());
  p.name = std::move(name);
  for (const auto& seg : program.data_segments) machine_.mem.load_segment(seg);
  p.context.pc = program.entry;
  p.stack_top = private_range.base + private_range.length;
  p.context.sp = p.stack_top;
  p.program = std::move(program);
  p.private_range = private_range;
  procs_.push_back(std::move(p));
  return procs_.back().pid;
}

void System::set_input(std::vector<InputEvent> events) {
  std::stable_sort(events.begin(), events.end(),
                   [](const InputEvent& a, const InputEvent& b) { return a.at_cycle < b.at_cycle; });
  input_.assign(events.begin(), events.end());
}

void System::load(int pid) {
  Process& p = procs_.at(pid);
  machine_.regs = p.context;
  machine_.mapped = {p.private_range, shared_};
  machine_.config.stack_top = p.stack_top;
  p.state = ProcState::Running;
  current_ = pid;
  slice_start_ = machine_.cycle;
}

void System::deliver_input() {
  while (!input_.empty() && input_.front().at_cycle <= machine_.cycle) {
    auto reader = std::find_if(procs_.begin(), procs_.end(),
                               [](const Process& p) { return p.state == ProcState::BlockedOnInput; });
    if (reader == procs_.end()) return;
    reader->context.general[0] = input_.front().ch;
    reader->state = ProcState::Ready;
    input_.pop_front();
  }
}

void System::switch_to(int from, int to, SwitchReason reason) {
  if (from >= 0) {
    kernel_switch_rsb(machine_.rsb, machine_.btb, sched_);
    machine_.cycle += sched_.switch_cycles;
  }
  trace_.switches.push_back({machine_.cycle, from, to, reason});
  load(to);
}

bool System::schedule(int from, SwitchReason reason) {
  const int n = static_cast<int>(procs_.size());
  if (from >= 0) procs_[from].context = machine_.regs;
  for (;;) {
    deliver_input();
    std::vector<int> ready;
    for (const auto& p : procs_) {
      if (p.state == ProcState::Ready) ready.push_back(p.pid);
    }
    if (ready.empty()) {
      const bool someone_waits = std::any_of(procs_.begin(), procs_.end(), [](const Process& p) {
        return p.state == ProcState::BlockedOnInput;
      });
      if (someone_waits && !input_.empty()) {
        machine_.cycle = std::max(machine_.cycle, input_.front().at_cycle);
        continue;
      }
      current_.reset();
      return false;
    }
    int next = -1;
    if (reason == SwitchReason::Yield && sched_.jitter > 0.0 &&
        std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < sched_.jitter) {
      next = ready[std::uniform_int_distribution<std::size_t>(0, ready.size() - 1)(rng_)];
    } else {
      for (int k = 1; k <= n && next < 0; ++k) {
        const int idx = ((from < 0 ? -1 : from) + k) % n;
        if (procs_[idx].state == ProcState::Ready) next = idx;
      }
    }
    if (next == from) {
      load(next);
    } else {
      switch_to(from, next, reason);
    }
    return true;
  }
}

void System::dispatch_syscall(Process& p, std::int64_t number) {
  switch (number) {
    case kSysExit:
      p.state = ProcState::Exited;
      schedule(p.pid, SwitchReason::Exit);
      return;
    case kSysSchedYield:
      ++p.yields;
      p.state = ProcState::Ready;
      if (on_yield) on_yield(*this, p.pid);
      schedule(p.pid, SwitchReason::Yield);
      return;
    case kSysReadChar:
      if (!input_.empty() && input_.front().at_cycle <= machine_.cycle) {
        machine_.regs.general[0] = input_.front().ch;
        input_.pop_front();
        return;
      }
      p.state = ProcState::BlockedOnInput;
      schedule(p.pid, SwitchReason::Block);
      return;
    default:
      p.fault = Fault{FaultKind::BadSyscall, machine_.regs.pc - 1, static_cast<Addr>(number)};
      p.state = ProcState::Exited;
      schedule(p.pid, SwitchReason::Exit);
      return;
  }
}

SystemStatus System::run(Cycles budget, bool record_trace) {
  record_ = record_trace;
  trace_.per_process.resize(procs_.size());
  if (!current_) schedule(-1, SwitchReason::Wakeup);
  for (;;) {
    if (!current_) {
      const bool all_exited = std::all_of(procs_.begin(), procs_.end(),
                                          [](const Process& p) { return p.state == ProcState::Exited; });
      return all_exited ? SystemStatus::AllExited : SystemStatus::Idle;
    }
    if (machine_.cycle >= budget) return SystemStatus::BudgetExhausted;
    const int pid = *current_;
    Process& p = procs_[pid];
    const Cycles limit = std::min(slice_start_ + sched_.quantum, budget);
    run_until_event(machine_, p.program, limit, record_ ? &trace_.per_process[pid] : nullptr);
    if (machine_.log_returns) {
      p.return_log.insert(p.return_log.end(), machine_.return_log.begin(), machine_.return_log.end());
      machine_.return_log.clear();
    }
    if (machine_.fault || machine_.halted) {
      p.fault = machine_.fault;
      p.state = ProcState::Exited;
      machine_.fault.reset();
      machine_.halted = false;
      schedule(pid, SwitchReason::Exit);
      continue;
    }
    if (machine_.pending_syscall) {
      const auto number = *machine_.pending_syscall;
      machine_.pending_syscall.reset();
      dispatch_syscall(p, number);
      continue;
    }
    if (machine_.cycle >= budget) return SystemStatus::BudgetExhausted;
    p.state = ProcState::Ready;
    schedule(pid, SwitchReason::Quantum);
  }
}

}  // namespace rsbsim
