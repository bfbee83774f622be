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

#include "rsbsim/core.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace rsbsim {

std::string Fault::describe() const {
  std::ostringstream os;
  switch (kind) {
    case FaultKind::UnmappedAccess: os << "unmapped memory access at 0x" << std::hex << addr << std::dec; break;
    case FaultKind::StackUnderflow: os << "stack underflow on ret"; break;
    case FaultKind::InvalidPc: os << "invalid pc " << addr; break;
    case FaultKind::BadSyscall: os << "unknown syscall " << addr; break;
  }
  os << " (pc " << pc << ")";
  return os.str();
}

Machine::Machine(const MachineConfig& cfg)
    : caches(cfg.cache), rsb(cfg.rsb_size, cfg.rsb_variant), btb(cfg.btb_size), config(cfg) {
  regs.sp = cfg.stack_top;
}

Machine Machine::for_program(const Program& program, const MachineConfig& config) {
  Machine m(config);
  for (const auto& seg : program.data_segments) m.mem.load_segment(seg);
  m.regs.pc = program.entry;
  return m;
}

bool Machine::is_mapped(Addr addr, std::size_t width) const {
  if (mapped.empty()) return true;
  return std::any_of(mapped.begin(), mapped.end(), [&](const MemoryRange& r) { return r.contains(addr, width); });
}

Word Machine::read_forwarded(Addr addr, int width, bool* forwarded) const {
  Word v = 0;
  bool any = false;
  for (int i = 0; i < width; ++i) {
    const Addr a = addr + i;
    std::optional<std::uint8_t> byte;
    for (auto f = spec_stack.rbegin(); f != spec_stack.rend() && !byte; ++f) {
      for (auto s = f->stores.rbegin(); s != f->stores.rend(); ++s) {
        if (s->addr == a) {
          byte = s->value;
          break;
        }
      }
    }
    if (byte) {
      any = true;
    } else {
      byte = mem.read_byte(a);
    }
    v |= Word{*byte} << (8 * i);
  }
  if (forwarded) *forwarded = any;
  return v;
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Commit: return "commit";
    case EventKind::Spec: return "spec";
    case EventKind::SpecEnter: return "spec-enter";
    case EventKind::SpecCommit: return "spec-commit";
    case EventKind::SpecSquash: return "spec-squash";
    case EventKind::Stall: return "stall";
  }
  return "?";
}

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Halted: return "halted";
    case RunStatus::Faulted: return "faulted";
    case RunStatus::BudgetExhausted: return "budget-exhausted";
  }
  return "?";
}

std::string format_event(const TraceEvent& e) {
  std::ostringstream os;
  os << e.cycle << '\t' << e.depth << '\t' << e.pc << '\t' << e.mnemonic << '\t' << to_string(e.kind);
  if (e.predicted || e.actual) {
    os << '\t' << (e.predicted ? std::to_string(*e.predicted) : "-") << "->"
       << (e.actual ? std::to_string(*e.actual) : "-");
  }
  return os.str();
}

std::string format_trace(const Trace& trace) {
  std::string out;
  for (const auto& e : trace) {
    out += format_event(e);
    out += '\n';
  }
  return out;
}

namespace {

Addr effective_address(const RegisterFile& regs, const Instruction& insn) {
  Addr a = regs.get(insn.base) + static_cast<Addr>(insn.imm);
  if (insn.index != kNoReg) a += regs.get(insn.index);
  return a;
}

Word alu(const Instruction& insn, Word lhs, Word rhs) {
  switch (insn.op) {
    case Opcode::ADD: return lhs + rhs;
    case Opcode::SUB: return lhs - rhs;
    case Opcode::AND: return lhs & rhs;
    case Opcode::SHL: return lhs << (rhs & 63);
    default: return rhs;
  }
}

Word alu_operand(const RegisterFile& regs, const Instruction& insn) {
  if (insn.op == Opcode::SHL || insn.src == kNoReg) return static_cast<Word>(insn.imm);
  return regs.get(insn.src);
}

std::string_view mnemonic_at(const Program& p, CodeAddr pc) {
  return p.valid_pc(pc) ? mnemonic(p.instructions[pc]) : std::string_view("?");
}

void emit(Trace* trace, const Machine& m, Cycles cycle, CodeAddr pc, std::string_view mn, EventKind kind,
          std::optional<CodeAddr> predicted = std::nullopt, std::optional<CodeAddr> actual = std::nullopt) {
  if (!trace) return;
  trace->push_back(TraceEvent{cycle, m.spec_stack.size(), pc, mn, kind, predicted, actual});
}

// Resolution of the frame at `index`, reported at the depth its RET issued.
void emit_resolution(Trace* trace, const Machine& m, std::size_t index, EventKind kind) {
  if (!trace) return;
  const SpeculationFrame& f = m.spec_stack[index];
  trace->push_back(TraceEvent{m.cycle, index, f.ret_pc, "ret", kind, f.predicted_pc, f.resume_pc});
}

bool resolvable(const Machine& m, const SpeculationFrame& f, bool stalled) {
  return m.cycle >= f.resolve_at && (stalled || f.instructions_executed >= f.min_instructions);
}

void resolve_frames(Machine& m, Trace* trace, bool stalled) {
  std::size_t i = 0;
  while (i < m.spec_stack.size()) {
    SpeculationFrame& f = m.spec_stack[i];
    if (!resolvable(m, f, stalled)) {
      ++i;
      continue;
    }
    m.btb.update(f.ret_pc, f.resume_pc);
    if (m.log_returns) {
      auto& log = i == 0 ? m.return_log : m.spec_stack[i - 1].returns;
      log.push_back({f.ret_pc, f.predicted_pc, f.resume_pc});
      if (!f.mispredicted()) log.insert(log.end(), f.returns.begin(), f.returns.end());
    }
    if (f.mispredicted()) {
      while (m.spec_stack.size() > i) {
        emit_resolution(trace, m, m.spec_stack.size() - 1, EventKind::SpecSquash);
        rollback(m);
      }
      return;
    }
    emit_resolution(trace, m, i, EventKind::SpecCommit);
    if (i == 0) {
      for (const auto& s : f.stores) m.mem.write_byte(s.addr, s.value);
      m.instructions_retired += f.pending_retire;
    } else {
      auto& below = m.spec_stack[i - 1];
      below.stores.insert(below.stores.end(), f.stores.begin(), f.stores.end());
      below.pending_retire += f.pending_retire;
    }
    m.spec_stack.erase(m.spec_stack.begin() + static_cast<std::ptrdiff_t>(i));
  }
}

// Whether the instruction at pc cannot issue on the speculative path and must
// wait for the open frames to resolve.
bool blocks_speculation(const Machine& m, const Program& p) {
  const auto& bottom = m.spec_stack.front();
  if (bottom.instructions_executed >= m.config.core.max_spec_instructions) return true;
  const CodeAddr pc = m.regs.pc;
  if (!p.valid_pc(pc)) return true;
  const Instruction& insn = p.instructions[pc];
  switch (insn.op) {
    case Opcode::HALT:
    case Opcode::SYSCALL:
    case Opcode::CLFLUSH:
      return true;
    case Opcode::FENCE:
      return m.config.core.fence_drains;
    case Opcode::LOAD:
    case Opcode::STORE:
      return !m.is_mapped(effective_address(m.regs, insn), insn.width);
    case Opcode::CALL_DIRECT:
    case Opcode::CALL_INDIRECT:
      return !m.is_mapped(m.regs.sp - 8, 8);
    case Opcode::RET:
      return m.spec_stack.size() >= m.config.core.max_spec_depth || m.regs.sp + 8 > m.config.stack_top ||
             m.regs.sp < 8 || !m.is_mapped(m.regs.sp, 8);
    default:
      return false;
  }
}

void write_memory(Machine& m, Addr addr, Word value, int width) {
  if (m.spec_stack.empty()) {
    m.mem.write(addr, value, width);
    return;
  }
  auto& stores = m.spec_stack.back().stores;
  for (int i = 0; i < width; ++i) stores.push_back({addr + i, static_cast<std::uint8_t>(value >> (8 * i))});
}

void set_fault(Machine& m, FaultKind kind, Addr addr = 0) { m.fault = Fault{kind, m.regs.pc, addr}; }

void count_instruction(Machine& m) {
  for (auto& f : m.spec_stack) ++f.instructions_executed;
  if (m.spec_stack.empty()) {
    ++m.instructions_retired;
  } else {
    ++m.spec_stack.back().pending_retire;
  }
}

}  // namespace

void rollback(Machine& m) {
  m.regs = m.spec_stack.back().checkpoint;
  m.spec_stack.pop_back();
}

StepReport step_speculative(Machine& m, const Program& p, Trace* trace) {
  StepReport report;
  if (m.stopped() || m.pending_syscall) return report;

  resolve_frames(m, trace, false);

  if (m.speculating() && blocks_speculation(m, p)) {
    Cycles next = std::numeric_limits<Cycles>::max();
    for (const auto& f : m.spec_stack) next = std::min(next, f.resolve_at);
    m.cycle = std::max(m.cycle, next);
    emit(trace, m, m.cycle, m.regs.pc, mnemonic_at(p, m.regs.pc), EventKind::Stall);
    resolve_frames(m, trace, true);
    report.pc = m.regs.pc;
    report.depth = m.spec_stack.size();
    return report;
  }

  const CodeAddr pc = m.regs.pc;
  if (!p.valid_pc(pc)) {
    if (pc == p.size()) {
      m.halted = true;
    } else {
      set_fault(m, FaultKind::InvalidPc, pc);
    }
    return report;
  }

  const Instruction& insn = p.instructions[pc];
  const bool speculative = m.speculating();
  const Cycles issued = m.cycle;
  const std::size_t depth = m.spec_stack.size();
  const EventKind kind = speculative ? EventKind::Spec : EventKind::Commit;
  Cycles cost = 1;
  CodeAddr next_pc = pc + 1;
  bool traced = false;

  switch (insn.op) {
    case Opcode::MOV_IMM:
      m.regs.set(insn.dst, static_cast<Word>(insn.imm));
      break;
    case Opcode::MOV_REG:
      m.regs.set(insn.dst, m.regs.get(insn.src));
      break;
    case Opcode::ADD:
    case Opcode::SUB:
    case Opcode::AND:
    case Opcode::SHL:
      m.regs.set(insn.dst, alu(insn, m.regs.get(insn.dst), alu_operand(m.regs, insn)));
      break;
    case Opcode::LOAD: {
      const Addr a = effective_address(m.regs, insn);
      if (!m.is_mapped(a, insn.width)) {
        set_fault(m, FaultKind::UnmappedAccess, a);
        return report;
      }
      cost = m.caches.touch(a);
      m.regs.set(insn.dst, m.read_forwarded(a, insn.width));
      break;
    }
    case Opcode::STORE: {
      const Addr a = effective_address(m.regs, insn);
      if (!m.is_mapped(a, insn.width)) {
        set_fault(m, FaultKind::UnmappedAccess, a);
        return report;
      }
      m.caches.touch(a);
      write_memory(m, a, m.regs.get(insn.src), insn.width);
      break;
    }
    case Opcode::CLFLUSH:
      m.caches.clflush(effective_address(m.regs, insn));
      break;
    case Opcode::CALL_DIRECT:
    case Opcode::CALL_INDIRECT: {
      const Addr slot = m.regs.sp - 8;
      if (!m.is_mapped(slot, 8)) {
        set_fault(m, FaultKind::UnmappedAccess, slot);
        return report;
      }
      const CodeAddr target = insn.op == Opcode::CALL_DIRECT ? insn.target : m.regs.get(insn.src);
      if (insn.op == Opcode::CALL_INDIRECT) m.btb.update(pc, target);
      m.caches.touch(slot);
      write_memory(m, slot, pc + 1, 8);
      m.regs.sp = slot;
      m.rsb.push(pc + 1);
      next_pc = target;
      break;
    }
    case Opcode::RET: {
      const Addr slot = m.regs.sp;
      if (slot + 8 > m.config.stack_top || slot < 8) {
        set_fault(m, FaultKind::StackUnderflow, slot);
        return report;
      }
      if (!m.is_mapped(slot, 8)) {
        set_fault(m, FaultKind::UnmappedAccess, slot);
        return report;
      }
      bool forwarded = false;
      Cycles latency = m.caches.touch(slot);
      const CodeAddr target = m.read_forwarded(slot, 8, &forwarded);
      if (forwarded) latency = m.config.cache.lat_l1;
      m.regs.sp = slot + 8;
      const auto prediction = m.rsb.predict_pop(m.btb, pc);
      if (!prediction) {
        cost = latency;
        next_pc = target;
        m.btb.update(pc, target);
        emit(trace, m, issued, pc, "ret", EventKind::Stall, std::nullopt, target);
        if (m.log_returns) {
          (m.speculating() ? m.spec_stack.back().returns : m.return_log).push_back({pc, std::nullopt, target});
        }
        traced = true;
        break;
      }
      SpeculationFrame frame;
      frame.checkpoint = m.regs;
      frame.checkpoint.pc = target;
      frame.ret_pc = pc;
      frame.predicted_pc = *prediction;
      frame.resume_pc = target;
      frame.opened_at = issued;
      // The L1 portion of the stack load overlaps the front-end redirect.
      const Cycles window = latency - std::min(latency, m.config.cache.lat_l1);
      frame.resolve_at = issued + window;
      frame.min_instructions = window == 0 ? m.config.core.min_spec_on_hit : 0;
      count_instruction(m);
      emit(trace, m, issued, pc, "ret", EventKind::SpecEnter, *prediction, target);
      m.spec_stack.push_back(std::move(frame));
      m.regs.pc = *prediction;
      m.cycle += 1;
      report.executed = true;
      report.pc = pc;
      report.depth = depth;
      return report;
    }
    case Opcode::JMP:
      next_pc = insn.target;
      break;
    case Opcode::BEQ:
      if (m.regs.get(insn.dst) == m.regs.get(insn.src)) next_pc = insn.target;
      break;
    case Opcode::BNE:
      if (m.regs.get(insn.dst) != m.regs.get(insn.src)) next_pc = insn.target;
      break;
    case Opcode::RDTSC:
      m.regs.set(insn.dst, m.cycle);
      break;
    case Opcode::FENCE:
    case Opcode::PAUSE:
      break;
    case Opcode::SYSCALL:
      m.pending_syscall = insn.imm;
      break;
    case Opcode::HALT:
      m.halted = true;
      next_pc = pc;
      break;
  }

  if (!traced) emit(trace, m, issued, pc, mnemonic(insn), kind);
  count_instruction(m);
  m.regs.pc = next_pc;
  m.cycle += cost;
  report.executed = true;
  report.pc = pc;
  report.depth = depth;
  return report;
}

bool same_architectural_state(const Machine& a, const Machine& b) {
  return a.regs == b.regs && a.mem == b.mem && a.halted == b.halted && a.fault == b.fault;
}

bool service_standalone_syscall(Machine& m) {
  if (!m.pending_syscall) return true;
  const auto number = *m.pending_syscall;
  m.pending_syscall.reset();
  switch (number) {
    case kSysExit:
      m.halted = true;
      return true;
    case kSysSchedYield:
      return true;
    case kSysReadChar:
      m.regs.general[0] = 0;
      return true;
    default:
      m.fault = Fault{FaultKind::BadSyscall, m.regs.pc - 1, static_cast<Addr>(number)};
      return false;
  }
}

RunResult run(const Program& p, Machine init, Cycles budget, bool record_trace) {
  RunResult r{std::move(init), {}, RunStatus::BudgetExhausted};
  Trace* trace = record_trace ? &r.trace : nullptr;
  Machine& m = r.machine;
  while (!m.stopped()) {
    if (m.pending_syscall) {
      service_standalone_syscall(m);
      continue;
    }
    if (m.cycle >= budget) break;
    step_speculative(m, p, trace);
  }
  if (m.halted) r.status = RunStatus::Halted;
  if (m.fault) r.status = RunStatus::Faulted;
  return r;
}

void run_until_event(Machine& m, const Program& p, Cycles cycle_limit, Trace* trace) {
  while (!m.stopped() && !m.pending_syscall) {
    if (!m.speculating() && m.cycle >= cycle_limit) break;
    step_speculative(m, p, trace);
  }
}

SequentialResult run_sequential(const Program& p, Machine init) {
  SequentialResult r{std::move(init), RunStatus::BudgetExhausted};
  Machine& m = r.machine;
  const std::uint64_t budget = m.config.sequential_budget;
  for (std::uint64_t n = 0; n < budget && !m.stopped(); ++n) {
    if (m.pending_syscall) {
      service_standalone_syscall(m);
      continue;
    }
    const CodeAddr pc = m.regs.pc;
    if (!p.valid_pc(pc)) {
      if (pc == p.size()) {
        m.halted = true;
      } else {
        set_fault(m, FaultKind::InvalidPc, pc);
      }
      break;
    }
    const Instruction& insn = p.instructions[pc];
    Cycles cost = 1;
    CodeAddr next_pc = pc + 1;
    switch (insn.op) {
      case Opcode::MOV_IMM:
        m.regs.set(insn.dst, static_cast<Word>(insn.imm));
        break;
      case Opcode::MOV_REG:
        m.regs.set(insn.dst, m.regs.get(insn.src));
        break;
      case Opcode::ADD:
      case Opcode::SUB:
      case Opcode::AND:
      case Opcode::SHL:
        m.regs.set(insn.dst, alu(insn, m.regs.get(insn.dst), alu_operand(m.regs, insn)));
        break;
      case Opcode::LOAD: {
        const Addr a = effective_address(m.regs, insn);
        if (!m.is_mapped(a, insn.width)) {
          set_fault(m, FaultKind::UnmappedAccess, a);
          continue;
        }
        auto res = access(m.caches, m.mem, a, false, false, 0, insn.width);
        cost = res.latency;
        m.regs.set(insn.dst, res.value);
        break;
      }
      case Opcode::STORE: {
        const Addr a = effective_address(m.regs, insn);
        if (!m.is_mapped(a, insn.width)) {
          set_fault(m, FaultKind::UnmappedAccess, a);
          continue;
        }
        access(m.caches, m.mem, a, true, false, m.regs.get(insn.src), insn.width);
        break;
      }
      case Opcode::CLFLUSH:
        m.caches.clflush(effective_address(m.regs, insn));
        break;
      case Opcode::CALL_DIRECT:
      case Opcode::CALL_INDIRECT: {
        const Addr slot = m.regs.sp - 8;
        if (!m.is_mapped(slot, 8)) {
          set_fault(m, FaultKind::UnmappedAccess, slot);
          continue;
        }
        access(m.caches, m.mem, slot, true, false, pc + 1, 8);
        m.regs.sp = slot;
        next_pc = insn.op == Opcode::CALL_DIRECT ? insn.target : m.regs.get(insn.src);
        break;
      }
      case Opcode::RET: {
        const Addr slot = m.regs.sp;
        if (slot + 8 > m.config.stack_top || slot < 8) {
          set_fault(m, FaultKind::StackUnderflow, slot);
          continue;
        }
        if (!m.is_mapped(slot, 8)) {
          set_fault(m, FaultKind::UnmappedAccess, slot);
          continue;
        }
        auto res = access(m.caches, m.mem, slot, false, false, 0, 8);
        cost = res.latency;
        m.regs.sp = slot + 8;
        next_pc = res.value;
        if (m.log_returns) m.return_log.push_back({pc, std::nullopt, res.value});
        break;
      }
      case Opcode::JMP:
        next_pc = insn.target;
        break;
      case Opcode::BEQ:
        if (m.regs.get(insn.dst) == m.regs.get(insn.src)) next_pc = insn.target;
        break;
      case Opcode::BNE:
        if (m.regs.get(insn.dst) != m.regs.get(insn.src)) next_pc = insn.target;
        break;
      case Opcode::RDTSC:
        m.regs.set(insn.dst, m.cycle);
        break;
      case Opcode::FENCE:
      case Opcode::PAUSE:
        break;
      case Opcode::SYSCALL:
        m.pending_syscall = insn.imm;
        break;
      case Opcode::HALT:
        m.halted = true;
        next_pc = pc;
        break;
    }
    ++m.instructions_retired;
    m.regs.pc = next_pc;
    m.cycle += cost;
  }
  if (m.pending_syscall) service_standalone_syscall(m);
  if (m.halted) r.status = RunStatus::Halted;
  if (m.fault) r.status = RunStatus::Faulted;
  return r;
}

}  // namespace rsbsim
