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

#include "rsbsim/harden.hpp"

#include <sstream>

namespace rsbsim {

namespace {

bool starts_with(const std::string& s, std::string_view prefix) { return s.rfind(prefix, 0) == 0; }

// Rebuilds a program from per-instruction replacement groups, remapping code
// targets, labels and the entry point to the start of each group.
class Relocator {
 public:
  explicit Relocator(const Program& p) : src_(p), map_(p.size() + 1) {}

  void begin(CodeAddr old_index) { map_[old_index] = out_.instructions.size(); }
  // Emits an instruction whose code target, if any, refers to the old layout.
  void emit_old(const Instruction& insn) { emit(insn, true); }
  // Emits an instruction whose code target is already final.
  void emit_new(const Instruction& insn) { emit(insn, false); }
  CodeAddr next() const { return out_.instructions.size(); }
  void label(const std::string& name, CodeAddr at) { out_.labels[name] = at; }

  Program finish() {
    map_[src_.size()] = out_.instructions.size();
    for (std::size_t i : fixups_) {
      Instruction& insn = out_.instructions[i];
      if (insn.op == Opcode::MOV_IMM) {
        insn.imm = static_cast<std::int64_t>(remap(static_cast<CodeAddr>(insn.imm)));
      } else {
        insn.target = remap(insn.target);
      }
    }
    for (const auto& [name, at] : src_.labels) out_.labels[name] = remap(at);
    out_.entry = remap(src_.entry);
    out_.data_segments = src_.data_segments;
    return std::move(out_);
  }

 private:
  CodeAddr remap(CodeAddr a) const { return a < map_.size() ? map_[a] : a; }

  void emit(const Instruction& insn, bool relocate) {
    const bool code_imm = insn.op == Opcode::MOV_IMM && insn.imm_is_code;
    if (relocate && (has_code_target(insn) || code_imm)) fixups_.push_back(out_.instructions.size());
    out_.instructions.push_back(insn);
  }

  const Program& src_;
  Program out_;
  std::vector<CodeAddr> map_;
  std::vector<std::size_t> fixups_;
};

bool already_hardened_ret(const Program& p, CodeAddr ret_index) {
  if (ret_index == 0) return false;
  for (const auto& [name, at] : p.labels) {
    if (at == ret_index - 1 && starts_with(name, kRetpolineNewPrefix)) return true;
  }
  return false;
}

std::size_t next_retpoline_id(const Program& p) {
  std::size_t next = 0;
  for (const auto& [name, at] : p.labels) {
    for (auto prefix : {kRetpolineSpecPrefix, kRetpolineNewPrefix}) {
      if (starts_with(name, prefix)) {
        try {
          next = std::max<std::size_t>(next, std::stoull(name.substr(prefix.size())) + 1);
        } catch (const std::exception&) {
        }
      }
    }
  }
  return next;
}

}  // namespace

Program apply_retpoline(const Program& p, HardeningStats* stats) {
  Relocator r(p);
  std::size_t id = next_retpoline_id(p);
  std::size_t rewritten = 0;
  for (CodeAddr i = 0; i < p.size(); ++i) {
    r.begin(i);
    const Instruction& insn = p.instructions[i];
    if (insn.op != Opcode::RET || already_hardened_ret(p, i)) {
      r.emit_old(insn);
      continue;
    }
    const CodeAddr call_at = r.next();
    const CodeAddr spec = call_at + 1, fresh = call_at + 3;
    r.emit_new(ins::call(fresh));
    r.emit_new(ins::pause());
    r.emit_new(ins::jmp(spec));
    r.emit_new(ins::alu_imm(Opcode::ADD, kSp, 8));
    r.emit_new(ins::ret());
    r.label(std::string(kRetpolineSpecPrefix) + std::to_string(id), spec);
    r.label(std::string(kRetpolineNewPrefix) + std::to_string(id), fresh);
    ++id;
    ++rewritten;
  }
  if (stats) *stats = {HardeningKind::Retpoline, rewritten};
  return r.finish();
}

Program apply_fence_after_call(const Program& p, HardeningStats* stats) {
  Relocator r(p);
  std::size_t rewritten = 0;
  for (CodeAddr i = 0; i < p.size(); ++i) {
    r.begin(i);
    const Instruction& insn = p.instructions[i];
    r.emit_old(insn);
    const bool is_call = insn.op == Opcode::CALL_DIRECT || insn.op == Opcode::CALL_INDIRECT;
    const bool fenced = i + 1 < p.size() && p.instructions[i + 1].op == Opcode::FENCE;
    if (is_call && !fenced) {
      r.emit_new(ins::fence());
      ++rewritten;
    }
  }
  if (stats) *stats = {HardeningKind::FenceAfterCall, rewritten};
  return r.finish();
}

namespace {

Machine prepare(const Program& p, const ProgramInput& in, const MachineConfig& config) {
  Machine m = Machine::for_program(p, config);
  for (const auto& [reg, value] : in.regs) m.regs.set(reg, value);
  for (const auto& seg : in.memory) m.mem.load_segment(seg);
  return m;
}

std::string status_of(const Machine& m) {
  if (m.fault) return "fault: " + m.fault->describe();
  return m.halted ? "halted" : "running";
}

// Memory with the stack range cleared, for comparison.
PhysicalMemory without_stack(const Machine& m) {
  PhysicalMemory copy = m.mem;
  copy.clear_range(m.config.stack_top - m.config.stack_size, m.config.stack_top);
  return copy;
}

std::string compare(const Machine& a, const Machine& b) {
  std::ostringstream os;
  for (RegId r = 0; r < kNumGeneralRegs; ++r) {
    if (a.regs.get(r) != b.regs.get(r)) {
      os << register_name(r) << ": " << a.regs.get(r) << " vs " << b.regs.get(r) << '\n';
    }
  }
  if (a.regs.sp != b.regs.sp) os << "sp: " << a.regs.sp << " vs " << b.regs.sp << '\n';
  if (a.halted != b.halted || a.fault.has_value() != b.fault.has_value() ||
      (a.fault && a.fault->kind != b.fault->kind)) {
    os << "status: " << status_of(a) << " vs " << status_of(b) << '\n';
  }
  if (!(without_stack(a) == without_stack(b))) os << "memory outside the stack differs\n";
  return os.str();
}

}  // namespace

EquivalenceReport verify_equivalence(const Program& original, const Program& hardened,
                                     const std::vector<ProgramInput>& inputs, const MachineConfig& config) {
  EquivalenceReport report;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto a = run_sequential(original, prepare(original, inputs[i], config));
    auto b = run_sequential(hardened, prepare(hardened, inputs[i], config));
    report.original_cycles += a.machine.cycle;
    report.hardened_cycles += b.machine.cycle;
    std::string diff = compare(a.machine, b.machine);
    if (!diff.empty() && report.equivalent) {
      report.equivalent = false;
      report.failing_input = i;
      report.divergence = diff;
    }
  }
  return report;
}

}  // namespace rsbsim
