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

#include <sstream>

#include "rsbsim/scenarios.hpp"

namespace rsbsim {

namespace {

constexpr Cycles kTriggerBudget = 10'000'000;

// Three filler instructions after a call site keep a speculatively reached
// return site from issuing its own RET before the outer one resolves.
constexpr const char* kPad = "  mov r0, 1\n  mov r0, 2\n  mov r0, 3\n";

std::string name_of(const Program& p, std::optional<CodeAddr> addr, const std::string& prefix = "") {
  if (!addr) return "-";
  if (*addr >= kKernelCodeBase) return "kernel+" + std::to_string(*addr - kKernelCodeBase);
  const std::string* best = nullptr;
  CodeAddr best_at = 0;
  for (const auto& [name, at] : p.labels) {
    if (at <= *addr && (!best || at > best_at)) {
      best = &name;
      best_at = at;
    }
  }
  std::string out = prefix;
  if (!best) return out + std::to_string(*addr);
  out += *best;
  if (*addr != best_at) out += "+" + std::to_string(*addr - best_at);
  return out;
}

std::vector<Resolution> resolutions(const std::vector<ReturnRecord>& log, const Program& own,
                                    const Program& predictor_source, const std::string& source_prefix) {
  std::vector<Resolution> out;
  for (const auto& r : log) {
    Resolution res;
    res.ret_pc = r.ret_pc;
    res.predicted = r.predicted;
    res.actual = r.actual;
    res.mispredicted = r.mispredicted();
    res.predicted_name = name_of(predictor_source, r.predicted, source_prefix);
    res.actual_name = name_of(own, r.actual);
    out.push_back(std::move(res));
  }
  return out;
}

std::vector<Resolution> pick(const std::vector<Resolution>& all, const std::vector<CodeAddr>& ret_pcs) {
  std::vector<Resolution> out;
  for (CodeAddr pc : ret_pcs) {
    for (const auto& r : all) {
      if (r.ret_pc == pc) {
        out.push_back(r);
        break;
      }
    }
  }
  return out;
}

Machine logging_machine(const Program& p, const MachineConfig& cfg) {
  Machine m = Machine::for_program(p, cfg);
  m.log_returns = true;
  return m;
}

TriggerResult exception_unwind(const MachineConfig& cfg, Trace& trace) {
  std::string src = "main:\n  call a\n  halt\n";
  src += std::string("a:\n  call b\n") + kPad + "  ret\n";
  src += std::string("b:\n  call c\n") + kPad + "  ret\n";
  src += std::string("c:\n  mov r9, sp\n  call x\nc_catch:\n") + kPad + "  ret\n";
  src += std::string("x:\n  call y\n") + kPad + "  ret\n";
  src += std::string("y:\n  call z\n") + kPad + "  ret\n";
  src += "z:\n  mov sp, r9\n  jmp c_catch\n";
  const Program p = assemble(src);
  auto r = run(p, logging_machine(p, cfg), kTriggerBudget);
  trace.insert(trace.end(), r.trace.begin(), r.trace.end());
  TriggerResult t;
  t.name = "a";
  t.description = "exception unwind: z restores c's sp and jumps to its handler, skipping x, y, z";
  t.resolutions = resolutions(r.machine.return_log, p, p, "");
  t.highlighted = pick(t.resolutions, {p.label("c_catch") + 3, p.label("b") + 4, p.label("a") + 4});
  return t;
}

TriggerResult context_switch(const MachineConfig& cfg, const SchedulerConfig& sched, Trace& trace) {
  const Program p2 = assemble(std::string("main:\n  call f\n") + kPad + "  syscall 2\n" + "f:\n  call g\n" + kPad +
                              "  ret\ng:\n  syscall 1\n  ret\n");
  std::string p1_src = "main:\n  call a\n  syscall 2\n";
  const std::string chain = "abcde";
  for (std::size_t k = 0; k < chain.size(); ++k) {
    p1_src += std::string(1, chain[k]) + ":\n";
    p1_src += k + 1 < chain.size() ? "  call " + std::string(1, chain[k + 1]) + "\n" : "  syscall 1\n";
    p1_src += "  ret\n";
  }
  const Program p1 = assemble(p1_src);
  SchedulerConfig s = sched;
  s.jitter = 0.0;
  System sys(cfg, s, {0x10000, 0x1000}, 1);
  sys.machine().log_returns = true;
  const int second = sys.add_process("p2", p2, {0x1000'0000, 0x10'0000});
  sys.add_process("p1", p1, {0x2000'0000, 0x10'0000});
  sys.run(kTriggerBudget, true);
  for (const auto& e : sys.trace().per_process[second]) trace.push_back(e);
  TriggerResult t;
  t.name = "b";
  t.description = "context switch: p2 yields inside g, p1 yields five calls deep, p2 resumes and returns";
  t.resolutions = resolutions(sys.process(second).return_log, p2, p1, "p1:");
  t.highlighted = pick(t.resolutions, {p2.label("g") + 1, p2.label("f") + 4});
  return t;
}

TriggerResult overwrite(const MachineConfig& cfg, Trace& trace) {
  const Program p = assemble(std::string("main:\n  call f\n") + kPad +
                             "  halt\nx:\n  halt\nf:\n  mov r0, @x\n  store [sp], r0\n  ret\n");
  auto r = run(p, logging_machine(p, cfg), kTriggerBudget);
  trace.insert(trace.end(), r.trace.begin(), r.trace.end());
  TriggerResult t;
  t.name = "c";
  t.description = "return address overwrite: f stores @x to [sp] and returns";
  t.resolutions = resolutions(r.machine.return_log, p, p, "");
  t.highlighted = pick(t.resolutions, {p.label("f") + 2});
  return t;
}

TriggerResult cyclic_overflow(MachineConfig cfg, Trace& trace) {
  TriggerResult t;
  t.name = "d";
  t.description = "cyclic overflow: 4-entry RSB, calls a -> b -> ... -> i";
  if (cfg.rsb_variant != RsbVariant::Cyclic) {
    t.applicable = false;
    return t;
  }
  cfg.rsb_size = 4;
  std::string src = "main:\n  call a\n  halt\n";
  const std::string names = "abcdefghi";
  for (std::size_t k = 0; k < names.size(); ++k) {
    src += std::string(1, names[k]) + ":\n";
    if (k + 1 < names.size()) src += "  call " + std::string(1, names[k + 1]) + "\n";
    src += "  ret\n";
  }
  const Program p = assemble(src);
  auto r = run(p, logging_machine(p, cfg), kTriggerBudget);
  trace.insert(trace.end(), r.trace.begin(), r.trace.end());
  t.resolutions = resolutions(r.machine.return_log, p, p, "");
  t.highlighted = pick(t.resolutions, {p.label("e") + 1});
  return t;
}

}  // namespace

std::size_t TriggerResult::mispredictions() const {
  std::size_t n = 0;
  for (const auto& r : highlighted) n += r.mispredicted;
  return n;
}

std::size_t TriggerReport::mispredicted_triggers() const {
  std::size_t n = 0;
  for (const auto& t : triggers) n += t.applicable && !t.highlighted.empty() && t.mispredictions() == t.highlighted.size();
  return n;
}

std::size_t TriggerReport::applicable_triggers() const {
  std::size_t n = 0;
  for (const auto& t : triggers) n += t.applicable;
  return n;
}

std::string TriggerReport::text() const {
  std::ostringstream os;
  os << "scenario triggers (rsb.variant = " << to_string(variant) << ")\n";
  for (const auto& t : triggers) {
    os << '(' << t.name << ") " << t.description << '\n';
    if (!t.applicable) {
      os << "    not applicable: needs a cyclic RSB\n";
      continue;
    }
    for (const auto& r : t.highlighted) {
      os << "    ret at " << r.ret_pc << ": predicted " << r.predicted_name << ", actual " << r.actual_name
         << (r.mispredicted ? "  MISPREDICTED" : "  correct") << '\n';
    }
    os << "    " << t.mispredictions() << " of " << t.highlighted.size() << " returns mispredicted\n";
  }
  os << "mispredicted triggers: " << mispredicted_triggers() << '/' << applicable_triggers() << '\n';
  return os.str();
}

TriggerReport demo_triggers(const ScenarioConfig& config) {
  TriggerReport report;
  report.variant = config.machine.rsb_variant;
  report.triggers.push_back(exception_unwind(config.machine, report.trace));
  report.triggers.push_back(context_switch(config.machine, config.sched, report.trace));
  report.triggers.push_back(overwrite(config.machine, report.trace));
  report.triggers.push_back(cyclic_overflow(config.machine, report.trace));
  return report;
}

}  // namespace rsbsim
