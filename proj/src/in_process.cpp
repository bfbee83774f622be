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

#include <algorithm>
#include <array>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "rsbsim/harden.hpp"
#include "rsbsim/scenarios.hpp"

namespace rsbsim {

namespace {

constexpr std::size_t kProbeSlots = 16;
constexpr Cycles kRunBudget = 10'000'000;

std::string hex(Addr a) {
  std::ostringstream os;
  os << "0x" << std::hex << a;
  return os.str();
}

std::string call_b(bool indirect) { return indirect ? "  mov r1, @B\n  call r1\n" : "  call B\n"; }

ProbeArray probe_array() { return ProbeArray{kHeapBase + kProbeOffset, kProbeSlots, kPageSize}; }

std::size_t llc_set(const CacheConfig& c, Addr addr) { return (addr / c.line_size) % c.llc_sets; }

void plant(PhysicalMemory& mem, Addr base, const std::string& text, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) {
    mem.write(base + i, static_cast<unsigned char>(text[i % text.size()]), 1);
  }
}

}  // namespace

Program build_in_process(std::size_t n_a, std::size_t n_b, bool indirect, bool high_nibble) {
  if (n_a == 0) throw std::invalid_argument("n_a must be at least 1");
  if (n_b == 0) throw std::invalid_argument("n_b must be at least 1");
  const Addr feedback = indirect ? kHeapBase + kProbeOffset : kProbeOffset;
  std::string src = ".entry main\nmain:\n";
  src += "  mov r15, " + hex(kHeapBase) + "\n";
  src += "  mov r13, " + hex(kVictimContext) + "\n";
  src += "  mov r8, " + hex(kAttackerContext) + "\n";
  src += "  mov r9, " + hex(feedback) + "\n";
  src += "  mov r3, " + std::to_string(n_a - 1) + "\n";
  src += "  sub sp, 8\n  store [sp], r8\n  call A\n  add sp, 8\n  halt\n";

  src += "A:\n  beq r3, r14, a_base\n  sub r3, 1\n";
  src += "  sub sp, " + std::to_string(kFrameBytes) + "\n  store [sp], r8\n  call A\n";
  src += "  add sp, " + std::to_string(kFrameBytes) + "\n  mov r0, r10\n  mov r2, r9\n  ret\n";
  src += "a_base:\n  mov r4, " + std::to_string(n_b) + "\n  mov r0, 0\n  mov r2, " + hex(kScratchOffset) + "\n";
  src += call_b(indirect);
  src += "  mov r0, r10\n  mov r2, r9\n  ret\n";

  src += "B:\n  beq r4, r14, b_base\n  sub r4, 1\n  sub sp, 8\n  store [sp], r13\n";
  src += call_b(indirect);
  if (indirect) src += "  load r6, [sp]\n  load r15, [r6 + 24]\n";
  src += "  loadb r0, [r15 + r0]\n";
  src += high_nibble ? "  and r0, 0xf0\n  shl r0, 8\n" : "  and r0, 0xf\n  shl r0, 12\n";
  src += "  add r0, r2\n  loadb r1, [r15 + r0]\n";
  src += "  and r0, " + hex(kHeapMask) + "\n  mov r2, " + hex(kScratchOffset) + "\n  add sp, 8\n  ret\n";
  src += "b_base:\n  mov r0, 0\n  mov r2, " + hex(kScratchOffset) + "\n  ret\n";
  return assemble(src);
}

InProcessPrograms build_in_process(const ScenarioConfig& config) {
  InProcessPrograms out{build_in_process(config.n_a, config.machine.rsb_size, config.indirect, false),
                        build_in_process(config.n_a, config.machine.rsb_size, config.indirect, true)};
  for (Program* p : {&out.low, &out.high}) {
    if (config.retpoline) *p = apply_retpoline(*p);
    if (config.fence_after_call) *p = apply_fence_after_call(*p);
  }
  return out;
}

Machine in_process_machine(const ScenarioConfig& config) {
  Machine m(config.machine);
  m.mem.write(kVictimContext + 24, kHeapBase, 8);
  m.mem.write(kAttackerContext + 24, 0, 8);
  // Only the copy the variant targets exists, so a leak cannot come from the
  // other location.
  plant(m.mem, config.indirect ? kAbsoluteSecret : kHeapBase + kSecretOffset, config.text, config.secret_len);
  return m;
}

ByteLeak leak_byte(Machine& m, const InProcessPrograms& programs, const ScenarioConfig& config,
                   Addr target, std::mt19937_64& rng, Trace* trace) {
  const ProbeArray pa = probe_array();
  const Cycles threshold = calibrate_threshold(m);
  const bool noisy = config.flip_prob > 0.0 || config.spurious_fill > 0.0;
  const ReloadNoise noise{config.flip_prob};
  std::bernoulli_distribution spurious(config.spurious_fill);
  std::uniform_int_distribution<std::size_t> any_slot(0, kProbeSlots - 1);

  ByteLeak out;
  const Cycles start = m.cycle;
  std::array<std::array<Cycles, kProbeSlots>, 2> latency_sum{};
  std::map<int, std::size_t> votes;

  for (std::size_t trial = 0; trial < config.trials; ++trial) {
    std::array<std::vector<std::size_t>, 2> hot;
    for (int half = 0; half < 2; ++half) {
      const Program& p = half == 0 ? programs.low : programs.high;
      for (std::size_t s = 0; s < kProbeSlots; ++s) {
        evict_set_by_walking(m.caches, m.mem, llc_set(config.machine.cache, pa.slot_addr(s)));
      }
      m.regs = RegisterFile{};
      m.regs.sp = config.machine.stack_top;
      m.regs.pc = p.entry;
      m.regs.set(kTargetReg, target);
      m.halted = false;
      m.fault.reset();
      const Cycles limit = m.cycle + kRunBudget;
      Trace* t = trial == 0 && half == 0 ? trace : nullptr;
      while (!m.stopped() && m.cycle < limit) {
        if (m.pending_syscall) throw std::logic_error("in-process program issued a syscall");
        step_speculative(m, p, t);
      }
      if (!m.halted) throw std::runtime_error("in-process program did not halt");
      if (spurious(rng)) m.caches.touch(pa.slot_addr(any_slot(rng)));
      const MeasurementResult r = reload_and_time(m, pa, threshold, &rng, noise);
      out.reloads += pa.n_slots;
      for (std::size_t s = 0; s < kProbeSlots; ++s) latency_sum[half][s] += r.latencies[s];
      hot[half] = r.hot;
    }
    std::optional<int> v;
    if (auto b = decode_nibbles(hot[0], hot[1])) v = *b;
    out.per_trial.push_back(v);
    if (v) ++votes[*v];
  }

  if (noisy) {
    auto fastest = [&](int half) {
      const auto& sums = latency_sum[half];
      return static_cast<int>(std::min_element(sums.begin(), sums.end()) - sums.begin());
    };
    out.value = fastest(1) << 4 | fastest(0);
  } else if (!votes.empty()) {
    out.value = std::max_element(votes.begin(), votes.end(), [](const auto& a, const auto& b) {
                  return a.second < b.second;
                })->first;
  }
  out.cycles = m.cycle - start;
  return out;
}

ScenarioReport run_in_process(const ScenarioConfig& config) {
  if (config.machine.rsb_variant != RsbVariant::Cyclic) {
    throw std::invalid_argument(
        "the in-process attack needs a cyclic RSB: once B unwinds, the returns of A must "
        "still be predicted from the wrapped-around entries");
  }
  if (config.text.empty()) throw std::invalid_argument("secret text must not be empty");
  const InProcessPrograms programs = build_in_process(config);
  const Machine initial = in_process_machine(config);
  const std::size_t n = config.secret_len;

  std::vector<ByteLeak> leaks(n);
  Trace trace;
  const unsigned jobs = std::max(1u, std::min<unsigned>(config.jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  auto work = [&](unsigned worker) {
    for (std::size_t i = worker; i < n; i += jobs) {
      Machine m = initial;
      std::seed_seq seq{config.seed, static_cast<std::uint64_t>(i)};
      std::mt19937_64 rng(seq);
      const Addr target = config.indirect ? kAbsoluteSecret + i : kSecretOffset + i;
      leaks[i] = leak_byte(m, programs, config, target, rng, config.record_trace && i == 0 ? &trace : nullptr);
    }
  };
  if (jobs == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < jobs; ++w) threads.emplace_back(work, w);
    for (auto& t : threads) t.join();
  }

  ScenarioReport report;
  report.name = config.indirect ? "in-process-indirect" : "in-process";
  report.trace_text = format_trace(trace);
  std::size_t correct = 0, reloads = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const char expected = config.text[i % config.text.size()];
    report.ground_truth += expected;
    report.recovered += leaks[i].value ? static_cast<char>(*leaks[i].value) : '?';
    for (std::size_t t = 0; t < leaks[i].per_trial.size(); ++t) {
      report.per_byte.push_back(ByteResult{t, i, static_cast<unsigned char>(expected), leaks[i].per_trial[t]});
    }
    const ByteResult decided{config.trials, i, static_cast<unsigned char>(expected), leaks[i].value};
    correct += decided.correct();
    reloads += leaks[i].reloads;
    report.cycles += leaks[i].cycles;
  }
  report.levenshtein_distance = levenshtein(report.ground_truth, report.recovered);
  report.precision = precision(report.ground_truth, report.recovered);
  report.mean_precision = report.precision;
  report.mean_distance = static_cast<double>(report.levenshtein_distance);
  report.byte_accuracy = n ? static_cast<double>(correct) / static_cast<double>(n) : 0.0;
  const double seconds = static_cast<double>(report.cycles) / (static_cast<double>(config.cycles_per_ms) * 1000.0);
  report.bytes_per_second_sim = seconds > 0 ? static_cast<double>(correct) / seconds : 0.0;
  std::ostringstream note;
  note << "probe reloads per byte per trial: "
       << (n && config.trials ? reloads / (n * config.trials) : 0);
  report.notes.push_back(note.str());
  return report;
}

}  // namespace rsbsim
