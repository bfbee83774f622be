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
#include <sstream>
#include <stdexcept>
#include <thread>

#include "rsbsim/harden.hpp"
#include "rsbsim/scenarios.hpp"

namespace rsbsim {

namespace {

constexpr CodeAddr kVictimGadget = 256;
constexpr CodeAddr kMeasurerStart = 512;

std::string pad_to(std::size_t current, std::size_t target) {
  std::string out;
  for (std::size_t i = current; i < target; ++i) out += "  halt\n";
  return out;
}

std::string hex(Addr a) {
  std::ostringstream os;
  os << "0x" << std::hex << a;
  return os.str();
}

Program victim_program(bool flush_stack) {
  std::string src = ".entry main\nmain:\n  mov r12, " + hex(kCrossProbeBase) +
                    "\nloop:\n  call read_char\n  mov r3, r0\n  jmp loop\n"
                    "read_char:\n  call do_read\n  ret\n"
                    "do_read:\n  call sys_read\n  ret\n"
                    "sys_read:\n  syscall 0\n";
  std::size_t count = 11;
  if (flush_stack) {
    src += "  clflush [sp]\n";
    ++count;
  }
  src += "  ret\n";
  ++count;
  src += pad_to(count, kVictimGadget);
  src += "gadget:\n  shl r0, 12\n  load r1, [r12 + r0]\n  halt\n";
  return assemble(src);
}

Program attacker_program(CodeAddr gadget) {
  std::string src = ".entry main\nmain:\n  mov r1, 16\n  jmp fill\n";
  src += pad_to(2, gadget - 1);
  src += "fill:\n  call fill_body\n  halt\n";
  src += "fill_body:\n  add sp, 8\n  sub r1, 1\n  bne r1, r14, fill\n  syscall 1\n  jmp main\n";
  return assemble(src);
}

Program measurer_program() {
  std::string src = ".entry main\n" + pad_to(0, kMeasurerStart);
  src += "main:\n  mov r12, " + hex(kCrossProbeBase) + "\n  mov r11, " + hex(kMeasurerResults) +
         "\n  mov r6, 128\n"
         "loop:\n  mov r1, 0\n  mov r5, 0\n"
         "scan:\n"
         "  rdtsc r2\n"
         "  load r3, [r12 + r5]\n"
         "  rdtsc r4\n"
         "  sub r4, r2\n"
         "  mov r7, r1\n"
         "  shl r7, 3\n"
         "  store [r11 + r7], r4\n"
         "  clflush [r12 + r5]\n"
         "  add r5, 4096\n"
         "  add r1, 1\n"
         "  bne r1, r6, scan\n"
         "  call m1\n"
         "  jmp loop\n"
         // Yield three calls deep, like a process blocking inside a library.
         "m1:\n  call m2\n  ret\n"
         "m2:\n  call m3\n  ret\n"
         "m3:\n  syscall 1\n  ret\n";
  return assemble(src);
}

std::uint64_t sentence_seed(std::uint64_t seed, std::size_t sentence) {
  std::seed_seq seq{seed, static_cast<std::uint64_t>(sentence)};
  std::uint64_t out;
  seq.generate(reinterpret_cast<std::uint32_t*>(&out), reinterpret_cast<std::uint32_t*>(&out) + 2);
  return out;
}

}  // namespace

CrossProcessPrograms build_cross_process(const ScenarioConfig& config) {
  CrossProcessPrograms out;
  out.victim = victim_program(config.victim_flush_stack);
  if (config.retpoline) out.victim = apply_retpoline(out.victim);
  if (config.fence_after_call) out.victim = apply_fence_after_call(out.victim);
  out.gadget = out.victim.label("gadget");
  out.attacker = attacker_program(out.gadget);
  out.measurer = measurer_program();
  return out;
}

std::vector<InputEvent> cross_process_events(const ScenarioConfig& config) {
  if (!config.events.empty()) {
    for (std::size_t k = 1; k < config.events.size(); ++k) {
      if (config.events[k].at_cycle < config.events[k - 1].at_cycle) {
        throw std::invalid_argument("input events must be sorted by cycle");
      }
    }
    return config.events;
  }
  const Cycles cadence = config.cadence_ms * config.cycles_per_ms;
  std::vector<InputEvent> events;
  for (std::size_t k = 0; k < config.text.size(); ++k) {
    events.push_back({cadence * (k + 1), static_cast<std::uint8_t>(config.text[k])});
  }
  return events;
}

SentenceResult run_cross_process_sentence(const ScenarioConfig& config, std::size_t sentence, bool with_attacker) {
  const auto programs = build_cross_process(config);
  const std::uint64_t seed = sentence_seed(config.seed, sentence);
  System sys(config.machine, config.sched, kCrossShared, seed);
  if (with_attacker) sys.add_process("attacker", programs.attacker, kAttackerRange);
  sys.add_process("victim", programs.victim, kVictimRange);
  const int measurer = sys.add_process("measurer", programs.measurer, kMeasurerRange);

  const Cycles cadence = config.cadence_ms * config.cycles_per_ms;
  const std::vector<InputEvent> events = cross_process_events(config);
  std::string text;
  for (const auto& e : events) text += static_cast<char>(e.ch);
  sys.set_input(events);

  SentenceResult result;
  result.keystrokes.resize(text.size());
  for (std::size_t k = 0; k < text.size(); ++k) result.keystrokes[k].expected = text[k];

  const Cycles threshold = calibrate_threshold(sys.machine());
  std::mt19937_64 noise_rng(seed ^ 0x5eed);
  const ProbeArray probe{kCrossProbeBase, 128, kPageSize};
  sys.on_yield = [&](System& s, int pid) {
    if (pid != measurer) return;
    const Machine& m = s.machine();
    std::vector<Cycles> lat(probe.n_slots);
    for (std::size_t i = 0; i < probe.n_slots; ++i) {
      // The difference includes the cost of the second RDTSC.
      lat[i] = m.mem.read(kMeasurerResults + 8 * i, 8) - 1;
      if (config.flip_prob > 0.0 && std::uniform_real_distribution<double>(0.0, 1.0)(noise_rng) < config.flip_prob) {
        lat[i] = lat[i] < threshold ? m.config.cache.lat_mem : m.config.cache.lat_l1;
      }
    }
    auto hot = classify(std::move(lat), threshold).hot;
    result.hot_slots += hot.size();
    if (hot.size() == 1) result.recovered += static_cast<char>(hot[0]);
    // Attribute the observation to the last keystroke handed to the victim.
    const std::size_t delivered = events.size() - s.pending_input();
    if (delivered == 0) return;
    auto& ks = result.keystrokes[delivered - 1];
    if (!ks.recovered && hot.size() == 1) ks.recovered = static_cast<int>(hot[0]);
    ks.observations.push_back(std::move(hot));
  };
  const Cycles budget = (events.empty() ? 0 : events.back().at_cycle) + 2 * cadence;
  sys.run(budget, config.record_trace);
  result.cycles = sys.machine().cycle;
  if (config.record_trace) result.trace = sys.trace();
  return result;
}

ScenarioReport run_cross_process(const ScenarioConfig& config) {
  const std::size_t n = std::max<std::size_t>(1, config.trials);
  std::vector<SentenceResult> results(n);
  const unsigned jobs = std::max(1u, std::min<unsigned>(config.jobs, static_cast<unsigned>(n)));
  auto work = [&](unsigned worker) {
    for (std::size_t i = worker; i < n; i += jobs) {
      ScenarioConfig c = config;
      c.record_trace = config.record_trace && i == 0;
      results[i] = run_cross_process_sentence(c, i);
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
  report.name = "cross-process";
  for (const auto& e : cross_process_events(config)) report.ground_truth += static_cast<char>(e.ch);
  if (config.record_trace) report.trace_text = results[0].trace.format();
  report.recovered = results[0].recovered;
  report.levenshtein_distance = levenshtein(report.ground_truth, report.recovered);
  report.precision = precision(report.ground_truth, report.recovered);
  report.sentences = n;
  double total_precision = 0.0, total_distance = 0.0;
  std::size_t correct = 0, keystrokes = 0;
  Cycles cycles = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total_precision += precision(report.ground_truth, results[i].recovered);
    total_distance += static_cast<double>(levenshtein(report.ground_truth, results[i].recovered));
    cycles += results[i].cycles;
    report.hot_slots += results[i].hot_slots;
    for (std::size_t k = 0; k < results[i].keystrokes.size(); ++k) {
      const auto& ks = results[i].keystrokes[k];
      ByteResult b{i, k, static_cast<unsigned char>(ks.expected), ks.recovered};
      correct += b.correct();
      ++keystrokes;
      report.per_byte.push_back(b);
    }
  }
  report.mean_precision = total_precision / static_cast<double>(n);
  report.mean_distance = total_distance / static_cast<double>(n);
  report.byte_accuracy = keystrokes ? static_cast<double>(correct) / static_cast<double>(keystrokes) : 0.0;
  report.cycles = cycles;
  const double seconds = static_cast<double>(cycles) / (static_cast<double>(config.cycles_per_ms) * 1000.0);
  report.bytes_per_second_sim = seconds > 0 ? static_cast<double>(correct) / seconds : 0.0;
  return report;
}

}  // namespace rsbsim
