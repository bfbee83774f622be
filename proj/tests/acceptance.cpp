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

// Acceptance suite: one PASS/FAIL line per criterion. Thresholds and runtime
// limits are fixed here; presets come from the shipped configs/ directory.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "reference_models.hpp"
#include "rsbsim/config.hpp"
#include "rsbsim/fuzz.hpp"
#include "rsbsim/harden.hpp"
#include "rsbsim/scenarios.hpp"
#include "rsbsim/sidechannel.hpp"

namespace {

using namespace rsbsim;

struct Verdict {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) ok = false;
    if (detail.tellp() > 0) detail << "; ";
    detail << what << (cond ? "" : " [violated]");
  }
};

std::string num(double v, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

ScenarioConfig preset(const std::string& file) {
  RunConfig rc;
  rc.load_file(std::string(RSBSIM_SOURCE_DIR) + "/configs/" + file);
  return rc.scenario();
}

constexpr Cycles kFuzzBudget = 50'000'000;

// 1. Trigger fidelity.
void trigger_fidelity(Verdict& v) {
  for (RsbVariant variant : {RsbVariant::Cyclic, RsbVariant::StopOnUnderflow, RsbVariant::BtbFallback}) {
    ScenarioConfig c;
    c.machine.rsb_variant = variant;
    const TriggerReport r = demo_triggers(c);
    const std::string name(to_string(variant));
    const std::size_t expected = variant == RsbVariant::Cyclic ? 4 : 3;
    v.require(r.applicable_triggers() == expected && r.mispredicted_triggers() == expected,
              name + " " + std::to_string(r.mispredicted_triggers()) + "/" + std::to_string(expected));
    const TriggerResult& a = r.triggers[0];
    v.require(a.highlighted.size() >= 3 && a.mispredictions() == a.highlighted.size(),
              name + " (a) chain of " + std::to_string(a.mispredictions()) + " mispredictions");
    const TriggerResult& d = r.triggers[3];
    if (variant == RsbVariant::Cyclic) {
      const bool h_not_d = d.highlighted.size() == 1 && d.highlighted[0].predicted_name == "h+1" &&
                           d.highlighted[0].actual_name == "d+1";
      v.require(h_not_d, "cyclic (d) return from e predicts h+1, actual d+1");
    } else {
      v.require(!d.applicable, name + " (d) not applicable");
    }
  }
}

// 2. RSB variant semantics against brute-force models.
void rsb_semantics(Verdict& v) {
  std::mt19937_64 rng(0x75b);
  std::size_t mismatches = 0;
  const int sequences = 10'000;
  for (int seq = 0; seq < sequences; ++seq) {
    const std::size_t n = 1 + rng() % 24;
    ReturnStackBuffer cyc(n, RsbVariant::Cyclic), stop(n, RsbVariant::StopOnUnderflow),
        fb(n, RsbVariant::BtbFallback);
    BranchTargetBuffer btb(32);
    reference::BtbModel btb_model(32);
    reference::RingModel ring(n);
    reference::StackModel stack(n);
    for (int op = 0; op < 64; ++op) {
      if (rng() % 4 == 0) {
        const CodeAddr s = rng() % 128, t = rng() % 4096;
        btb.update(s, t);
        btb_model.update(s, t);
      }
      if (rng() % 2) {
        const CodeAddr a = 1 + rng() % 4096;
        cyc.push(a);
        stop.push(a);
        fb.push(a);
        ring.push(a);
        stack.push(a);
      } else {
        const CodeAddr site = rng() % 128;
        const auto expected = stack.pop();
        mismatches += cyc.predict_pop(btb, site) != std::optional<CodeAddr>(ring.pop());
        mismatches += stop.predict_pop(btb, site) != expected;
        mismatches += fb.predict_pop(btb, site) != (expected ? expected : btb_model.lookup(site));
      }
    }
  }
  v.require(mismatches == 0, std::to_string(sequences) + " sequences x 3 variants, " + std::to_string(mismatches) +
                                 " mismatches");
}

// 3. Sequential and speculative engines agree on 500 fuzzed programs.
void engine_equivalence(Verdict& v) {
  std::size_t divergences = 0, mispredicted = 0;
  for (int seed = 0; seed < 500; ++seed) {
    const Program p = fuzz_program(seed);
    Machine init = Machine::for_program(p);
    init.log_returns = true;
    const SequentialResult seq = run_sequential(p, init);
    const RunResult spec = run(p, init, kFuzzBudget, false);
    divergences += seq.status != RunStatus::Halted || spec.status != RunStatus::Halted ||
                   !same_architectural_state(seq.machine, spec.machine);
    for (const auto& r : spec.machine.return_log) mispredicted += r.mispredicted();
  }
  v.require(divergences == 0, "500 programs, " + std::to_string(divergences) + " divergences");
  v.require(mispredicted > 0, std::to_string(mispredicted) + " mispredicted returns exercised");
}

// 4. Cross-process keystroke leak.
void cross_process_leak(Verdict& v) {
  ScenarioConfig det = preset("cross-process.conf");
  const ScenarioReport r = run_cross_process(det);
  v.require(r.recovered == std::string(kPangram) && r.precision == 1.0,
            "deterministic precision " + num(r.precision));
  const ScenarioConfig jit = preset("cross-process-jitter.conf");
  const ScenarioReport j = run_cross_process(jit);
  v.require(j.sentences == 1000, std::to_string(j.sentences) + " sentences");
  v.require(j.mean_precision >= 0.84, "jitter " + num(jit.sched.jitter, 2) + " mean precision " +
                                          num(j.mean_precision) + " >= 0.84 (mean distance " +
                                          num(j.mean_distance, 2) + ")");
}

// 5. RSB refill on context switch stops the cross-process leak.
void flush_kill_switch(Verdict& v) {
  const ScenarioReport det = run_cross_process(preset("cross-process-flush.conf"));
  v.require(det.hot_slots == 0, "deterministic hot slots " + std::to_string(det.hot_slots));
  ScenarioConfig jit = preset("cross-process-jitter.conf");
  jit.sched.flush_rsb_on_switch = true;
  jit.trials = 200;
  const ScenarioReport j = run_cross_process(jit);
  v.require(j.byte_accuracy <= 2.0 / 128.0, "jittered keystroke accuracy " + num(j.byte_accuracy) + " <= 2/128");
}

std::size_t reloads_per_trial(const ScenarioReport& r) {
  const std::string prefix = "probe reloads per byte per trial: ";
  for (const auto& n : r.notes) {
    if (n.rfind(prefix, 0) == 0) return std::stoul(n.substr(prefix.size()));
  }
  return 0;
}

// 6. In-process leak.
void in_process_leak(Verdict& v) {
  const ScenarioConfig det = preset("in-process.conf");
  v.require(det.n_a == 64 && det.trials == 100 && det.secret_len == 1024 && kProbeOffset == 0x4000,
            "N_A 64, 100 trials, 1024 bytes, probe at heap+0x4000");
  const ScenarioReport r = run_in_process(det);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < r.recovered.size(); ++i) correct += r.recovered[i] == r.ground_truth[i];
  v.require(correct == 1024, "deterministic " + std::to_string(correct) + "/1024 bytes");
  v.require(reloads_per_trial(r) == 32, std::to_string(reloads_per_trial(r)) + " reloads per byte per trial");
  const ScenarioConfig noisy = preset("in-process-noise.conf");
  const ScenarioReport n = run_in_process(noisy);
  v.require(n.byte_accuracy >= 0.80, "noise flip_prob " + num(noisy.flip_prob, 2) + " accuracy " +
                                         num(n.byte_accuracy) + " >= 0.80");
}

// 7. Indirect variant reads an absolute address outside the sandbox.
void indirect_hijack(Verdict& v) {
  ScenarioConfig c = preset("in-process-indirect.conf");
  const bool outside = kAbsoluteSecret + c.secret_len <= kHeapBase || kAbsoluteSecret >= kHeapBase + kHeapSize;
  v.require(outside, "secret at absolute 0x" + [] {
    std::ostringstream os;
    os << std::hex << kAbsoluteSecret;
    return os.str();
  }() + " outside the sandbox");
  c.text = "absolute!";
  const Machine m = in_process_machine(c);
  v.require(m.mem.read_byte(kHeapBase + kSecretOffset) == 0 && m.mem.read_byte(kAbsoluteSecret) == 'a',
            "nothing planted inside the heap");
  const ScenarioReport r = run_in_process(c);
  v.require(r.recovered == r.ground_truth, "recovered " + std::to_string(r.recovered.size()) + " bytes exactly");
}

// 8. Retpoline: preserves behavior, stops the leak, traps speculation.
void retpoline(Verdict& v) {
  std::size_t divergences = 0;
  for (int seed = 0; seed < 500; ++seed) {
    const Program p = fuzz_program(seed);
    divergences += !verify_equivalence(p, apply_retpoline(p), {ProgramInput{}}).equivalent;
  }
  v.require(divergences == 0, "fuzz corpus 500, " + std::to_string(divergences) + " divergences");

  ScenarioConfig c = preset("in-process.conf");
  c.retpoline = true;
  const ScenarioReport r = run_in_process(c);
  v.require(r.byte_accuracy <= 2.0 / 256.0, "leak accuracy " + num(r.byte_accuracy) + " <= 2/256");

  const InProcessPrograms programs = build_in_process(c);
  std::set<CodeAddr> traps;
  for (const auto& [name, addr] : programs.low.labels) {
    if (name.rfind(kRetpolineSpecPrefix, 0) == 0) traps.insert(addr);
  }
  Machine m = in_process_machine(c);
  c.trials = 1;
  std::mt19937_64 rng(1);
  Trace trace;
  leak_byte(m, programs, c, kSecretOffset, rng, &trace);
  std::size_t entries = 0, stray = 0;
  for (const auto& e : trace) {
    if (e.kind == EventKind::SpecEnter) {
      ++entries;
      stray += !traps.count(*e.predicted);
    }
    if (e.kind == EventKind::Spec) stray += e.mnemonic != "pause" && e.mnemonic != "jmp";
  }
  v.require(entries > 0 && stray == 0, std::to_string(entries) + " speculative returns, all into the trap");
}

// 9. Flush+Reload soundness.
void sidechannel_soundness(Verdict& v) {
  Machine m;
  const ProbeArray pa{0x200'0000, 128, kPageSize};
  const Cycles threshold = calibrate_threshold(m);
  std::mt19937_64 rng(99);
  std::size_t false_positives = 0, wrong = 0;
  for (int t = 0; t < 1000; ++t) {
    flush_all(m, pa);
    false_positives += reload_and_time(m, pa, threshold, &rng).hot.size();
  }
  for (int t = 0; t < 1000; ++t) {
    const std::size_t slot = rng() % pa.n_slots;
    flush_all(m, pa);
    access(m.caches, m.mem, pa.slot_addr(slot), false, false, 0, 1);
    wrong += reload_and_time(m, pa, threshold, &rng).hot != std::vector<std::size_t>{slot};
  }
  v.require(false_positives == 0, "1000 idle trials, " + std::to_string(false_positives) + " hot slots");
  v.require(wrong == 0, "1000 planted accesses, " + std::to_string(wrong) + " wrong hot sets");
}

struct Criterion {
  int id;
  std::string name;
  double limit_seconds;
  std::function<void(Verdict&)> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "trigger fidelity", 1, trigger_fidelity},
      {2, "RSB variant semantics", 10, rsb_semantics},
      {3, "architectural equivalence of the engines", 30, engine_equivalence},
      {4, "cross-process leak", 120, cross_process_leak},
      {5, "RSB refill on context switch", 30, flush_kill_switch},
      {6, "in-process leak", 180, in_process_leak},
      {7, "indirect-call base hijack", 10, indirect_hijack},
      {8, "retpoline", 60, retpoline},
      {9, "side-channel soundness", 10, sidechannel_soundness},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    v.require(secs < c.limit_seconds, num(secs, 1) + " s < " + num(c.limit_seconds, 0) + " s");
    failed += !v.ok;
    std::cout << (v.ok ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << v.detail.str() << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
