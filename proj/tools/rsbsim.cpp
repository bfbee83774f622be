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

// rsbsim command-line driver: assemble and inspect programs, run them under
// either engine, and run the attack scenarios.
//
// Exit codes: 0 success, 1 --check failed, 2 usage or config error, 3 I/O
// error.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rsbsim/config.hpp"
#include "rsbsim/harden.hpp"
#include "rsbsim/scenarios.hpp"

namespace {

using namespace rsbsim;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw IoError("cannot write " + path);
}

// One instruction per line, prefixed by its code address.
std::string listing(const Program& p) {
  std::multimap<CodeAddr, std::string> by_addr;
  for (const auto& [name, addr] : p.labels) by_addr.emplace(addr, name);
  std::ostringstream os;
  for (CodeAddr i = 0; i < p.size(); ++i) {
    auto [lo, hi] = by_addr.equal_range(i);
    for (auto it = lo; it != hi; ++it) os << "      " << it->second << ":\n";
    char addr[16];
    std::snprintf(addr, sizeof addr, "%4llu", static_cast<unsigned long long>(i));
    os << addr << (i == p.entry ? " >  " : "    ") << format_instruction(p.instructions[i]) << '\n';
  }
  return os.str();
}

Program assemble_file(const std::string& path) { return assemble(read_file(path)); }

struct CheckLine {
  bool ok;
  std::string what;
};

std::vector<CheckLine> check_triggers(const TriggerReport& r) {
  std::vector<CheckLine> out;
  const std::size_t expected = r.variant == RsbVariant::Cyclic ? 4 : 3;
  out.push_back({r.applicable_triggers() == expected,
                 "applicable triggers " + std::to_string(r.applicable_triggers()) + " == " + std::to_string(expected)});
  out.push_back({r.mispredicted_triggers() == r.applicable_triggers(),
                 "mispredicting triggers " + std::to_string(r.mispredicted_triggers()) + " == applicable"});
  for (const auto& t : r.triggers) {
    if (!t.applicable) continue;
    bool all = !t.highlighted.empty();
    for (const auto& h : t.highlighted) all = all && h.mispredicted;
    out.push_back({all, "(" + t.name + ") highlighted returns mispredict"});
  }
  return out;
}

std::string fixed4(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << v;
  return os.str();
}

std::vector<CheckLine> check_cross_process(const ScenarioReport& r, const ScenarioConfig& c) {
  const bool noiseless = c.sched.jitter == 0.0 && c.flip_prob == 0.0;
  if (c.sched.flush_rsb_on_switch) {
    std::vector<CheckLine> out{{r.byte_accuracy <= 2.0 / 128.0,
                                "keystroke accuracy " + fixed4(r.byte_accuracy) + " <= 2/128"}};
    if (noiseless) out.push_back({r.hot_slots == 0, "hot slots " + std::to_string(r.hot_slots) + " == 0"});
    return out;
  }
  if (noiseless) return {{r.mean_precision == 1.0, "mean precision " + fixed4(r.mean_precision) + " == 1"}};
  return {{r.mean_precision >= 0.84, "mean precision " + fixed4(r.mean_precision) + " >= 0.84"}};
}

std::vector<CheckLine> check_in_process(const ScenarioReport& r, const ScenarioConfig& c) {
  if (c.retpoline || c.fence_after_call) {
    return {{r.byte_accuracy <= 2.0 / 256.0, "byte accuracy " + fixed4(r.byte_accuracy) + " <= 2/256"}};
  }
  if (c.flip_prob > 0.0 || c.spurious_fill > 0.0) {
    return {{r.byte_accuracy >= 0.80, "byte accuracy " + fixed4(r.byte_accuracy) + " >= 0.80"}};
  }
  return {{r.byte_accuracy == 1.0, "byte accuracy " + fixed4(r.byte_accuracy) + " == 1"}};
}

int report_checks(const std::vector<CheckLine>& lines) {
  bool ok = true;
  for (const auto& l : lines) {
    std::cout << "check: " << (l.ok ? "PASS " : "FAIL ") << l.what << '\n';
    ok = ok && l.ok;
  }
  return ok ? kExitOk : kExitCheckFailed;
}

std::string triggers_csv(const TriggerReport& r) {
  std::ostringstream os;
  os << "trigger,ret_pc,predicted,actual,mispredicted\n";
  for (const auto& t : r.triggers) {
    for (const auto& res : t.resolutions) {
      os << t.name << ',' << res.ret_pc << ',';
      if (res.predicted) os << *res.predicted;
      os << ',' << res.actual << ',' << (res.mispredicted ? 1 : 0) << '\n';
    }
  }
  return os.str();
}

struct Outputs {
  std::string csv_path;
  std::string trace_path;
  bool check = false;
  unsigned jobs = 1;
};

int cmd_scenario(const RunConfig& rc, const Outputs& out) {
  ScenarioConfig c = rc.scenario();
  c.jobs = out.jobs;
  c.record_trace = !out.trace_path.empty();
  const std::string name = rc.scenario_name();
  if (name == "triggers") {
    const TriggerReport r = demo_triggers(c);
    std::cout << r.text();
    if (!out.csv_path.empty()) write_file(out.csv_path, triggers_csv(r));
    if (!out.trace_path.empty()) write_file(out.trace_path, format_trace(r.trace));
    return out.check ? report_checks(check_triggers(r)) : kExitOk;
  }
  ScenarioReport r = name == "cross-process" ? run_cross_process(c) : run_in_process(c);
  r.config_echo = rc.echo();
  std::cout << r.text();
  if (!out.csv_path.empty()) write_file(out.csv_path, r.csv());
  if (!out.trace_path.empty()) write_file(out.trace_path, r.trace_text);
  if (!out.check) return kExitOk;
  return report_checks(name == "cross-process" ? check_cross_process(r, c) : check_in_process(r, c));
}

int cmd_run(const std::string& path, const std::string& engine, Cycles budget, const RunConfig& rc,
            const Outputs& out) {
  const ScenarioConfig c = rc.scenario();
  Program p = assemble_file(path);
  if (c.retpoline) p = apply_retpoline(p);
  if (c.fence_after_call) p = apply_fence_after_call(p);
  Machine init = Machine::for_program(p, c.machine);
  Machine final_state(c.machine);
  std::string status;
  if (engine == "sequential") {
    SequentialResult r = run_sequential(p, std::move(init));
    status = to_string(r.status);
    final_state = std::move(r.machine);
  } else {
    RunResult r = run(p, std::move(init), budget, !out.trace_path.empty());
    status = to_string(r.status);
    if (!out.trace_path.empty()) write_file(out.trace_path, format_trace(r.trace));
    final_state = std::move(r.machine);
  }
  std::cout << "engine: " << engine << "\nstatus: " << status << '\n';
  if (final_state.fault) std::cout << "fault: " << final_state.fault->describe() << '\n';
  std::cout << "cycles: " << final_state.cycle << "\ninstructions retired: " << final_state.instructions_retired
            << '\n';
  for (RegId r = 0; r < kNumGeneralRegs; ++r) {
    std::cout << register_name(r) << " = " << static_cast<std::int64_t>(final_state.regs.get(r)) << '\n';
  }
  std::cout << "sp = 0x" << std::hex << final_state.regs.sp << std::dec << "\npc = " << final_state.regs.pc << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rsbsim: return stack buffer speculation simulator"};
  app.require_subcommand(1);

  std::string config_path;
  Outputs out;
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "flat key = value config file");
  CLI::Option* seed_opt = app.add_option("--seed", seed, "same as --scenario-seed");
  app.add_option("--csv", out.csv_path, "write per-byte (or per-return) CSV here");
  app.add_option("--trace", out.trace_path, "write the execution trace here");
  app.add_option("--jobs", out.jobs, "worker threads for scenario trials")->check(CLI::PositiveNumber);
  app.add_flag("--check", out.check, "assert the scenario's expected outcome; exit 1 on failure");

  // One flag per config key; booleans may be given bare.
  std::vector<std::pair<std::string, CLI::Option*>> key_options;
  for (const auto& k : config_keys()) {
    std::string names = "--" + flag_for_key(k.name);
    if (k.name == "harden.retpoline") names += ",--retpoline";
    if (k.name == "harden.fence_after_call") names += ",--fence-after-call";
    CLI::Option* opt = app.add_option(names)->description(k.help + " [" + k.name + ", default " + k.default_value + "]");
    if (k.default_value == "true" || k.default_value == "false") opt->expected(0, 1);
    key_options.emplace_back(k.name, opt);
  }

  std::string asm_path, disasm_path, run_path, engine = "speculative", scenario_name;
  Cycles budget = 10'000'000;
  CLI::App* asm_cmd = app.add_subcommand("assemble", "assemble a program and print it back");
  asm_cmd->add_option("file", asm_path)->required();
  CLI::App* disasm_cmd = app.add_subcommand("disassemble", "print a program with code addresses");
  disasm_cmd->add_option("file", disasm_path)->required();
  CLI::App* run_cmd = app.add_subcommand("run", "run a program and print the final state");
  run_cmd->add_option("file", run_path)->required();
  run_cmd->add_option("--engine", engine)->check(CLI::IsMember({"sequential", "speculative"}));
  run_cmd->add_option("--budget", budget, "cycle budget of the speculative engine");
  CLI::App* scenario_cmd = app.add_subcommand("scenario", "run an attack scenario");
  scenario_cmd->add_option("name", scenario_name, "triggers, cross-process or in-process");
  for (CLI::App* sub : {asm_cmd, disasm_cmd, run_cmd, scenario_cmd}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunConfig rc;
    if (!config_path.empty()) rc.parse(read_file(config_path), config_path);
    for (const auto& [key, opt] : key_options) {
      if (opt->count() == 0) continue;
      const auto& res = opt->results();
      rc.set(key, res.empty() || res.back().empty() ? "true" : res.back());
    }
    if (seed_opt->count()) rc.set("scenario.seed", std::to_string(seed));
    if (!scenario_name.empty()) rc.set("scenario.name", scenario_name);

    if (asm_cmd->parsed()) {
      std::cout << disassemble(assemble_file(asm_path));
      return kExitOk;
    }
    if (disasm_cmd->parsed()) {
      std::cout << listing(assemble_file(disasm_path));
      return kExitOk;
    }
    if (run_cmd->parsed()) return cmd_run(run_path, engine, budget, rc, out);
    return cmd_scenario(rc, out);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const AssemblyError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}
