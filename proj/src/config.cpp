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

#include "rsbsim/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <type_traits>

namespace rsbsim {

namespace {

struct Binding {
  ConfigKey key;
  std::function<void(ScenarioConfig&, const std::string&)> apply;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::uint64_t parse_uint(const std::string& s) {
  std::string_view v = s;
  int base = 10;
  if (v.starts_with("0x") || v.starts_with("0X")) {
    v.remove_prefix(2);
    base = 16;
  }
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out, base);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw std::invalid_argument("expected an unsigned integer, got '" + s + "'");
  }
  return out;
}

double parse_probability(const std::string& s) {
  double out = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("expected a number, got '" + s + "'");
  }
  if (out < 0.0 || out > 1.0) throw std::invalid_argument("expected a probability in [0, 1], got '" + s + "'");
  return out;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "on" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "off" || s == "no" || s == "0") return false;
  throw std::invalid_argument("expected true or false, got '" + s + "'");
}

std::string show(std::uint64_t v) { return std::to_string(v); }
std::string show(bool v) { return v ? "true" : "false"; }
std::string show(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// Helpers that bind a key to a field reached through `get`.
template <typename Get>
Binding integer(std::string name, std::string help, Get get) {
  ScenarioConfig defaults;
  return {{std::move(name), show(static_cast<std::uint64_t>(get(defaults))), std::move(help)},
          [get](ScenarioConfig& c, const std::string& v) {
            auto& field = get(c);
            field = static_cast<std::remove_reference_t<decltype(field)>>(parse_uint(v));
          }};
}

template <typename Get>
Binding probability(std::string name, std::string help, Get get) {
  ScenarioConfig defaults;
  return {{std::move(name), show(get(defaults)), std::move(help)},
          [get](ScenarioConfig& c, const std::string& v) { get(c) = parse_probability(v); }};
}

template <typename Get>
Binding flag(std::string name, std::string help, Get get) {
  ScenarioConfig defaults;
  return {{std::move(name), show(get(defaults)), std::move(help)},
          [get](ScenarioConfig& c, const std::string& v) { get(c) = parse_bool(v); }};
}

const std::vector<Binding>& bindings() {
  static const std::vector<Binding> table = [] {
    std::vector<Binding> t;
    t.push_back({{"scenario.name", "cross-process", "triggers, cross-process or in-process"},
                 [](ScenarioConfig&, const std::string& v) {
                   if (v != "triggers" && v != "cross-process" && v != "in-process") {
                     throw std::invalid_argument("unknown scenario '" + v + "'");
                   }
                 }});
    t.push_back({{"scenario.trials", "auto",
                  "sentences (cross-process, auto = 1) or trials per byte (in-process, auto = 100)"},
                 [](ScenarioConfig& c, const std::string& v) {
                   if (v != "auto") c.trials = parse_uint(v);
                 }});
    t.push_back(integer("scenario.seed", "seed for every random choice", [](ScenarioConfig& c) -> auto& { return c.seed; }));

    t.push_back(integer("rsb.size", "RSB entries", [](ScenarioConfig& c) -> auto& { return c.machine.rsb_size; }));
    t.push_back({{"rsb.variant", "cyclic", "stop, btb or cyclic"},
                 [](ScenarioConfig& c, const std::string& v) { 
                   const auto variant = parse_rsb_variant(v);
                   if (!variant) throw std::invalid_argument("expected stop, btb or cyclic, got '" + v + "'");
                   c.machine.rsb_variant = *variant;
                 }});
    t.push_back(integer("btb.size", "BTB entries", [](ScenarioConfig& c) -> auto& { return c.machine.btb_size; }));

    t.push_back(integer("cache.line_size", "bytes per line", [](ScenarioConfig& c) -> auto& { return c.machine.cache.line_size; }));
    t.push_back(integer("cache.l1_sets", "L1 sets", [](ScenarioConfig& c) -> auto& { return c.machine.cache.l1_sets; }));
    t.push_back(integer("cache.l1_ways", "L1 ways", [](ScenarioConfig& c) -> auto& { return c.machine.cache.l1_ways; }));
    t.push_back(integer("cache.llc_sets", "LLC sets", [](ScenarioConfig& c) -> auto& { return c.machine.cache.llc_sets; }));
    t.push_back(integer("cache.llc_ways", "LLC ways", [](ScenarioConfig& c) -> auto& { return c.machine.cache.llc_ways; }));
    t.push_back(integer("cache.lat_l1", "L1 hit latency", [](ScenarioConfig& c) -> auto& { return c.machine.cache.lat_l1; }));
    t.push_back(integer("cache.lat_llc", "LLC hit latency", [](ScenarioConfig& c) -> auto& { return c.machine.cache.lat_llc; }));
    t.push_back(integer("cache.lat_mem", "memory latency", [](ScenarioConfig& c) -> auto& { return c.machine.cache.lat_mem; }));

    t.push_back(integer("core.max_spec_depth", "nested speculation frames", [](ScenarioConfig& c) -> auto& { return c.machine.core.max_spec_depth; }));
    t.push_back(integer("core.max_spec_instructions", "instructions per frame", [](ScenarioConfig& c) -> auto& { return c.machine.core.max_spec_instructions; }));
    t.push_back(integer("core.min_spec_on_hit", "instructions run when the return address hits L1", [](ScenarioConfig& c) -> auto& { return c.machine.core.min_spec_on_hit; }));
    t.push_back(flag("core.fence_drains", "FENCE stops speculation", [](ScenarioConfig& c) -> auto& { return c.machine.core.fence_drains; }));

    t.push_back(integer("sched.quantum", "cycles before preemption", [](ScenarioConfig& c) -> auto& { return c.sched.quantum; }));
    t.push_back(integer("sched.kernel_call_depth", "kernel call/ret pairs per switch", [](ScenarioConfig& c) -> auto& { return c.sched.kernel_call_depth; }));
    t.push_back(flag("sched.flush_rsb_on_switch", "refill the RSB with a kernel address on every switch", [](ScenarioConfig& c) -> auto& { return c.sched.flush_rsb_on_switch; }));
    t.push_back(probability("sched.jitter", "chance a yield picks a random ready process", [](ScenarioConfig& c) -> auto& { return c.sched.jitter; }));
    t.push_back(integer("sched.switch_cycles", "cycles charged per context switch", [](ScenarioConfig& c) -> auto& { return c.sched.switch_cycles; }));

    t.push_back(integer("time.cycles_per_ms", "cycles per simulated millisecond", [](ScenarioConfig& c) -> auto& { return c.cycles_per_ms; }));
    t.push_back(integer("input.cadence_ms", "milliseconds between keystrokes", [](ScenarioConfig& c) -> auto& { return c.cadence_ms; }));
    t.push_back({{"input.text", std::string(kPangram), "keystrokes, or the in-process secret"},
                 [](ScenarioConfig& c, const std::string& v) { c.text = v; }});
    t.push_back({{"input.events", "", "explicit cycle:char keystrokes, overriding input.text"},
                 [](ScenarioConfig& c, const std::string& v) { c.events = parse_input_events(v); }});

    t.push_back(probability("noise.flip_prob", "chance a reload is misclassified", [](ScenarioConfig& c) -> auto& { return c.flip_prob; }));
    t.push_back(probability("noise.spurious_fill", "chance a reload pass sees one unrelated fill", [](ScenarioConfig& c) -> auto& { return c.spurious_fill; }));
    t.push_back(flag("victim.flush_stack", "victim flushes its return address line while blocked", [](ScenarioConfig& c) -> auto& { return c.victim_flush_stack; }));

    t.push_back(integer("in_process.n_a", "recursion depth of A", [](ScenarioConfig& c) -> auto& { return c.n_a; }));
    t.push_back(integer("in_process.secret_len", "bytes to leak", [](ScenarioConfig& c) -> auto& { return c.secret_len; }));
    t.push_back(flag("in_process.indirect", "B calls itself indirectly and reloads the heap base", [](ScenarioConfig& c) -> auto& { return c.indirect; }));

    t.push_back(flag("harden.retpoline", "rewrite returns of the victim", [](ScenarioConfig& c) -> auto& { return c.retpoline; }));
    t.push_back(flag("harden.fence_after_call", "fence after every call of the victim", [](ScenarioConfig& c) -> auto& { return c.fence_after_call; }));
    return t;
  }();
  return table;
}

const Binding& binding(const std::string& key) {
  for (const auto& b : bindings()) {
    if (b.key.name == key) return b;
  }
  throw ConfigError(key, "unknown config key '" + key + "'");
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const auto& b : bindings()) out.push_back(b.key);
    return out;
  }();
  return keys;
}

std::string flag_for_key(std::string_view key) {
  std::string out(key);
  std::replace(out.begin(), out.end(), '.', '-');
  std::replace(out.begin(), out.end(), '_', '-');
  return out;
}

std::vector<InputEvent> parse_input_events(std::string_view text) {
  std::vector<InputEvent> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find(',', pos);
    if (end == std::string_view::npos) end = text.size();
    // Only leading blanks are dropped: the character after the colon may
    // itself be a space.
    std::string item(text.substr(pos, end - pos));
    pos = end + 1;
    item.erase(0, item.find_first_not_of(" \t"));
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos || colon + 2 != item.size()) {
      throw std::invalid_argument("expected cycle:char, got '" + item + "'");
    }
    out.push_back({parse_uint(item.substr(0, colon)), static_cast<std::uint8_t>(item.back())});
    if (out.size() > 1 && out.back().at_cycle < out[out.size() - 2].at_cycle) {
      throw std::invalid_argument("input events must be sorted by cycle");
    }
  }
  return out;
}

RunConfig::RunConfig() {
  for (const auto& b : bindings()) values_[b.key.name] = b.key.default_value;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const Binding& b = binding(key);
  ScenarioConfig scratch;
  try {
    b.apply(scratch, value);
  } catch (const std::exception& e) {
    throw ConfigError(key, key + ": " + e.what());
  }
  values_[key] = value;
}

const std::string& RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(key, "unknown config key '" + key + "'");
  return it->second;
}

void RunConfig::parse(std::string_view text, std::string_view source) {
  std::istringstream in{std::string(text)};
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("", std::string(source) + ":" + std::to_string(n) + ": expected key = value");
    }
    const std::string key = trim(content.substr(0, eq));
    try {
      set(key, trim(content.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(e.key(), std::string(source) + ":" + std::to_string(n) + ": " + e.what());
    }
  }
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  parse(buf.str(), path);
}

ScenarioConfig RunConfig::scenario() const {
  ScenarioConfig c;
  for (const auto& b : bindings()) b.apply(c, get(b.key.name));
  if (get("scenario.trials") == "auto") c.trials = scenario_name() == "cross-process" ? 1 : 100;
  try {
    c.machine.cache.validate();
    c.sched.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("", e.what());
  }
  return c;
}

std::vector<std::pair<std::string, std::string>> RunConfig::echo() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& b : bindings()) out.emplace_back(b.key.name, get(b.key.name));
  return out;
}

}  // namespace rsbsim
