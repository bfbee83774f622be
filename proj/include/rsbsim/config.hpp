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

// Flat `key = value` run configuration shared by the CLI and the acceptance
// suite. Values are layered: built-in defaults, then a config file, then
// command-line overrides.

#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rsbsim/scenarios.hpp"

namespace rsbsim {

// A bad key or value. `key` is empty for syntax errors that precede a key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string help;
};

// Every accepted key, in echo order.
const std::vector<ConfigKey>& config_keys();

// `rsb.variant` -> `rsb-variant`.
std::string flag_for_key(std::string_view key);

class RunConfig {
 public:
  RunConfig();

  // Validates the key and value before storing.
  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;

  // Lines of `key = value`; '#' starts a comment. `source` names the input
  // in error messages.
  void parse(std::string_view text, std::string_view source = "config");
  // Throws std::ios_base::failure when the file cannot be read.
  void load_file(const std::string& path);

  ScenarioConfig scenario() const;
  std::string scenario_name() const { return get("scenario.name"); }
  std::vector<std::pair<std::string, std::string>> echo() const;

 private:
  std::map<std::string, std::string> values_;
};

// `cycle:char` pairs separated by commas, e.g. `1000:a,2000:b`.
std::vector<InputEvent> parse_input_events(std::string_view text);

}  // namespace rsbsim
