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
#include <iomanip>
#include <sstream>

#include "rsbsim/scenarios.hpp"

namespace rsbsim {

std::size_t levenshtein(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

double precision(std::string_view truth, std::string_view recovered) {
  const std::size_t len = std::max(truth.size(), recovered.size());
  if (len == 0) return 1.0;
  const double p = 1.0 - static_cast<double>(levenshtein(truth, recovered)) / static_cast<double>(len);
  return std::clamp(p, 0.0, 1.0);
}

namespace {

std::string printable(std::string_view s) {
  std::string out;
  for (char c : s) {
    const auto u = static_cast<unsigned char>(c);
    if (u >= 0x20 && u < 0x7f) {
      out += c;
    } else {
      out += '.';
    }
  }
  return out;
}

}  // namespace

std::string ScenarioReport::text() const {
  std::ostringstream os;
  os << "scenario " << name << '\n';
  constexpr std::size_t kShown = 120;
  auto shown = [&](const std::string& s) {
    return printable(s.substr(0, kShown)) + (s.size() > kShown ? "..." : "");
  };
  os << "ground truth: " << shown(ground_truth) << " (" << ground_truth.size() << " bytes)\n";
  os << "recovered:    " << shown(recovered) << " (" << recovered.size() << " bytes)\n";
  os << std::fixed << std::setprecision(4);
  os << "levenshtein distance: " << levenshtein_distance << '\n';
  os << "precision: " << precision << '\n';
  if (sentences > 1) {
    os << "sentences: " << sentences << '\n';
    os << "mean levenshtein distance: " << mean_distance << '\n';
    os << "mean precision: " << mean_precision << '\n';
  }
  os << "byte accuracy: " << byte_accuracy << '\n';
  if (name == "cross-process") os << "hot slots observed: " << hot_slots << '\n';
  os << std::setprecision(2);
  os << "simulated cycles: " << cycles << '\n';
  os << "simulated rate: " << bytes_per_second_sim << " bytes/s\n";
  for (const auto& n : notes) os << "note: " << n << '\n';
  os << "config:\n";
  for (const auto& [k, v] : config_echo) os << "  " << k << " = " << v << '\n';
  return os.str();
}

std::string ScenarioReport::csv() const {
  std::ostringstream os;
  os << "trial,byte_index,expected,recovered,correct\n";
  for (const auto& b : per_byte) {
    os << b.trial << ',' << b.byte_index << ',' << b.expected << ',';
    if (b.recovered) os << *b.recovered;
    os << ',' << (b.correct() ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace rsbsim
