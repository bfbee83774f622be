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

// Return stack buffer and branch target buffer.

#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "rsbsim/isa.hpp"

namespace rsbsim {

// Underflow behaviour of the return stack buffer.
enum class RsbVariant {
  StopOnUnderflow,  // no prediction when empty
  BtbFallback,      // fall back to the BTB when empty
  Cyclic,           // ring buffer, always predicts
};

std::string_view to_string(RsbVariant v);
// Accepts "stop", "btb", "cyclic".
std::optional<RsbVariant> parse_rsb_variant(std::string_view s);

inline constexpr std::size_t kDefaultRsbSize = 16;
inline constexpr std::size_t kDefaultBtbSize = 256;

// Direct-mapped BTB: slot = src mod size, tag = src.
class BranchTargetBuffer {
 public:
  explicit BranchTargetBuffer(std::size_t size = kDefaultBtbSize);

  void update(CodeAddr src, CodeAddr target);
  std::optional<CodeAddr> lookup(CodeAddr src) const;

  std::size_t size() const { return slots_.size(); }

 private:
  struct Slot {
    bool valid = false;
    CodeAddr tag = 0;
    CodeAddr target = 0;
  };
  std::vector<Slot> slots_;
};

class ReturnStackBuffer {
 public:
  explicit ReturnStackBuffer(std::size_t capacity = kDefaultRsbSize,
                             RsbVariant variant = RsbVariant::Cyclic);

  // Pushes a return address; when full the oldest entry is overwritten.
  void push(CodeAddr return_addr);

  // Pops a prediction for the return at `ret_site`.
  std::optional<CodeAddr> predict_pop(const BranchTargetBuffer& btb, CodeAddr ret_site);

  // Overwrites every entry with `benign_addr` and marks the buffer full.
  void flush_fill(CodeAddr benign_addr);

  std::size_t capacity() const { return entries_.size(); }
  std::size_t occupancy() const { return occupancy_; }
  std::size_t top() const { return top_; }
  RsbVariant variant() const { return variant_; }
  const std::vector<CodeAddr>& entries() const { return entries_; }

  // Entry that the next pop would read under cyclic semantics.
  CodeAddr peek() const { return entries_[top_]; }

  friend bool operator==(const ReturnStackBuffer&, const ReturnStackBuffer&) = default;

 private:
  std::vector<CodeAddr> entries_;
  std::size_t top_;  // index of the most recent entry
  std::size_t occupancy_ = 0;
  RsbVariant variant_;
};

}  // namespace rsbsim
