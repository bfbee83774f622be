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

#include "rsbsim/predictor.hpp"

#include <algorithm>
#include <stdexcept>

namespace rsbsim {

std::string_view to_string(RsbVariant v) {
  switch (v) {
    case RsbVariant::StopOnUnderflow: return "stop";
    case RsbVariant::BtbFallback: return "btb";
    case RsbVariant::Cyclic: return "cyclic";
  }
  return "?";
}

std::optional<RsbVariant> parse_rsb_variant(std::string_view s) {
  if (s == "stop") return RsbVariant::StopOnUnderflow;
  if (s == "btb") return RsbVariant::BtbFallback;
  if (s == "cyclic") return RsbVariant::Cyclic;
  return std::nullopt;
}

BranchTargetBuffer::BranchTargetBuffer(std::size_t size) : slots_(size) {
  if (size == 0 || (size & (size - 1)) != 0) {
    throw std::invalid_argument("btb size must be a power of two");
  }
}

void BranchTargetBuffer::update(CodeAddr src, CodeAddr target) {
  auto& slot = slots_[src & (slots_.size() - 1)];
  slot.valid = true;
  slot.tag = src;
  slot.target = target;
}

std::optional<CodeAddr> BranchTargetBuffer::lookup(CodeAddr src) const {
  const auto& slot = slots_[src & (slots_.size() - 1)];
  if (!slot.valid || slot.tag != src) return std::nullopt;
  return slot.target;
}

ReturnStackBuffer::ReturnStackBuffer(std::size_t capacity, RsbVariant variant)
    : entries_(capacity, 0), top_(capacity - 1), variant_(variant) {
  if (capacity == 0) throw std::invalid_argument("rsb size must be positive");
}

void ReturnStackBuffer::push(CodeAddr return_addr) {
  top_ = (top_ + 1) % entries_.size();
  entries_[top_] = return_addr;
  if (occupancy_ < entries_.size()) ++occupancy_;
}

std::optional<CodeAddr> ReturnStackBuffer::predict_pop(const BranchTargetBuffer& btb,
                                                       CodeAddr ret_site) {
  if (occupancy_ == 0) {
    switch (variant_) {
      case RsbVariant::StopOnUnderflow: return std::nullopt;
      // A BTB miss here also yields no prediction.
      case RsbVariant::BtbFallback: return btb.lookup(ret_site);
      case RsbVariant::Cyclic: break;
    }
  } else {
    --occupancy_;
  }
  CodeAddr value = entries_[top_];
  top_ = (top_ + entries_.size() - 1) % entries_.size();
  return value;
}

void ReturnStackBuffer::flush_fill(CodeAddr benign_addr) {
  std::fill(entries_.begin(), entries_.end(), benign_addr);
  occupancy_ = entries_.size();
}

}  // namespace rsbsim
