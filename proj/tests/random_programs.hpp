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

// Random program generators shared by the unit and acceptance suites.

#pragma once

#include <random>
#include <string>
#include <vector>

#include "rsbsim/isa.hpp"

namespace rsbsim::testing {

inline RegId random_reg(std::mt19937_64& rng, bool allow_sp = true) {
  std::uniform_int_distribution<int> d(0, allow_sp ? 16 : 15);
  int r = d(rng);
  return r == 16 ? kSp : static_cast<RegId>(r);
}

// Arbitrary syntactically valid instructions; not meant to be executed.
inline Program random_listing(std::mt19937_64& rng, std::size_t n) {
  Program p;
  std::uniform_int_distribution<int> op_dist(0, static_cast<int>(Opcode::HALT));
  std::uniform_int_distribution<std::int64_t> imm_dist(INT64_MIN, INT64_MAX);
  std::uniform_int_distribution<std::int64_t> small(-5000, 5000);
  std::uniform_int_distribution<CodeAddr> target(0, n - 1);
  std::bernoulli_distribution coin(0.5);
  auto imm = [&] { return coin(rng) ? small(rng) : imm_dist(rng); };
  auto mem_operand = [&](Instruction& i) {
    i.base = random_reg(rng);
    if (coin(rng)) i.index = random_reg(rng);
    if (coin(rng)) i.imm = imm();
  };
  for (std::size_t k = 0; k < n; ++k) {
    Instruction i;
    i.op = static_cast<Opcode>(op_dist(rng));
    switch (i.op) {
      case Opcode::MOV_IMM:
        i.dst = random_reg(rng);
        if (coin(rng)) {
          i.imm_is_code = true;
          i.imm = static_cast<std::int64_t>(target(rng));
        } else {
          i.imm = imm();
        }
        break;
      case Opcode::MOV_REG:
        i.dst = random_reg(rng);
        i.src = random_reg(rng);
        break;
      case Opcode::ADD:
      case Opcode::SUB:
      case Opcode::AND:
        i.dst = random_reg(rng);
        if (coin(rng)) {
          i.src = random_reg(rng);
        } else {
          i.imm = imm();
        }
        break;
      case Opcode::SHL:
        i.dst = random_reg(rng);
        i.imm = std::uniform_int_distribution<int>(0, 63)(rng);
        break;
      case Opcode::LOAD:
        i.dst = random_reg(rng);
        i.width = coin(rng) ? 1 : 8;
        mem_operand(i);
        break;
      case Opcode::STORE:
        i.src = random_reg(rng);
        i.width = coin(rng) ? 1 : 8;
        mem_operand(i);
        break;
      case Opcode::CLFLUSH:
        mem_operand(i);
        break;
      case Opcode::CALL_DIRECT:
      case Opcode::JMP:
        i.target = target(rng);
        break;
      case Opcode::CALL_INDIRECT:
        i.src = random_reg(rng);
        break;
      case Opcode::BEQ:
      case Opcode::BNE:
        i.dst = random_reg(rng);
        i.src = random_reg(rng);
        i.target = target(rng);
        break;
      case Opcode::RDTSC:
        i.dst = random_reg(rng);
        break;
      case Opcode::SYSCALL:
        i.imm = std::uniform_int_distribution<int>(0, 2)(rng);
        break;
      default:
        break;
    }
    p.instructions.push_back(i);
  }
  if (coin(rng)) p.labels["start"] = 0;
  p.entry = target(rng);
  return p;
}

}  // namespace rsbsim::testing
