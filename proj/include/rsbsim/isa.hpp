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

// Toy instruction set: instruction encoding, textual assembly and the
// assembler/disassembler pair.
//
// Code addresses are instruction indices. A return address pushed by a call is
// the index of the instruction following the call, stored as a 64-bit value.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rsbsim {

using CodeAddr = std::uint64_t;
using Addr = std::uint64_t;
using Word = std::uint64_t;

enum class Opcode : std::uint8_t {
  MOV_IMM,
  MOV_REG,
  ADD,
  SUB,
  AND,
  SHL,
  LOAD,
  STORE,
  CALL_DIRECT,
  CALL_INDIRECT,
  RET,
  JMP,
  BEQ,
  BNE,
  CLFLUSH,
  RDTSC,
  FENCE,
  PAUSE,
  SYSCALL,
  HALT,
};

using RegId = std::uint8_t;

inline constexpr int kNumGeneralRegs = 16;
inline constexpr RegId kSp = 16;
inline constexpr RegId kNoReg = 0xff;

// Syscall numbers understood by the OS model.
inline constexpr std::int64_t kSysReadChar = 0;
inline constexpr std::int64_t kSysSchedYield = 1;
inline constexpr std::int64_t kSysExit = 2;

struct Instruction {
  Opcode op = Opcode::HALT;
  RegId dst = kNoReg;
  // Register source of MOV_REG/ADD/SUB/AND/CALL_INDIRECT and the value
  // register of STORE. kNoReg selects the immediate form of ADD/SUB/AND.
  RegId src = kNoReg;
  // Memory operand of LOAD/STORE/CLFLUSH: [base + index + imm].
  RegId base = kNoReg;
  RegId index = kNoReg;
  std::int64_t imm = 0;
  CodeAddr target = 0;
  // Access width in bytes for LOAD/STORE (1 or 8).
  std::uint8_t width = 0;
  // MOV_IMM whose immediate is a code address written as @label.
  bool imm_is_code = false;

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

struct DataSegment {
  Addr address = 0;
  std::vector<std::uint8_t> bytes;

  friend bool operator==(const DataSegment&, const DataSegment&) = default;
};

struct Program {
  std::vector<Instruction> instructions;
  std::map<std::string, CodeAddr> labels;
  std::vector<DataSegment> data_segments;
  CodeAddr entry = 0;

  std::size_t size() const { return instructions.size(); }
  bool valid_pc(CodeAddr pc) const { return pc < instructions.size(); }

  // Index of a label; throws std::out_of_range if absent.
  CodeAddr label(const std::string& name) const;
};

struct RegisterFile {
  std::array<Word, kNumGeneralRegs> general{};
  Word sp = 0;
  CodeAddr pc = 0;

  Word get(RegId r) const { return r == kSp ? sp : general.at(r); }
  void set(RegId r, Word v) {
    if (r == kSp) {
      sp = v;
    } else {
      general.at(r) = v;
    }
  }

  friend bool operator==(const RegisterFile&, const RegisterFile&) = default;
};

class AssemblyError : public std::runtime_error {
 public:
  AssemblyError(int line, const std::string& message);

  int line() const { return line_; }
  const std::string& detail() const { return detail_; }

 private:
  int line_;
  std::string detail_;
};

// Parses assembly text into a Program with every label resolved.
Program assemble(std::string_view source);

// Emits assembly text that assembles back to the same instruction list.
// Labels are printed on their own line; targets without a label get a
// synthesized one.
std::string disassemble(const Program& program);

// Single-instruction rendering used by traces. Control-flow targets are
// printed numerically.
std::string format_instruction(const Instruction& insn);

std::string_view mnemonic(const Instruction& insn);
std::string register_name(RegId reg);

// Instruction constructors shared by the scenario builders and tests.
namespace ins {
Instruction mov_imm(RegId dst, std::int64_t imm);
Instruction mov_code(RegId dst, CodeAddr target);
Instruction mov_reg(RegId dst, RegId src);
Instruction alu_reg(Opcode op, RegId dst, RegId src);
Instruction alu_imm(Opcode op, RegId dst, std::int64_t imm);
Instruction shl(RegId dst, int amount);
Instruction load(RegId dst, RegId base, RegId index, std::int64_t disp, int width = 8);
Instruction store(RegId src, RegId base, RegId index, std::int64_t disp, int width = 8);
Instruction clflush(RegId base, RegId index, std::int64_t disp);
Instruction call(CodeAddr target);
Instruction call_indirect(RegId src);
Instruction ret();
Instruction jmp(CodeAddr target);
Instruction beq(RegId a, RegId b, CodeAddr target);
Instruction bne(RegId a, RegId b, CodeAddr target);
Instruction rdtsc(RegId dst);
Instruction fence();
Instruction pause();
Instruction syscall(std::int64_t number);
Instruction halt();
}  // namespace ins

bool is_control_transfer(Opcode op);
bool has_code_target(const Instruction& insn);

}  // namespace rsbsim
