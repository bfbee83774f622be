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

#include "rsbsim/isa.hpp"

#include <gtest/gtest.h>

#include <random>

#include "random_programs.hpp"

namespace rsbsim {
namespace {

TEST(Assemble, SingleRet) {
  Program p = assemble("ret");
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p.instructions[0].op, Opcode::RET);
}

TEST(Assemble, FeedbackGadgetWithAliases) {
  Program p = assemble("shl rax, 12\nload rbx, [r12 + rax]");
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p.instructions[0], ins::shl(0, 12));
  EXPECT_EQ(p.instructions[1], ins::load(3, 12, 0, 0));
}

TEST(Assemble, SelfLoop) {
  Program p = assemble("L: jmp L");
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p.instructions[0].op, Opcode::JMP);
  EXPECT_EQ(p.instructions[0].target, 0u);
  EXPECT_EQ(p.label("L"), 0u);
}

TEST(Assemble, DirectivesAndComments) {
  Program p = assemble(
      "; leading comment\n"
      ".data 0x1000 1, 2, 0x41\n"
      ".entry main\n"
      "f: ret ; trailing\n"
      "main:\n"
      "  mov r1, @f\n"
      "  call r1\n"
      "  store [sp - 8], r1\n"
      "  loadb r2, [r15 + r0 + 0x4000]\n"
      "  halt\n");
  EXPECT_EQ(p.entry, 1u);
  ASSERT_EQ(p.data_segments.size(), 1u);
  EXPECT_EQ(p.data_segments[0].address, 0x1000u);
  EXPECT_EQ(p.data_segments[0].bytes, (std::vector<std::uint8_t>{1, 2, 0x41}));
  EXPECT_TRUE(p.instructions[1].imm_is_code);
  EXPECT_EQ(p.instructions[1].imm, 0);
  EXPECT_EQ(p.instructions[2].op, Opcode::CALL_INDIRECT);
  EXPECT_EQ(p.instructions[3], ins::store(1, kSp, kNoReg, -8));
  EXPECT_EQ(p.instructions[4], ins::load(2, 15, 0, 0x4000, 1));
}

void expect_error(std::string_view src, int line, const std::string& detail) {
  try {
    assemble(src);
    FAIL() << "expected an assembly error for: " << src;
  } catch (const AssemblyError& e) {
    EXPECT_EQ(e.line(), line);
    EXPECT_EQ(e.detail(), detail);
  }
}

TEST(Assemble, Errors) {
  expect_error("ret\njmp nowhere", 2, "undefined label 'nowhere'");
  expect_error("a: ret\na: ret", 2, "duplicate label 'a'");
  expect_error("shl r0, 64", 1, "immediate out of range: shift amount must be in [0, 63]");
  expect_error("mov r0, 0x1ffffffffffffffff", 1, "immediate out of range");
  expect_error("mov r0, -0x8000000000000001", 1, "immediate out of range");
  expect_error("frob r0", 1, "unknown mnemonic 'frob'");
  expect_error("load r0, r1", 1, "expected memory operand, got 'r1'");
  expect_error("add r0", 1, "add expects 2 operand(s), got 1");
  expect_error(".data 0x10 1,2\n.data 0x11 3", 2, "data segment overlaps another segment");
  expect_error("a:\nb: ret", 2, "label 'b' aliases label 'a'");
  expect_error("ret\nend:", 2, "label 'end' does not refer to an instruction");
  expect_error("mov r16, 1", 1, "expected register, got 'r16'");
}

TEST(Assemble, ErrorMessageCarriesLine) {
  try {
    assemble("ret\n\ncall X");
    FAIL();
  } catch (const AssemblyError& e) {
    EXPECT_STREQ(e.what(), "line 3: undefined label 'X'");
  }
}

TEST(Assemble, ExtremeImmediates) {
  Program p = assemble("mov r0, -0x8000000000000000\nmov r1, 0xffffffffffffffff\nmov r2, 'T'");
  EXPECT_EQ(p.instructions[0].imm, INT64_MIN);
  EXPECT_EQ(p.instructions[1].imm, -1);
  EXPECT_EQ(p.instructions[2].imm, 0x54);
}

TEST(Disassemble, Ret) { EXPECT_EQ(disassemble(assemble("ret")), "  ret\n"); }

TEST(Disassemble, SynthesizesLabels) {
  Program p;
  p.instructions = {ins::jmp(1), ins::halt()};
  std::string text = disassemble(p);
  EXPECT_EQ(text, "  jmp L1\nL1:\n  halt\n");
  EXPECT_EQ(assemble(text).instructions, p.instructions);
}

TEST(Disassemble, RoundTripsRandomListings) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    Program p = testing::random_listing(rng, 50);
    Program q = assemble(disassemble(p));
    ASSERT_EQ(q.instructions, p.instructions) << disassemble(p);
    ASSERT_EQ(q.entry, p.entry);
    ASSERT_EQ(q.data_segments, p.data_segments);
  }
}

TEST(Assemble, RejectsGarbageLines) {
  // Every line either assembles or fails with a located error.
  std::mt19937_64 rng(3);
  const std::string alphabet = "abclmorst0123[]+-,:;@ x";
  for (int i = 0; i < 2000; ++i) {
    std::string line;
    for (int k = 0; k < 12; ++k) line += alphabet[rng() % alphabet.size()];
    try {
      assemble(line);
    } catch (const AssemblyError& e) {
      EXPECT_EQ(e.line(), 1);
    }
  }
}

}  // namespace
}  // namespace rsbsim
