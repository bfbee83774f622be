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

#include "rsbsim/fuzz.hpp"

#include <random>
#include <sstream>

namespace rsbsim {

namespace {

class Generator {
 public:
  explicit Generator(std::uint64_t seed) : rng_(seed) {}

  std::string build() {
    functions_ = 3 + pick(5);
    thrower_ = 1 + pick(functions_ - 1);
    os_ << ".entry main\n";
    os_ << ".data 0x" << std::hex << kFuzzDataBase << std::dec;
    for (std::size_t i = 0; i < kFuzzDataSize; ++i) os_ << (i ? "," : " ") << pick(256);
    os_ << "\nmain:\n";
    line("mov r14, 0");
    line("mov r8, 0");
    line("mov r11, " + std::to_string(kFuzzDataBase));
    line("mov r9, sp");
    for (int i = 0; i < 8; ++i) line("mov r" + std::to_string(i) + ", " + std::to_string(pick(1000)));
    const int calls = 2 + pick(4);
    for (int c = 0; c < calls; ++c) {
      body(2 + pick(4));
      call_somewhere(0);
    }
    os_ << "main_catch:\n";
    body(1 + pick(3));
    call_somewhere(0);
    body(pick(3));
    // Code addresses are layout-dependent; clear them so rewritten programs
    // end in the same register state.
    line("mov r12, 0");
    line("halt");
    for (int f = 1; f <= functions_; ++f) function(f);
    recursive();
    return os_.str();
  }

 private:
  int pick(int n) { return static_cast<int>(rng_() % static_cast<std::uint64_t>(n)); }
  std::string scratch() { return "r" + std::to_string(pick(8)); }
  void line(const std::string& s) { os_ << "  " << s << '\n'; }
  std::string fresh() { return "L" + std::to_string(next_label_++); }

  // Calls a function numbered above `caller`, or the recursive function.
  void call_somewhere(int caller) {
    if (pick(4) == 0) {
      line("mov r13, " + std::to_string(1 + pick(24)));
      line("call rec");
      return;
    }
    if (caller >= functions_) return;
    const int callee = caller + 1 + pick(functions_ - caller);
    if (pick(3) == 0) {
      line("mov r12, @f" + std::to_string(callee));
      line("call r12");
    } else {
      line("call f" + std::to_string(callee));
    }
  }

  void body(int n) {
    for (int i = 0; i < n; ++i) simple();
  }

  void simple() {
    switch (pick(12)) {
      case 0: line("mov " + scratch() + ", " + std::to_string(pick(100000))); break;
      case 1: line("mov " + scratch() + ", " + scratch()); break;
      case 2: line("add " + scratch() + ", " + scratch()); break;
      case 3: line("sub " + scratch() + ", " + std::to_string(pick(50))); break;
      case 4: line("and " + scratch() + ", " + scratch()); break;
      case 5: line("shl " + scratch() + ", " + std::to_string(pick(8))); break;
      case 6:
        data_offset();
        line(std::string(pick(2) ? "load " : "loadb ") + scratch() + ", [r11 + r10]");
        break;
      case 7:
        data_offset();
        line(std::string(pick(2) ? "store " : "storeb ") + "[r11 + r10], " + scratch());
        break;
      case 8: {
        const std::string l = fresh();
        line(std::string(pick(2) ? "beq " : "bne ") + scratch() + ", " + scratch() + ", " + l);
        simple_no_branch();
        os_ << l << ":\n";
        simple_no_branch();
        break;
      }
      case 9:
        data_offset();
        line("clflush [r11 + r10]");
        break;
      case 10: line(pick(2) ? "fence" : "pause"); break;
      default: line("add " + scratch() + ", " + std::to_string(pick(1 << 20))); break;
    }
  }

  void simple_no_branch() {
    line("add " + scratch() + ", " + std::to_string(1 + pick(9)));
    line("mov " + scratch() + ", " + scratch());
  }

  // r10 = scratch & 0xf8, an in-bounds 8-byte offset into the data region.
  void data_offset() {
    line("mov r10, " + scratch());
    line("and r10, " + std::to_string((kFuzzDataSize - 8) & ~std::size_t{7}));
  }

  void function(int f) {
    const std::string name = "f" + std::to_string(f);
    os_ << name << ":\n";
    body(1 + pick(4));
    const int calls = pick(3);
    for (int c = 0; c < calls; ++c) {
      call_somewhere(f);
      body(pick(3));
    }
    if (f == thrower_) {
      const std::string skip = fresh();
      line("bne r8, r14, " + skip);
      line("mov r8, 1");
      line("mov sp, r9");
      line("jmp main_catch");
      os_ << skip << ":\n";
    }
    if (pick(3) == 0) {
      // Call a local helper that overwrites its own return address so the
      // caller resumes past a block that only runs on the predicted path.
      const std::string helper = name + "_h", resume = name + "_resume";
      line("call " + helper);
      line("mov r0, 77777");
      data_offset();
      line("store [r11 + r10], r0");
      os_ << resume << ":\n";
      body(1 + pick(2));
      line("ret");
      os_ << helper << ":\n";
      if (pick(2)) {
        line("mov r12, @" + resume);
        line("store [sp], r12");
        line("ret");
      } else {
        line("add sp, 8");
        line("jmp " + resume);
      }
      return;
    }
    body(pick(3));
    line("ret");
  }

  void recursive() {
    os_ << "rec:\n";
    line("beq r13, r14, rec_base");
    line("sub r13, 1");
    body(pick(3));
    line("call rec");
    body(pick(3));
    os_ << "rec_base:\n";
    line("ret");
  }

  std::mt19937_64 rng_;
  std::ostringstream os_;
  int functions_ = 0;
  int thrower_ = 0;
  int next_label_ = 0;
};

}  // namespace

std::string fuzz_program_source(std::uint64_t seed) { return Generator(seed).build(); }

Program fuzz_program(std::uint64_t seed) { return assemble(fuzz_program_source(seed)); }

}  // namespace rsbsim
