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

// Random program generator for differential testing of the two engines and of
// the hardening passes. Generated programs always terminate: calls only go to
// higher-numbered functions, branches only go forward, and the one recursive
// function counts a reserved register down to zero.
//
// Register conventions: r0..r7 are scratch, r8 is the throw flag, r9 holds
// main's stack pointer, r10 is a masked data offset, r11 the data base, r12 a
// code address, r13 the recursion counter and r14 is always zero.

#pragma once

#include <cstdint>
#include <string>

#include "rsbsim/isa.hpp"

namespace rsbsim {

inline constexpr Addr kFuzzDataBase = 0x10000;
inline constexpr std::size_t kFuzzDataSize = 256;

std::string fuzz_program_source(std::uint64_t seed);
Program fuzz_program(std::uint64_t seed);

}  // namespace rsbsim
