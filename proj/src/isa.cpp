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

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_map>

namespace rsbsim {

AssemblyError::AssemblyError(int line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message),
      line_(line),
      detail_(message) {}

CodeAddr Program::label(const std::string& name) const {
  auto it = labels.find(name);
  if (it == labels.end()) {
    throw std::out_of_range("no label '" + name + "'");
  }
  return it->second;
}

namespace {

struct Mnemonic {
  std::string_view text;
  Opcode op;
  int width;
};

const std::unordered_map<std::string_view, RegId>& register_table() {
  static const std::unordered_map<std::string_view, RegId> table = [] {
    std::unordered_map<std::string_view, RegId> t;
    static const char* const names[] = {"r0", "r1", "r2",  "r3",  "r4",  "r5",  "r6",  "r7",
                                        "r8", "r9", "r10", "r11", "r12", "r13", "r14", "r15"};
    for (int i = 0; i < kNumGeneralRegs; ++i) t.emplace(names[i], static_cast<RegId>(i));
    t.emplace("sp", kSp);
    // x86-flavoured aliases.
    t.emplace("rax", 0);
    t.emplace("rcx", 1);
    t.emplace("rdx", 2);
    t.emplace("rbx", 3);
    t.emplace("rbp", 5);
    t.emplace("rsi", 6);
    t.emplace("rdi", 7);
    t.emplace("rsp", kSp);
    return t;
  }();
  return table;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !is_ident_start(s.front())) return false;
  return std::all_of(s.begin(), s.end(), is_ident_char);
}

std::vector<std::string_view> split_operands(std::string_view s) {
  std::vector<std::string_view> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '[') ++depth;
    if (s[i] == ']') --depth;
    if (s[i] == ',' && depth == 0) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  auto last = trim(s.substr(start));
  if (!last.empty() || !out.empty()) out.push_back(last);
  return out;
}

class LineParser {
 public:
  explicit LineParser(int line) : line_(line) {}

  [[noreturn]] void fail(const std::string& message) const { throw AssemblyError(line_, message); }

  std::optional<RegId> try_register(std::string_view tok) const {
    auto it = register_table().find(tok);
    if (it == register_table().end()) return std::nullopt;
    return it->second;
  }

  RegId reg(std::string_view tok) const {
    if (auto r = try_register(tok)) return *r;
    fail("expected register, got '" + std::string(tok) + "'");
  }

  static bool looks_numeric(std::string_view tok) {
    if (tok.empty()) return false;
    if (tok.front() == '\'') return true;
    std::size_t i = (tok.front() == '-' || tok.front() == '+') ? 1 : 0;
    return i < tok.size() && std::isdigit(static_cast<unsigned char>(tok[i]));
  }

  std::int64_t imm(std::string_view tok) const {
    tok = trim(tok);
    if (tok.empty()) fail("expected immediate");
    if (tok.size() == 3 && tok.front() == '\'' && tok.back() == '\'') {
      return static_cast<unsigned char>(tok[1]);
    }
    bool negative = false;
    if (tok.front() == '-' || tok.front() == '+') {
      negative = tok.front() == '-';
      tok.remove_prefix(1);
    }
    int base = 10;
    if (tok.size() > 2 && tok[0] == '0' && (tok[1] == 'x' || tok[1] == 'X')) {
      base = 16;
      tok.remove_prefix(2);
    }
    std::uint64_t magnitude = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), magnitude, base);
    if (ec == std::errc::result_out_of_range) fail("immediate out of range");
    if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty()) {
      fail("malformed immediate '" + std::string(tok) + "'");
    }
    if (negative) {
      constexpr std::uint64_t kMinMagnitude = std::uint64_t{1} << 63;
      if (magnitude > kMinMagnitude) fail("immediate out of range");
      return static_cast<std::int64_t>(~magnitude + 1);
    }
    return static_cast<std::int64_t>(magnitude);
  }

  // '[' reg ('+' reg)? (('+'|'-') imm)? ']'
  void memory(std::string_view tok, Instruction& insn) const {
    tok = trim(tok);
    if (tok.size() < 2 || tok.front() != '[' || tok.back() != ']') {
      fail("expected memory operand, got '" + std::string(tok) + "'");
    }
    std::string_view body = tok.substr(1, tok.size() - 2);
    std::vector<std::pair<char, std::string_view>> terms;
    char sign = '+';
    std::size_t start = 0;
    for (std::size_t i = 0; i <= body.size(); ++i) {
      if (i == body.size() || body[i] == '+' || body[i] == '-') {
        auto term = trim(body.substr(start, i - start));
        if (term.empty()) {
          if (i == body.size() || !terms.empty() || i != 0) fail("malformed memory operand");
        } else {
          terms.emplace_back(sign, term);
        }
        if (i < body.size()) sign = body[i];
        start = i + 1;
      }
    }
    if (terms.empty() || terms.size() > 3) fail("malformed memory operand");
    std::size_t k = 0;
    if (terms[k].first != '+') fail("memory base must be a register");
    insn.base = reg(terms[k].second);
    ++k;
    if (k < terms.size()) {
      if (auto r = try_register(terms[k].second)) {
        if (terms[k].first != '+') fail("index register cannot be subtracted");
        insn.index = *r;
        ++k;
      }
    }
    if (k < terms.size()) {
      std::int64_t v = imm(terms[k].second);
      if (terms[k].first == '-') {
        if (v == std::numeric_limits<std::int64_t>::min()) fail("immediate out of range");
        v = -v;
      }
      insn.imm = v;
      ++k;
    }
    if (k != terms.size()) fail("malformed memory operand");
  }

 private:
  int line_;
};

struct PendingRef {
  std::size_t insn;
  std::string label;
  int line;
  bool immediate;
};

const std::vector<Mnemonic>& mnemonic_table() {
  static const std::vector<Mnemonic> table = {
      {"mov", Opcode::MOV_IMM, 0},      {"add", Opcode::ADD, 0},
      {"sub", Opcode::SUB, 0},          {"and", Opcode::AND, 0},
      {"shl", Opcode::SHL, 0},          {"load", Opcode::LOAD, 8},
      {"loadb", Opcode::LOAD, 1},       {"store", Opcode::STORE, 8},
      {"storeb", Opcode::STORE, 1},     {"call", Opcode::CALL_DIRECT, 0},
      {"ret", Opcode::RET, 0},          {"jmp", Opcode::JMP, 0},
      {"beq", Opcode::BEQ, 0},          {"bne", Opcode::BNE, 0},
      {"clflush", Opcode::CLFLUSH, 0},  {"rdtsc", Opcode::RDTSC, 0},
      {"fence", Opcode::FENCE, 0},      {"pause", Opcode::PAUSE, 0},
      {"syscall", Opcode::SYSCALL, 0},  {"halt", Opcode::HALT, 0},
  };
  return table;
}

void expect_count(const LineParser& lp, const std::vector<std::string_view>& ops, std::size_t n,
                  std::string_view name) {
  if (ops.size() != n) {
    lp.fail(std::string(name) + " expects " + std::to_string(n) + " operand(s), got " +
            std::to_string(ops.size()));
  }
}

}  // namespace

Program assemble(std::string_view source) {
  Program program;
  std::vector<PendingRef> pending;
  std::optional<std::pair<std::string, int>> entry_label;
  std::vector<std::pair<std::string, int>> label_lines;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= source.size()) {
    std::size_t eol = source.find('\n', pos);
    if (eol == std::string_view::npos) eol = source.size();
    std::string_view line = source.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    LineParser lp(line_no);

    if (auto semi = line.find(';'); semi != std::string_view::npos) line = line.substr(0, semi);
    line = trim(line);

    // Leading labels.
    while (!line.empty()) {
      std::size_t i = 0;
      while (i < line.size() && is_ident_char(line[i])) ++i;
      std::size_t j = i;
      while (j < line.size() && std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      if (i == 0 || j >= line.size() || line[j] != ':') break;
      std::string name(line.substr(0, i));
      if (!is_identifier(name)) lp.fail("invalid label name '" + name + "'");
      if (register_table().count(name)) lp.fail("label '" + name + "' shadows a register");
      if (program.labels.count(name)) lp.fail("duplicate label '" + name + "'");
      program.labels.emplace(name, program.instructions.size());
      label_lines.emplace_back(name, line_no);
      line = trim(line.substr(j + 1));
    }
    if (line.empty()) {
      if (pos > source.size()) break;
      continue;
    }

    std::size_t sp = 0;
    while (sp < line.size() && !std::isspace(static_cast<unsigned char>(line[sp]))) ++sp;
    std::string_view head = line.substr(0, sp);
    std::string_view rest = trim(line.substr(sp));

    if (head == ".data") {
      std::size_t ws = 0;
      while (ws < rest.size() && !std::isspace(static_cast<unsigned char>(rest[ws]))) ++ws;
      if (ws == 0) lp.fail(".data expects an address and a byte list");
      DataSegment seg;
      seg.address = static_cast<Addr>(lp.imm(rest.substr(0, ws)));
      for (auto tok : split_operands(trim(rest.substr(ws)))) {
        std::int64_t v = lp.imm(tok);
        if (v < -128 || v > 255) lp.fail("byte value out of range");
        seg.bytes.push_back(static_cast<std::uint8_t>(v));
      }
      if (seg.bytes.empty()) lp.fail(".data expects at least one byte");
      Addr end = seg.address + seg.bytes.size();
      if (end < seg.address) lp.fail("data segment wraps the address space");
      for (const auto& other : program.data_segments) {
        Addr oend = other.address + other.bytes.size();
        if (seg.address < oend && other.address < end) lp.fail("data segment overlaps another segment");
      }
      program.data_segments.push_back(std::move(seg));
      continue;
    }
    if (head == ".entry") {
      if (!is_identifier(rest)) lp.fail(".entry expects a label");
      entry_label.emplace(std::string(rest), line_no);
      continue;
    }
    if (!head.empty() && head.front() == '.') lp.fail("unknown directive '" + std::string(head) + "'");

    auto it = std::find_if(mnemonic_table().begin(), mnemonic_table().end(),
                           [&](const Mnemonic& m) { return m.text == head; });
    if (it == mnemonic_table().end()) lp.fail("unknown mnemonic '" + std::string(head) + "'");
    auto ops = split_operands(rest);
    Instruction insn;
    insn.op = it->op;
    const std::size_t index = program.instructions.size();
    auto code_ref = [&](std::string_view tok, bool immediate) {
      if (!is_identifier(tok)) lp.fail("expected label, got '" + std::string(tok) + "'");
      pending.push_back({index, std::string(tok), line_no, immediate});
    };

    switch (it->op) {
      case Opcode::MOV_IMM: {
        expect_count(lp, ops, 2, head);
        insn.dst = lp.reg(ops[0]);
        if (auto r = lp.try_register(ops[1])) {
          insn.op = Opcode::MOV_REG;
          insn.src = *r;
        } else if (!ops[1].empty() && ops[1].front() == '@') {
          insn.imm_is_code = true;
          code_ref(ops[1].substr(1), true);
        } else {
          insn.imm = lp.imm(ops[1]);
        }
        break;
      }
      case Opcode::ADD:
      case Opcode::SUB:
      case Opcode::AND:
        expect_count(lp, ops, 2, head);
        insn.dst = lp.reg(ops[0]);
        if (auto r = lp.try_register(ops[1])) {
          insn.src = *r;
        } else {
          insn.imm = lp.imm(ops[1]);
        }
        break;
      case Opcode::SHL:
        expect_count(lp, ops, 2, head);
        insn.dst = lp.reg(ops[0]);
        insn.imm = lp.imm(ops[1]);
        if (insn.imm < 0 || insn.imm > 63) lp.fail("immediate out of range: shift amount must be in [0, 63]");
        break;
      case Opcode::LOAD:
        expect_count(lp, ops, 2, head);
        insn.width = static_cast<std::uint8_t>(it->width);
        insn.dst = lp.reg(ops[0]);
        lp.memory(ops[1], insn);
        break;
      case Opcode::STORE:
        expect_count(lp, ops, 2, head);
        insn.width = static_cast<std::uint8_t>(it->width);
        lp.memory(ops[0], insn);
        insn.src = lp.reg(ops[1]);
        break;
      case Opcode::CLFLUSH:
        expect_count(lp, ops, 1, head);
        lp.memory(ops[0], insn);
        break;
      case Opcode::CALL_DIRECT:
        expect_count(lp, ops, 1, head);
        if (auto r = lp.try_register(ops[0])) {
          insn.op = Opcode::CALL_INDIRECT;
          insn.src = *r;
        } else {
          code_ref(ops[0], false);
        }
        break;
      case Opcode::JMP:
        expect_count(lp, ops, 1, head);
        code_ref(ops[0], false);
        break;
      case Opcode::BEQ:
      case Opcode::BNE:
        expect_count(lp, ops, 3, head);
        insn.dst = lp.reg(ops[0]);
        insn.src = lp.reg(ops[1]);
        code_ref(ops[2], false);
        break;
      case Opcode::RDTSC:
        expect_count(lp, ops, 1, head);
        insn.dst = lp.reg(ops[0]);
        break;
      case Opcode::SYSCALL:
        expect_count(lp, ops, 1, head);
        insn.imm = lp.imm(ops[0]);
        if (insn.imm < 0) lp.fail("immediate out of range: syscall number must be non-negative");
        break;
      case Opcode::RET:
      case Opcode::FENCE:
      case Opcode::PAUSE:
      case Opcode::HALT:
        expect_count(lp, ops, 0, head);
        break;
      default:
        lp.fail("unsupported mnemonic");
    }
    program.instructions.push_back(insn);
    if (pos > source.size()) break;
  }

  for (const auto& [name, line] : label_lines) {
    if (program.labels.at(name) >= program.instructions.size()) {
      throw AssemblyError(line, "label '" + name + "' does not refer to an instruction");
    }
  }
  std::map<CodeAddr, std::string> by_index;
  for (const auto& [name, line] : label_lines) {
    auto [it, inserted] = by_index.emplace(program.labels.at(name), name);
    if (!inserted) {
      throw AssemblyError(line, "label '" + name + "' aliases label '" + it->second + "'");
    }
  }
  for (const auto& ref : pending) {
    auto it = program.labels.find(ref.label);
    if (it == program.labels.end()) {
      throw AssemblyError(ref.line, "undefined label '" + ref.label + "'");
    }
    auto& insn = program.instructions[ref.insn];
    if (ref.immediate) {
      insn.imm = static_cast<std::int64_t>(it->second);
    } else {
      insn.target = it->second;
    }
  }
  if (entry_label) {
    auto it = program.labels.find(entry_label->first);
    if (it == program.labels.end()) {
      throw AssemblyError(entry_label->second, "undefined label '" + entry_label->first + "'");
    }
    program.entry = it->second;
  }
  return program;
}

std::string register_name(RegId reg) {
  if (reg == kSp) return "sp";
  if (reg < kNumGeneralRegs) return "r" + std::to_string(reg);
  return "?";
}

namespace {

std::string format_imm(std::int64_t v) {
  if (v > -4096 && v < 4096) return std::to_string(v);
  std::ostringstream os;
  os << "0x" << std::hex << static_cast<std::uint64_t>(v);
  return os.str();
}

std::string format_memory(const Instruction& insn) {
  std::string s = "[" + register_name(insn.base);
  if (insn.index != kNoReg) s += " + " + register_name(insn.index);
  if (insn.imm != 0) {
    if (insn.imm < 0 && insn.imm != std::numeric_limits<std::int64_t>::min() && insn.imm > -4096) {
      s += " - " + std::to_string(-insn.imm);
    } else {
      s += " + " + format_imm(insn.imm);
    }
  }
  return s + "]";
}

template <typename TargetFn>
std::string render(const Instruction& insn, TargetFn&& target_name) {
  const std::string m(mnemonic(insn));
  switch (insn.op) {
    case Opcode::MOV_IMM:
      if (insn.imm_is_code) return m + " " + register_name(insn.dst) + ", @" + target_name(static_cast<CodeAddr>(insn.imm));
      return m + " " + register_name(insn.dst) + ", " + format_imm(insn.imm);
    case Opcode::MOV_REG:
      return m + " " + register_name(insn.dst) + ", " + register_name(insn.src);
    case Opcode::ADD:
    case Opcode::SUB:
    case Opcode::AND:
      return m + " " + register_name(insn.dst) + ", " +
             (insn.src == kNoReg ? format_imm(insn.imm) : register_name(insn.src));
    case Opcode::SHL:
      return m + " " + register_name(insn.dst) + ", " + std::to_string(insn.imm);
    case Opcode::LOAD:
      return m + " " + register_name(insn.dst) + ", " + format_memory(insn);
    case Opcode::STORE:
      return m + " " + format_memory(insn) + ", " + register_name(insn.src);
    case Opcode::CLFLUSH:
      return m + " " + format_memory(insn);
    case Opcode::CALL_DIRECT:
    case Opcode::JMP:
      return m + " " + target_name(insn.target);
    case Opcode::CALL_INDIRECT:
      return m + " " + register_name(insn.src);
    case Opcode::BEQ:
    case Opcode::BNE:
      return m + " " + register_name(insn.dst) + ", " + register_name(insn.src) + ", " + target_name(insn.target);
    case Opcode::RDTSC:
      return m + " " + register_name(insn.dst);
    case Opcode::SYSCALL:
      return m + " " + std::to_string(insn.imm);
    case Opcode::RET:
    case Opcode::FENCE:
    case Opcode::PAUSE:
    case Opcode::HALT:
      return m;
  }
  return m;
}

}  // namespace

std::string_view mnemonic(const Instruction& insn) {
  switch (insn.op) {
    case Opcode::MOV_IMM:
    case Opcode::MOV_REG: return "mov";
    case Opcode::ADD: return "add";
    case Opcode::SUB: return "sub";
    case Opcode::AND: return "and";
    case Opcode::SHL: return "shl";
    case Opcode::LOAD: return insn.width == 1 ? "loadb" : "load";
    case Opcode::STORE: return insn.width == 1 ? "storeb" : "store";
    case Opcode::CALL_DIRECT:
    case Opcode::CALL_INDIRECT: return "call";
    case Opcode::RET: return "ret";
    case Opcode::JMP: return "jmp";
    case Opcode::BEQ: return "beq";
    case Opcode::BNE: return "bne";
    case Opcode::CLFLUSH: return "clflush";
    case Opcode::RDTSC: return "rdtsc";
    case Opcode::FENCE: return "fence";
    case Opcode::PAUSE: return "pause";
    case Opcode::SYSCALL: return "syscall";
    case Opcode::HALT: return "halt";
  }
  return "?";
}

std::string format_instruction(const Instruction& insn) {
  return render(insn, [](CodeAddr t) { return std::to_string(t); });
}

bool is_control_transfer(Opcode op) {
  switch (op) {
    case Opcode::CALL_DIRECT:
    case Opcode::CALL_INDIRECT:
    case Opcode::RET:
    case Opcode::JMP:
    case Opcode::BEQ:
    case Opcode::BNE: return true;
    default: return false;
  }
}

bool has_code_target(const Instruction& insn) {
  switch (insn.op) {
    case Opcode::CALL_DIRECT:
    case Opcode::JMP:
    case Opcode::BEQ:
    case Opcode::BNE: return true;
    default: return false;
  }
}

std::string disassemble(const Program& program) {
  std::map<CodeAddr, std::string> names;
  std::set<std::string> taken;
  for (const auto& [name, idx] : program.labels) {
    names.emplace(idx, name);
    taken.insert(name);
  }
  auto ensure_label = [&](CodeAddr idx) {
    if (names.count(idx)) return;
    std::string name = "L" + std::to_string(idx);
    for (int n = 1; taken.count(name); ++n) name = "L" + std::to_string(idx) + "_" + std::to_string(n);
    taken.insert(name);
    names.emplace(idx, name);
  };
  for (const auto& insn : program.instructions) {
    if (has_code_target(insn)) ensure_label(insn.target);
    if (insn.op == Opcode::MOV_IMM && insn.imm_is_code) ensure_label(static_cast<CodeAddr>(insn.imm));
  }
  if (program.entry != 0) ensure_label(program.entry);

  std::ostringstream os;
  if (program.entry != 0) os << ".entry " << names.at(program.entry) << "\n";
  for (const auto& seg : program.data_segments) {
    os << ".data 0x" << std::hex << seg.address << std::dec << " ";
    for (std::size_t i = 0; i < seg.bytes.size(); ++i) {
      if (i) os << ",";
      os << static_cast<int>(seg.bytes[i]);
    }
    os << "\n";
  }
  auto target_name = [&](CodeAddr t) {
    auto it = names.find(t);
    return it != names.end() ? it->second : std::to_string(t);
  };
  for (std::size_t i = 0; i < program.instructions.size(); ++i) {
    if (auto it = names.find(i); it != names.end()) os << it->second << ":\n";
    os << "  " << render(program.instructions[i], target_name) << "\n";
  }
  return os.str();
}

namespace ins {
Instruction mov_imm(RegId dst, std::int64_t imm) {
  Instruction i;
  i.op = Opcode::MOV_IMM;
  i.dst = dst;
  i.imm = imm;
  return i;
}
Instruction mov_code(RegId dst, CodeAddr target) {
  Instruction i = mov_imm(dst, static_cast<std::int64_t>(target));
  i.imm_is_code = true;
  return i;
}
Instruction mov_reg(RegId dst, RegId src) {
  Instruction i;
  i.op = Opcode::MOV_REG;
  i.dst = dst;
  i.src = src;
  return i;
}
Instruction alu_reg(Opcode op, RegId dst, RegId src) {
  Instruction i;
  i.op = op;
  i.dst = dst;
  i.src = src;
  return i;
}
Instruction alu_imm(Opcode op, RegId dst, std::int64_t imm) {
  Instruction i;
  i.op = op;
  i.dst = dst;
  i.imm = imm;
  return i;
}
Instruction shl(RegId dst, int amount) {
  Instruction i;
  i.op = Opcode::SHL;
  i.dst = dst;
  i.imm = amount;
  return i;
}
Instruction load(RegId dst, RegId base, RegId index, std::int64_t disp, int width) {
  Instruction i;
  i.op = Opcode::LOAD;
  i.dst = dst;
  i.base = base;
  i.index = index;
  i.imm = disp;
  i.width = static_cast<std::uint8_t>(width);
  return i;
}
Instruction store(RegId src, RegId base, RegId index, std::int64_t disp, int width) {
  Instruction i;
  i.op = Opcode::STORE;
  i.src = src;
  i.base = base;
  i.index = index;
  i.imm = disp;
  i.width = static_cast<std::uint8_t>(width);
  return i;
}
Instruction clflush(RegId base, RegId index, std::int64_t disp) {
  Instruction i;
  i.op = Opcode::CLFLUSH;
  i.base = base;
  i.index = index;
  i.imm = disp;
  return i;
}
Instruction call(CodeAddr target) {
  Instruction i;
  i.op = Opcode::CALL_DIRECT;
  i.target = target;
  return i;
}
Instruction call_indirect(RegId src) {
  Instruction i;
  i.op = Opcode::CALL_INDIRECT;
  i.src = src;
  return i;
}
Instruction ret() {
  Instruction i;
  i.op = Opcode::RET;
  return i;
}
Instruction jmp(CodeAddr target) {
  Instruction i;
  i.op = Opcode::JMP;
  i.target = target;
  return i;
}
Instruction beq(RegId a, RegId b, CodeAddr target) {
  Instruction i;
  i.op = Opcode::BEQ;
  i.dst = a;
  i.src = b;
  i.target = target;
  return i;
}
Instruction bne(RegId a, RegId b, CodeAddr target) {
  Instruction i = beq(a, b, target);
  i.op = Opcode::BNE;
  return i;
}
Instruction rdtsc(RegId dst) {
  Instruction i;
  i.op = Opcode::RDTSC;
  i.dst = dst;
  return i;
}
Instruction fence() {
  Instruction i;
  i.op = Opcode::FENCE;
  return i;
}
Instruction pause() {
  Instruction i;
  i.op = Opcode::PAUSE;
  return i;
}
Instruction syscall(std::int64_t number) {
  Instruction i;
  i.op = Opcode::SYSCALL;
  i.imm = number;
  return i;
}
Instruction halt() { return Instruction{}; }
}  // namespace ins

}  // namespace rsbsim
