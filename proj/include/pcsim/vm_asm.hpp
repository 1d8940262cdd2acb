#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "pcsim/error.hpp"
#include "pcsim/vm.hpp"

namespace pcsim::vm {

// Text form: one instruction per line, `mnemonic [operand]`, '#' starts a
// comment. Mnemonics: move_left, move_right, read, load, jump_if, not, inc,
// dec. The unused operand of not/inc/dec is printed only when non-zero so
// that every byte survives a round trip.

inline const char* mnemonic(Command c) {
  switch (c) {
    case Command::MoveLeft: return "move_left";
    case Command::MoveRight: return "move_right";
    case Command::ReadSensor: return "read";
    case Command::Load: return "load";
    case Command::JumpIfTrue: return "jump_if";
    case Command::Not: return "not";
    case Command::Inc: return "inc";
    case Command::Dec: return "dec";
  }
  return "?";
}

inline bool takesOperand(Command c) {
  return c != Command::Not && c != Command::Inc && c != Command::Dec;
}

inline std::string disassemble(const Instruction& ins) {
  std::string out = mnemonic(ins.command);
  if (takesOperand(ins.command) || ins.operand != 0) out += " " + std::to_string(ins.operand);
  return out;
}

inline std::string disassemble(const Program& prog) {
  std::string out;
  char note[32];
  for (std::size_t pc = 0; pc < prog.size(); ++pc) {
    std::string line = disassemble(decode(prog[pc]));
    line.resize(std::max<std::size_t>(line.size(), 16), ' ');
    std::snprintf(note, sizeof note, "# %02zu 0x%02x\n", pc, static_cast<unsigned>(prog[pc]));
    out += line + note;
  }
  return out;
}

inline Instruction assembleLine(const std::string& text, int lineNo = 0) {
  std::istringstream in(text);
  std::string name;
  in >> name;
  auto fail = [&](const std::string& msg) {
    return SimError(ErrorCode::ParseError, "line " + std::to_string(lineNo) + ": " + msg);
  };
  for (unsigned c = 0; c < 8; ++c) {
    const auto cmd = static_cast<Command>(c);
    if (name != mnemonic(cmd)) continue;
    long operand = 0;
    std::string tok;
    if (in >> tok) {
      std::size_t used = 0;
      try {
        operand = std::stol(tok, &used, 0);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) throw fail("bad operand '" + tok + "'");
    } else if (takesOperand(cmd)) {
      throw fail(name + " needs an operand");
    }
    if (operand < 0 || operand > 31) throw fail("operand out of range 0..31");
    if (in >> tok) throw fail("unexpected token '" + tok + "'");
    return {cmd, static_cast<std::uint8_t>(operand)};
  }
  throw fail("unknown mnemonic '" + name + "'");
}

inline Program assemble(const std::string& source) {
  Program prog{};
  std::istringstream in(source);
  std::string line;
  int lineNo = 0;
  std::size_t count = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (count == kProgramSize)
      throw SimError(ErrorCode::ParseError,
                     "line " + std::to_string(lineNo) + ": more than 32 instructions");
    prog[count++] = encode(assembleLine(line, lineNo));
  }
  if (count != kProgramSize)
    throw SimError(ErrorCode::ParseError,
                   "expected 32 instructions, found " + std::to_string(count));
  return prog;
}

inline Program readProgramFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SimError(ErrorCode::IoError, "cannot open " + path);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() != kProgramSize)
    throw SimError(ErrorCode::ParseError, path + ": program must be exactly 32 bytes, found " +
                                              std::to_string(bytes.size()));
  Program p{};
  for (std::size_t i = 0; i < kProgramSize; ++i) p[i] = static_cast<std::uint8_t>(bytes[i]);
  return p;
}

inline void writeProgramFile(const std::string& path, const Program& prog) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SimError(ErrorCode::IoError, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(prog.data()), static_cast<std::streamsize>(prog.size()));
  if (!out) throw SimError(ErrorCode::IoError, "short write to " + path);
}

}  // namespace pcsim::vm
