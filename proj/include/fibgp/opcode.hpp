#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace fibgp {

// Primitive set: four binary functions and five terminals.
// SRF is the recursion primitive: (SRF index default) returns the program's
// own stored output for an earlier test case, or the default when the index
// is invalid.
enum class Opcode : std::uint8_t {
  Add,
  Sub,
  Mul,
  Srf,
  J,
  C0,
  C1,
  C2,
  C3,
};

inline constexpr std::size_t kOpcodeCount = 9;
inline constexpr std::size_t kFunctionCount = 4;  // Add..Srf
inline constexpr std::size_t kTerminalCount = 5;  // J..C3

constexpr bool is_function(Opcode op) {
  return static_cast<std::uint8_t>(op) < kFunctionCount;
}

constexpr int arity(Opcode op) { return is_function(op) ? 2 : 0; }

constexpr std::string_view token(Opcode op) {
  constexpr std::array<std::string_view, kOpcodeCount> names = {
      "ADD", "SUB", "MUL", "SRF", "J", "0", "1", "2", "3"};
  return names[static_cast<std::uint8_t>(op)];
}

inline std::optional<Opcode> opcode_from_token(std::string_view tok) {
  for (std::size_t i = 0; i < kOpcodeCount; ++i) {
    auto op = static_cast<Opcode>(i);
    if (token(op) == tok) return op;
  }
  return std::nullopt;
}

// Single-character glyph used by the lattice plots ('=' SRF, '*' MUL).
constexpr char glyph(Opcode op) {
  switch (op) {
    case Opcode::Srf: return '=';
    case Opcode::Mul: return '*';
    case Opcode::Add: return 'A';
    case Opcode::Sub: return 'S';
    case Opcode::J: return 'J';
    case Opcode::C0: return '0';
    case Opcode::C1: return '1';
    case Opcode::C2: return '2';
    case Opcode::C3: return '3';
  }
  return '?';
}

}  // namespace fibgp
