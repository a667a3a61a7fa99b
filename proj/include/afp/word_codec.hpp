#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "afp/errors.hpp"

namespace afp {

// A 32-bit ARINC 429 word. Parity and field semantics are not interpreted.
struct ArincWord {
  std::uint32_t value = 0;

  friend constexpr bool operator==(ArincWord, ArincWord) = default;
};

using BitSequence = std::array<std::uint8_t, 32>;

// The six word values used throughout the experiments. They cover every segment type.
inline constexpr std::array<ArincWord, 6> kReferenceWords{{
    {0x00000000u},
    {0xFFFFFFFFu},
    {0x55555555u},
    {0xAAAAAAAAu},
    {0x5A5A5A5Au},
    {0xA5A5A5A5u},
}};

constexpr BitSequence to_bits_msb_first(ArincWord word) noexcept {
  BitSequence bits{};
  for (int i = 0; i < 32; ++i) bits[i] = static_cast<std::uint8_t>((word.value >> (31 - i)) & 1u);
  return bits;
}

constexpr ArincWord from_bits_msb_first(const BitSequence& bits) noexcept {
  std::uint32_t v = 0;
  for (int i = 0; i < 32; ++i) v = (v << 1) | (bits[i] & 1u);
  return {v};
}

// 1-based ARINC bit numbers in on-wire order: 8, 7, ..., 1, 9, 10, ..., 32.
// Bit 1 is the least significant bit of the value.
constexpr std::array<int, 32> wire_order_bit_numbers() noexcept {
  std::array<int, 32> order{};
  for (int i = 0; i < 8; ++i) order[i] = 8 - i;
  for (int i = 8; i < 32; ++i) order[i] = i + 1;
  return order;
}

constexpr BitSequence to_bits_wire_order(ArincWord word) noexcept {
  constexpr auto order = wire_order_bit_numbers();
  BitSequence bits{};
  for (int i = 0; i < 32; ++i)
    bits[i] = static_cast<std::uint8_t>((word.value >> (order[i] - 1)) & 1u);
  return bits;
}

constexpr ArincWord from_bits_wire_order(const BitSequence& bits) noexcept {
  constexpr auto order = wire_order_bit_numbers();
  std::uint32_t v = 0;
  for (int i = 0; i < 32; ++i) v |= static_cast<std::uint32_t>(bits[i] & 1u) << (order[i] - 1);
  return {v};
}

// Accepts "0x"-prefixed hexadecimal (case-insensitive), up to 8 digits.
inline ArincWord parse_word(std::string_view text) {
  if (text.size() < 3 || text[0] != '0' || (text[1] != 'x' && text[1] != 'X'))
    throw ConfigError("word must be hexadecimal with 0x prefix: '" + std::string(text) + "'");
  const std::string_view digits = text.substr(2);
  if (digits.size() > 8) throw ConfigError("word wider than 32 bits: '" + std::string(text) + "'");
  std::uint32_t v = 0;
  for (char c : digits) {
    std::uint32_t d;
    if (c >= '0' && c <= '9')
      d = static_cast<std::uint32_t>(c - '0');
    else if (c >= 'a' && c <= 'f')
      d = static_cast<std::uint32_t>(c - 'a' + 10);
    else if (c >= 'A' && c <= 'F')
      d = static_cast<std::uint32_t>(c - 'A' + 10);
    else
      throw ConfigError("invalid hex digit in word '" + std::string(text) + "'");
    v = (v << 4) | d;
  }
  return {v};
}

inline std::string format_word(ArincWord word) {
  char buf[11];
  std::snprintf(buf, sizeof buf, "0x%08X", word.value);
  return buf;
}

}  // namespace afp
