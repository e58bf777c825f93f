#pragma once

#include <cstdint>
#include <cassert>
#include <string>

namespace dfv {

// Values are stored zero-extended in a uint64_t; every operation re-masks to
// its width so callers can rely on canonical form.
using word = std::uint64_t;

inline word mask_of(unsigned width) {
  assert(width >= 1 && width <= 64);
  return width == 64 ? ~word(0) : ((word(1) << width) - 1);
}

inline word truncate(word v, unsigned width) { return v & mask_of(width); }

inline word zext_word(word v, unsigned from, unsigned to) {
  assert(from <= to);
  (void)to;
  return truncate(v, from);
}

inline word sext_word(word v, unsigned from, unsigned to) {
  assert(from <= to);
  v = truncate(v, from);
  word sign = word(1) << (from - 1);
  if (v & sign) v |= mask_of(to) & ~mask_of(from);
  return truncate(v, to);
}

// Two's-complement interpretation at the given width.
inline std::int64_t signed_of(word v, unsigned width) {
  v = truncate(v, width);
  word sign = word(1) << (width - 1);
  if (v & sign) return static_cast<std::int64_t>(v | ~mask_of(width));
  return static_cast<std::int64_t>(v);
}

enum class BinOp {
  Add, Sub, Mul, And, Or, Xor, Shl, Lshr, Ashr,
  Eq, Ne, Ult, Slt, Ule, Sle,
};

inline bool is_comparison(BinOp op) {
  switch (op) {
    case BinOp::Eq: case BinOp::Ne: case BinOp::Ult:
    case BinOp::Slt: case BinOp::Ule: case BinOp::Sle:
      return true;
    default:
      return false;
  }
}

inline bool is_bitwise(BinOp op) {
  return op == BinOp::And || op == BinOp::Or || op == BinOp::Xor;
}

// Applies a binary op at the given operand width; comparisons yield 0/1.
inline word apply_binop(BinOp op, word a, word b, unsigned width) {
  a = truncate(a, width);
  b = truncate(b, width);
  switch (op) {
    case BinOp::Add: return truncate(a + b, width);
    case BinOp::Sub: return truncate(a - b, width);
    case BinOp::Mul: return truncate(a * b, width);
    case BinOp::And: return a & b;
    case BinOp::Or: return a | b;
    case BinOp::Xor: return a ^ b;
    case BinOp::Shl: return b >= width ? 0 : truncate(a << b, width);
    case BinOp::Lshr: return b >= width ? 0 : (a >> b);
    case BinOp::Ashr: {
      std::int64_t sa = signed_of(a, width);
      if (b >= width) return truncate(sa < 0 ? ~word(0) : 0, width);
      return truncate(static_cast<word>(sa >> b), width);
    }
    case BinOp::Eq: return a == b;
    case BinOp::Ne: return a != b;
    case BinOp::Ult: return a < b;
    case BinOp::Slt: return signed_of(a, width) < signed_of(b, width);
    case BinOp::Ule: return a <= b;
    case BinOp::Sle: return signed_of(a, width) <= signed_of(b, width);
  }
  return 0;
}

const char* binop_name(BinOp op);
bool binop_from_name(const std::string& name, BinOp& out);

}  // namespace dfv
