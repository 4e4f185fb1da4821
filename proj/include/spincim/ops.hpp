#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace spincim {

/// Externally visible array operations.
enum class OpKind {
  Read,
  Write,
  CimNOT,
  CimAND,
  CimOR,
  CimNAND,
  CimNOR,
  CimXOR,
  CimADD,
};

inline constexpr std::array<OpKind, 9> kAllOpKinds = {
    OpKind::Read,   OpKind::Write,   OpKind::CimNOT, OpKind::CimAND, OpKind::CimOR,
    OpKind::CimNAND, OpKind::CimNOR, OpKind::CimXOR, OpKind::CimADD,
};

std::string_view to_string(OpKind op);
std::optional<OpKind> parse_op_kind(std::string_view name);

/// True for the ops that sense two rows at once.
constexpr bool is_two_row(OpKind op) {
  switch (op) {
    case OpKind::CimAND:
    case OpKind::CimOR:
    case OpKind::CimNAND:
    case OpKind::CimNOR:
    case OpKind::CimXOR:
    case OpKind::CimADD:
      return true;
    default:
      return false;
  }
}

}  // namespace spincim
