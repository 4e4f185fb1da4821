#include "spincim/ops.hpp"

namespace spincim {

std::string_view to_string(OpKind op) {
  switch (op) {
    case OpKind::Read:
      return "Read";
    case OpKind::Write:
      return "Write";
    case OpKind::CimNOT:
      return "CimNOT";
    case OpKind::CimAND:
      return "CimAND";
    case OpKind::CimOR:
      return "CimOR";
    case OpKind::CimNAND:
      return "CimNAND";
    case OpKind::CimNOR:
      return "CimNOR";
    case OpKind::CimXOR:
      return "CimXOR";
    case OpKind::CimADD:
      return "CimADD";
  }
  return "?";
}

std::optional<OpKind> parse_op_kind(std::string_view name) {
  for (OpKind op : kAllOpKinds) {
    if (to_string(op) == name) return op;
  }
  return std::nullopt;
}

}  // namespace spincim
