#include "parachute/common.hpp"

namespace parachute {

std::string_view to_string(LogicalType type) {
  switch (type) {
  case LogicalType::Int64:
    return "int64";
  case LogicalType::String:
    return "string";
  }
  return "?";
}

LogicalType logical_type_from_string(std::string_view name) {
  if (name == "int64" || name == "int" || name == "integer" || name == "bigint")
    return LogicalType::Int64;
  if (name == "string" || name == "varchar" || name == "text")
    return LogicalType::String;
  throw ParseError("unknown column type '" + std::string(name) + "'");
}

std::string datum_to_string(const Datum &d) {
  if (is_int(d))
    return std::to_string(as_int(d));
  return as_string(d);
}

} // namespace parachute
