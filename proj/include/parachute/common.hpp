#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace parachute {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Unknown table, column, alias, key or descriptor.
class LookupError : public Error {
public:
  using Error::Error;
};

/// Malformed input file (CSV, JSON) or value that does not parse.
class ParseError : public Error {
public:
  using Error::Error;
};

/// An invariant of a domain object would be violated.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// A graph that must be acyclic is not.
class CycleError : public Error {
public:
  using Error::Error;
};

enum class LogicalType : uint8_t { Int64, String };

std::string_view to_string(LogicalType type);
LogicalType logical_type_from_string(std::string_view name);

/// A non-NULL scalar. NULL is always represented out of band.
using Datum = std::variant<int64_t, std::string>;

inline bool is_int(const Datum &d) { return std::holds_alternative<int64_t>(d); }
inline int64_t as_int(const Datum &d) { return std::get<int64_t>(d); }
inline const std::string &as_string(const Datum &d) { return std::get<std::string>(d); }
std::string datum_to_string(const Datum &d);

/// Maximum bit-width of a stored parachute column.
inline constexpr unsigned kMaxParachuteWidth = 32;

} // namespace parachute
