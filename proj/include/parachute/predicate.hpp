#pragma once

#include "parachute/common.hpp"

#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace parachute {

enum class CompareOp : uint8_t { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view to_string(CompareOp op);
CompareOp compare_op_from_string(std::string_view op);
bool apply_compare(CompareOp op, int comparison);

struct BasePredicate;

namespace pred {
struct Compare {
  CompareOp op;
  Datum constant;
};
struct Between {
  Datum lo, hi;
};
struct InList {
  std::vector<Datum> values;
};
struct IsNull {};
struct Like {
  std::string pattern;
};
struct ILike {
  std::string pattern;
};
struct EnumerableRegex {
  std::string pattern;
};
/// A UDF the caller evaluated over the column's distinct values.
struct EnumeratedUdf {
  std::string name;
  std::vector<Datum> qualifying;
};
struct AnyOf {
  std::vector<BasePredicate> arms;
};
} // namespace pred

/// A predicate on one base-table column.
struct BasePredicate {
  std::variant<pred::Compare, pred::Between, pred::InList, pred::IsNull, pred::Like, pred::ILike,
               pred::EnumerableRegex, pred::EnumeratedUdf, pred::AnyOf>
      value;
};

/// Exact SQL evaluation; NULL satisfies only IsNull.
bool evaluate(const BasePredicate &p, const std::optional<Datum> &v);

namespace tpred {
struct BinCompare {
  CompareOp op;
  uint32_t bin;
};
struct BinBetween {
  uint32_t lo, hi;
};
struct BinIn {
  std::vector<uint32_t> bins; // sorted, unique
};
struct MaskSubset {
  uint64_t pmask;
};
struct AlwaysTrue {};
struct AlwaysFalse {};
} // namespace tpred

/// A predicate over one stored parachute value.
struct TranslatedPredicate {
  std::variant<tpred::BinCompare, tpred::BinBetween, tpred::BinIn, tpred::MaskSubset, tpred::AlwaysTrue,
               tpred::AlwaysFalse>
      value;
};

bool evaluate_translated(const TranslatedPredicate &tp, uint32_t stored);

void to_json(nlohmann::json &j, const BasePredicate &p);
BasePredicate base_predicate_from_json(const nlohmann::json &j);
void to_json(nlohmann::json &j, const TranslatedPredicate &p);
TranslatedPredicate translated_predicate_from_json(const nlohmann::json &j);

void to_json(nlohmann::json &j, const Datum &d);
Datum datum_from_json(const nlohmann::json &j);

std::string describe(const BasePredicate &p);
std::string describe(const TranslatedPredicate &p);

} // namespace parachute
