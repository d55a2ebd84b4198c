#include "parachute/predicate.hpp"
#include "parachute/pattern.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <regex>
#include <sstream>

namespace parachute {

std::string_view to_string(CompareOp op) {
  switch (op) {
  case CompareOp::Eq:
    return "=";
  case CompareOp::Ne:
    return "<>";
  case CompareOp::Lt:
    return "<";
  case CompareOp::Le:
    return "<=";
  case CompareOp::Gt:
    return ">";
  case CompareOp::Ge:
    return ">=";
  }
  return "?";
}

CompareOp compare_op_from_string(std::string_view op) {
  if (op == "=" || op == "==")
    return CompareOp::Eq;
  if (op == "<>" || op == "!=")
    return CompareOp::Ne;
  if (op == "<")
    return CompareOp::Lt;
  if (op == "<=")
    return CompareOp::Le;
  if (op == ">")
    return CompareOp::Gt;
  if (op == ">=")
    return CompareOp::Ge;
  throw ParseError("unknown comparison operator '" + std::string(op) + "'");
}

bool apply_compare(CompareOp op, int c) {
  switch (op) {
  case CompareOp::Eq:
    return c == 0;
  case CompareOp::Ne:
    return c != 0;
  case CompareOp::Lt:
    return c < 0;
  case CompareOp::Le:
    return c <= 0;
  case CompareOp::Gt:
    return c > 0;
  case CompareOp::Ge:
    return c >= 0;
  }
  return false;
}

namespace {

int compare_datums(const Datum &a, const Datum &b) {
  if (a.index() != b.index())
    throw ValidationError("predicate constant type does not match column type");
  if (is_int(a))
    return as_int(a) < as_int(b) ? -1 : (as_int(a) > as_int(b) ? 1 : 0);
  const int c = as_string(a).compare(as_string(b));
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

template <class... Ts> struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts> Overloaded(Ts...) -> Overloaded<Ts...>;

const std::string &string_value(const Datum &v) {
  if (!std::holds_alternative<std::string>(v))
    throw ValidationError("pattern predicate applied to an int64 column");
  return as_string(v);
}

} // namespace

bool evaluate(const BasePredicate &p, const std::optional<Datum> &v) {
  if (!v) {
    if (std::holds_alternative<pred::IsNull>(p.value))
      return true;
    if (const auto *any = std::get_if<pred::AnyOf>(&p.value))
      return std::any_of(any->arms.begin(), any->arms.end(), [&](const BasePredicate &arm) { return evaluate(arm, v); });
    return false;
  }
  return std::visit(
      Overloaded{
          [&](const pred::Compare &c) { return apply_compare(c.op, compare_datums(*v, c.constant)); },
          [&](const pred::Between &b) { return compare_datums(*v, b.lo) >= 0 && compare_datums(*v, b.hi) <= 0; },
          [&](const pred::InList &in) {
            return std::any_of(in.values.begin(), in.values.end(),
                               [&](const Datum &d) { return compare_datums(*v, d) == 0; });
          },
          [&](const pred::IsNull &) { return false; },
          [&](const pred::Like &l) { return like_match(string_value(*v), l.pattern); },
          [&](const pred::ILike &l) { return ilike_match(string_value(*v), l.pattern); },
          [&](const pred::EnumerableRegex &r) {
            const auto &s = string_value(*v);
            if (auto lang = enumerate_regex(r.pattern))
              return std::binary_search(lang->begin(), lang->end(), s);
            return std::regex_match(s, std::regex(r.pattern));
          },
          [&](const pred::EnumeratedUdf &u) {
            return std::any_of(u.qualifying.begin(), u.qualifying.end(),
                               [&](const Datum &d) { return compare_datums(*v, d) == 0; });
          },
          [&](const pred::AnyOf &any) {
            return std::any_of(any.arms.begin(), any.arms.end(), [&](const BasePredicate &arm) { return evaluate(arm, v); });
          },
      },
      p.value);
}

bool evaluate_translated(const TranslatedPredicate &tp, uint32_t stored) {
  return std::visit(Overloaded{
                        [&](const tpred::BinCompare &c) {
                          return apply_compare(c.op, stored < c.bin ? -1 : (stored > c.bin ? 1 : 0));
                        },
                        [&](const tpred::BinBetween &b) { return stored >= b.lo && stored <= b.hi; },
                        [&](const tpred::BinIn &in) { return std::binary_search(in.bins.begin(), in.bins.end(), stored); },
                        [&](const tpred::MaskSubset &m) { return (stored & m.pmask) == m.pmask; },
                        [&](const tpred::AlwaysTrue &) { return true; },
                        [&](const tpred::AlwaysFalse &) { return false; },
                    },
                    tp.value);
}

// ---------------------------------------------------------------------------
// JSON

void to_json(nlohmann::json &j, const Datum &d) {
  if (is_int(d))
    j = as_int(d);
  else
    j = as_string(d);
}

namespace {
// Datum is a std::variant, so ADL does not find to_json above.
nlohmann::json dj(const Datum &d) {
  nlohmann::json j;
  to_json(j, d);
  return j;
}
} // namespace

Datum datum_from_json(const nlohmann::json &j) {
  if (j.is_number_integer())
    return Datum{j.get<int64_t>()};
  if (j.is_string())
    return Datum{j.get<std::string>()};
  throw ParseError("predicate constant must be an integer or a string, got " + j.dump());
}

namespace {

std::vector<Datum> datums_from_json(const nlohmann::json &j) {
  std::vector<Datum> out;
  for (const auto &e : j)
    out.push_back(datum_from_json(e));
  return out;
}

nlohmann::json datums_to_json(const std::vector<Datum> &values) {
  auto arr = nlohmann::json::array();
  for (const auto &v : values)
    arr.push_back(dj(v));
  return arr;
}

} // namespace

void to_json(nlohmann::json &j, const BasePredicate &p) {
  std::visit(Overloaded{
                 [&](const pred::Compare &c) {
                   j = {{"type", "compare"}, {"op", std::string(to_string(c.op))}, {"value", dj(c.constant)}};
                 },
                 [&](const pred::Between &b) { j = {{"type", "between"}, {"lo", dj(b.lo)}, {"hi", dj(b.hi)}}; },
                 [&](const pred::InList &in) { j = {{"type", "in"}, {"values", datums_to_json(in.values)}}; },
                 [&](const pred::IsNull &) { j = {{"type", "is_null"}}; },
                 [&](const pred::Like &l) { j = {{"type", "like"}, {"pattern", l.pattern}}; },
                 [&](const pred::ILike &l) { j = {{"type", "ilike"}, {"pattern", l.pattern}}; },
                 [&](const pred::EnumerableRegex &r) { j = {{"type", "regex"}, {"pattern", r.pattern}}; },
                 [&](const pred::EnumeratedUdf &u) {
                   j = {{"type", "udf"}, {"name", u.name}, {"values", datums_to_json(u.qualifying)}};
                 },
                 [&](const pred::AnyOf &any) {
                   auto arms = nlohmann::json::array();
                   for (const auto &arm : any.arms)
                     arms.push_back(arm);
                   j = {{"type", "or"}, {"arms", arms}};
                 },
             },
             p.value);
}

BasePredicate base_predicate_from_json(const nlohmann::json &j) {
  try {
    const auto type = j.at("type").get<std::string>();
    if (type == "compare")
      return {pred::Compare{compare_op_from_string(j.at("op").get<std::string>()), datum_from_json(j.at("value"))}};
    if (type == "between")
      return {pred::Between{datum_from_json(j.at("lo")), datum_from_json(j.at("hi"))}};
    if (type == "in")
      return {pred::InList{datums_from_json(j.at("values"))}};
    if (type == "is_null")
      return {pred::IsNull{}};
    if (type == "like")
      return {pred::Like{j.at("pattern").get<std::string>()}};
    if (type == "ilike")
      return {pred::ILike{j.at("pattern").get<std::string>()}};
    if (type == "regex")
      return {pred::EnumerableRegex{j.at("pattern").get<std::string>()}};
    if (type == "udf")
      return {pred::EnumeratedUdf{j.value("name", std::string("udf")), datums_from_json(j.at("values"))}};
    if (type == "or") {
      pred::AnyOf any;
      for (const auto &arm : j.at("arms"))
        any.arms.push_back(base_predicate_from_json(arm));
      return {std::move(any)};
    }
    throw ParseError("unknown predicate type '" + type + "'");
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("invalid predicate JSON: ") + e.what());
  }
}

void to_json(nlohmann::json &j, const TranslatedPredicate &p) {
  std::visit(Overloaded{
                 [&](const tpred::BinCompare &c) {
                   j = {{"type", "bin_compare"}, {"op", std::string(to_string(c.op))}, {"bin", c.bin}};
                 },
                 [&](const tpred::BinBetween &b) { j = {{"type", "bin_between"}, {"lo", b.lo}, {"hi", b.hi}}; },
                 [&](const tpred::BinIn &in) { j = {{"type", "bin_in"}, {"bins", in.bins}}; },
                 [&](const tpred::MaskSubset &m) { j = {{"type", "mask_subset"}, {"pmask", m.pmask}}; },
                 [&](const tpred::AlwaysTrue &) { j = {{"type", "always_true"}}; },
                 [&](const tpred::AlwaysFalse &) { j = {{"type", "always_false"}}; },
             },
             p.value);
}

TranslatedPredicate translated_predicate_from_json(const nlohmann::json &j) {
  try {
    const auto type = j.at("type").get<std::string>();
    if (type == "bin_compare")
      return {tpred::BinCompare{compare_op_from_string(j.at("op").get<std::string>()), j.at("bin").get<uint32_t>()}};
    if (type == "bin_between")
      return {tpred::BinBetween{j.at("lo").get<uint32_t>(), j.at("hi").get<uint32_t>()}};
    if (type == "bin_in") {
      auto bins = j.at("bins").get<std::vector<uint32_t>>();
      std::sort(bins.begin(), bins.end());
      bins.erase(std::unique(bins.begin(), bins.end()), bins.end());
      return {tpred::BinIn{std::move(bins)}};
    }
    if (type == "mask_subset")
      return {tpred::MaskSubset{j.at("pmask").get<uint64_t>()}};
    if (type == "always_true")
      return {tpred::AlwaysTrue{}};
    if (type == "always_false")
      return {tpred::AlwaysFalse{}};
    throw ParseError("unknown parachute predicate type '" + type + "'");
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("invalid parachute predicate JSON: ") + e.what());
  }
}

std::string describe(const BasePredicate &p) {
  nlohmann::json j = p;
  return j.dump();
}

std::string describe(const TranslatedPredicate &p) {
  nlohmann::json j = p;
  return j.dump();
}

} // namespace parachute
