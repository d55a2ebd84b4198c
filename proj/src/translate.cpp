#include "parachute/translate.hpp"
#include "parachute/pattern.hpp"

#include <set>

namespace parachute {

namespace {

template <class... Ts> struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts> Overloaded(Ts...) -> Overloaded<Ts...>;

TranslatedPredicate bin_in(std::set<uint32_t> bins) {
  if (bins.empty())
    return {tpred::AlwaysFalse{}};
  if (bins.size() == 1)
    return {tpred::BinCompare{CompareOp::Eq, *bins.begin()}};
  return {tpred::BinIn{{bins.begin(), bins.end()}}};
}

bool all_of_type(std::span<const Datum> values, bool want_int) {
  return std::all_of(values.begin(), values.end(), [&](const Datum &d) { return is_int(d) == want_int; });
}

// Widest bin range a union is allowed to enumerate into a BinIn.
constexpr uint64_t kMaxEnumeratedBins = 4096;

class Translator {
public:
  explicit Translator(const ParachuteDescriptor &d) : d_(d) {}

  TranslateResult run(const BasePredicate &p) {
    return std::visit(Overloaded{
                          [&](const pred::IsNull &) -> TranslateResult { return is_null(); },
                          [&](const pred::AnyOf &any) -> TranslateResult { return any_of(any); },
                          [&](const auto &) -> TranslateResult {
                            switch (d_.kind) {
                            case ParachuteKind::NumericHistogram:
                              return numeric(p);
                            case ParachuteKind::LowcardString:
                              return lowcard(p);
                            case ParachuteKind::StringFingerprint:
                              return fingerprint_kind(p);
                            }
                            return NotTranslatable{"unknown kind"};
                          },
                      },
                      p.value);
  }

private:
  TranslateResult is_null() const {
    if (d_.has_histogram()) {
      if (auto nb = d_.histogram().null_bin())
        return TranslatedPredicate{tpred::BinCompare{CompareOp::Eq, *nb}};
      return TranslatedPredicate{tpred::AlwaysFalse{}};
    }
    // NULL sources fingerprint to the empty mask.
    if (d_.nullable_source)
      return TranslatedPredicate{tpred::BinCompare{CompareOp::Eq, 0}};
    return TranslatedPredicate{tpred::AlwaysFalse{}};
  }

  TranslateResult numeric(const BasePredicate &p) const {
    const auto &h = d_.histogram();
    const uint32_t first = h.first_value_bin();
    const uint32_t last = h.last_value_bin();
    auto upto = [&](uint32_t b) -> TranslatedPredicate {
      // With a NULL bin at 0, a plain "<= b" would admit NULL partners.
      if (h.null_bin())
        return {tpred::BinBetween{first, b}};
      return {tpred::BinCompare{CompareOp::Le, b}};
    };
    auto type_error = [] { return NotTranslatable{"constant type does not match numeric source column"}; };

    return std::visit(
        Overloaded{
            [&](const pred::Compare &c) -> TranslateResult {
              if (!is_int(c.constant))
                return type_error();
              const uint32_t b = h.bin(as_int(c.constant));
              switch (c.op) {
              case CompareOp::Lt:
              case CompareOp::Le:
                return upto(b);
              case CompareOp::Gt:
              case CompareOp::Ge:
                return TranslatedPredicate{tpred::BinCompare{CompareOp::Ge, b}};
              case CompareOp::Eq:
                return TranslatedPredicate{tpred::BinCompare{CompareOp::Eq, b}};
              case CompareOp::Ne:
                // Bins are not value-exact under inserts; only NULL can be excluded.
                if (h.null_bin())
                  return TranslatedPredicate{tpred::BinBetween{first, last}};
                return TranslatedPredicate{tpred::AlwaysTrue{}};
              }
              return type_error();
            },
            [&](const pred::Between &b) -> TranslateResult {
              if (!is_int(b.lo) || !is_int(b.hi))
                return type_error();
              if (as_int(b.lo) > as_int(b.hi))
                return TranslatedPredicate{tpred::AlwaysFalse{}};
              return TranslatedPredicate{tpred::BinBetween{h.bin(as_int(b.lo)), h.bin(as_int(b.hi))}};
            },
            [&](const pred::InList &in) -> TranslateResult {
              if (!all_of_type(in.values, true))
                return type_error();
              std::set<uint32_t> bins;
              for (const auto &v : in.values)
                bins.insert(h.bin(as_int(v)));
              return bin_in(std::move(bins));
            },
            [&](const pred::EnumeratedUdf &u) -> TranslateResult {
              if (!h.value_exact())
                return NotTranslatable{"UDF on a numeric column needs one bin per distinct value"};
              if (!all_of_type(u.qualifying, true))
                return type_error();
              std::set<uint32_t> bins;
              for (const auto &v : u.qualifying)
                bins.insert(h.bin(as_int(v)));
              return bin_in(std::move(bins));
            },
            [&](const auto &) -> TranslateResult {
              return NotTranslatable{"string predicate on a numeric parachute"};
            },
        },
        p.value);
  }

  /// Bins of every build-time value satisfying `p`, plus the overflow bin
  /// that holds values unseen at build time.
  TranslateResult enumerate_known(const BasePredicate &p) const {
    const auto &h = d_.histogram();
    std::set<uint32_t> bins{h.overflow_bin()};
    for (const auto &[value, bin] : h.values())
      if (evaluate(p, Datum{value}))
        bins.insert(bin);
    return bin_in(std::move(bins));
  }

  TranslateResult lowcard(const BasePredicate &p) const {
    const auto &h = d_.histogram();
    auto type_error = [] { return NotTranslatable{"constant type does not match string source column"}; };
    auto bins_of = [&](std::span<const Datum> values) -> TranslateResult {
      if (!all_of_type(values, false))
        return type_error();
      std::set<uint32_t> bins;
      for (const auto &v : values)
        bins.insert(h.bin(std::string_view(as_string(v))));
      return bin_in(std::move(bins));
    };

    return std::visit(
        Overloaded{
            [&](const pred::Compare &c) -> TranslateResult {
              if (is_int(c.constant))
                return type_error();
              const auto &a = as_string(c.constant);
              const uint32_t b = h.bin(std::string_view(a));
              if (c.op == CompareOp::Eq)
                return TranslatedPredicate{tpred::BinCompare{CompareOp::Eq, b}};
              if (c.op == CompareOp::Ne) {
                if (h.contains(a) && b != h.overflow_bin() && h.values_in_bin(b) == 1)
                  return TranslatedPredicate{tpred::BinCompare{CompareOp::Ne, b}};
                return TranslatedPredicate{tpred::AlwaysTrue{}};
              }
              // Bins follow frequency, not value order: enumerate.
              return enumerate_known(p);
            },
            [&](const pred::Between &b) -> TranslateResult {
              if (is_int(b.lo) || is_int(b.hi))
                return type_error();
              return enumerate_known(p);
            },
            [&](const pred::InList &in) -> TranslateResult { return bins_of(in.values); },
            [&](const pred::EnumeratedUdf &u) -> TranslateResult { return bins_of(u.qualifying); },
            [&](const pred::EnumerableRegex &r) -> TranslateResult {
              if (auto lang = enumerate_regex(r.pattern)) {
                std::vector<Datum> values(lang->begin(), lang->end());
                return bins_of(values);
              }
              return enumerate_known(p);
            },
            [&](const auto &) -> TranslateResult { return enumerate_known(p); },
        },
        p.value);
  }

  TranslateResult fingerprint_kind(const BasePredicate &p) const {
    const auto &part = d_.partition();
    auto type_error = [] { return NotTranslatable{"constant type does not match string source column"}; };
    // Exact fingerprint equality is unsound when relaxed mode OR-ed several
    // partners into one stored mask; fall back to a subset test then.
    auto equal_any = [&](std::span<const Datum> values) -> TranslateResult {
      if (!all_of_type(values, false))
        return type_error();
      if (d_.relaxed) {
        if (values.size() != 1)
          return NotTranslatable{"IN list on a relaxed fingerprint parachute"};
        return TranslatedPredicate{tpred::MaskSubset{fingerprint(part, as_string(values[0])).mask}};
      }
      std::set<uint32_t> fps;
      for (const auto &v : values)
        fps.insert(static_cast<uint32_t>(fingerprint(part, as_string(v)).mask));
      return bin_in(std::move(fps));
    };

    return std::visit(
        Overloaded{
            [&](const pred::Like &l) -> TranslateResult {
              return TranslatedPredicate{tpred::MaskSubset{pattern_mask(part, l.pattern, false).mask}};
            },
            [&](const pred::ILike &l) -> TranslateResult {
              if (!part.case_pairs_coclustered())
                return NotTranslatable{"byte partition separates ASCII case pairs; ILIKE mask would be unsound"};
              return TranslatedPredicate{tpred::MaskSubset{pattern_mask(part, l.pattern, true).mask}};
            },
            [&](const pred::Compare &c) -> TranslateResult {
              if (c.op == CompareOp::Eq)
                return equal_any(std::span<const Datum>(&c.constant, 1));
              if (c.op == CompareOp::Ne)
                return TranslatedPredicate{tpred::AlwaysTrue{}};
              return NotTranslatable{"range comparison on a fingerprint parachute"};
            },
            [&](const pred::InList &in) -> TranslateResult { return equal_any(in.values); },
            [&](const pred::EnumeratedUdf &u) -> TranslateResult { return equal_any(u.qualifying); },
            [&](const pred::EnumerableRegex &r) -> TranslateResult {
              auto lang = enumerate_regex(r.pattern);
              if (!lang)
                return NotTranslatable{"regex language is not finitely enumerable"};
              std::vector<Datum> values(lang->begin(), lang->end());
              return equal_any(values);
            },
            [&](const auto &) -> TranslateResult {
              return NotTranslatable{"predicate kind not supported on a fingerprint parachute"};
            },
        },
        p.value);
  }

  /// Inclusive upper end of the stored value range, for enumerating ranges.
  uint32_t max_stored() const {
    if (d_.has_histogram())
      return d_.histogram().last_value_bin();
    return d_.pbw >= 32 ? UINT32_MAX : (uint32_t{1} << d_.pbw) - 1;
  }

  TranslateResult any_of(const pred::AnyOf &any) {
    std::set<uint32_t> bins;
    for (const auto &arm : any.arms) {
      auto r = run(arm);
      if (auto *nt = std::get_if<NotTranslatable>(&r))
        return NotTranslatable{"disjunction arm: " + nt->reason};
      const auto &tp = std::get<TranslatedPredicate>(r);
      uint64_t lo = 0, hi = 0;
      bool range = false;
      bool widen = false;
      bool mask = false;
      std::visit(Overloaded{
                     [&](const tpred::BinCompare &c) {
                       switch (c.op) {
                       case CompareOp::Eq:
                         bins.insert(c.bin);
                         break;
                       case CompareOp::Le:
                         lo = 0, hi = c.bin, range = true;
                         break;
                       case CompareOp::Lt:
                         if (c.bin > 0)
                           lo = 0, hi = c.bin - 1, range = true;
                         break;
                       case CompareOp::Ge:
                         lo = c.bin, hi = max_stored(), range = true;
                         break;
                       case CompareOp::Gt:
                         lo = uint64_t{c.bin} + 1, hi = max_stored(), range = lo <= hi;
                         break;
                       case CompareOp::Ne:
                         widen = true;
                         break;
                       }
                     },
                     [&](const tpred::BinBetween &b) { lo = b.lo, hi = b.hi, range = b.lo <= b.hi; },
                     [&](const tpred::BinIn &in) { bins.insert(in.bins.begin(), in.bins.end()); },
                     [&](const tpred::MaskSubset &) { mask = true; },
                     [&](const tpred::AlwaysTrue &) { widen = true; },
                     [&](const tpred::AlwaysFalse &) {},
                 },
                 tp.value);
      if (mask)
        return NotTranslatable{"disjunction of pattern masks has no single-mask form"};
      if (widen || (range && hi - lo + 1 > kMaxEnumeratedBins))
        return TranslatedPredicate{tpred::AlwaysTrue{}};
      if (range)
        for (uint64_t b = lo; b <= hi; ++b)
          bins.insert(static_cast<uint32_t>(b));
    }
    return bin_in(std::move(bins));
  }

  const ParachuteDescriptor &d_;
};

} // namespace

TranslateResult translate(const BasePredicate &p, const ParachuteDescriptor &desc) { return Translator(desc).run(p); }

std::vector<TranslatedPredicate> translate_conjunction(std::span<const BasePredicate> conjuncts,
                                                       const ParachuteDescriptor &desc,
                                                       std::vector<std::string> *skipped) {
  std::vector<TranslatedPredicate> out;
  for (const auto &c : conjuncts) {
    auto r = translate(c, desc);
    if (auto *nt = std::get_if<NotTranslatable>(&r)) {
      if (skipped)
        skipped->push_back(nt->reason);
      continue;
    }
    auto &tp = std::get<TranslatedPredicate>(r);
    if (std::holds_alternative<tpred::AlwaysTrue>(tp.value))
      continue;
    if (std::holds_alternative<tpred::AlwaysFalse>(tp.value))
      return {tp};
    out.push_back(std::move(tp));
  }
  return out;
}

CompiledPredicate::CompiledPredicate(const TranslatedPredicate &tp) {
  std::visit(Overloaded{
                 [&](const tpred::BinCompare &c) {
                   kind_ = Kind::Range;
                   switch (c.op) {
                   case CompareOp::Eq:
                     lo_ = hi_ = c.bin;
                     break;
                   case CompareOp::Ne:
                     kind_ = Kind::NotEqual;
                     lo_ = c.bin;
                     break;
                   case CompareOp::Le:
                     lo_ = 0, hi_ = c.bin;
                     break;
                   case CompareOp::Lt:
                     if (c.bin == 0)
                       kind_ = Kind::False;
                     else
                       lo_ = 0, hi_ = c.bin - 1;
                     break;
                   case CompareOp::Ge:
                     lo_ = c.bin, hi_ = UINT32_MAX;
                     break;
                   case CompareOp::Gt:
                     if (c.bin == UINT32_MAX)
                       kind_ = Kind::False;
                     else
                       lo_ = c.bin + 1, hi_ = UINT32_MAX;
                     break;
                   }
                 },
                 [&](const tpred::BinBetween &b) {
                   if (b.lo > b.hi) {
                     kind_ = Kind::False;
                     return;
                   }
                   kind_ = Kind::Range;
                   lo_ = b.lo, hi_ = b.hi;
                 },
                 [&](const tpred::BinIn &in) {
                   if (in.bins.empty()) {
                     kind_ = Kind::False;
                     return;
                   }
                   const uint32_t top = in.bins.back();
                   if (top < (1u << 16)) {
                     kind_ = Kind::Bitmap;
                     bitmap_.assign(top / 64 + 1, 0);
                     for (uint32_t b : in.bins)
                       bitmap_[b >> 6] |= uint64_t{1} << (b & 63);
                   } else {
                     kind_ = Kind::Sorted;
                     sorted_ = in.bins;
                     std::sort(sorted_.begin(), sorted_.end());
                   }
                 },
                 [&](const tpred::MaskSubset &m) {
                   kind_ = Kind::Mask;
                   lo_ = static_cast<uint32_t>(m.pmask);
                 },
                 [&](const tpred::AlwaysTrue &) { kind_ = Kind::True; },
                 [&](const tpred::AlwaysFalse &) { kind_ = Kind::False; },
             },
             tp.value);
}

} // namespace parachute
