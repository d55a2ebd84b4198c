#pragma once

#include "parachute/catalog.hpp"
#include "parachute/predicate.hpp"

#include <algorithm>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace parachute {

struct NotTranslatable {
  std::string reason;
};

using TranslateResult = std::variant<TranslatedPredicate, NotTranslatable>;

/// Sound translation of a predicate on desc's origin column into a predicate
/// on the stored parachute value: every FK row whose partner satisfies `p`
/// also satisfies the result.
TranslateResult translate(const BasePredicate &p, const ParachuteDescriptor &desc);

/// Translates every conjunct. Untranslatable conjuncts are dropped (dropping
/// a conjunct only widens the result); AlwaysTrue is removed and AlwaysFalse
/// absorbs the whole list.
std::vector<TranslatedPredicate> translate_conjunction(std::span<const BasePredicate> conjuncts,
                                                       const ParachuteDescriptor &desc,
                                                       std::vector<std::string> *skipped = nullptr);

/// Branch-light form of a TranslatedPredicate used by the scan kernels.
class CompiledPredicate {
public:
  enum class Kind : uint8_t { Range, NotEqual, Bitmap, Sorted, Mask, True, False };

  CompiledPredicate() = default;
  explicit CompiledPredicate(const TranslatedPredicate &tp);

  Kind kind() const { return kind_; }

  bool test(uint32_t v) const {
    switch (kind_) {
    case Kind::Range:
      return v >= lo_ && v <= hi_;
    case Kind::NotEqual:
      return v != lo_;
    case Kind::Bitmap:
      return v < bitmap_.size() * 64 && ((bitmap_[v >> 6] >> (v & 63)) & 1u);
    case Kind::Sorted:
      return std::binary_search(sorted_.begin(), sorted_.end(), v);
    case Kind::Mask:
      return (v & lo_) == lo_;
    case Kind::True:
      return true;
    case Kind::False:
      return false;
    }
    return true;
  }

private:
  Kind kind_ = Kind::True;
  uint32_t lo_ = 0;
  uint32_t hi_ = 0;
  std::vector<uint64_t> bitmap_;
  std::vector<uint32_t> sorted_;
};

} // namespace parachute
