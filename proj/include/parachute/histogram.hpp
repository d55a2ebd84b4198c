#pragma once

#include "parachute/common.hpp"

#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace parachute {

/// Observed value distribution of a prospective parachute column.
struct WeightedSample {
  /// Distinct values with their frequency (>= 1), ascending by value.
  std::vector<std::pair<Datum, uint64_t>> entries;
  bool contains_null = false;
  uint64_t null_weight = 0;

  uint64_t total_weight() const;
  /// Adds `values` that are not yet present with weight 1.
  void add_default_weights(std::span<const Datum> values);
  void check_invariants() const;
};

enum class HistogramKind : uint8_t {
  /// Sorted upper-inclusive boundaries over int64 values.
  Numeric,
  /// Explicit value -> bin map over strings, with an overflow bin for
  /// values unseen at build time.
  ValueMap,
};

/// Equi-depth histogram defining bin(). With a NULL bin, index 0 is reserved
/// for NULL and value bins are 1..value_bins.
class EquiDepthHistogram {
public:
  EquiDepthHistogram() = default;

  static EquiDepthHistogram numeric(std::vector<int64_t> upper_bounds, bool with_null_bin, bool value_exact = false);
  static EquiDepthHistogram value_map(std::vector<std::pair<std::string, uint32_t>> values, uint32_t value_bins,
                                      uint32_t overflow_bin, bool with_null_bin);

  HistogramKind kind() const { return kind_; }
  /// Total number of bins including the NULL bin.
  uint32_t bin_count() const { return value_bins_ + (null_bin_ ? 1u : 0u); }
  uint32_t value_bins() const { return value_bins_; }
  std::optional<uint32_t> null_bin() const { return null_bin_; }
  uint32_t first_value_bin() const { return null_bin_ ? 1u : 0u; }
  uint32_t last_value_bin() const { return first_value_bin() + value_bins_ - 1; }

  /// Numeric kind: B-1 upper-inclusive bounds; the last bin is unbounded.
  const std::vector<int64_t> &upper_bounds() const { return upper_bounds_; }
  /// ValueMap kind: (value, bin) sorted by value.
  const std::vector<std::pair<std::string, uint32_t>> &values() const { return values_; }
  uint32_t overflow_bin() const { return overflow_bin_; }
  /// Each value bin holds exactly one distinct build-time value.
  bool value_exact() const { return value_exact_; }

  /// Numeric: binary search, clamping below/above to the first/last bin.
  uint32_t bin(int64_t value) const;
  /// ValueMap: lookup, unseen values go to the overflow bin.
  uint32_t bin(std::string_view value) const;
  uint32_t bin(const Datum &value) const;
  /// NULL bin; throws ValidationError when the histogram has none.
  uint32_t bin_null() const;
  uint32_t bin(const std::optional<Datum> &value) const { return value ? bin(*value) : bin_null(); }

  /// Whether the ValueMap kind knows `value` at build time.
  bool contains(std::string_view value) const;
  /// Number of build-time values mapped to `bin` (ValueMap kind).
  size_t values_in_bin(uint32_t bin) const;

  void check_invariants() const;
  bool operator==(const EquiDepthHistogram &) const = default;

private:
  HistogramKind kind_ = HistogramKind::Numeric;
  uint32_t value_bins_ = 1;
  std::optional<uint32_t> null_bin_;
  std::vector<int64_t> upper_bounds_;
  std::vector<std::pair<std::string, uint32_t>> values_;
  uint32_t overflow_bin_ = 0;
  bool value_exact_ = false;
};

/// Splits `weights` into at most `max_groups` contiguous groups minimising
/// the maximum group weight. Returns the exclusive end index of every group.
/// All groups are non-empty; min(max_groups, weights.size()) groups are used.
std::vector<size_t> balanced_partition(std::span<const uint64_t> weights, size_t max_groups);

/// Maximum group weight of a partition returned by balanced_partition.
uint64_t max_group_weight(std::span<const uint64_t> weights, std::span<const size_t> group_ends);

/// Builds the equi-depth histogram for `sample` with 2^pbw bins (one reserved
/// for NULL when the sample contains NULL). Int64 samples produce the numeric
/// kind; string samples the value-map kind, grouped by descending frequency.
EquiDepthHistogram build_equidepth(const WeightedSample &sample, unsigned pbw, bool force_null_bin = false);

void to_json(nlohmann::json &j, const EquiDepthHistogram &h);
EquiDepthHistogram histogram_from_json(const nlohmann::json &j);

} // namespace parachute
