#include "parachute/histogram.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <numeric>

namespace parachute {

uint64_t WeightedSample::total_weight() const {
  uint64_t total = null_weight;
  for (const auto &[v, w] : entries)
    total += w;
  return total;
}

void WeightedSample::add_default_weights(std::span<const Datum> values) {
  for (const auto &v : values) {
    auto it = std::lower_bound(entries.begin(), entries.end(), v,
                               [](const auto &entry, const Datum &d) { return entry.first < d; });
    if (it == entries.end() || it->first != v)
      entries.insert(it, {v, 1});
  }
}

void WeightedSample::check_invariants() const {
  for (size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].second < 1)
      throw ValidationError("sample frequency must be >= 1");
    if (i > 0 && !(entries[i - 1].first < entries[i].first))
      throw ValidationError("sample values must be distinct and ascending");
  }
}

// ---------------------------------------------------------------------------

EquiDepthHistogram EquiDepthHistogram::numeric(std::vector<int64_t> upper_bounds, bool with_null_bin, bool value_exact) {
  EquiDepthHistogram h;
  h.kind_ = HistogramKind::Numeric;
  h.value_bins_ = static_cast<uint32_t>(upper_bounds.size() + 1);
  h.upper_bounds_ = std::move(upper_bounds);
  if (with_null_bin)
    h.null_bin_ = 0;
  h.value_exact_ = value_exact;
  h.check_invariants();
  return h;
}

EquiDepthHistogram EquiDepthHistogram::value_map(std::vector<std::pair<std::string, uint32_t>> values,
                                                 uint32_t value_bins, uint32_t overflow_bin, bool with_null_bin) {
  EquiDepthHistogram h;
  h.kind_ = HistogramKind::ValueMap;
  h.value_bins_ = value_bins;
  std::sort(values.begin(), values.end());
  h.values_ = std::move(values);
  h.overflow_bin_ = overflow_bin;
  if (with_null_bin)
    h.null_bin_ = 0;
  std::vector<size_t> per_bin(h.bin_count(), 0);
  for (const auto &[v, b] : h.values_)
    if (b < per_bin.size())
      ++per_bin[b];
  h.value_exact_ = !h.values_.empty();
  for (uint32_t b = h.first_value_bin(); b <= h.last_value_bin(); ++b)
    if (per_bin[b] > 1)
      h.value_exact_ = false;
  h.check_invariants();
  return h;
}

uint32_t EquiDepthHistogram::bin(int64_t value) const {
  if (kind_ != HistogramKind::Numeric)
    throw ValidationError("int64 value binned by a string histogram");
  auto it = std::lower_bound(upper_bounds_.begin(), upper_bounds_.end(), value);
  return first_value_bin() + static_cast<uint32_t>(it - upper_bounds_.begin());
}

uint32_t EquiDepthHistogram::bin(std::string_view value) const {
  if (kind_ != HistogramKind::ValueMap)
    throw ValidationError("string value binned by a numeric histogram");
  auto it = std::lower_bound(values_.begin(), values_.end(), value,
                             [](const auto &entry, std::string_view v) { return entry.first < v; });
  if (it != values_.end() && it->first == value)
    return it->second;
  return overflow_bin_;
}

uint32_t EquiDepthHistogram::bin(const Datum &value) const {
  return is_int(value) ? bin(as_int(value)) : bin(std::string_view(as_string(value)));
}

uint32_t EquiDepthHistogram::bin_null() const {
  if (!null_bin_)
    throw ValidationError("NULL binned by a histogram without a NULL bin");
  return *null_bin_;
}

bool EquiDepthHistogram::contains(std::string_view value) const {
  auto it = std::lower_bound(values_.begin(), values_.end(), value,
                             [](const auto &entry, std::string_view v) { return entry.first < v; });
  return it != values_.end() && it->first == value;
}

size_t EquiDepthHistogram::values_in_bin(uint32_t b) const {
  return static_cast<size_t>(std::count_if(values_.begin(), values_.end(), [b](const auto &e) { return e.second == b; }));
}

void EquiDepthHistogram::check_invariants() const {
  if (value_bins_ < 1)
    throw ValidationError("histogram needs at least one value bin");
  if (kind_ == HistogramKind::Numeric) {
    if (upper_bounds_.size() + 1 != value_bins_)
      throw ValidationError("numeric histogram bound count does not match bin count");
    for (size_t i = 1; i < upper_bounds_.size(); ++i)
      if (!(upper_bounds_[i - 1] < upper_bounds_[i]))
        throw ValidationError("histogram boundaries must be strictly increasing");
  } else {
    for (size_t i = 0; i < values_.size(); ++i) {
      if (i > 0 && values_[i - 1].first == values_[i].first)
        throw ValidationError("value map lists '" + values_[i].first + "' twice");
      if (values_[i].second < first_value_bin() || values_[i].second > last_value_bin())
        throw ValidationError("value map assigns '" + values_[i].first + "' to a non-value bin");
    }
    if (overflow_bin_ < first_value_bin() || overflow_bin_ > last_value_bin())
      throw ValidationError("overflow bin is not a value bin");
  }
}

// ---------------------------------------------------------------------------
// Balanced partitioning

namespace {

/// Greedy left-to-right packing under cap; returns group ends.
std::vector<size_t> greedy_groups(std::span<const uint64_t> weights, uint64_t cap) {
  std::vector<size_t> ends;
  uint64_t current = 0;
  for (size_t i = 0; i < weights.size(); ++i) {
    if (current > 0 && current + weights[i] > cap) {
      ends.push_back(i);
      current = 0;
    }
    current += weights[i];
  }
  if (!weights.empty())
    ends.push_back(weights.size());
  return ends;
}

} // namespace

std::vector<size_t> balanced_partition(std::span<const uint64_t> weights, size_t max_groups) {
  const size_t n = weights.size();
  if (n == 0)
    return {};
  if (max_groups < 1)
    throw ValidationError("partition needs at least one group");
  const size_t k = std::min(max_groups, n);

  // Smallest cap for which greedy packing needs at most k groups. Greedy is
  // exact for this feasibility question, so the search yields the optimum.
  uint64_t lo = *std::max_element(weights.begin(), weights.end());
  uint64_t hi = std::accumulate(weights.begin(), weights.end(), uint64_t{0});
  while (lo < hi) {
    const uint64_t mid = lo + (hi - lo) / 2;
    if (greedy_groups(weights, mid).size() <= k)
      hi = mid;
    else
      lo = mid + 1;
  }
  std::vector<size_t> ends = greedy_groups(weights, hi);

  // Spend the remaining bins on the heaviest splittable groups; splitting
  // never raises the maximum.
  std::vector<uint64_t> prefix(n + 1, 0);
  for (size_t i = 0; i < n; ++i)
    prefix[i + 1] = prefix[i] + weights[i];
  while (ends.size() < k) {
    size_t best = SIZE_MAX;
    uint64_t best_weight = 0;
    for (size_t g = 0; g < ends.size(); ++g) {
      const size_t begin = g == 0 ? 0 : ends[g - 1];
      if (ends[g] - begin < 2)
        continue;
      const uint64_t w = prefix[ends[g]] - prefix[begin];
      if (best == SIZE_MAX || w > best_weight) {
        best = g;
        best_weight = w;
      }
    }
    const size_t begin = best == 0 ? 0 : ends[best - 1];
    const size_t end = ends[best];
    size_t split = begin + 1;
    uint64_t split_cost = UINT64_MAX;
    for (size_t s = begin + 1; s < end; ++s) {
      const uint64_t cost = std::max(prefix[s] - prefix[begin], prefix[end] - prefix[s]);
      if (cost < split_cost) {
        split_cost = cost;
        split = s;
      }
    }
    ends.insert(ends.begin() + static_cast<std::ptrdiff_t>(best), split);
  }
  return ends;
}

uint64_t max_group_weight(std::span<const uint64_t> weights, std::span<const size_t> group_ends) {
  uint64_t best = 0;
  size_t begin = 0;
  for (size_t end : group_ends) {
    uint64_t w = 0;
    for (size_t i = begin; i < end; ++i)
      w += weights[i];
    best = std::max(best, w);
    begin = end;
  }
  return best;
}

// ---------------------------------------------------------------------------

EquiDepthHistogram build_equidepth(const WeightedSample &sample, unsigned pbw, bool force_null_bin) {
  if (pbw < 1 || pbw > kMaxParachuteWidth)
    throw ValidationError("pbw must be in [1, 32], got " + std::to_string(pbw));
  sample.check_invariants();
  const bool with_null = sample.contains_null || force_null_bin;
  const uint64_t total_bins = uint64_t{1} << pbw;
  const uint64_t available = total_bins - (with_null ? 1 : 0);
  const auto &entries = sample.entries;
  const bool string_kind = !entries.empty() && !is_int(entries.front().first);

  if (!string_kind) {
    if (entries.empty())
      return EquiDepthHistogram::numeric({}, with_null);
    std::vector<int64_t> values;
    std::vector<uint64_t> weights;
    for (const auto &[v, w] : entries) {
      values.push_back(as_int(v));
      weights.push_back(w);
    }
    if (values.size() <= available) {
      // One bin per distinct value.
      std::vector<int64_t> bounds(values.begin(), values.end() - 1);
      return EquiDepthHistogram::numeric(std::move(bounds), with_null, true);
    }
    const auto ends = balanced_partition(weights, static_cast<size_t>(available));
    std::vector<int64_t> bounds;
    for (size_t g = 0; g + 1 < ends.size(); ++g)
      bounds.push_back(values[ends[g] - 1]);
    return EquiDepthHistogram::numeric(std::move(bounds), with_null, false);
  }

  // Value map: group by descending frequency so frequent values can get
  // their own bin.
  std::vector<std::pair<std::string, uint64_t>> order;
  for (const auto &[v, w] : entries)
    order.emplace_back(as_string(v), w);
  std::stable_sort(order.begin(), order.end(), [](const auto &a, const auto &b) { return a.second > b.second; });
  std::vector<uint64_t> weights;
  for (const auto &[v, w] : order)
    weights.push_back(w);
  const uint32_t first = with_null ? 1u : 0u;
  std::vector<size_t> ends;
  if (order.size() <= available) {
    ends.resize(order.size());
    std::iota(ends.begin(), ends.end(), size_t{1});
  } else {
    ends = balanced_partition(weights, static_cast<size_t>(available));
  }
  std::vector<std::pair<std::string, uint32_t>> mapping;
  uint32_t heaviest = first;
  uint64_t heaviest_weight = 0;
  size_t begin = 0;
  for (size_t g = 0; g < ends.size(); ++g) {
    uint64_t w = 0;
    for (size_t i = begin; i < ends[g]; ++i) {
      mapping.emplace_back(order[i].first, first + static_cast<uint32_t>(g));
      w += weights[i];
    }
    if (w > heaviest_weight) {
      heaviest_weight = w;
      heaviest = first + static_cast<uint32_t>(g);
    }
    begin = ends[g];
  }
  return EquiDepthHistogram::value_map(std::move(mapping), static_cast<uint32_t>(ends.size()), heaviest, with_null);
}

// ---------------------------------------------------------------------------

void to_json(nlohmann::json &j, const EquiDepthHistogram &h) {
  j = nlohmann::json::object();
  j["kind"] = h.kind() == HistogramKind::Numeric ? "numeric" : "value-map";
  j["value_bins"] = h.value_bins();
  j["null_bin"] = h.null_bin() ? nlohmann::json(*h.null_bin()) : nlohmann::json(nullptr);
  j["value_exact"] = h.value_exact();
  if (h.kind() == HistogramKind::Numeric) {
    j["upper_bounds"] = h.upper_bounds();
  } else {
    auto &vals = j["values"] = nlohmann::json::array();
    for (const auto &[v, b] : h.values())
      vals.push_back({v, b});
    j["overflow_bin"] = h.overflow_bin();
  }
}

EquiDepthHistogram histogram_from_json(const nlohmann::json &j) {
  try {
    const bool with_null = !j.at("null_bin").is_null();
    if (with_null && j["null_bin"].get<uint32_t>() != 0)
      throw ParseError("NULL bin must be bin 0");
    if (j.at("kind") == "numeric")
      return EquiDepthHistogram::numeric(j.at("upper_bounds").get<std::vector<int64_t>>(), with_null,
                                         j.value("value_exact", false));
    std::vector<std::pair<std::string, uint32_t>> values;
    for (const auto &e : j.at("values"))
      values.emplace_back(e.at(0).get<std::string>(), e.at(1).get<uint32_t>());
    return EquiDepthHistogram::value_map(std::move(values), j.at("value_bins").get<uint32_t>(),
                                         j.at("overflow_bin").get<uint32_t>(), with_null);
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("invalid histogram JSON: ") + e.what());
  }
}

} // namespace parachute
