#include "support.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace parachute {
namespace {

using testing::Rng;

// Minimum over all splits of w into at most k contiguous non-empty groups of
// the maximum group weight, by plain enumeration.
uint64_t exhaustive_optimum(const std::vector<uint64_t> &w, size_t k) {
  const size_t n = w.size();
  uint64_t best = UINT64_MAX;
  // Each of the n-1 gaps is a cut or not.
  for (uint64_t cuts = 0; cuts < (uint64_t{1} << (n - 1)); ++cuts) {
    if (static_cast<size_t>(__builtin_popcountll(cuts)) + 1 > k)
      continue;
    uint64_t cur = 0, worst = 0;
    for (size_t i = 0; i < n; ++i) {
      cur += w[i];
      if (i + 1 == n || ((cuts >> i) & 1)) {
        worst = std::max(worst, cur);
        cur = 0;
      }
    }
    best = std::min(best, worst);
  }
  return best;
}

WeightedSample numeric_sample(const std::vector<std::pair<int64_t, uint64_t>> &entries, bool null = false) {
  WeightedSample s;
  for (auto [v, w] : entries)
    s.entries.emplace_back(Datum{v}, w);
  s.contains_null = null;
  s.null_weight = null ? 1 : 0;
  return s;
}

TEST(Histogram, ListingBoundaries) {
  const auto h = build_equidepth(
      numeric_sample({{1990, 1}, {2000, 1}, {2003, 1}, {2004, 1}, {2010, 1}, {2020, 1}, {2021, 1}, {2025, 1}}), 2);
  EXPECT_EQ(h.bin_count(), 4u);
  EXPECT_EQ(h.upper_bounds(), (std::vector<int64_t>{2000, 2004, 2020}));
}

TEST(Histogram, SingleValueOneBin) {
  for (unsigned pbw : {1u, 2u, 8u, 16u})
    EXPECT_EQ(build_equidepth(numeric_sample({{7, 5}}), pbw).bin_count(), 1u);
}

TEST(Histogram, EightEqualValuesMatchExhaustive) {
  const std::vector<uint64_t> w(8, 3);
  const auto ends = balanced_partition(w, 4);
  EXPECT_EQ(max_group_weight(w, ends), 2u * 3u);
  EXPECT_EQ(max_group_weight(w, ends), exhaustive_optimum(w, 4));
}

TEST(Histogram, DpMatchesExhaustiveProperty) {
  Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const size_t n = 1 + testing::uniform(rng, 20);
    std::vector<uint64_t> w(n);
    const bool skewed = testing::coin(rng, 0.5);
    for (auto &x : w)
      x = skewed ? 1 + (testing::coin(rng, 0.2) ? testing::uniform(rng, 1000) : testing::uniform(rng, 5))
                 : 1 + testing::uniform(rng, 50);
    for (size_t b : {size_t{1}, size_t{2}, size_t{3}, size_t{4}}) {
      const auto ends = balanced_partition(w, b);
      ASSERT_EQ(ends.size(), std::min(b, n));
      ASSERT_EQ(ends.back(), n);
      ASSERT_TRUE(std::is_sorted(ends.begin(), ends.end()));
      ASSERT_EQ(std::adjacent_find(ends.begin(), ends.end()), ends.end());
      ASSERT_EQ(max_group_weight(w, ends), exhaustive_optimum(w, b)) << "trial " << trial << " B " << b;
    }
  }
}

TEST(Histogram, BinExamples) {
  const auto h = EquiDepthHistogram::numeric({2000, 2004, 2020}, false);
  EXPECT_EQ(h.bin(int64_t{1995}), 0u);
  EXPECT_EQ(h.bin(int64_t{2000}), 0u);
  EXPECT_EQ(h.bin(int64_t{2015}), 2u);
  EXPECT_EQ(h.bin(int64_t{3000}), 3u);
  EXPECT_EQ(h.bin(int64_t{-100000}), 0u);
  EXPECT_THROW(h.bin_null(), ValidationError);
}

TEST(Histogram, SeventhBin) {
  const auto h = EquiDepthHistogram::numeric({1950, 1960, 1970, 1980, 1990, 2000, 2010}, false);
  EXPECT_EQ(h.bin(int64_t{2025}), 7u);
}

TEST(Histogram, NullBinIsZero) {
  const auto h = build_equidepth(numeric_sample({{1, 4}, {2, 4}, {3, 4}, {4, 4}, {5, 4}}, true), 2);
  ASSERT_TRUE(h.null_bin().has_value());
  EXPECT_EQ(*h.null_bin(), 0u);
  EXPECT_EQ(h.bin_count(), 4u);
  EXPECT_EQ(h.bin(std::optional<Datum>{}), 0u);
  for (int64_t v = 1; v <= 5; ++v)
    EXPECT_GE(h.bin(v), 1u);
}

TEST(Histogram, AllNullSample) {
  WeightedSample s;
  s.contains_null = true;
  s.null_weight = 3;
  const auto h = build_equidepth(s, 2);
  EXPECT_EQ(h.bin(std::optional<Datum>{}), 0u);
  EXPECT_EQ(h.bin(int64_t{42}), h.first_value_bin());
}

TEST(Histogram, MonotoneAndTotalProperty) {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    std::map<int64_t, uint64_t> counts;
    const size_t n = 1 + testing::uniform(rng, 300);
    for (size_t i = 0; i < n; ++i)
      ++counts[testing::uniform(rng, int64_t{-50}, int64_t{50})];
    WeightedSample s;
    for (auto [v, c] : counts)
      s.entries.emplace_back(Datum{v}, c);
    s.contains_null = testing::coin(rng, 0.3);
    const unsigned pbw = 1 + static_cast<unsigned>(testing::uniform(rng, 4));
    const auto h = build_equidepth(s, pbw);
    h.check_invariants();
    EXPECT_LE(h.bin_count(), 1u << pbw);
    uint32_t prev = 0;
    for (int64_t v = -80; v <= 80; ++v) {
      const uint32_t b = h.bin(v);
      EXPECT_GE(b, prev);
      EXPECT_GE(b, h.first_value_bin());
      EXPECT_LE(b, h.last_value_bin());
      prev = b;
    }
  }
}

TEST(Histogram, ValueMapOverflowIsHeaviest) {
  WeightedSample s;
  for (auto [v, w] : std::vector<std::pair<std::string, uint64_t>>{{"a", 1}, {"b", 50}, {"c", 2}, {"d", 3}, {"e", 1}})
    s.entries.emplace_back(Datum{v}, w);
  const auto h = build_equidepth(s, 1);
  EXPECT_EQ(h.kind(), HistogramKind::ValueMap);
  EXPECT_EQ(h.bin_count(), 2u);
  EXPECT_EQ(h.bin(std::string_view("b")), h.overflow_bin());
  EXPECT_EQ(h.bin(std::string_view("zzz")), h.overflow_bin());
  EXPECT_TRUE(h.contains("a"));
  EXPECT_FALSE(h.contains("zzz"));
}

TEST(Histogram, ValueMapSingletonBins) {
  WeightedSample s;
  for (auto v : {"episode", "movie", "series"})
    s.entries.emplace_back(Datum{std::string(v)}, 1);
  const auto h = build_equidepth(s, 2);
  std::set<uint32_t> bins;
  for (auto v : {"movie", "series", "episode"}) {
    bins.insert(h.bin(std::string_view(v)));
    EXPECT_EQ(h.values_in_bin(h.bin(std::string_view(v))), 1u);
  }
  EXPECT_EQ(bins.size(), 3u);
}

TEST(Histogram, DefaultWeights) {
  WeightedSample s = numeric_sample({{1, 5}});
  const std::vector<Datum> extra = {Datum{int64_t{1}}, Datum{int64_t{3}}};
  s.add_default_weights(extra);
  ASSERT_EQ(s.entries.size(), 2u);
  EXPECT_EQ(s.entries[0].second, 5u);
  EXPECT_EQ(s.entries[1].second, 1u);
  EXPECT_EQ(s.total_weight(), 6u);
}

TEST(Histogram, JsonRoundtrip) {
  const auto a = EquiDepthHistogram::numeric({2000, 2004, 2020}, true);
  const auto b = EquiDepthHistogram::value_map({{"x", 1}, {"y", 2}}, 2, 2, true);
  for (const auto &h : {a, b}) {
    nlohmann::json j = h;
    EXPECT_EQ(histogram_from_json(j), h);
  }
}

} // namespace
} // namespace parachute
