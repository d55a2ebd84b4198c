#include "support.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace parachute {
namespace {

using testing::Rng;

// {a, e, u} in the first cluster, {l, n, t} in the third, every
// other byte spread over the remaining two.
BytePartition grouped_partition() {
  std::array<uint16_t, 256> c{};
  for (int b = 0; b < 256; ++b)
    c[b] = b % 2 ? 1 : 3;
  for (char ch : std::string("aeu"))
    c[static_cast<uint8_t>(ch)] = 0;
  for (char ch : std::string("lnt"))
    c[static_cast<uint8_t>(ch)] = 2;
  return BytePartition(c, 4);
}

// One cluster per lowercase letter, one for everything else.
BytePartition letter_partition() {
  std::array<uint16_t, 256> c{};
  c.fill(26);
  for (int l = 0; l < 26; ++l)
    c['a' + l] = static_cast<uint16_t>(l);
  return BytePartition(c, 27);
}

TEST(Fingerprint, RoundRobinClusters) {
  const auto p = round_robin_partition(4);
  EXPECT_EQ(p.cluster('n'), 2u);
  EXPECT_EQ(p.cluster('u'), 1u);
  EXPECT_EQ(p.cluster('a'), 1u);
  for (int b = 0; b < 256; ++b)
    EXPECT_EQ(p.cluster(static_cast<uint8_t>(b)), static_cast<unsigned>(b % 4));
}

TEST(Fingerprint, SingleCluster) {
  const auto p = round_robin_partition(1);
  EXPECT_EQ(fingerprint(p, "anything").mask, 1u);
  EXPECT_EQ(fingerprint(p, "").mask, 0u);
}

TEST(Fingerprint, CasePairsShareClusterWhenWidthDivides32) {
  for (unsigned pbw : {1u, 2u, 4u, 8u, 16u, 32u}) {
    const auto p = round_robin_partition(pbw);
    for (char c = 'a'; c <= 'z'; ++c)
      EXPECT_EQ(p.cluster(static_cast<uint8_t>(c)), p.cluster(static_cast<uint8_t>(c - 32)));
    EXPECT_TRUE(p.case_pairs_coclustered());
  }
  EXPECT_FALSE(round_robin_partition(3).case_pairs_coclustered());
}

TEST(Fingerprint, NutellaGroupedPartition) {
  const auto p = grouped_partition();
  EXPECT_EQ(fingerprint_to_string(fingerprint(p, "nutella"), 4), "1010");
}

TEST(Fingerprint, EmptyString) { EXPECT_EQ(fingerprint(round_robin_partition(8), "").mask, 0u); }

TEST(Fingerprint, OrHomomorphismProperty) {
  Rng rng(1);
  const auto p = round_robin_partition(13);
  for (int i = 0; i < 500; ++i) {
    std::string a, b;
    for (size_t k = testing::uniform(rng, 12); k > 0; --k)
      a.push_back(static_cast<char>(rng()));
    for (size_t k = testing::uniform(rng, 12); k > 0; --k)
      b.push_back(static_cast<char>(rng()));
    EXPECT_EQ(fingerprint(p, a + b).mask, fingerprint(p, a).mask | fingerprint(p, b).mask);
    std::string shuffled = a + b;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EXPECT_EQ(fingerprint(p, shuffled), fingerprint(p, a + b));
  }
}

TEST(Fingerprint, PatternMaskStripsWildcards) {
  const auto p = round_robin_partition(8);
  EXPECT_EQ(pattern_mask(p, "%utn%", false), fingerprint(p, "utn"));
  EXPECT_EQ(pattern_mask(p, "%_%", false).mask, 0u);
  EXPECT_EQ(pattern_mask(p, "%ab%cd%", false), fingerprint(p, "abcd"));
}

TEST(Fingerprint, UtnCharacterSets) {
  const auto p = letter_partition();
  const auto pm = pattern_mask(p, "%utn%", false);
  EXPECT_TRUE(mask_matches(fingerprint(p, "utn"), pm));
  EXPECT_TRUE(mask_matches(fingerprint(p, "nutella"), pm));
  EXPECT_FALSE(mask_matches(fingerprint(p, "tone"), pm));
  // 'nutella' passes the mask but is a false positive.
  EXPECT_FALSE(like_match("nutella", "%utn%"));
}

TEST(Fingerprint, EmptyMaskMatchesAll) {
  const auto p = round_robin_partition(8);
  EXPECT_TRUE(mask_matches(fingerprint(p, ""), Fingerprint{0}));
  EXPECT_TRUE(mask_matches(fingerprint(p, "xyz"), Fingerprint{0}));
}

TEST(Fingerprint, IlikeSameAsLikeUnderRoundRobin4) {
  const auto p = round_robin_partition(4);
  EXPECT_EQ(pattern_mask(p, "%utn%", true), pattern_mask(p, "%utn%", false));
}

using testing::matching_pattern;
using testing::random_text;

TEST(Fingerprint, NoFalseNegativesProperty) {
  Rng rng(99);
  std::vector<BytePartition> parts = {grouped_partition(), letter_partition()};
  for (unsigned k : {1u, 2u, 3u, 4u, 7u, 8u, 16u, 64u})
    parts.push_back(round_robin_partition(k));
  size_t checked = 0;
  for (int i = 0; i < 4000; ++i) {
    const auto &part = parts[testing::uniform(rng, parts.size())];
    const std::string s = random_text(rng, 10);
    const std::string p = testing::coin(rng, 0.5) ? matching_pattern(rng, s) : "%" + random_text(rng, 2) + "%";
    if (like_match(s, p)) {
      ++checked;
      ASSERT_TRUE(mask_matches(fingerprint(part, s), pattern_mask(part, p, false))) << s << " LIKE " << p;
    }
  }
  EXPECT_GT(checked, 1000u);
}

TEST(Fingerprint, IlikeSoundUnderRoundRobinProperty) {
  Rng rng(7);
  size_t checked = 0;
  for (int i = 0; i < 4000; ++i) {
    const unsigned pbw = 2u << testing::uniform(rng, 4); // 2, 4, 8, 16
    const auto part = round_robin_partition(pbw);
    const std::string s = random_text(rng, 10);
    std::string p = matching_pattern(rng, ascii_lowercase(s));
    for (char &c : p)
      if (std::isalpha(static_cast<unsigned char>(c)) && testing::coin(rng, 0.5))
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (ilike_match(s, p)) {
      ++checked;
      ASSERT_TRUE(mask_matches(fingerprint(part, s), pattern_mask(part, p, true))) << s << " ILIKE " << p;
    }
  }
  EXPECT_GT(checked, 1000u);
}

TEST(Fingerprint, PartitionValidation) {
  std::array<uint16_t, 256> c{};
  EXPECT_THROW(BytePartition(c, 2), ValidationError); // cluster 1 unused
  c[5] = 2;
  EXPECT_THROW(BytePartition(c, 2), ValidationError); // out of range
}

TEST(Fingerprint, PartitionJsonRoundtrip) {
  const auto p = grouped_partition();
  nlohmann::json j = p;
  EXPECT_EQ(j.size(), 256u);
  EXPECT_EQ(partition_from_json(j, 4), p);
}

TEST(Fingerprint, RoundRobinStrategyMatchesFunction) {
  const std::vector<std::string> sample = {"abc"};
  EXPECT_EQ(RoundRobinStrategy().build(sample, 6), round_robin_partition(6));
}

} // namespace
} // namespace parachute
