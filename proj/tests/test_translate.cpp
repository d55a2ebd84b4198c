#include "support.hpp"

#include "parachute/translate.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace parachute {
namespace {

using namespace parachute::testing;

ParachuteDescriptor descriptor_for(ParachuteKind kind, unsigned pbw, std::variant<EquiDepthHistogram, BytePartition> rep,
                                   bool nullable) {
  ParachuteDescriptor d;
  d.fk_table = "fact";
  d.fk_column = "dim_id";
  d.pk_table = d.origin_table = "dim";
  d.pk_column = "id";
  d.source_column = d.origin_column = "col";
  d.kind = kind;
  d.pbw = pbw;
  d.representation = std::move(rep);
  d.nullable_source = nullable;
  return d;
}

ParachuteDescriptor years(std::vector<int64_t> bounds, unsigned pbw, bool null_bin = false) {
  return descriptor_for(ParachuteKind::NumericHistogram, pbw, EquiDepthHistogram::numeric(std::move(bounds), null_bin),
                        null_bin);
}

const TranslatedPredicate &ok(const TranslateResult &r) {
  if (auto *nt = std::get_if<NotTranslatable>(&r))
    ADD_FAILURE() << "not translatable: " << nt->reason;
  return std::get<TranslatedPredicate>(r);
}

TEST(Translate, YearBefore2025) {
  const auto d = years({1950, 1960, 1970, 1980, 1990, 2000, 2010}, 3);
  const auto tp = ok(translate(cmp(CompareOp::Lt, int64_t{2025}), d));
  const auto *c = std::get_if<tpred::BinCompare>(&tp.value);
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->op, CompareOp::Le);
  EXPECT_EQ(c->bin, 7u);
}

TEST(Translate, RangeOperators) {
  const auto d = years({2000, 2004, 2020}, 2);
  auto check = [&](CompareOp op, CompareOp want, uint32_t bin) {
    const auto tp = ok(translate(cmp(op, int64_t{2003}), d));
    const auto *c = std::get_if<tpred::BinCompare>(&tp.value);
    ASSERT_NE(c, nullptr);
    EXPECT_EQ(c->op, want);
    EXPECT_EQ(c->bin, bin);
  };
  check(CompareOp::Lt, CompareOp::Le, 1);
  check(CompareOp::Le, CompareOp::Le, 1);
  check(CompareOp::Gt, CompareOp::Ge, 1);
  check(CompareOp::Ge, CompareOp::Ge, 1);
  check(CompareOp::Eq, CompareOp::Eq, 1);
  EXPECT_TRUE(std::holds_alternative<tpred::AlwaysTrue>(ok(translate(cmp(CompareOp::Ne, int64_t{2003}), d)).value));
}

TEST(Translate, BetweenDegenerate) {
  const auto d = years({2000, 2004, 2020}, 2);
  const auto tp = ok(translate(between(int64_t{2010}, int64_t{2010}), d));
  const auto *b = std::get_if<tpred::BinBetween>(&tp.value);
  ASSERT_NE(b, nullptr);
  EXPECT_EQ(b->lo, 2u);
  EXPECT_EQ(b->hi, 2u);
  for (uint32_t v = 0; v < 4; ++v)
    EXPECT_EQ(evaluate_translated(tp, v), evaluate_translated({tpred::BinCompare{CompareOp::Eq, 2}}, v));
}

TEST(Translate, NullBinExcludedFromRanges) {
  const auto d = years({2000, 2004}, 2, true);
  const auto tp = ok(translate(cmp(CompareOp::Lt, int64_t{1990}), d));
  EXPECT_FALSE(evaluate_translated(tp, 0)); // NULL never satisfies a comparison
  EXPECT_TRUE(evaluate_translated(tp, 1));
  const auto isnull = ok(translate({pred::IsNull{}}, d));
  EXPECT_TRUE(evaluate_translated(isnull, 0));
  EXPECT_FALSE(evaluate_translated(isnull, 1));
  EXPECT_TRUE(std::holds_alternative<tpred::AlwaysFalse>(ok(translate({pred::IsNull{}}, years({2000}, 1))).value));
}

TEST(Translate, UtnPattern) {
  const auto part = round_robin_partition(8);
  const auto d = descriptor_for(ParachuteKind::StringFingerprint, 8, part, false);
  const auto tp = ok(translate(like("%utn%"), d));
  const auto *m = std::get_if<tpred::MaskSubset>(&tp.value);
  ASSERT_NE(m, nullptr);
  EXPECT_EQ(m->pmask, fingerprint(part, "utn").mask);
}

TEST(Translate, IncompatibleKinds) {
  EXPECT_TRUE(std::holds_alternative<NotTranslatable>(translate(like("%a%"), years({1}, 1))));
  const auto fp = descriptor_for(ParachuteKind::StringFingerprint, 8, round_robin_partition(8), false);
  EXPECT_TRUE(std::holds_alternative<NotTranslatable>(translate(cmp(CompareOp::Lt, std::string("a")), fp)));
  EXPECT_TRUE(std::holds_alternative<NotTranslatable>(translate(cmp(CompareOp::Lt, std::string("a")), years({1}, 1))));
}

TEST(Translate, IlikeGate) {
  const auto bad = descriptor_for(ParachuteKind::StringFingerprint, 3, round_robin_partition(3), false);
  EXPECT_TRUE(std::holds_alternative<NotTranslatable>(translate(ilike("%ab%"), bad)));
  const auto good = descriptor_for(ParachuteKind::StringFingerprint, 4, round_robin_partition(4), false);
  EXPECT_TRUE(std::holds_alternative<TranslatedPredicate>(translate(ilike("%ab%"), good)));
}

TEST(Translate, LowcardSingletonNotEqual) {
  const auto h = EquiDepthHistogram::value_map({{"a", 0}, {"b", 1}, {"c", 1}}, 2, 1, false);
  const auto d = descriptor_for(ParachuteKind::LowcardString, 1, h, false);
  // "a" sits alone in bin 0 and is not the overflow bin.
  const auto tp = ok(translate(cmp(CompareOp::Ne, std::string("a")), d));
  const auto *c = std::get_if<tpred::BinCompare>(&tp.value);
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->op, CompareOp::Ne);
  EXPECT_TRUE(std::holds_alternative<tpred::AlwaysTrue>(ok(translate(cmp(CompareOp::Ne, std::string("b")), d)).value));
}

TEST(Translate, LowcardLikeEnumerates) {
  const auto h = EquiDepthHistogram::value_map({{"apple", 0}, {"banana", 1}, {"cherry", 2}, {"date", 3}}, 4, 3, false);
  const auto d = descriptor_for(ParachuteKind::LowcardString, 2, h, false);
  const auto tp = ok(translate(like("%an%"), d));
  // banana plus the overflow bin for values unseen at build time.
  EXPECT_TRUE(evaluate_translated(tp, 1));
  EXPECT_TRUE(evaluate_translated(tp, 3));
  EXPECT_FALSE(evaluate_translated(tp, 0));
  EXPECT_FALSE(evaluate_translated(tp, 2));
}

TEST(Translate, RegexExpansion) {
  const auto lang = enumerate_regex("house(keeping|work)?");
  ASSERT_TRUE(lang.has_value());
  EXPECT_EQ(std::set<std::string>(lang->begin(), lang->end()),
            (std::set<std::string>{"house", "housekeeping", "housework"}));
  EXPECT_EQ(enumerate_regex("abc"), (std::optional<std::vector<std::string>>{{"abc"}}));
  EXPECT_FALSE(enumerate_regex("a*").has_value());
  EXPECT_FALSE(enumerate_regex("a+").has_value());
  EXPECT_FALSE(enumerate_regex("[ab]").has_value());
  // 2^11 strings exceed the default cap.
  std::string big;
  for (int i = 0; i < 11; ++i)
    big += "(a|b)";
  EXPECT_FALSE(enumerate_regex(big).has_value());
}

TEST(Translate, UdfNeedsExactBins) {
  const auto exact = descriptor_for(ParachuteKind::NumericHistogram, 2,
                                    EquiDepthHistogram::numeric({1, 2, 3}, false, true), false);
  const auto tp = ok(translate({pred::EnumeratedUdf{"f", {Datum{int64_t{2}}, Datum{int64_t{4}}}}}, exact));
  EXPECT_TRUE(evaluate_translated(tp, 1));
  EXPECT_TRUE(evaluate_translated(tp, 3));
  EXPECT_FALSE(evaluate_translated(tp, 0));
  const auto coarse = years({2000, 2004, 2020}, 2);
  EXPECT_TRUE(std::holds_alternative<NotTranslatable>(
      translate({pred::EnumeratedUdf{"f", {Datum{int64_t{2001}}}}}, coarse)));
}

TEST(Translate, EvaluateExamples) {
  EXPECT_TRUE(evaluate_translated({tpred::BinCompare{CompareOp::Le, 7}}, 7));
  EXPECT_FALSE(evaluate_translated({tpred::BinCompare{CompareOp::Le, 7}}, 8));
  for (uint32_t v : {0u, 1u, 255u, 65535u}) {
    EXPECT_TRUE(evaluate_translated({tpred::MaskSubset{0}}, v));
    EXPECT_FALSE(evaluate_translated({tpred::BinIn{{}}}, v));
  }
}

TEST(Translate, ConjunctionAbsorption) {
  const auto d = years({2000, 2004, 2020}, 2);
  const std::vector<BasePredicate> with_false = {cmp(CompareOp::Gt, int64_t{1990}), between(int64_t{5}, int64_t{1})};
  const auto a = translate_conjunction(with_false, d);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_TRUE(std::holds_alternative<tpred::AlwaysFalse>(a[0].value));
  std::vector<std::string> skipped;
  const std::vector<BasePredicate> with_true = {cmp(CompareOp::Ne, int64_t{1}), cmp(CompareOp::Gt, int64_t{2010}),
                                                like("x")};
  const auto b = translate_conjunction(with_true, d, &skipped);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_TRUE(std::holds_alternative<tpred::BinCompare>(b[0].value));
  EXPECT_EQ(skipped.size(), 1u);
}

TEST(Translate, JsonRoundtrip) {
  const std::vector<TranslatedPredicate> tps = {{tpred::BinCompare{CompareOp::Ge, 3}}, {tpred::BinBetween{1, 2}},
                                                {tpred::BinIn{{1, 5}}}, {tpred::MaskSubset{10}},
                                                {tpred::AlwaysTrue{}}, {tpred::AlwaysFalse{}}};
  for (const auto &tp : tps) {
    nlohmann::json j = tp;
    EXPECT_EQ(nlohmann::json(translated_predicate_from_json(j)), j);
  }
  Rng rng(4);
  for (auto kind : {ParachuteKind::NumericHistogram, ParachuteKind::LowcardString, ParachuteKind::StringFingerprint})
    for (int i = 0; i < 50; ++i) {
      const auto dom = random_domain(rng, kind);
      nlohmann::json j = random_predicate(rng, dom);
      EXPECT_EQ(nlohmann::json(base_predicate_from_json(j)), j);
    }
}

// Descriptor over `dom` built from a random subsample, so some values are
// unseen at build time and exercise clamping and the overflow bin.
ParachuteDescriptor random_descriptor(Rng &rng, const TrialDomain &dom, unsigned pbw, bool nullable) {
  if (dom.kind == ParachuteKind::StringFingerprint) {
    const auto part = coin(rng, 0.7) ? round_robin_partition(pbw) : [&] {
      std::array<uint16_t, 256> c{};
      for (auto &x : c)
        x = static_cast<uint16_t>(uniform(rng, pbw));
      for (unsigned k = 0; k < pbw; ++k)
        c[k] = static_cast<uint16_t>(k);
      return BytePartition(c, pbw);
    }();
    return descriptor_for(dom.kind, pbw, part, nullable);
  }
  WeightedSample s;
  for (const auto &v : dom.values)
    if (coin(rng, 0.8))
      s.entries.emplace_back(v, 1 + uniform(rng, 20));
  if (s.entries.empty())
    s.entries.emplace_back(dom.values.front(), 1);
  s.contains_null = nullable;
  return descriptor_for(dom.kind, pbw, build_equidepth(s, pbw, nullable), nullable);
}

uint32_t stored_value(const ParachuteDescriptor &d, const std::optional<Datum> &v) {
  if (d.has_histogram())
    return d.histogram().bin(v);
  return v ? static_cast<uint32_t>(fingerprint(d.partition(), as_string(*v)).mask) : 0u;
}

// Central theorem: a value satisfying the predicate always passes the
// translated predicate on its stored parachute value.
TEST(Translate, SoundnessProperty) {
  Rng rng(2024);
  size_t satisfied = 0, translated = 0;
  const unsigned widths[] = {1, 2, 4, 8, 16};
  for (int trial = 0; trial < 6000; ++trial) {
    const auto kind = static_cast<ParachuteKind>(trial % 3);
    const auto dom = random_domain(rng, kind);
    const unsigned pbw = widths[uniform(rng, 5)];
    const bool nullable = coin(rng, 0.4);
    const auto desc = random_descriptor(rng, dom, pbw, nullable);
    const auto p = random_predicate(rng, dom);
    const auto r = translate(p, desc);
    if (std::holds_alternative<NotTranslatable>(r))
      continue;
    ++translated;
    const auto &tp = std::get<TranslatedPredicate>(r);
    const CompiledPredicate compiled(tp);
    std::vector<std::optional<Datum>> probes(dom.values.begin(), dom.values.end());
    for (int k = 0; k < 10; ++k)
      probes.emplace_back(probe_value(rng, dom));
    if (nullable)
      probes.emplace_back(std::nullopt);
    for (const auto &v : probes) {
      const uint32_t stored = stored_value(desc, v);
      ASSERT_EQ(compiled.test(stored), evaluate_translated(tp, stored));
      if (!evaluate(p, v))
        continue;
      ++satisfied;
      ASSERT_TRUE(evaluate_translated(tp, stored))
          << "trial " << trial << ": " << describe(p) << " -> " << describe(tp) << " rejects "
          << (v ? datum_to_string(*v) : "NULL") << " stored as " << stored;
    }
  }
  EXPECT_GT(translated, 4000u);
  EXPECT_GT(satisfied, 10000u);
}

TEST(Translate, CompiledMatchesEvaluateProperty) {
  Rng rng(8);
  for (int i = 0; i < 2000; ++i) {
    TranslatedPredicate tp;
    const uint32_t a = static_cast<uint32_t>(uniform(rng, 70000)), b = static_cast<uint32_t>(uniform(rng, 70000));
    switch (uniform(rng, 6)) {
    case 0:
      tp = {tpred::BinCompare{static_cast<CompareOp>(uniform(rng, 6)), static_cast<uint32_t>(uniform(rng, 3)) * a}};
      break;
    case 1:
      tp = {tpred::BinBetween{a, b}};
      break;
    case 2: {
      std::set<uint32_t> s;
      for (int k = 0; k < 5; ++k)
        s.insert(static_cast<uint32_t>(uniform(rng, coin(rng, 0.5) ? 100 : 100000)));
      tp = {tpred::BinIn{{s.begin(), s.end()}}};
      break;
    }
    case 3:
      tp = {tpred::MaskSubset{a & 0xFFFF}};
      break;
    case 4:
      tp = {tpred::AlwaysTrue{}};
      break;
    default:
      tp = {tpred::AlwaysFalse{}};
    }
    const CompiledPredicate c(tp);
    for (int k = 0; k < 50; ++k) {
      const uint32_t v = k < 3 ? std::vector<uint32_t>{0, a, b}[k] : static_cast<uint32_t>(uniform(rng, 100000));
      ASSERT_EQ(c.test(v), evaluate_translated(tp, v)) << describe(tp) << " at " << v;
    }
  }
}

} // namespace
} // namespace parachute
