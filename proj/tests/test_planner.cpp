#include "support.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace parachute {
namespace {

using namespace parachute::testing;

class Job4a : public ::testing::Test {
protected:
  static void SetUpTestSuite() {
    data_ = new SnowflakeData(generate_snowflake(7, 1, small_config()));
    db_ = new Database(attached_snowflake(*data_, 8));
  }
  static void TearDownTestSuite() {
    delete db_;
    delete data_;
  }
  static SnowflakeData *data_;
  static Database *db_;

  Query q = job4a_query();
  QueryPlan plan = [this] {
    auto p = *q.plan;
    complete_plan(p, q);
    return p;
  }();
  PipelineSet pipes = decompose_pipelines(plan);
  QueryClasses classes{q};
};
SnowflakeData *Job4a::data_ = nullptr;
Database *Job4a::db_ = nullptr;

TEST_F(Job4a, Validates) { EXPECT_NO_THROW(validate_query(q, db_->schema())); }

TEST_F(Job4a, Pipelines) {
  EXPECT_EQ(pipes.count, 4);
  EXPECT_EQ(pipes.of("it"), pipes.of("mi_idx"));
  EXPECT_TRUE(pipes.probe("mi_idx"));
  EXPECT_FALSE(pipes.probe("it"));
  EXPECT_LT(pipes.of("mi_idx"), pipes.of("t"));
  EXPECT_LT(pipes.of("t"), pipes.of("mk"));
  EXPECT_LT(pipes.of("mk"), pipes.of("k"));
  for (const char *a : {"t", "mk", "k"})
    EXPECT_TRUE(pipes.probe(a)) << a;
}

TEST_F(Job4a, Precedes) {
  EXPECT_TRUE(precedes("it", "mi_idx", pipes));
  EXPECT_FALSE(precedes("mi_idx", "it", pipes));
  EXPECT_TRUE(precedes("mi_idx", "t", pipes));
  EXPECT_TRUE(precedes("t", "mk", pipes));
  EXPECT_FALSE(precedes("k", "mk", pipes));
  EXPECT_FALSE(precedes("t", "mi_idx", pipes));
}

TEST_F(Job4a, Joinable) {
  EXPECT_TRUE(classes.joinable("mk", "k"));
  EXPECT_TRUE(classes.joinable("t", "mk"));
  EXPECT_TRUE(classes.joinable("mk", "mi_idx"));
  EXPECT_FALSE(classes.joinable("it", "k"));
  EXPECT_FALSE(classes.joinable("it", "t"));
}

TEST_F(Job4a, Flows) {
  const auto f = analyze_flows(pipes, classes, FlowMode::Psf);
  EXPECT_TRUE(f.flows("it", "mi_idx"));
  EXPECT_TRUE(f.flows("mi_idx", "t"));
  EXPECT_TRUE(f.flows("t", "mk"));
  EXPECT_TRUE(f.flows("mk", "k"));
  EXPECT_FALSE(f.flows("it", "t"));
  EXPECT_TRUE(flow_power(f, 2)[f.index("it")][f.index("t")]);
  EXPECT_TRUE(f.flows_transitive("it", "k"));
  EXPECT_FALSE(f.flows_transitive("t", "mi_idx"));
  EXPECT_FALSE(f.flows_transitive("k", "mk"));
  for (const auto &a : f.aliases)
    EXPECT_FALSE(f.flows_transitive(a, a));
}

TEST_F(Job4a, BlockedPairs) {
  const auto pairs = blocked_pairs(q, plan, db_->catalog());
  std::set<std::pair<std::string, std::string>> got;
  for (const auto &p : pairs)
    got.insert({p.source, p.target});
  const std::set<std::pair<std::string, std::string>> want = {{"t", "mi_idx"}, {"k", "mk"}};
  EXPECT_EQ(got, want);
  // Ordered by target pipeline.
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[0].target, "mi_idx");
  EXPECT_EQ(pairs[1].target, "mk");
}

TEST_F(Job4a, DropParachutes) {
  const auto r = drop_parachutes(q, blocked_pairs(q, plan, db_->catalog()), db_->catalog());
  EXPECT_EQ(r.injected, 2u);
  EXPECT_TRUE(r.warnings.empty());
  ASSERT_EQ(r.query.parachute_predicates.at("mi_idx").size(), 1u);
  const auto &mi = r.query.parachute_predicates.at("mi_idx")[0];
  EXPECT_EQ(mi.source, "t.production_year");
  EXPECT_TRUE(std::holds_alternative<tpred::BinBetween>(mi.predicate.value)) << describe(mi.predicate);
  ASSERT_EQ(r.query.parachute_predicates.at("mk").size(), 1u);
  const auto &mk = r.query.parachute_predicates.at("mk")[0];
  EXPECT_EQ(mk.source, "k.keyword");
  EXPECT_TRUE(std::holds_alternative<tpred::MaskSubset>(mk.predicate.value)) << describe(mk.predicate);
  EXPECT_EQ(r.query.predicates.size(), q.predicates.size());
}

TEST_F(Job4a, NoPredicatesNoPairs) {
  q.predicates.clear();
  EXPECT_TRUE(blocked_pairs(q, plan, db_->catalog()).empty());
}

TEST_F(Job4a, NoDescriptorNoPairs) {
  const Catalog bare(db_->schema());
  EXPECT_TRUE(blocked_pairs(q, plan, bare).empty());
}

TEST_F(Job4a, NoneModeBlocksEverythingFiltered) {
  const auto f = analyze_flows(pipes, classes, FlowMode::None);
  for (const auto &row : f.direct)
    for (bool b : row)
      EXPECT_FALSE(b);
  const auto pairs = blocked_pairs(q, plan, db_->catalog(), FlowMode::None);
  std::set<std::pair<std::string, std::string>> got;
  for (const auto &p : pairs)
    got.insert({p.source, p.target});
  EXPECT_TRUE(got.count({"it", "mi_idx"}));
  EXPECT_TRUE(got.count({"t", "mk"}));
}

TEST(Planner, SingleJoinOnePipeline) {
  auto q = pair_query("p");
  auto plan = *q.plan;
  complete_plan(plan, q);
  const auto pipes = decompose_pipelines(plan);
  EXPECT_EQ(pipes.count, 1);
  EXPECT_TRUE(pipes.probe("d"));
  EXPECT_FALSE(pipes.probe("f"));
  EXPECT_EQ(plan.nodes[static_cast<size_t>(plan.root)].condition.size(), 1u);
}

TEST(Planner, SingleTablePlan) {
  Query q;
  q.id = "one";
  q.relations = {{"t", "title"}};
  auto plan = parse_plan("t");
  complete_plan(plan, q);
  const auto pipes = decompose_pipelines(plan);
  EXPECT_EQ(pipes.count, 1);
  EXPECT_TRUE(pipes.probe("t"));
  const auto f = analyze_flows(pipes, QueryClasses(q), FlowMode::Psf);
  EXPECT_FALSE(f.flows("t", "t"));
}

// Random plans over the JOB-4a join graph.
class RandomPlans : public ::testing::Test {
protected:
  Query q = job4a_query();
  Rng rng{2024};
};

TEST_F(RandomPlans, ClosureIsUnionOfPowersProperty) {
  const QueryClasses classes(q);
  for (int trial = 0; trial < 200; ++trial) {
    const auto plan = random_plan(rng, q);
    const auto pipes = decompose_pipelines(plan);
    for (auto mode : {FlowMode::Psf, FlowMode::Lip, FlowMode::PsfBuild, FlowMode::None}) {
      const auto f = analyze_flows(pipes, classes, mode);
      const size_t n = f.aliases.size();
      std::vector<std::vector<bool>> acc(n, std::vector<bool>(n, false));
      for (unsigned k = 1; k < n; ++k) {
        const auto pk = flow_power(f, k);
        for (size_t i = 0; i < n; ++i)
          for (size_t j = 0; j < n; ++j)
            acc[i][j] = acc[i][j] || pk[i][j];
      }
      for (size_t i = 0; i < n; ++i)
        acc[i][i] = false;
      ASSERT_EQ(acc, f.closure) << to_string(mode);
      for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
          if (f.direct[i][j])
            ASSERT_TRUE(f.closure[i][j]);
    }
  }
}

TEST_F(RandomPlans, FlowDefinitionsProperty) {
  const QueryClasses classes(q);
  for (int trial = 0; trial < 200; ++trial) {
    const auto plan = random_plan(rng, q);
    const auto pipes = decompose_pipelines(plan);
    int probe_leaves = 0;
    for (const auto &r : q.relations)
      probe_leaves += pipes.probe(r.alias);
    ASSERT_EQ(pipes.count, probe_leaves);
    for (const auto &r : q.relations)
      for (const auto &s : q.relations) {
        if (r.alias == s.alias)
          continue;
        const bool j = classes.joinable(r.alias, s.alias);
        const bool pre = precedes(r.alias, s.alias, pipes);
        const bool psf = flows(r.alias, s.alias, pipes, classes, FlowMode::Psf);
        const bool lip = flows(r.alias, s.alias, pipes, classes, FlowMode::Lip);
        const bool build = flows(r.alias, s.alias, pipes, classes, FlowMode::PsfBuild);
        ASSERT_EQ(psf, pre && j && pipes.probe(s.alias));
        ASSERT_EQ(build, pre && j);
        ASSERT_EQ(lip, pipes.of(r.alias) == pipes.of(s.alias) && pipes.probe(s.alias));
        ASSERT_FALSE(flows(r.alias, s.alias, pipes, classes, FlowMode::None));
        // LIP never crosses pipelines.
        if (lip)
          ASSERT_EQ(pipes.of(r.alias), pipes.of(s.alias));
        ASSERT_FALSE(pre && precedes(s.alias, r.alias, pipes));
      }
  }
}

TEST_F(RandomPlans, EveryPipelineHasOneProbe) {
  for (int trial = 0; trial < 100; ++trial) {
    const auto pipes = decompose_pipelines(random_plan(rng, q));
    std::map<int, int> probes;
    for (const auto &r : q.relations)
      probes[pipes.of(r.alias)] += pipes.probe(r.alias);
    for (int p = 0; p < pipes.count; ++p) {
      ASSERT_EQ(probes[p], 1);
      ASSERT_TRUE(pipes.probe(pipes.probe_of[static_cast<size_t>(p)]));
      ASSERT_EQ(pipes.of(pipes.probe_of[static_cast<size_t>(p)]), p);
    }
  }
}

TEST(Planner, GreedySmallerSideBuilds) {
  auto q = pair_query("g");
  q.plan.reset();
  const auto plan = greedy_plan(q, {{"fact", 1000}, {"dim", 10}});
  const auto &root = plan.nodes[static_cast<size_t>(plan.root)];
  EXPECT_EQ(plan.nodes[static_cast<size_t>(root.build)].alias, "d");
  EXPECT_EQ(plan.nodes[static_cast<size_t>(root.probe)].alias, "f");
  const auto flipped = greedy_plan(q, {{"fact", 10}, {"dim", 1000}});
  EXPECT_EQ(flipped.leaves(), (std::vector<std::string>{"f", "d"}));
}

TEST(Planner, GreedyDeterministicAndComplete) {
  const auto q = job4a_query();
  const TableStats stats = {
      {"title", 2000}, {"keyword", 400}, {"info_type", 113}, {"movie_info_idx", 5000}, {"movie_keyword", 10000}};
  const auto a = greedy_plan(q, stats), b = greedy_plan(q, stats);
  nlohmann::json ja = a, jb = b;
  EXPECT_EQ(ja, jb);
  auto leaves = a.leaves();
  std::sort(leaves.begin(), leaves.end());
  EXPECT_EQ(leaves, (std::vector<std::string>{"it", "k", "mi_idx", "mk", "t"}));
  // info_type with an equality is the smallest estimate.
  EXPECT_EQ(a.leaves().front(), "it");
}

TEST(Planner, GreedyDisconnected) {
  auto q = job4a_query();
  q.joins.erase(q.joins.begin()); // it no longer joins
  EXPECT_THROW(greedy_plan(q, {}), ValidationError);
}

TEST(Planner, ParsePlan) {
  const auto p = parse_plan("((it mi_idx) t)");
  EXPECT_EQ(p.leaves(), (std::vector<std::string>{"it", "mi_idx", "t"}));
  EXPECT_THROW(parse_plan("((it mi_idx) t"), ParseError);
  EXPECT_THROW(parse_plan("(it mi_idx) t"), ParseError);
  EXPECT_THROW(parse_plan("()"), ParseError);
}

TEST(Planner, CompletePlanRejectsCrossProduct) {
  auto q = job4a_query();
  auto plan = parse_plan("((((it t) mi_idx) mk) k)");
  EXPECT_THROW(complete_plan(plan, q), ValidationError);
}

TEST(Planner, PlanAndQueryJsonRoundtrip) {
  auto q = job4a_query();
  complete_plan(*q.plan, q);
  q.parachute_predicates["mk"].push_back({3, "keyword_keyword_p", "k.keyword", {tpred::MaskSubset{5}}});
  nlohmann::json j = q;
  const auto back = query_from_json(j);
  nlohmann::json j2 = back;
  EXPECT_EQ(j, j2);
  EXPECT_EQ(back.relations, q.relations);
  EXPECT_EQ(back.joins, q.joins);
  nlohmann::json jp = *q.plan;
  nlohmann::json jp2 = plan_from_json(jp);
  EXPECT_EQ(jp, jp2);
  EXPECT_THROW(query_from_json(nlohmann::json::parse(R"({"id": 3})")), ParseError);
}

TEST(Planner, ValidateQueryErrors) {
  const auto data = generate_snowflake(1, 1, small_config(1));
  const auto &schema = data.schema;
  {
    auto q = job4a_query();
    q.relations[0].table = "nope";
    EXPECT_THROW(validate_query(q, schema), LookupError);
  }
  {
    auto q = job4a_query();
    q.predicates["t"].push_back({"production_year", cmp(CompareOp::Eq, std::string("x"))});
    EXPECT_THROW(validate_query(q, schema), ValidationError);
  }
  {
    auto q = job4a_query();
    q.predicates["t"].push_back({"production_year", like("%1%")});
    EXPECT_THROW(validate_query(q, schema), ValidationError);
  }
  {
    auto q = job4a_query();
    q.joins.push_back({{"t", "id"}, {"k", "id"}});
    EXPECT_THROW(validate_query(q, schema), ValidationError);
  }
  {
    auto q = job4a_query();
    q.joins.pop_back();
    q.plan.reset();
    EXPECT_THROW(validate_query(q, schema), ValidationError);
  }
  {
    auto q = job4a_query();
    q.relations.push_back({"t", "title"});
    EXPECT_THROW(validate_query(q, schema), ValidationError);
  }
  {
    auto q = job4a_query();
    q.plan = parse_plan("(((it mi_idx) t) mk)");
    EXPECT_THROW(validate_query(q, schema), ValidationError);
  }
}

TEST(Planner, FlowModeNames) {
  for (auto m : {FlowMode::Psf, FlowMode::Lip, FlowMode::PsfBuild, FlowMode::None})
    EXPECT_EQ(flow_mode_from_string(to_string(m)), m);
  EXPECT_THROW(flow_mode_from_string("sideways"), ParseError);
}

} // namespace
} // namespace parachute
