#pragma once

#include "parachute/attach.hpp"
#include "parachute/bench.hpp"
#include "parachute/engine.hpp"
#include "parachute/oracle.hpp"
#include "parachute/pattern.hpp"
#include "parachute/planner.hpp"

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <random>
#include <set>

namespace parachute::testing {

using Rng = std::mt19937_64;

inline size_t uniform(Rng &rng, size_t n) { return std::uniform_int_distribution<size_t>(0, n - 1)(rng); }
inline int64_t uniform(Rng &rng, int64_t lo, int64_t hi) { return std::uniform_int_distribution<int64_t>(lo, hi)(rng); }
inline bool coin(Rng &rng, double p) { return std::bernoulli_distribution(p)(rng); }

inline BasePredicate cmp(CompareOp op, Datum v) { return {pred::Compare{op, std::move(v)}}; }
inline BasePredicate between(Datum lo, Datum hi) { return {pred::Between{std::move(lo), std::move(hi)}}; }
inline BasePredicate in_list(std::vector<Datum> v) { return {pred::InList{std::move(v)}}; }
inline BasePredicate like(std::string p) { return {pred::Like{std::move(p)}}; }
inline BasePredicate ilike(std::string p) { return {pred::ILike{std::move(p)}}; }

/// Fresh empty directory under the system temp dir.
inline std::string temp_dir(const std::string &name) {
  auto p = std::filesystem::temp_directory_path() / ("parachute_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p.string();
}

inline TableData make_table(const TableDef &def, const std::vector<std::vector<std::optional<Datum>>> &rows) {
  TableData t(def);
  for (const auto &r : rows)
    t.append_row(r);
  return t;
}

/// Two-table star: dim(id, num, cat, txt) referenced by fact(id, dim_id).
inline Schema pair_schema() {
  using LT = LogicalType;
  return Schema({{"dim",
                  {{"id", LT::Int64, false}, {"num", LT::Int64, true}, {"cat", LT::String, true},
                   {"txt", LT::String, true}},
                  "id"},
                 {"fact", {{"id", LT::Int64, false}, {"dim_id", LT::Int64, true}}, "id"}},
                {{"fact", "dim_id", "dim", "id"}});
}

/// fact ⋈ dim with fact as build side, so no flow reaches fact.
inline Query pair_query(const std::string &id) {
  Query q;
  q.id = id;
  q.relations = {{"f", "fact"}, {"d", "dim"}};
  q.joins = {{{"d", "id"}, {"f", "dim_id"}}};
  q.plan = parse_plan("(f d)");
  q.projection = {{"f", "id"}, {"d", "id"}};
  return q;
}

/// A tenth of the default snowflake sizes, for fast tests.
inline SnowflakeConfig small_config(size_t queries = 13) {
  SnowflakeConfig c;
  c.queries = queries;
  c.titles = 2000;
  c.keywords = 400;
  c.movie_info = 5000;
  c.movie_keywords = 10000;
  return c;
}

/// Snowflake database at scale 1 with the generator's attach spec at `pbw`.
inline Database attached_snowflake(const SnowflakeData &data, unsigned pbw) {
  Database db = make_database(data);
  AttachOptions o;
  o.pbw = pbw;
  o.seed = data.seed;
  attach_all(db, data.spec, o);
  return db;
}

/// Exact non-dangling rows via a brute-force nested-loop join.
inline std::map<std::string, std::vector<uint32_t>> brute_force_sets(const Database &db, const Query &q) {
  const size_t n = q.relations.size();
  std::vector<std::vector<uint32_t>> local(n);
  for (size_t i = 0; i < n; ++i) {
    const auto &t = db.table(q.relations[i].table);
    for (uint32_t r = 0; r < t.row_count(); ++r) {
      bool ok = true;
      if (auto it = q.predicates.find(q.relations[i].alias); it != q.predicates.end())
        for (const auto &p : it->second)
          ok = ok && evaluate(p.predicate, t.column(p.column).get(r));
      if (ok)
        local[i].push_back(r);
    }
  }
  std::vector<std::set<uint32_t>> hit(n);
  std::vector<uint32_t> cur(n);
  auto value = [&](const ColumnRef &c) -> std::optional<Datum> {
    const size_t i = q.alias_index(c.alias);
    return db.table(q.relations[i].table).column(c.column).get(cur[i]);
  };
  auto consistent = [&](size_t upto) {
    for (const auto &e : q.joins) {
      if (q.alias_index(e.left.alias) > upto || q.alias_index(e.right.alias) > upto)
        continue;
      auto a = value(e.left), b = value(e.right);
      if (!a || !b || *a != *b)
        return false;
    }
    return true;
  };
  auto rec = [&](auto &&self, size_t i) -> void {
    if (i == n) {
      for (size_t k = 0; k < n; ++k)
        hit[k].insert(cur[k]);
      return;
    }
    for (uint32_t r : local[i]) {
      cur[i] = r;
      if (consistent(i))
        self(self, i + 1);
    }
  };
  rec(rec, 0);
  std::map<std::string, std::vector<uint32_t>> out;
  for (size_t i = 0; i < n; ++i)
    out[q.relations[i].alias] = {hit[i].begin(), hit[i].end()};
  return out;
}

/// JOB-4a over the snowflake schema, planned ((((it ⋈ mi_idx) ⋈ t) ⋈ mk) ⋈ k).
inline Query job4a_query(std::string info = "rating", std::string keyword_pattern = "%sequel%") {
  Query q;
  q.id = "job4a";
  q.relations = {{"it", "info_type"}, {"mi_idx", "movie_info_idx"}, {"t", "title"}, {"mk", "movie_keyword"},
                 {"k", "keyword"}};
  auto edge = [&](const char *l, const char *r) {
    q.joins.push_back({column_ref_from_string(l), column_ref_from_string(r)});
  };
  edge("it.id", "mi_idx.info_type_id");
  edge("t.id", "mi_idx.movie_id");
  edge("t.id", "mk.movie_id");
  edge("mk.movie_id", "mi_idx.movie_id");
  edge("k.id", "mk.keyword_id");
  q.predicates["it"].push_back({"info", cmp(CompareOp::Eq, std::move(info))});
  q.predicates["mi_idx"].push_back({"info", cmp(CompareOp::Gt, std::string("5.0"))});
  q.predicates["t"].push_back({"production_year", between(int64_t{2005}, int64_t{2010})});
  q.predicates["k"].push_back({"keyword", like(std::move(keyword_pattern))});
  q.projection = {{"mi_idx", "info"}, {"t", "title"}};
  q.plan = parse_plan("((((it mi_idx) t) mk) k)");
  return q;
}

/// Random bushy plan: repeatedly joins two connected subtrees in random
/// build/probe order.
inline QueryPlan random_plan(Rng &rng, const Query &q) {
  QueryPlan plan;
  std::vector<std::pair<int, std::set<std::string>>> parts;
  for (const auto &r : q.relations)
    parts.push_back({plan.add_leaf(r.alias), {r.alias}});
  while (parts.size() > 1) {
    std::vector<std::pair<size_t, size_t>> candidates;
    for (size_t a = 0; a < parts.size(); ++a)
      for (size_t b = 0; b < parts.size(); ++b)
        if (a != b)
          for (const auto &e : q.joins)
            if (parts[a].second.count(e.left.alias) && parts[b].second.count(e.right.alias)) {
              candidates.emplace_back(a, b);
              break;
            }
    auto [a, b] = candidates[uniform(rng, candidates.size())];
    if (coin(rng, 0.5))
      std::swap(a, b);
    auto merged = parts[a].second;
    merged.insert(parts[b].second.begin(), parts[b].second.end());
    const int node = plan.add_join(parts[a].first, parts[b].first);
    parts.erase(parts.begin() + static_cast<std::ptrdiff_t>(std::max(a, b)));
    parts.erase(parts.begin() + static_cast<std::ptrdiff_t>(std::min(a, b)));
    parts.push_back({node, std::move(merged)});
  }
  plan.root = parts.front().first;
  complete_plan(plan, q);
  return plan;
}

/// Attaches every descriptor of `db` from scratch, under the same
/// representations, onto copies of its current tables.
inline Database fresh_reattach(const Database &db) {
  Database fresh{Catalog(db.schema())};
  for (const auto &[name, t] : db.tables()) {
    std::vector<uint32_t> all(t.row_count());
    std::iota(all.begin(), all.end(), 0u);
    fresh.put_table(t.select_rows(all));
  }
  std::vector<AttachSpecEntry> entries;
  for (const auto &d : db.catalog().descriptors()) {
    fresh.catalog().register_parachute(d);
    entries.push_back({d.fk_table, d.pk_table, d.source_column, d.kind, d.pbw, d.fk_column});
  }
  for (const auto &d : fresh.catalog().descriptors())
    if (d.helper_column && !d.via)
      build_helper(fresh, d, false);
  for (const auto &table : attach_order(db.schema(), entries)) {
    std::vector<DescriptorId> ids;
    for (const auto *d : fresh.catalog().on_table(table))
      ids.push_back(d->id);
    if (!ids.empty())
      attach(fresh, table, ids, false);
  }
  return fresh;
}

/// Names of packed columns that differ between two databases.
inline std::vector<std::string> packed_differences(const Database &a, const Database &b) {
  std::vector<std::string> out;
  for (const auto &[name, t] : a.tables()) {
    const auto &u = b.table(name);
    for (const auto &[col, packed] : t.packed_columns())
      if (!u.has_packed(col) || !(u.packed(col) == packed))
        out.push_back(name + "." + col);
    for (const auto &[col, _] : u.packed_columns())
      if (!t.has_packed(col))
        out.push_back(name + "." + col);
  }
  return out;
}

/// Mixed ASCII and multi-byte UTF-8 text.
inline std::string random_text(Rng &rng, size_t max_len) {
  static const std::vector<std::string> alphabet = {"a", "b", "c", "N", "t", "U", " ", "é", "ß", "日", "本", "x", "Z"};
  std::string s;
  for (size_t k = uniform(rng, max_len + 1); k > 0; --k)
    s += alphabet[uniform(rng, alphabet.size())];
  return s;
}

/// A LIKE pattern that `s` matches: random substrings separated by '%', some
/// ASCII bytes replaced by '_'.
inline std::string matching_pattern(Rng &rng, const std::string &s) {
  std::string p = "%";
  size_t pos = 0;
  while (pos < s.size() && coin(rng, 0.7)) {
    pos += uniform(rng, s.size() - pos + 1);
    if (pos >= s.size())
      break;
    const size_t len = uniform(rng, s.size() - pos + 1);
    std::string piece = s.substr(pos, len);
    pos += len;
    // Only keep whole UTF-8 sequences.
    while (!piece.empty() && (static_cast<uint8_t>(piece.back()) & 0x80))
      piece.pop_back();
    while (!piece.empty() && (static_cast<uint8_t>(piece.front()) & 0xC0) == 0x80)
      piece.erase(piece.begin());
    for (char &c : piece)
      if (!(static_cast<uint8_t>(c) & 0x80) && coin(rng, 0.2))
        c = '_';
    p += piece + "%";
  }
  return p;
}

/// Value domain of a random soundness trial.
struct TrialDomain {
  ParachuteKind kind = ParachuteKind::NumericHistogram;
  std::vector<Datum> values;
};

inline TrialDomain random_domain(Rng &rng, ParachuteKind kind) {
  TrialDomain d;
  d.kind = kind;
  const size_t n = 1 + uniform(rng, kind == ParachuteKind::LowcardString ? 12 : 60);
  std::set<Datum> seen;
  while (seen.size() < n) {
    switch (kind) {
    case ParachuteKind::NumericHistogram:
      seen.insert(Datum{uniform(rng, int64_t{1900}, int64_t{2030})});
      break;
    case ParachuteKind::LowcardString:
      seen.insert(Datum{"v" + std::to_string(uniform(rng, 30))});
      break;
    case ParachuteKind::StringFingerprint:
      seen.insert(Datum{random_text(rng, 8)});
      break;
    }
  }
  d.values.assign(seen.begin(), seen.end());
  return d;
}

inline Datum pick(Rng &rng, const TrialDomain &d) { return d.values[uniform(rng, d.values.size())]; }

/// A value of the domain's type that may or may not occur in the domain.
inline Datum probe_value(Rng &rng, const TrialDomain &d) {
  if (coin(rng, 0.7))
    return pick(rng, d);
  switch (d.kind) {
  case ParachuteKind::NumericHistogram:
    return Datum{uniform(rng, int64_t{1850}, int64_t{2100})};
  case ParachuteKind::LowcardString:
    return Datum{"v" + std::to_string(uniform(rng, 40))};
  case ParachuteKind::StringFingerprint:
    return Datum{random_text(rng, 6)};
  }
  return pick(rng, d);
}

inline BasePredicate random_predicate(Rng &rng, const TrialDomain &d, int depth = 0) {
  const auto op = static_cast<CompareOp>(uniform(rng, 6));
  auto list = [&] {
    std::vector<Datum> v;
    for (size_t k = 1 + uniform(rng, 4); k > 0; --k)
      v.push_back(probe_value(rng, d));
    return v;
  };
  const size_t r = uniform(rng, 10);
  if (r == 0)
    return {pred::IsNull{}};
  if (r == 1 && depth == 0)
    return {pred::AnyOf{{random_predicate(rng, d, 1), random_predicate(rng, d, 1)}}};
  if (r == 2) {
    std::vector<Datum> q;
    for (const auto &v : d.values)
      if (coin(rng, 0.3))
        q.push_back(v);
    return {pred::EnumeratedUdf{"udf", q}};
  }
  if (r == 3)
    return in_list(list());
  switch (d.kind) {
  case ParachuteKind::NumericHistogram: {
    if (r < 6) {
      auto a = probe_value(rng, d), b = probe_value(rng, d);
      if (coin(rng, 0.8) && b < a)
        std::swap(a, b);
      return between(a, b);
    }
    return cmp(op, probe_value(rng, d));
  }
  case ParachuteKind::LowcardString: {
    if (r == 4)
      return cmp(coin(rng, 0.5) ? CompareOp::Eq : CompareOp::Ne, probe_value(rng, d));
    if (r == 5)
      return {pred::EnumerableRegex{"v(" + std::to_string(uniform(rng, 10)) + "|1" + std::to_string(uniform(rng, 10)) +
                                    ")?"}};
    const std::string digit = std::to_string(uniform(rng, 10));
    const std::string pats[] = {"v" + digit + "%", "%" + digit, "%" + digit + "%", "_" + digit, "V%" + digit};
    const std::string &p = pats[uniform(rng, 5)];
    return coin(rng, 0.5) ? like(p) : ilike(p);
  }
  case ParachuteKind::StringFingerprint: {
    if (r == 4)
      return cmp(CompareOp::Eq, probe_value(rng, d));
    const std::string base = as_string(probe_value(rng, d));
    std::string p = coin(rng, 0.8) ? matching_pattern(rng, base) : "%" + random_text(rng, 2) + "%";
    return coin(rng, 0.6) ? like(p) : ilike(p);
  }
  }
  return {pred::IsNull{}};
}

inline const char *pair_column(ParachuteKind kind) {
  switch (kind) {
  case ParachuteKind::NumericHistogram:
    return "num";
  case ParachuteKind::LowcardString:
    return "cat";
  case ParachuteKind::StringFingerprint:
    return "txt";
  }
  return "num";
}

/// Random fact/dim data with one parachute of `kind` at `pbw` on fact.
inline Database random_pair_database(Rng &rng, const TrialDomain &dom, unsigned pbw) {
  Database db{Catalog(pair_schema())};
  const auto &schema = db.schema();
  const size_t nd = 1 + uniform(rng, 60), nf = uniform(rng, 200);
  const std::string col = pair_column(dom.kind);
  TableData dim(schema.table("dim"));
  for (size_t i = 0; i < nd; ++i) {
    std::vector<std::optional<Datum>> row(4);
    row[0] = Datum{static_cast<int64_t>(i)};
    const size_t c = dom.kind == ParachuteKind::NumericHistogram ? 1 : dom.kind == ParachuteKind::LowcardString ? 2 : 3;
    if (!coin(rng, 0.1))
      row[c] = pick(rng, dom);
    dim.append_row(row);
  }
  TableData fact(schema.table("fact"));
  for (size_t i = 0; i < nf; ++i) {
    std::optional<Datum> fk;
    if (!coin(rng, 0.05))
      fk = Datum{static_cast<int64_t>(uniform(rng, nd))};
    fact.append_row({Datum{static_cast<int64_t>(i)}, fk});
  }
  db.put_table(std::move(dim));
  db.put_table(std::move(fact));
  AttachOptions o;
  o.pbw = pbw;
  o.seed = rng();
  // Small samples give histograms that misjudge the data.
  o.sample_size = 1 + uniform(rng, 40);
  const AttachSpecEntry e{"fact", "dim", col, dom.kind, std::nullopt, std::nullopt};
  attach_all(db, std::span(&e, 1), o);
  return db;
}

struct PairTrialResult {
  bool sound = true;
  size_t injected = 0;
  size_t missing = 0;
};

/// One soundness trial: a random predicate on dim, executed in mode both, its
/// emitted rows checked against brute_force_sets.
inline PairTrialResult run_pair_trial(Rng &rng, ParachuteKind kind, unsigned pbw) {
  const auto dom = random_domain(rng, kind);
  const Database db = random_pair_database(rng, dom, pbw);
  Query q = pair_query("trial");
  for (size_t k = 1 + (coin(rng, 0.2) ? 1 : 0); k > 0; --k)
    q.predicates["d"].push_back({pair_column(kind), random_predicate(rng, dom)});
  const auto plan = *q.plan;
  const Query prepared = prepare_query(db, q, plan, ExecMode::Both);
  const auto run = execute(db, plan, prepared, ExecMode::Both);
  const auto oracle = brute_force_sets(db, q);
  PairTrialResult r;
  for (const auto &[a, n] : prepared.parachute_predicates)
    r.injected += n.size();
  for (const auto &[alias, rows] : oracle) {
    const auto &emitted = run.metrics.alias(alias).emitted_rows;
    for (uint32_t row : rows)
      if (!std::binary_search(emitted.begin(), emitted.end(), row))
        ++r.missing;
  }
  r.sound = r.missing == 0;
  return r;
}

} // namespace parachute::testing
