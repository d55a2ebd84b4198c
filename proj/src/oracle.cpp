#include "parachute/oracle.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <set>

namespace parachute {

JoinTree join_tree(const Query &q) {
  const QueryClasses classes(q);
  JoinTree t;
  const size_t n = q.relations.size();
  for (const auto &r : q.relations)
    t.aliases.push_back(r.alias);
  t.parent.assign(n, -1);

  std::vector<std::set<int>> edges(n);
  for (size_t i = 0; i < n; ++i)
    edges[i] = {classes.alias_classes(t.aliases[i]).begin(), classes.alias_classes(t.aliases[i]).end()};
  std::vector<bool> alive(n, true);
  size_t remaining = n;

  while (remaining > 1) {
    // Drop classes held by a single remaining alias.
    std::map<int, int> holders;
    for (size_t i = 0; i < n; ++i)
      if (alive[i])
        for (int c : edges[i])
          ++holders[c];
    for (size_t i = 0; i < n; ++i)
      if (alive[i])
        std::erase_if(edges[i], [&](int c) { return holders[c] == 1; });
    // Remove one ear: an alias whose classes are covered by another.
    bool removed = false;
    for (size_t e = 0; e < n && !removed; ++e) {
      if (!alive[e])
        continue;
      for (size_t f = 0; f < n; ++f) {
        if (f == e || !alive[f])
          continue;
        if (std::includes(edges[f].begin(), edges[f].end(), edges[e].begin(), edges[e].end())) {
          t.parent[e] = static_cast<int>(f);
          alive[e] = false;
          --remaining;
          removed = true;
          break;
        }
      }
    }
    if (!removed)
      throw CyclicError("query " + q.id + " is cyclic: no join tree exists");
  }
  for (size_t i = 0; i < n; ++i)
    if (alive[i])
      t.root = static_cast<int>(i);

  std::vector<std::vector<int>> children(n);
  for (size_t i = 0; i < n; ++i)
    if (t.parent[i] >= 0)
      children[static_cast<size_t>(t.parent[i])].push_back(static_cast<int>(i));
  t.top_down = {t.root};
  for (size_t k = 0; k < t.top_down.size(); ++k)
    for (int c : children[static_cast<size_t>(t.top_down[k])])
      t.top_down.push_back(c);
  return t;
}

namespace {

// Columns of `alias` per query class, sorted by class.
std::map<int, std::vector<std::string>> class_columns(const Query &q, const QueryClasses &classes,
                                                      std::string_view alias) {
  std::map<int, std::vector<std::string>> out;
  for (const auto &e : q.joins)
    for (const auto *c : {&e.left, &e.right})
      if (c->alias == alias) {
        auto &v = out[classes.class_of(*c)];
        if (std::find(v.begin(), v.end(), c->column) == v.end())
          v.push_back(c->column);
      }
  for (auto &[_, v] : out)
    std::sort(v.begin(), v.end());
  return out;
}

} // namespace

std::vector<uint32_t> filter_rows(const Database &db, const Query &q, std::string_view alias) {
  const QueryClasses classes(q);
  const auto &table = db.table(q.relation(alias).table);
  const auto cols = class_columns(q, classes, alias);
  std::vector<const ColumnPredicate *> preds;
  if (auto it = q.predicates.find(std::string(alias)); it != q.predicates.end())
    for (const auto &p : it->second)
      preds.push_back(&p);

  std::vector<uint32_t> out;
  for (size_t r = 0; r < table.row_count(); ++r) {
    bool ok = std::all_of(preds.begin(), preds.end(),
                          [&](const ColumnPredicate *p) { return evaluate(p->predicate, table.column(p->column).get(r)); });
    // Join columns must be non-NULL, and equal within one class.
    for (auto it = cols.begin(); ok && it != cols.end(); ++it) {
      const auto &first = table.column(it->second.front());
      ok = !first.is_null(r);
      for (size_t k = 1; ok && k < it->second.size(); ++k) {
        const auto &other = table.column(it->second[k]);
        ok = !other.is_null(r) && other.get_int(r) == first.get_int(r);
      }
    }
    if (ok)
      out.push_back(static_cast<uint32_t>(r));
  }
  return out;
}

OracleSets semijoin_reduce(const Database &db, const Query &q) {
  const auto tree = join_tree(q);
  const QueryClasses classes(q);
  const size_t n = tree.aliases.size();

  OracleSets out;
  out.query_id = q.id;
  std::vector<std::vector<uint32_t>> rows(n);
  std::vector<std::map<int, const ColumnVector *>> key_col(n);
  for (size_t i = 0; i < n; ++i) {
    const auto &alias = tree.aliases[i];
    const auto &table = db.table(q.relation(alias).table);
    out.table_rows[alias] = table.row_count();
    rows[i] = filter_rows(db, q, alias);
    for (const auto &[cls, cols] : class_columns(q, classes, alias))
      key_col[i][cls] = &table.column(cols.front());
  }

  // target := target ⋉ other on their shared classes.
  auto semijoin = [&](size_t target, size_t other) {
    std::vector<int> shared;
    for (const auto &[cls, _] : key_col[target])
      if (key_col[other].count(cls))
        shared.push_back(cls);
    if (shared.empty()) {
      if (rows[other].empty())
        rows[target].clear();
      return;
    }
    auto key = [&](size_t i, uint32_t r) {
      std::vector<int64_t> k;
      for (int cls : shared)
        k.push_back(key_col[i].at(cls)->get_int(r));
      return k;
    };
    std::set<std::vector<int64_t>> keys;
    for (uint32_t r : rows[other])
      keys.insert(key(other, r));
    std::erase_if(rows[target], [&](uint32_t r) { return !keys.count(key(target, r)); });
  };

  for (auto it = tree.top_down.rbegin(); it != tree.top_down.rend(); ++it) {
    const int p = tree.parent[static_cast<size_t>(*it)];
    if (p >= 0)
      semijoin(static_cast<size_t>(p), static_cast<size_t>(*it));
  }
  for (int c : tree.top_down) {
    const int p = tree.parent[static_cast<size_t>(c)];
    if (p >= 0)
      semijoin(static_cast<size_t>(c), static_cast<size_t>(p));
  }
  for (size_t i = 0; i < n; ++i)
    out.rows[tree.aliases[i]] = std::move(rows[i]);
  return out;
}

bool verify_no_false_negatives(const std::map<std::string, std::vector<uint32_t>> &emitted, const OracleSets &oracle,
                               bool *full) {
  bool ok = true, equal = true;
  for (const auto &[alias, want] : oracle.rows) {
    auto it = emitted.find(alias);
    if (it == emitted.end()) {
      ok = equal = false;
      continue;
    }
    std::vector<uint32_t> have = it->second;
    std::sort(have.begin(), have.end());
    if (!std::includes(have.begin(), have.end(), want.begin(), want.end()))
      ok = false;
    if (have != want)
      equal = false;
  }
  if (full)
    *full = ok && equal;
  return ok;
}

void to_json(nlohmann::json &j, const OracleSets &o) {
  j = {{"query", o.query_id}, {"rows", o.rows}, {"table_rows", o.table_rows}};
}

OracleSets oracle_sets_from_json(const nlohmann::json &j) {
  try {
    OracleSets o;
    o.query_id = j.at("query").get<std::string>();
    o.rows = j.at("rows").get<std::map<std::string, std::vector<uint32_t>>>();
    if (j.contains("table_rows"))
      o.table_rows = j["table_rows"].get<std::map<std::string, size_t>>();
    return o;
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("invalid oracle JSON: ") + e.what());
  }
}

} // namespace parachute
