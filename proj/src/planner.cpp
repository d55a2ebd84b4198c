#include "parachute/planner.hpp"
#include "parachute/translate.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <nlohmann/json.hpp>
#include <numeric>
#include <set>

namespace parachute {

std::string to_string(const ColumnRef &c) { return c.alias + "." + c.column; }

ColumnRef column_ref_from_string(std::string_view s) {
  const auto dot = s.find('.');
  if (dot == std::string_view::npos || dot == 0 || dot + 1 == s.size())
    throw ParseError("expected alias.column, got '" + std::string(s) + "'");
  return {std::string(s.substr(0, dot)), std::string(s.substr(dot + 1))};
}

int QueryPlan::add_leaf(std::string alias) {
  Node n;
  n.alias = std::move(alias);
  nodes.push_back(std::move(n));
  return static_cast<int>(nodes.size()) - 1;
}

int QueryPlan::add_join(int build, int probe, std::vector<JoinEdge> condition) {
  Node n;
  n.build = build;
  n.probe = probe;
  n.condition = std::move(condition);
  nodes.push_back(std::move(n));
  return static_cast<int>(nodes.size()) - 1;
}

std::vector<std::string> QueryPlan::leaves(int node) const {
  std::vector<std::string> out;
  std::function<void(int)> walk = [&](int n) {
    if (n < 0 || static_cast<size_t>(n) >= nodes.size())
      throw ValidationError("plan references a missing node");
    const auto &nd = nodes[static_cast<size_t>(n)];
    if (nd.is_leaf()) {
      out.push_back(nd.alias);
      return;
    }
    walk(nd.build);
    walk(nd.probe);
  };
  walk(node);
  return out;
}

const Relation &Query::relation(std::string_view alias) const { return relations[alias_index(alias)]; }

size_t Query::alias_index(std::string_view alias) const {
  for (size_t i = 0; i < relations.size(); ++i)
    if (relations[i].alias == alias)
      return i;
  throw LookupError("query " + id + " has no alias '" + std::string(alias) + "'");
}

// ---------------------------------------------------------------------------
// Validation

namespace {

template <class... Ts> struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts> Overloaded(Ts...) -> Overloaded<Ts...>;

void check_predicate_types(const BasePredicate &p, const ColumnDef &col, const std::string &where) {
  const bool is_int_col = col.type == LogicalType::Int64;
  auto check = [&](const Datum &d) {
    if (is_int(d) != is_int_col)
      throw ValidationError(where + ": constant " + datum_to_string(d) + " does not match column type " +
                            std::string(to_string(col.type)));
  };
  auto need_string = [&] {
    if (is_int_col)
      throw ValidationError(where + ": pattern predicate on an int64 column");
  };
  std::visit(Overloaded{
                 [&](const pred::Compare &c) { check(c.constant); },
                 [&](const pred::Between &b) { check(b.lo), check(b.hi); },
                 [&](const pred::InList &in) { std::for_each(in.values.begin(), in.values.end(), check); },
                 [&](const pred::IsNull &) {},
                 [&](const pred::Like &) { need_string(); },
                 [&](const pred::ILike &) { need_string(); },
                 [&](const pred::EnumerableRegex &) { need_string(); },
                 [&](const pred::EnumeratedUdf &u) { std::for_each(u.qualifying.begin(), u.qualifying.end(), check); },
                 [&](const pred::AnyOf &any) {
                   for (const auto &arm : any.arms)
                     check_predicate_types(arm, col, where);
                 },
             },
             p.value);
}

} // namespace

void validate_query(const Query &q, const Schema &schema) {
  std::set<std::string> aliases;
  for (const auto &r : q.relations) {
    if (r.alias.empty() || !aliases.insert(r.alias).second)
      throw ValidationError("query " + q.id + ": duplicate or empty alias '" + r.alias + "'");
    if (!schema.has_table(r.table))
      throw LookupError("query " + q.id + ": unknown table '" + r.table + "'");
  }
  if (q.relations.empty())
    throw ValidationError("query " + q.id + " has no relations");
  auto column_of = [&](const ColumnRef &c) -> const ColumnDef & {
    return schema.table(q.relation(c.alias).table).column(c.column);
  };
  for (const auto &e : q.joins) {
    column_of(e.left);
    column_of(e.right);
    if (e.left.alias == e.right.alias)
      throw ValidationError("query " + q.id + ": join edge within one alias " + to_string(e.left));
    const auto cl = schema.attribute_class(q.relation(e.left.alias).table, e.left.column);
    const auto cr = schema.attribute_class(q.relation(e.right.alias).table, e.right.column);
    if (!cl || !cr || *cl != *cr)
      throw ValidationError("query " + q.id + ": join " + to_string(e.left) + " = " + to_string(e.right) +
                            " does not join columns of one attribute class");
  }
  for (const auto &[alias, preds] : q.predicates) {
    const auto &table = schema.table(q.relation(alias).table);
    for (const auto &p : preds)
      check_predicate_types(p.predicate, table.column(p.column), "query " + q.id + " " + alias + "." + p.column);
  }
  for (const auto &[alias, preds] : q.parachute_predicates)
    q.relation(alias);
  for (const auto &c : q.projection)
    column_of(c);

  // Connectivity over join edges.
  std::set<std::string> seen{q.relations.front().alias};
  for (bool grew = true; grew;) {
    grew = false;
    for (const auto &e : q.joins) {
      const bool l = seen.count(e.left.alias), r = seen.count(e.right.alias);
      if (l != r) {
        seen.insert(l ? e.right.alias : e.left.alias);
        grew = true;
      }
    }
  }
  if (seen.size() != q.relations.size())
    throw ValidationError("query " + q.id + ": join graph is disconnected");

  if (q.plan) {
    auto leaves = q.plan->leaves();
    std::sort(leaves.begin(), leaves.end());
    if (!std::equal(leaves.begin(), leaves.end(), aliases.begin(), aliases.end()))
      throw ValidationError("query " + q.id + ": plan leaves differ from the query aliases");
  }
}

QueryClasses::QueryClasses(const Query &q) {
  std::map<ColumnRef, ColumnRef> parent;
  std::function<ColumnRef(const ColumnRef &)> find = [&](const ColumnRef &c) -> ColumnRef {
    auto it = parent.find(c);
    if (it == parent.end()) {
      parent[c] = c;
      return c;
    }
    if (it->second == c)
      return c;
    auto root = find(it->second);
    parent[c] = root;
    return root;
  };
  for (const auto &e : q.joins) {
    auto a = find(e.left), b = find(e.right);
    if (a != b)
      parent[std::max(a, b)] = std::min(a, b);
  }
  std::map<ColumnRef, int> ids;
  for (const auto &[c, _] : parent) {
    auto root = find(c);
    auto it = ids.find(root);
    if (it == ids.end())
      it = ids.emplace(root, static_cast<int>(ids.size())).first;
    class_[c] = it->second;
  }
  for (const auto &r : q.relations)
    by_alias_[r.alias];
  for (const auto &[c, id] : class_)
    by_alias_[c.alias].push_back(id);
  for (auto &[_, v] : by_alias_) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
}

int QueryClasses::class_of(const ColumnRef &c) const {
  auto it = class_.find(c);
  return it == class_.end() ? -1 : it->second;
}

const std::vector<int> &QueryClasses::alias_classes(std::string_view alias) const {
  static const std::vector<int> kEmpty;
  auto it = by_alias_.find(alias);
  return it == by_alias_.end() ? kEmpty : it->second;
}

bool QueryClasses::joinable(std::string_view a, std::string_view b) const {
  const auto &x = alias_classes(a);
  const auto &y = alias_classes(b);
  std::vector<int> common;
  std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(common));
  return !common.empty();
}

void complete_plan(QueryPlan &plan, const Query &q) {
  if (plan.root < 0)
    throw ValidationError("plan has no root");
  std::function<void(int)> walk = [&](int n) {
    auto &node = plan.nodes[static_cast<size_t>(n)];
    if (node.is_leaf())
      return;
    walk(node.build);
    walk(node.probe);
    const auto b = plan.leaves(node.build), p = plan.leaves(node.probe);
    auto in = [](const std::vector<std::string> &v, const std::string &a) {
      return std::find(v.begin(), v.end(), a) != v.end();
    };
    std::vector<JoinEdge> crossing;
    for (const auto &e : q.joins) {
      if (in(b, e.left.alias) && in(p, e.right.alias))
        crossing.push_back(e);
      else if (in(p, e.left.alias) && in(b, e.right.alias))
        crossing.push_back(JoinEdge{e.right, e.left});
    }
    for (const auto &c : node.condition)
      if (std::none_of(crossing.begin(), crossing.end(), [&](const JoinEdge &e) { return e.same_as(c); }))
        throw ValidationError("plan condition " + to_string(c.left) + " = " + to_string(c.right) +
                              " is not a declared edge between its build and probe sides");
    if (crossing.empty())
      throw ValidationError("plan joins {" + b.front() + "...} and {" + p.front() + "...} without a condition");
    // Every crossing edge is enforced here, supplied or not.
    node.condition = std::move(crossing);
  };
  walk(plan.root);
}

// ---------------------------------------------------------------------------
// Pipelines

int PipelineSet::of(std::string_view alias) const {
  auto it = pipeline.find(alias);
  if (it == pipeline.end())
    throw LookupError("alias '" + std::string(alias) + "' is not in the plan");
  return it->second;
}

bool PipelineSet::probe(std::string_view alias) const {
  auto it = is_probe.find(alias);
  if (it == is_probe.end())
    throw LookupError("alias '" + std::string(alias) + "' is not in the plan");
  return it->second;
}

PipelineSet decompose_pipelines(const QueryPlan &plan) {
  struct Pipe {
    std::vector<int> deps;
    std::vector<std::pair<std::string, bool>> members; // alias, is_probe
  };
  std::vector<Pipe> pipes(1);
  std::function<void(int, int)> walk = [&](int n, int pi) {
    const auto &node = plan.nodes.at(static_cast<size_t>(n));
    if (node.is_leaf()) {
      // Reached along probe edges only: the pipeline's probe.
      pipes[static_cast<size_t>(pi)].members.emplace_back(node.alias, true);
      return;
    }
    const auto &build = plan.nodes.at(static_cast<size_t>(node.build));
    if (build.is_leaf()) {
      pipes[static_cast<size_t>(pi)].members.emplace_back(build.alias, false);
    } else {
      pipes.emplace_back();
      const int q = static_cast<int>(pipes.size()) - 1;
      pipes[static_cast<size_t>(pi)].deps.push_back(q);
      walk(node.build, q);
    }
    walk(node.probe, pi);
  };
  if (plan.root < 0)
    throw ValidationError("plan has no root");
  walk(plan.root, 0);

  // Post-order numbering: build inputs before the pipeline consuming them.
  std::vector<int> id(pipes.size(), -1);
  int next = 0;
  std::function<void(int)> number = [&](int pi) {
    for (int d : pipes[static_cast<size_t>(pi)].deps)
      number(d);
    id[static_cast<size_t>(pi)] = next++;
  };
  number(0);

  PipelineSet out;
  out.count = next;
  out.less.assign(static_cast<size_t>(next), std::vector<bool>(static_cast<size_t>(next), false));
  out.probe_of.resize(static_cast<size_t>(next));
  out.aliases = plan.leaves();
  for (size_t pi = 0; pi < pipes.size(); ++pi) {
    const int p = id[pi];
    for (const auto &[alias, probe] : pipes[pi].members) {
      out.pipeline[alias] = p;
      out.is_probe[alias] = probe;
      if (probe)
        out.probe_of[static_cast<size_t>(p)] = alias;
    }
  }
  std::function<void(int, int)> mark = [&](int pi, int consumer) {
    for (int d : pipes[static_cast<size_t>(pi)].deps) {
      out.less[static_cast<size_t>(id[static_cast<size_t>(d)])][static_cast<size_t>(consumer)] = true;
      mark(d, consumer);
    }
  };
  for (size_t pi = 0; pi < pipes.size(); ++pi)
    mark(static_cast<int>(pi), id[pi]);
  return out;
}

bool precedes(std::string_view r, std::string_view s, const PipelineSet &p) {
  if (r == s)
    return false;
  const int pr = p.of(r), ps = p.of(s);
  return p.less[static_cast<size_t>(pr)][static_cast<size_t>(ps)] || (pr == ps && p.probe(s));
}

std::string_view to_string(FlowMode m) {
  switch (m) {
  case FlowMode::Psf:
    return "psf";
  case FlowMode::Lip:
    return "lip";
  case FlowMode::PsfBuild:
    return "psf-build";
  case FlowMode::None:
    return "none";
  }
  return "?";
}

FlowMode flow_mode_from_string(std::string_view s) {
  if (s == "psf")
    return FlowMode::Psf;
  if (s == "lip")
    return FlowMode::Lip;
  if (s == "psf-build")
    return FlowMode::PsfBuild;
  if (s == "none")
    return FlowMode::None;
  throw ParseError("unknown flow mode '" + std::string(s) + "'");
}

bool flows(std::string_view r, std::string_view s, const PipelineSet &p, const QueryClasses &classes, FlowMode mode) {
  if (r == s)
    return false;
  switch (mode) {
  case FlowMode::Psf:
    return precedes(r, s, p) && classes.joinable(r, s) && p.probe(s);
  case FlowMode::Lip:
    return p.of(r) == p.of(s) && p.probe(s);
  case FlowMode::PsfBuild:
    return precedes(r, s, p) && classes.joinable(r, s);
  case FlowMode::None:
    return false;
  }
  return false;
}

size_t FlowAnalysis::index(std::string_view alias) const {
  auto it = std::find(aliases.begin(), aliases.end(), alias);
  if (it == aliases.end())
    throw LookupError("alias '" + std::string(alias) + "' is not in the flow analysis");
  return static_cast<size_t>(it - aliases.begin());
}

FlowAnalysis analyze_flows(const PipelineSet &p, const QueryClasses &classes, FlowMode mode) {
  FlowAnalysis f;
  f.aliases = p.aliases;
  const size_t n = f.aliases.size();
  f.direct.assign(n, std::vector<bool>(n, false));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      f.direct[i][j] = flows(f.aliases[i], f.aliases[j], p, classes, mode);
  f.closure = f.direct;
  for (size_t k = 0; k < n; ++k)
    for (size_t i = 0; i < n; ++i)
      if (f.closure[i][k])
        for (size_t j = 0; j < n; ++j)
          if (f.closure[k][j])
            f.closure[i][j] = true;
  for (size_t i = 0; i < n; ++i)
    f.closure[i][i] = false;
  return f;
}

std::vector<std::vector<bool>> flow_power(const FlowAnalysis &f, unsigned k) {
  if (k == 0)
    throw ValidationError("flow path length must be >= 1");
  const size_t n = f.aliases.size();
  auto result = f.direct;
  for (unsigned step = 1; step < k; ++step) {
    std::vector<std::vector<bool>> next(n, std::vector<bool>(n, false));
    for (size_t i = 0; i < n; ++i)
      for (size_t m = 0; m < n; ++m)
        if (result[i][m])
          for (size_t j = 0; j < n; ++j)
            if (f.direct[m][j])
              next[i][j] = true;
    result = std::move(next);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Blocked pairs and rewrite

std::vector<BlockedPair> blocked_pairs(const Query &q, const QueryPlan &plan, const Catalog &catalog, FlowMode mode) {
  const auto pipes = decompose_pipelines(plan);
  const QueryClasses classes(q);
  const auto flow = analyze_flows(pipes, classes, mode);

  std::vector<std::pair<int, BlockedPair>> found;
  for (const auto &target : q.relations) {
    for (const auto *d : catalog.on_table(target.table)) {
      if (d->via)
        continue; // only one-hop parachutes are consulted
      const int fk_class = classes.class_of({target.alias, d->fk_column});
      if (fk_class < 0)
        continue;
      for (const auto &source : q.relations) {
        if (source.alias == target.alias || source.table != d->pk_table)
          continue;
        if (classes.class_of({source.alias, d->pk_column}) != fk_class)
          continue;
        if (flow.flows_transitive(source.alias, target.alias))
          continue;
        auto it = q.predicates.find(source.alias);
        if (it == q.predicates.end())
          continue;
        BlockedPair pair{source.alias, target.alias, d->id, d->source_column, {}};
        bool useful = false;
        for (const auto &cp : it->second) {
          if (cp.column != d->source_column)
            continue;
          pair.predicates.push_back(cp.predicate);
          auto r = translate(cp.predicate, *d);
          if (auto *tp = std::get_if<TranslatedPredicate>(&r))
            useful |= !std::holds_alternative<tpred::AlwaysTrue>(tp->value);
        }
        if (useful)
          found.emplace_back(pipes.of(target.alias), std::move(pair));
      }
    }
  }
  std::stable_sort(found.begin(), found.end(), [](const auto &a, const auto &b) {
    return std::tie(a.first, a.second.target, a.second.source, a.second.descriptor) <
           std::tie(b.first, b.second.target, b.second.source, b.second.descriptor);
  });
  std::vector<BlockedPair> out;
  for (auto &[_, p] : found)
    out.push_back(std::move(p));
  return out;
}

RewriteResult drop_parachutes(const Query &q, const std::vector<BlockedPair> &pairs, const Catalog &catalog) {
  RewriteResult r{q, {}, 0};
  for (const auto &pair : pairs) {
    const auto &d = catalog.descriptor(pair.descriptor);
    std::vector<std::string> skipped;
    auto tps = translate_conjunction(pair.predicates, d, &skipped);
    for (const auto &why : skipped)
      r.warnings.push_back(pair.source + "." + pair.source_column + " -> " + pair.target + ": " + why);
    for (auto &tp : tps) {
      r.query.parachute_predicates[pair.target].push_back(
          ParachutePredicate{d.id, d.column_name(), pair.source + "." + pair.source_column, std::move(tp)});
      ++r.injected;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Greedy plan

double predicate_selectivity(const BasePredicate &p) {
  return std::visit(Overloaded{
                        [](const pred::Compare &c) {
                          return c.op == CompareOp::Eq ? 0.1 : (c.op == CompareOp::Ne ? 0.9 : 1.0 / 3.0);
                        },
                        [](const pred::Between &) { return 0.25; },
                        [](const pred::InList &in) { return std::min(1.0, 0.1 * static_cast<double>(in.values.size())); },
                        [](const pred::IsNull &) { return 0.05; },
                        [](const pred::Like &) { return 0.1; },
                        [](const pred::ILike &) { return 0.1; },
                        [](const pred::EnumerableRegex &) { return 0.1; },
                        [](const pred::EnumeratedUdf &) { return 0.2; },
                        [](const pred::AnyOf &any) {
                          double s = 0;
                          for (const auto &arm : any.arms)
                            s += predicate_selectivity(arm);
                          return std::min(1.0, s);
                        },
                    },
                    p.value);
}

QueryPlan greedy_plan(const Query &q, const TableStats &stats) {
  std::map<std::string, double> estimate;
  for (const auto &r : q.relations) {
    auto it = stats.find(r.table);
    double e = it == stats.end() ? 0.0 : static_cast<double>(it->second);
    if (auto p = q.predicates.find(r.alias); p != q.predicates.end())
      for (const auto &cp : p->second)
        e *= predicate_selectivity(cp.predicate);
    estimate[r.alias] = e;
  }
  auto better = [&](const std::string &a, const std::string &b) {
    return std::tie(estimate[a], a) < std::tie(estimate[b], b);
  };

  QueryPlan plan;
  std::set<std::string> joined;
  std::string first = q.relations.front().alias;
  for (const auto &r : q.relations)
    if (better(r.alias, first))
      first = r.alias;
  int current = plan.add_leaf(first);
  joined.insert(first);
  while (joined.size() < q.relations.size()) {
    std::optional<std::string> pick;
    for (const auto &e : q.joins)
      for (const auto *side : {&e.left, &e.right}) {
        const auto *other = side == &e.left ? &e.right : &e.left;
        if (joined.count(side->alias) && !joined.count(other->alias) && (!pick || better(other->alias, *pick)))
          pick = other->alias;
      }
    if (!pick)
      throw ValidationError("query " + q.id + ": join graph is disconnected");
    current = plan.add_join(current, plan.add_leaf(*pick));
    joined.insert(*pick);
  }
  plan.root = current;
  complete_plan(plan, q);
  return plan;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

nlohmann::json edge_json(const JoinEdge &e) { return {{"left", to_string(e.left)}, {"right", to_string(e.right)}}; }

JoinEdge edge_from_json(const nlohmann::json &j) {
  return {column_ref_from_string(j.at("left").get<std::string>()),
          column_ref_from_string(j.at("right").get<std::string>())};
}

nlohmann::json node_json(const QueryPlan &plan, int n) {
  const auto &node = plan.nodes.at(static_cast<size_t>(n));
  if (node.is_leaf())
    return {{"alias", node.alias}};
  nlohmann::json j{{"build", node_json(plan, node.build)}, {"probe", node_json(plan, node.probe)}};
  auto cond = nlohmann::json::array();
  for (const auto &e : node.condition)
    cond.push_back(edge_json(e));
  j["condition"] = cond;
  return j;
}

int node_from_json(QueryPlan &plan, const nlohmann::json &j) {
  if (j.contains("alias"))
    return plan.add_leaf(j["alias"].get<std::string>());
  const int b = node_from_json(plan, j.at("build"));
  const int p = node_from_json(plan, j.at("probe"));
  std::vector<JoinEdge> cond;
  if (j.contains("condition"))
    for (const auto &je : j["condition"])
      cond.push_back(edge_from_json(je));
  return plan.add_join(b, p, std::move(cond));
}

} // namespace

QueryPlan parse_plan(std::string_view text) {
  QueryPlan plan;
  size_t pos = 0;
  auto skip = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
      ++pos;
  };
  std::function<int()> node = [&]() -> int {
    skip();
    if (pos >= text.size())
      throw ParseError("plan '" + std::string(text) + "' ends early");
    if (text[pos] == '(') {
      ++pos;
      const int b = node();
      const int p = node();
      skip();
      if (pos >= text.size() || text[pos] != ')')
        throw ParseError("plan '" + std::string(text) + "': expected ')' at offset " + std::to_string(pos));
      ++pos;
      return plan.add_join(b, p);
    }
    const size_t start = pos;
    while (pos < text.size() && text[pos] != '(' && text[pos] != ')' &&
           !std::isspace(static_cast<unsigned char>(text[pos])))
      ++pos;
    if (pos == start)
      throw ParseError("plan '" + std::string(text) + "': expected an alias at offset " + std::to_string(pos));
    return plan.add_leaf(std::string(text.substr(start, pos - start)));
  };
  plan.root = node();
  skip();
  if (pos != text.size())
    throw ParseError("plan '" + std::string(text) + "' has trailing text");
  return plan;
}

void to_json(nlohmann::json &j, const QueryPlan &plan) { j = node_json(plan, plan.root); }

QueryPlan plan_from_json(const nlohmann::json &j) {
  try {
    QueryPlan plan;
    plan.root = node_from_json(plan, j);
    return plan;
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("invalid plan JSON: ") + e.what());
  }
}

void to_json(nlohmann::json &j, const Query &q) {
  j = nlohmann::json::object();
  j["id"] = q.id;
  auto &rels = j["relations"] = nlohmann::json::array();
  for (const auto &r : q.relations)
    rels.push_back({{"alias", r.alias}, {"table", r.table}});
  auto &joins = j["joins"] = nlohmann::json::array();
  for (const auto &e : q.joins)
    joins.push_back(edge_json(e));
  auto &preds = j["predicates"] = nlohmann::json::object();
  for (const auto &[alias, list] : q.predicates) {
    auto &arr = preds[alias] = nlohmann::json::array();
    for (const auto &cp : list) {
      nlohmann::json jp = cp.predicate;
      jp["column"] = cp.column;
      arr.push_back(std::move(jp));
    }
  }
  if (!q.parachute_predicates.empty()) {
    auto &pp = j["parachute_predicates"] = nlohmann::json::object();
    for (const auto &[alias, list] : q.parachute_predicates) {
      auto &arr = pp[alias] = nlohmann::json::array();
      for (const auto &p : list)
        arr.push_back(
            {{"descriptor", p.descriptor}, {"column", p.column}, {"source", p.source}, {"predicate", p.predicate}});
    }
  }
  auto &proj = j["projection"] = nlohmann::json::array();
  for (const auto &c : q.projection)
    proj.push_back(to_string(c));
  if (q.plan)
    j["plan"] = *q.plan;
}

Query query_from_json(const nlohmann::json &j) {
  try {
    Query q;
    q.id = j.value("id", std::string("query"));
    for (const auto &r : j.at("relations"))
      q.relations.push_back({r.at("alias").get<std::string>(), r.at("table").get<std::string>()});
    if (j.contains("joins"))
      for (const auto &e : j["joins"])
        q.joins.push_back(edge_from_json(e));
    if (j.contains("predicates"))
      for (const auto &[alias, arr] : j["predicates"].items())
        for (const auto &jp : arr)
          q.predicates[alias].push_back({jp.at("column").get<std::string>(), base_predicate_from_json(jp)});
    if (j.contains("parachute_predicates"))
      for (const auto &[alias, arr] : j["parachute_predicates"].items())
        for (const auto &jp : arr)
          q.parachute_predicates[alias].push_back({jp.at("descriptor").get<DescriptorId>(),
                                                   jp.at("column").get<std::string>(), jp.value("source", ""),
                                                   translated_predicate_from_json(jp.at("predicate"))});
    if (j.contains("projection"))
      for (const auto &c : j["projection"])
        q.projection.push_back(column_ref_from_string(c.get<std::string>()));
    if (j.contains("plan") && !j["plan"].is_null())
      q.plan = plan_from_json(j["plan"]);
    return q;
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("invalid query JSON: ") + e.what());
  }
}

namespace {

nlohmann::json read_json_file(const std::string &path, const char *what) {
  std::ifstream in(path);
  if (!in)
    throw LookupError(std::string("cannot open ") + what + " " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error &e) {
    throw ParseError(std::string("invalid ") + what + " " + path + ": " + e.what());
  }
}

} // namespace

Query load_query(const std::string &path) { return query_from_json(read_json_file(path, "query")); }
QueryPlan load_plan(const std::string &path) { return plan_from_json(read_json_file(path, "plan")); }

} // namespace parachute
