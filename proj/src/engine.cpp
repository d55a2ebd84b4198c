#include "parachute/engine.hpp"
#include "parachute/oracle.hpp"
#include "parachute/translate.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

namespace parachute {

namespace {

uint64_t mix64(uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

} // namespace

uint64_t hash_key(int64_t key, uint64_t seed) {
  return mix64(static_cast<uint64_t>(key) + 0x9e3779b97f4a7c15ULL * (seed + 1));
}

uint64_t hash_keys(std::span<const int64_t> keys, uint64_t seed) {
  if (keys.size() == 1)
    return hash_key(keys[0], seed);
  uint64_t h = hash_key(static_cast<int64_t>(keys.size()), seed);
  for (int64_t k : keys)
    h = hash_key(static_cast<int64_t>(h ^ static_cast<uint64_t>(k)), seed);
  return h;
}

std::optional<BloomFilter> bloom_build(std::span<const uint64_t> hashes, double max_fill) {
  BloomFilter f;
  for (uint64_t h : hashes)
    f.insert(h);
  if (f.fill() > max_fill)
    return std::nullopt;
  return f;
}

std::string_view to_string(ExecMode m) {
  switch (m) {
  case ExecMode::Off:
    return "off";
  case ExecMode::Psf:
    return "psf";
  case ExecMode::Parachute:
    return "parachute";
  case ExecMode::Both:
    return "both";
  }
  return "?";
}

ExecMode exec_mode_from_string(std::string_view s) {
  for (auto m : {ExecMode::Off, ExecMode::Psf, ExecMode::Parachute, ExecMode::Both})
    if (to_string(m) == s)
      return m;
  throw ParseError("unknown execution mode '" + std::string(s) + "'");
}

const AliasMetrics &ExecMetrics::alias(std::string_view a) const {
  for (const auto &m : aliases)
    if (m.alias == a)
      return m;
  throw LookupError("no metrics for alias '" + std::string(a) + "'");
}

std::map<std::string, std::vector<uint32_t>> ExecMetrics::emitted_sets() const {
  std::map<std::string, std::vector<uint32_t>> out;
  for (const auto &m : aliases)
    out[m.alias] = m.emitted_rows;
  return out;
}

std::vector<std::vector<uint32_t>> ResultSet::canonical(const std::vector<std::string> &order) const {
  std::vector<size_t> slot;
  for (const auto &a : order) {
    auto it = std::find(aliases.begin(), aliases.end(), a);
    if (it == aliases.end())
      throw LookupError("result has no alias '" + a + "'");
    slot.push_back(static_cast<size_t>(it - aliases.begin()));
  }
  const size_t w = aliases.size();
  std::vector<std::vector<uint32_t>> out(size());
  for (size_t r = 0; r < out.size(); ++r)
    for (size_t s : slot)
      out[r].push_back(rows[r * w + s]);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::optional<Datum>> project_row(const Database &db, const Query &q, const ResultSet &r, size_t row) {
  std::vector<std::optional<Datum>> out;
  const size_t w = r.aliases.size();
  for (const auto &c : q.projection) {
    auto it = std::find(r.aliases.begin(), r.aliases.end(), c.alias);
    if (it == r.aliases.end())
      throw LookupError("result has no alias '" + c.alias + "'");
    const auto &col = db.table(q.relation(c.alias).table).column(c.column);
    out.push_back(col.get(r.rows[row * w + static_cast<size_t>(it - r.aliases.begin())]));
  }
  return out;
}

uint64_t result_checksum(const Database &db, const Query &q, const ResultSet &r) {
  uint64_t sum = 0;
  std::vector<std::string> order;
  for (const auto &rel : q.relations)
    order.push_back(rel.alias);
  if (q.projection.empty()) {
    for (const auto &t : r.canonical(order)) {
      uint64_t h = 0x12345;
      for (uint32_t v : t)
        h = mix64(h ^ v);
      sum += h;
    }
    return sum;
  }
  for (size_t i = 0; i < r.size(); ++i) {
    uint64_t h = 0x12345;
    for (const auto &v : project_row(db, q, r, i)) {
      const uint64_t vh = !v ? 0x6e756c6cULL
                             : is_int(*v) ? mix64(static_cast<uint64_t>(as_int(*v)))
                                          : std::hash<std::string>{}(as_string(*v));
      h = mix64(h ^ vh);
    }
    sum += h;
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Execution

namespace {

using Clock = std::chrono::steady_clock;

struct Tuples {
  std::vector<std::string> aliases;
  std::vector<uint32_t> rows;
  size_t width() const { return aliases.size(); }
  size_t size() const { return aliases.empty() ? 0 : rows.size() / aliases.size(); }
  size_t slot(std::string_view a) const {
    auto it = std::find(aliases.begin(), aliases.end(), a);
    if (it == aliases.end())
      throw LookupError("intermediate result has no alias '" + std::string(a) + "'");
    return static_cast<size_t>(it - aliases.begin());
  }
};

struct KeyCol {
  size_t slot = 0;
  const ColumnVector *col = nullptr;
};

// Reads the key of one tuple; false when any component is NULL.
bool read_key(const std::vector<KeyCol> &cols, const uint32_t *tuple, std::vector<int64_t> &out) {
  out.clear();
  for (const auto &k : cols) {
    const uint32_t row = tuple[k.slot];
    if (k.col->is_null(row))
      return false;
    out.push_back(k.col->get_int(row));
  }
  return true;
}

class HashTable {
public:
  HashTable(Tuples build, std::vector<KeyCol> key, uint64_t seed) : build_(std::move(build)), key_(std::move(key)) {
    const size_t n = build_.size();
    size_t cap = 16;
    while (cap < 2 * n)
      cap <<= 1;
    mask_ = cap - 1;
    heads_.assign(cap, kEnd);
    next_.assign(n, kEnd);
    hashes_.assign(n, 0);
    std::vector<int64_t> k;
    for (size_t i = 0; i < n; ++i) {
      if (!read_key(key_, &build_.rows[i * build_.width()], k)) {
        next_[i] = kSkip;
        continue;
      }
      const uint64_t h = hash_keys(k, seed);
      hashes_[i] = h;
      next_[i] = heads_[h & mask_];
      heads_[h & mask_] = static_cast<uint32_t>(i);
    }
  }

  const Tuples &build() const { return build_; }

  /// Distinct hashes of the non-NULL keys: the bloom filter input.
  std::vector<uint64_t> key_hashes() const {
    std::vector<uint64_t> out;
    for (size_t i = 0; i < next_.size(); ++i)
      if (next_[i] != kSkip)
        out.push_back(hashes_[i]);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  template <class F> void for_each_match(uint64_t h, F &&f) const {
    for (uint32_t i = heads_[h & mask_]; i != kEnd; i = next_[i])
      if (hashes_[i] == h)
        f(&build_.rows[i * build_.width()]);
  }

private:
  static constexpr uint32_t kEnd = UINT32_MAX;
  static constexpr uint32_t kSkip = UINT32_MAX - 1;
  Tuples build_;
  std::vector<KeyCol> key_;
  size_t mask_ = 0;
  std::vector<uint32_t> heads_;
  std::vector<uint32_t> next_;
  std::vector<uint64_t> hashes_;
};

struct EdgeCheck {
  KeyCol build;
  KeyCol probe;
};

struct Join {
  int node = 0;
  std::unique_ptr<HashTable> table;
  std::vector<KeyCol> probe_key;
  std::vector<EdgeCheck> verify;
};

// Compiled base predicate over one column.
using RowTest = std::function<bool(size_t)>;

RowTest compile_base(const ColumnVector &col, const BasePredicate &p) {
  if (col.type() == LogicalType::Int64) {
    if (const auto *c = std::get_if<pred::Compare>(&p.value); c && is_int(c->constant)) {
      const int64_t k = as_int(c->constant);
      const CompareOp op = c->op;
      return [&col, k, op](size_t r) { return !col.is_null(r) && apply_compare(op, (col.get_int(r) > k) - (col.get_int(r) < k)); };
    }
    if (const auto *b = std::get_if<pred::Between>(&p.value); b && is_int(b->lo) && is_int(b->hi)) {
      const int64_t lo = as_int(b->lo), hi = as_int(b->hi);
      return [&col, lo, hi](size_t r) {
        if (col.is_null(r))
          return false;
        const int64_t v = col.get_int(r);
        return v >= lo && v <= hi;
      };
    }
  }
  return [&col, &p](size_t r) { return evaluate(p, col.get(r)); };
}

struct BloomUse {
  size_t filter = 0;
  size_t target = 0;
  std::vector<const ColumnVector *> cols;
  const BloomFilter *bloom = nullptr;
};

class Executor {
public:
  Executor(const Database &db, const QueryPlan &plan, const Query &q, ExecMode mode, const ExecOptions &opt)
      : db_(db), plan_(plan), q_(q), mode_(mode), opt_(opt), classes_(q), pipes_(decompose_pipelines(plan)),
        flow_(analyze_flows(pipes_, classes_, FlowMode::Psf)) {}

  ExecResult run() {
    const auto start = Clock::now();
    ExecResult res;
    metrics_.query_id = q_.id;
    metrics_.mode = mode_;
    for (const auto &r : q_.relations) {
      AliasMetrics m;
      m.alias = r.alias;
      m.table = r.table;
      m.pipeline = pipes_.of(r.alias);
      m.probe = pipes_.probe(r.alias);
      metrics_.aliases.push_back(std::move(m));
    }
    prepare_parachutes();
    collect_pipelines(plan_.root);
    std::sort(order_.begin(), order_.end());
    for (const auto &[id, top] : order_)
      run_pipeline(id, top);
    auto &out = outputs_.at(plan_.root);
    res.rows.aliases = std::move(out.aliases);
    res.rows.rows = std::move(out.rows);
    metrics_.result_rows = res.rows.size();
    metrics_.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    res.metrics = std::move(metrics_);
    return res;
  }

private:
  AliasMetrics &alias_metrics(std::string_view a) {
    for (auto &m : metrics_.aliases)
      if (m.alias == a)
        return m;
    throw LookupError("unknown alias " + std::string(a));
  }

  const TableData &table_of(std::string_view alias) const { return db_.table(q_.relation(alias).table); }

  void prepare_parachutes() {
    for (const auto &[alias, preds] : q_.parachute_predicates) {
      const auto &table = table_of(alias);
      for (const auto &p : preds) {
        const auto &d = db_.catalog().descriptor(p.descriptor);
        if (d.fk_table != table.name())
          throw ValidationError("parachute predicate on " + alias + " uses descriptor " + std::to_string(d.id) +
                                " of table " + d.fk_table);
        if (!table.has_packed(p.column))
          throw ValidationError("parachute predicate on " + alias + " references unattached descriptor " +
                                std::to_string(d.id) + " (" + p.column + ")");
        if (!uses_parachutes(mode_))
          continue;
        parachutes_[alias].emplace_back(&table.packed(p.column), CompiledPredicate(p.predicate));
        ++metrics_.parachute_predicates;
      }
    }
  }

  // Registers the pipeline topped by `top` and, recursively, those feeding
  // its hash tables.
  void collect_pipelines(int top) {
    int cur = top;
    while (!plan_.nodes[static_cast<size_t>(cur)].is_leaf()) {
      const auto &n = plan_.nodes[static_cast<size_t>(cur)];
      if (!plan_.nodes[static_cast<size_t>(n.build)].is_leaf())
        collect_pipelines(n.build);
      cur = n.probe;
    }
    order_.emplace_back(pipes_.of(plan_.nodes[static_cast<size_t>(cur)].alias), top);
  }

  std::vector<uint32_t> scan(const std::string &alias, int pipeline) {
    const auto &table = table_of(alias);
    auto &m = alias_metrics(alias);
    const size_t n = table.row_count();
    m.scanned = n;

    std::vector<RowTest> base;
    if (auto it = q_.predicates.find(alias); it != q_.predicates.end())
      for (const auto &cp : it->second)
        base.push_back(compile_base(table.column(cp.column), cp.predicate));
    const std::vector<uint32_t> *allowed = nullptr;
    if (auto it = opt_.row_filters.find(alias); it != opt_.row_filters.end())
      allowed = &it->second;
    const auto &para = parachutes_[alias];

    std::vector<BloomUse> blooms;
    if (uses_bloom(mode_) && pipes_.probe(alias))
      for (size_t f = 0; f < metrics_.filters.size(); ++f) {
        if (!blooms_[f])
          continue;
        auto &fm = metrics_.filters[f];
        for (size_t t = 0; t < fm.targets.size(); ++t)
          if (fm.targets[t].alias == alias) {
            BloomUse use{f, t, {}, &*blooms_[f]};
            for (const auto &c : target_columns_[f][t])
              use.cols.push_back(&table.column(c));
            blooms.push_back(std::move(use));
          }
      }
    (void)pipeline;

    std::vector<uint32_t> out;
    std::vector<uint32_t> sel;
    std::vector<int64_t> key;
    for (size_t b = 0; b < n; b += opt_.batch_size) {
      const size_t e = std::min(n, b + opt_.batch_size);
      sel.clear();
      for (size_t r = b; r < e; ++r) {
        if (allowed && !std::binary_search(allowed->begin(), allowed->end(), static_cast<uint32_t>(r)))
          continue;
        if (std::all_of(base.begin(), base.end(), [r](const RowTest &t) { return t(r); }))
          sel.push_back(static_cast<uint32_t>(r));
      }
      m.after_base += sel.size();
      for (const auto &[col, pred] : para)
        std::erase_if(sel, [&, col = col](uint32_t r) { return !pred.test(col->get(r)); });
      m.after_parachute += sel.size();
      for (auto &use : blooms) {
        auto &target = metrics_.filters[use.filter].targets[use.target];
        if (target.disabled)
          continue;
        std::vector<uint32_t> kept;
        kept.reserve(sel.size());
        for (uint32_t r : sel) {
          if (target.disabled) {
            kept.push_back(r);
            continue;
          }
          key.clear();
          bool null_key = false;
          for (const auto *c : use.cols) {
            if (c->is_null(r)) {
              null_key = true;
              break;
            }
            key.push_back(c->get_int(r));
          }
          // A NULL key never joins, so dropping it is sound.
          const bool pass = !null_key && use.bloom->probe(hash_keys(key, opt_.hash_seed));
          ++target.probed;
          if (pass) {
            ++target.passed;
            kept.push_back(r);
          }
          if (target.probed == opt_.disable_after &&
              static_cast<double>(target.passed) > opt_.disable_pass_ratio * static_cast<double>(target.probed)) {
            target.disabled = true;
            metrics_.filters[use.filter].disabled = true;
          }
        }
        sel = std::move(kept);
      }
      m.after_bloom += sel.size();
      out.insert(out.end(), sel.begin(), sel.end());
    }
    m.emitted = out.size();
    m.emitted_rows = out;
    return out;
  }

  // First column of `alias` in query class `cls`, by name.
  std::optional<std::string> column_in_class(std::string_view alias, int cls) const {
    std::optional<std::string> best;
    for (const auto &e : q_.joins)
      for (const auto *c : {&e.left, &e.right})
        if (c->alias == alias && classes_.class_of(*c) == cls && (!best || c->column < *best))
          best = c->column;
    return best;
  }

  void build_join(int node_id, int pipeline, Tuples build, const Tuples &probe_layout, std::vector<Join> &joins) {
    const auto &node = plan_.nodes[static_cast<size_t>(node_id)];
    Join j;
    j.node = node_id;
    std::vector<KeyCol> build_key;
    std::vector<int> key_classes;
    std::vector<std::vector<std::string>> class_build_aliases;
    std::vector<std::string> key_names;
    for (const auto &e : node.condition) {
      const KeyCol bk{build.slot(e.left.alias), &table_of(e.left.alias).column(e.left.column)};
      const KeyCol pk{probe_layout.slot(e.right.alias), &table_of(e.right.alias).column(e.right.column)};
      j.verify.push_back({bk, pk});
      const int cls = classes_.class_of(e.left);
      auto it = std::find(key_classes.begin(), key_classes.end(), cls);
      if (it == key_classes.end()) {
        key_classes.push_back(cls);
        build_key.push_back(bk);
        j.probe_key.push_back(pk);
        key_names.push_back(to_string(e.left));
        class_build_aliases.emplace_back();
      }
    }
    // Build aliases holding each key class: sources of the filter's flow.
    for (size_t k = 0; k < key_classes.size(); ++k)
      for (const auto &a : build.aliases)
        if (column_in_class(a, key_classes[k]))
          class_build_aliases[k].push_back(a);

    j.table = std::make_unique<HashTable>(std::move(build), build_key, opt_.hash_seed);

    if (uses_bloom(mode_)) {
      FilterMetrics fm;
      fm.join_node = node_id;
      fm.pipeline = pipeline;
      fm.keys = key_names;
      const auto hashes = j.table->key_hashes();
      fm.distinct_hashes = hashes.size();
      auto bloom = bloom_build(hashes, opt_.bloom_max_fill);
      BloomFilter probe_fill;
      for (uint64_t h : hashes)
        probe_fill.insert(h);
      fm.fill = probe_fill.fill();
      fm.built = bloom.has_value();
      fm.discarded = !bloom.has_value();
      std::vector<std::vector<std::string>> cols_per_target;
      // Probe scans not yet run that some key owner flows into.
      for (const auto &r : q_.relations) {
        if (!pipes_.probe(r.alias) || pipes_.of(r.alias) < pipeline)
          continue;
        if (std::find(build_aliases_of(node_id).begin(), build_aliases_of(node_id).end(), r.alias) !=
            build_aliases_of(node_id).end())
          continue;
        std::vector<std::string> cols;
        bool ok = true;
        for (size_t k = 0; k < key_classes.size() && ok; ++k) {
          auto c = column_in_class(r.alias, key_classes[k]);
          const bool flows_in = std::any_of(class_build_aliases[k].begin(), class_build_aliases[k].end(),
                                            [&](const std::string &b) { return flow_.flows(b, r.alias); });
          ok = c && flows_in;
          if (ok)
            cols.push_back(*c);
        }
        if (!ok)
          continue;
        fm.targets.push_back(FilterTarget{r.alias, fmt_columns(cols), 0, 0, false});
        cols_per_target.push_back(std::move(cols));
      }
      metrics_.filters.push_back(std::move(fm));
      blooms_.push_back(std::move(bloom));
      target_columns_.push_back(std::move(cols_per_target));
    }
    joins.push_back(std::move(j));
  }

  static std::string fmt_columns(const std::vector<std::string> &cols) {
    std::string s;
    for (const auto &c : cols)
      s += (s.empty() ? "" : ",") + c;
    return s;
  }

  const std::vector<std::string> &build_aliases_of(int node_id) {
    auto it = build_aliases_.find(node_id);
    if (it == build_aliases_.end())
      it = build_aliases_.emplace(node_id, plan_.leaves(plan_.nodes[static_cast<size_t>(node_id)].build)).first;
    return it->second;
  }

  void run_pipeline(int id, int top) {
    const auto start = Clock::now();
    std::vector<int> chain;
    int cur = top;
    while (!plan_.nodes[static_cast<size_t>(cur)].is_leaf()) {
      chain.push_back(cur);
      cur = plan_.nodes[static_cast<size_t>(cur)].probe;
    }
    std::reverse(chain.begin(), chain.end());
    const std::string probe_alias = plan_.nodes[static_cast<size_t>(cur)].alias;

    // Hash tables bottom-up; the probe tuple layout grows by each build side.
    Tuples layout;
    layout.aliases = {probe_alias};
    std::vector<Join> joins;
    for (int jn : chain) {
      const auto &node = plan_.nodes[static_cast<size_t>(jn)];
      Tuples build;
      const auto &bn = plan_.nodes[static_cast<size_t>(node.build)];
      if (bn.is_leaf()) {
        build.aliases = {bn.alias};
        build.rows = scan(bn.alias, id);
      } else {
        build = std::move(outputs_.at(node.build));
        outputs_.erase(node.build);
      }
      const auto build_aliases = build.aliases;
      build_join(jn, id, std::move(build), layout, joins);
      layout.aliases.insert(layout.aliases.end(), build_aliases.begin(), build_aliases.end());
    }

    auto rows = scan(probe_alias, id);
    Tuples cur_t;
    cur_t.aliases = {probe_alias};
    cur_t.rows = std::move(rows);
    std::vector<int64_t> key;
    for (auto &j : joins) {
      const auto &bt = j.table->build();
      Tuples next;
      next.aliases = cur_t.aliases;
      next.aliases.insert(next.aliases.end(), bt.aliases.begin(), bt.aliases.end());
      const size_t w = cur_t.width();
      for (size_t i = 0; i < cur_t.size(); ++i) {
        const uint32_t *t = &cur_t.rows[i * w];
        if (!read_key(j.probe_key, t, key))
          continue;
        j.table->for_each_match(hash_keys(key, opt_.hash_seed), [&](const uint32_t *b) {
          for (const auto &e : j.verify) {
            const uint32_t br = b[e.build.slot], pr = t[e.probe.slot];
            if (e.build.col->is_null(br) || e.probe.col->is_null(pr) ||
                e.build.col->get_int(br) != e.probe.col->get_int(pr))
              return;
          }
          next.rows.insert(next.rows.end(), t, t + w);
          next.rows.insert(next.rows.end(), b, b + bt.width());
        });
      }
      cur_t = std::move(next);
    }
    PipelineMetrics pm;
    pm.id = id;
    pm.probe = probe_alias;
    pm.output_rows = cur_t.size();
    pm.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    metrics_.pipelines.push_back(pm);
    spdlog::debug("pipeline {} ({}) produced {} rows", id, probe_alias, pm.output_rows);
    outputs_[top] = std::move(cur_t);
  }

  const Database &db_;
  const QueryPlan &plan_;
  const Query &q_;
  ExecMode mode_;
  const ExecOptions &opt_;
  QueryClasses classes_;
  PipelineSet pipes_;
  FlowAnalysis flow_;
  ExecMetrics metrics_;
  std::map<std::string, std::vector<std::pair<const PackedColumn *, CompiledPredicate>>> parachutes_;
  std::vector<std::pair<int, int>> order_;
  std::map<int, Tuples> outputs_;
  std::vector<std::optional<BloomFilter>> blooms_;
  std::vector<std::vector<std::vector<std::string>>> target_columns_;
  std::map<int, std::vector<std::string>> build_aliases_;
};

} // namespace

ExecResult execute(const Database &db, const QueryPlan &plan, const Query &q, ExecMode mode,
                   const ExecOptions &options) {
  if (options.batch_size == 0)
    throw ValidationError("batch size must be positive");
  validate_query(q, db.schema());
  QueryPlan completed = plan;
  {
    auto leaves = completed.leaves();
    std::vector<std::string> aliases;
    for (const auto &r : q.relations)
      aliases.push_back(r.alias);
    std::sort(leaves.begin(), leaves.end());
    std::sort(aliases.begin(), aliases.end());
    if (leaves != aliases)
      throw ValidationError("query " + q.id + ": plan leaves differ from the query aliases");
  }
  complete_plan(completed, q);
  for (const auto &r : q.relations)
    if (!db.has_table(r.table))
      throw LookupError("table '" + r.table + "' is not loaded");
  return Executor(db, completed, q, mode, options).run();
}

DanglingCounts dangling_counts(const ExecMetrics &metrics, const OracleSets &oracle) {
  if (metrics.query_id != oracle.query_id)
    throw ValidationError("metrics are for query '" + metrics.query_id + "' but oracle sets are for '" +
                          oracle.query_id + "'");
  DanglingCounts c;
  for (const auto &m : metrics.aliases) {
    auto it = oracle.rows.find(m.alias);
    if (it == oracle.rows.end())
      throw ValidationError("oracle sets lack alias '" + m.alias + "'");
    const double nd = static_cast<double>(it->second.size());
    c.emitted_dangling += std::max(0.0, static_cast<double>(m.emitted) - nd);
    c.total_dangling += static_cast<double>(m.scanned) - nd;
  }
  return c;
}

double dangling_report(const ExecMetrics &metrics, const OracleSets &oracle) {
  return dangling_counts(metrics, oracle).fraction();
}

namespace {

nlohmann::json alias_json(const AliasMetrics &a) {
  return {{"alias", a.alias},       {"table", a.table},
          {"pipeline", a.pipeline}, {"probe", a.probe},
          {"scanned", a.scanned},   {"after_base", a.after_base},
          {"after_parachute", a.after_parachute}, {"after_bloom", a.after_bloom},
          {"emitted", a.emitted}};
}

} // namespace

nlohmann::json metrics_summary_json(const ExecMetrics &m) {
  nlohmann::json j;
  j["query"] = m.query_id;
  j["mode"] = std::string(to_string(m.mode));
  j["result_rows"] = m.result_rows;
  j["parachute_predicates"] = m.parachute_predicates;
  j["seconds"] = m.seconds;
  auto &aliases = j["aliases"] = nlohmann::json::array();
  for (const auto &a : m.aliases)
    aliases.push_back(alias_json(a));
  auto &filters = j["filters"] = nlohmann::json::array();
  for (const auto &f : m.filters) {
    nlohmann::json jf{{"join_node", f.join_node}, {"pipeline", f.pipeline},       {"keys", f.keys},
                      {"distinct_hashes", f.distinct_hashes}, {"fill", f.fill}, {"built", f.built},
                      {"discarded", f.discarded},             {"disabled", f.disabled}};
    auto &targets = jf["targets"] = nlohmann::json::array();
    for (const auto &t : f.targets)
      targets.push_back({{"alias", t.alias},
                         {"column", t.column},
                         {"probed", t.probed},
                         {"passed", t.passed},
                         {"disabled", t.disabled}});
    filters.push_back(std::move(jf));
  }
  auto &pipes = j["pipelines"] = nlohmann::json::array();
  for (const auto &p : m.pipelines)
    pipes.push_back({{"id", p.id}, {"probe", p.probe}, {"seconds", p.seconds}, {"output_rows", p.output_rows}});
  if (m.dangling_fraction)
    j["dangling_fraction"] = *m.dangling_fraction;
  return j;
}

void to_json(nlohmann::json &j, const ExecMetrics &m) {
  j = metrics_summary_json(m);
  for (size_t i = 0; i < m.aliases.size(); ++i)
    j["aliases"][i]["emitted_rows"] = m.aliases[i].emitted_rows;
}

} // namespace parachute
