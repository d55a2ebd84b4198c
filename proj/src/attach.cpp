#include "parachute/attach.hpp"
#include "parachute/kernels.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <nlohmann/json.hpp>
#include <set>
#include <spdlog/spdlog.h>

namespace parachute {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

KeyMode mode_of(const ParachuteDescriptor &d) { return d.relaxed ? KeyMode::Relaxed : KeyMode::Strict; }

uint32_t missing_marker(const ParachuteDescriptor &d) {
  return d.pbw >= 32 ? UINT32_MAX : (uint32_t{1} << d.pbw) - 1;
}

/// Parachute value of one PK row under descriptor `d`.
uint32_t source_value(const Database &db, const ParachuteDescriptor &d, uint32_t pk_row) {
  const auto &pk = db.table(d.pk_table);
  if (d.via)
    return pk.packed(d.source_column).get(pk_row);
  if (d.kind == ParachuteKind::StringFingerprint) {
    if (d.helper_column && pk.has_packed(*d.helper_column))
      return pk.packed(*d.helper_column).get(pk_row);
    const auto &col = pk.column(d.source_column);
    return col.is_null(pk_row) ? 0u : static_cast<uint32_t>(fingerprint(d.partition(), col.get_string(pk_row)).mask);
  }
  return d.histogram().bin(pk.column(d.source_column).get(pk_row));
}

/// Combines the values of every partner of an FK key. Relaxed mode ORs
/// fingerprints; histogram kinds need all partners to share one bin.
template <class SourceFn>
uint32_t combine_partners(const ParachuteDescriptor &d, const KeyIndex &pk_index, uint32_t first, SourceFn &&source,
                          const std::string &where) {
  uint32_t v = source(first);
  if (!d.relaxed)
    return v;
  for (uint32_t p = pk_index.next(first); p != KeyIndex::kNone; p = pk_index.next(p)) {
    const uint32_t w = source(p);
    if (d.kind == ParachuteKind::StringFingerprint)
      v |= w;
    else if (w != v)
      throw ValidationError("not attachable: " + where + " matches several " + d.pk_table +
                            " rows in different bins (relaxed mode only ORs fingerprints)");
  }
  return v;
}

/// Value for FK row `row` given its first partner (or a kernels:: marker).
/// Missing partners raise in strict mode and are recorded in `pending` in
/// relaxed mode.
template <class SourceFn>
uint32_t fk_row_value(const ParachuteDescriptor &d, const KeyIndex &pk_index, const ColumnVector &fk_col, size_t row,
                      uint32_t partner, SourceFn &&source, std::set<int64_t> &pending) {
  if (partner == kernels::kNullKey)
    return 0;
  if (partner == kernels::kNoPartner) {
    const int64_t key = fk_col.get_int(row);
    if (!d.relaxed)
      throw ValidationError("dangling foreign key: " + d.fk_table + " row " + std::to_string(row) + " has " +
                            d.fk_column + " = " + std::to_string(key) + " with no partner in " + d.pk_table);
    pending.insert(key);
    return missing_marker(d);
  }
  return combine_partners(d, pk_index, partner, source, d.fk_table + " row " + std::to_string(row));
}

const ForeignKey &resolve_fk(const Schema &schema, const AttachSpecEntry &e) {
  auto fks = schema.find_fks(e.fk_table, e.pk_table);
  if (e.fk_column)
    std::erase_if(fks, [&](const ForeignKey *fk) { return fk->fk_column != *e.fk_column; });
  if (fks.empty())
    throw ValidationError("no foreign key from " + e.fk_table + " to " + e.pk_table);
  if (fks.size() > 1)
    throw ValidationError("several foreign keys from " + e.fk_table + " to " + e.pk_table + "; set fk_column");
  return *fks.front();
}

} // namespace

// ---------------------------------------------------------------------------
// Spec

std::vector<AttachSpecEntry> attach_spec_from_json(const nlohmann::json &j) {
  try {
    std::vector<AttachSpecEntry> out;
    for (const auto &je : j.at("parachutes")) {
      AttachSpecEntry e;
      e.fk_table = je.at("fk_table").get<std::string>();
      e.pk_table = je.at("pk_table").get<std::string>();
      e.source_column = je.at("source_column").get<std::string>();
      e.kind = parachute_kind_from_string(je.at("kind").get<std::string>());
      if (je.contains("pbw"))
        e.pbw = je["pbw"].get<unsigned>();
      if (je.contains("fk_column"))
        e.fk_column = je["fk_column"].get<std::string>();
      out.push_back(std::move(e));
    }
    return out;
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("invalid attach spec: ") + e.what());
  }
}

nlohmann::json attach_spec_to_json(std::span<const AttachSpecEntry> entries) {
  auto arr = nlohmann::json::array();
  for (const auto &e : entries) {
    nlohmann::json je{{"fk_table", e.fk_table},
                      {"pk_table", e.pk_table},
                      {"source_column", e.source_column},
                      {"kind", std::string(to_string(e.kind))}};
    if (e.pbw)
      je["pbw"] = *e.pbw;
    if (e.fk_column)
      je["fk_column"] = *e.fk_column;
    arr.push_back(std::move(je));
  }
  return {{"parachutes", arr}};
}

std::vector<AttachSpecEntry> load_attach_spec(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw LookupError("cannot open attach spec " + path);
  try {
    return attach_spec_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error &e) {
    throw ParseError("invalid attach spec " + path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Distribution estimation and descriptor construction

WeightedSample estimate_distribution(const Database &db, const ForeignKey &fk, std::string_view source_column,
                                     size_t m, uint64_t seed, KeyMode mode) {
  if (m == 0)
    throw ValidationError("sample size must be >= 1");
  const auto &fk_table = db.table(fk.fk_table);
  const auto &fk_col = fk_table.column(fk.fk_column);
  const auto &src = db.table(fk.pk_table).column(source_column);
  const auto &pk_index = db.key_index(fk.pk_table, fk.pk_column, mode);

  std::map<Datum, uint64_t> counts;
  WeightedSample sample;
  auto count = [&](uint32_t p) {
    if (auto v = src.get(p))
      ++counts[*v];
    else
      sample.contains_null = true, ++sample.null_weight;
  };
  for (uint32_t r : sample_rows(fk_table.row_count(), m, seed)) {
    if (fk_col.is_null(r))
      continue;
    const uint32_t first = pk_index.find(fk_col.get_int(r));
    if (first == KeyIndex::kNone) {
      if (mode == KeyMode::Strict)
        throw ValidationError("dangling foreign key: " + fk.fk_table + " row " + std::to_string(r) + " has " +
                              fk.fk_column + " = " + std::to_string(fk_col.get_int(r)) + " with no partner in " +
                              fk.pk_table);
      continue;
    }
    for (uint32_t p = first; p != KeyIndex::kNone; p = pk_index.next(p))
      count(p);
  }
  for (auto &[v, n] : counts)
    sample.entries.emplace_back(v, n);
  return sample;
}

namespace {

std::vector<Datum> distinct_values(const ColumnVector &col) {
  std::set<Datum> seen;
  for (size_t r = 0; r < col.size(); ++r)
    if (auto v = col.get(r))
      seen.insert(std::move(*v));
  return {seen.begin(), seen.end()};
}

} // namespace

ParachuteDescriptor build_descriptor(const Database &db, const AttachSpecEntry &e, const AttachOptions &options) {
  const auto &fk = resolve_fk(db.schema(), e);
  ParachuteDescriptor d;
  d.fk_table = fk.fk_table;
  d.fk_column = fk.fk_column;
  d.pk_table = fk.pk_table;
  d.pk_column = fk.pk_column;
  d.source_column = e.source_column;
  d.kind = e.kind;
  d.relaxed = options.relaxed;
  d.pbw = e.pbw.value_or(options.pbw);
  if (d.pbw < 1 || d.pbw > kMaxParachuteWidth)
    throw ValidationError("pbw must be in [1, 32], got " + std::to_string(d.pbw));

  const auto &pk_def = db.schema().table(e.pk_table);
  const auto *col = pk_def.find_column(e.source_column);
  if (!col) {
    // Transitive: the source is a parachute column already on pk_table.
    const ParachuteDescriptor *up = nullptr;
    for (const auto *cand : db.catalog().on_table(e.pk_table))
      if (cand->column_name() == e.source_column)
        up = cand;
    if (!up)
      throw LookupError("'" + e.source_column + "' is neither a column nor a parachute of " + e.pk_table);
    if (up->kind != e.kind)
      throw ValidationError("transitive parachute kind differs from upstream " + up->column_name());
    if (e.pbw && *e.pbw != up->pbw)
      throw ValidationError("transitive parachute pbw differs from upstream " + up->column_name());
    d.pbw = up->pbw;
    d.representation = up->representation;
    d.nullable_source = up->nullable_source;
    d.via = up->id;
    d.origin_table = up->origin_table;
    d.origin_column = up->origin_column;
    return d;
  }

  d.origin_table = e.pk_table;
  d.origin_column = e.source_column;
  d.nullable_source = col->nullable;
  const auto want = e.kind == ParachuteKind::NumericHistogram ? LogicalType::Int64 : LogicalType::String;
  if (col->type != want)
    throw ValidationError("source column " + e.pk_table + "." + e.source_column + " has type " +
                          std::string(to_string(col->type)) + ", kind " + std::string(to_string(e.kind)) + " needs " +
                          std::string(to_string(want)));

  auto sample = estimate_distribution(db, fk, e.source_column, options.sample_size, options.seed, mode_of(d));
  const auto &src = db.table(e.pk_table).column(e.source_column);

  if (e.kind == ParachuteKind::StringFingerprint) {
    std::vector<std::string> strings;
    for (const auto &[v, n] : sample.entries)
      strings.push_back(as_string(v));
    d.representation = RoundRobinStrategy().build(strings, d.pbw);
    d.helper_column = helper_column_name(e.source_column, d.pbw);
    return d;
  }

  // Unsampled PK values get the default weight 1: always for the value map
  // (so every known value has an exact bin), and for numeric columns only
  // when the sample saw nothing (empty or fully dangling FK table).
  if (e.kind == ParachuteKind::LowcardString || sample.entries.empty()) {
    const auto all = distinct_values(src);
    sample.add_default_weights(all);
  }
  if (sample.entries.empty()) {
    d.representation = e.kind == ParachuteKind::NumericHistogram
                           ? EquiDepthHistogram::numeric({}, d.nullable_source)
                           : EquiDepthHistogram::value_map({}, 1, d.nullable_source ? 1u : 0u, d.nullable_source);
    return d;
  }
  d.representation = build_equidepth(sample, d.pbw, d.nullable_source);
  return d;
}

std::string build_helper(Database &db, const ParachuteDescriptor &d, bool parallel) {
  if (d.kind != ParachuteKind::StringFingerprint || !d.helper_column || d.via)
    throw ValidationError("helper columns exist only for one-hop string-fingerprint parachutes");
  const auto &pk = db.table(d.pk_table);
  const auto &src = pk.column(d.source_column);
  std::vector<uint32_t> fps(src.size());
  kernels::fingerprint_column(d.partition(), src, fps, parallel);
  PackedColumn col(d.pbw, src.size());
  kernels::pack(fps, col, parallel);
  db.put_packed(d.pk_table, *d.helper_column, std::move(col));
  return *d.helper_column;
}

// ---------------------------------------------------------------------------
// Attach

AttachStats attach(Database &db, std::string_view fk_table, std::span<const DescriptorId> ids, bool parallel) {
  const auto t0 = Clock::now();
  AttachStats stats;
  stats.fk_table = std::string(fk_table);
  const auto rows = db.table(fk_table).row_count();
  stats.rows = rows;

  std::vector<ParachuteDescriptor> descs;
  for (auto id : ids) {
    descs.push_back(db.catalog().descriptor(id));
    if (descs.back().fk_table != fk_table)
      throw ValidationError("descriptor " + std::to_string(id) + " does not target " + std::string(fk_table));
  }
  for (const auto &d : descs)
    if (d.kind == ParachuteKind::StringFingerprint && !d.via)
      build_helper(db, d, parallel);

  // Partner rows, shared by all descriptors using the same FK column and mode.
  std::map<std::pair<std::string, bool>, std::vector<uint32_t>> partners;
  const auto t_lookup = Clock::now();
  for (const auto &d : descs) {
    auto key = std::make_pair(d.fk_column, d.relaxed);
    if (partners.count(key))
      continue;
    std::vector<uint32_t> out(rows);
    kernels::lookup_partners(db.key_index(d.pk_table, d.pk_column, mode_of(d)),
                             db.table(fk_table).column(d.fk_column), 0, out, parallel);
    stats.lookups += rows;
    partners.emplace(std::move(key), std::move(out));
  }
  stats.lookup_seconds = seconds_since(t_lookup);

  const auto t_write = Clock::now();
  std::vector<std::pair<std::string, PackedColumn>> columns;
  std::vector<std::set<int64_t>> pendings;
  for (const auto &d : descs) {
    const auto &pk = db.table(d.pk_table);
    std::vector<uint32_t> encoded(pk.row_count());
    if (d.via) {
      const auto &up = pk.packed(d.source_column);
      for (size_t r = 0; r < encoded.size(); ++r)
        encoded[r] = up.get(r);
    } else if (d.kind == ParachuteKind::StringFingerprint) {
      const auto &helper = pk.packed(*d.helper_column);
      for (size_t r = 0; r < encoded.size(); ++r)
        encoded[r] = helper.get(r);
    } else {
      kernels::encode_bins(d.histogram(), pk.column(d.source_column), encoded, parallel);
    }

    const auto &first = partners.at({d.fk_column, d.relaxed});
    const auto &fk_col = db.table(fk_table).column(d.fk_column);
    const auto &pk_index = db.key_index(d.pk_table, d.pk_column, mode_of(d));
    std::vector<uint32_t> values(rows);
    std::set<int64_t> pending;
    auto source = [&](uint32_t p) { return encoded[p]; };
    for (size_t r = 0; r < rows; ++r) {
      const uint32_t p = first[r];
      // Fast path: strict mode with a partner is a plain gather.
      values[r] = (!d.relaxed && p < kernels::kNullKey) ? encoded[p]
                                                          : fk_row_value(d, pk_index, fk_col, r, p, source, pending);
    }
    PackedColumn col(d.pbw, rows);
    kernels::pack(values, col, parallel);
    columns.emplace_back(d.column_name(), std::move(col));
    pendings.push_back(std::move(pending));
  }

  // Only publish once every descriptor succeeded.
  for (size_t i = 0; i < descs.size(); ++i) {
    auto &[name, col] = columns[i];
    DescriptorAttachStats ds{descs[i].id, name, descs[i].pbw, col.extra_space_bytes()};
    stats.bytes_added += ds.extra_space_bytes;
    stats.descriptors.push_back(ds);
    db.put_packed(fk_table, name, std::move(col));
    if (pendings[i].empty())
      db.catalog().pending().erase(descs[i].id);
    else
      db.catalog().pending()[descs[i].id] = std::move(pendings[i]);
  }
  stats.write_seconds = seconds_since(t_write);
  stats.seconds = seconds_since(t0);
  spdlog::debug("attached {} parachute(s) to {} ({} rows, {} bytes)", descs.size(), fk_table, rows,
                stats.bytes_added);
  return stats;
}

std::vector<std::string> attach_order(const Schema &schema, std::span<const AttachSpecEntry> entries) {
  // Tables reachable from the entries over FK edges, with their references.
  std::map<std::string, std::set<std::string>> refs;
  std::vector<std::string> work;
  for (const auto &e : entries) {
    work.push_back(e.fk_table);
    work.push_back(e.pk_table);
  }
  while (!work.empty()) {
    auto t = std::move(work.back());
    work.pop_back();
    if (refs.count(t))
      continue;
    if (!schema.has_table(t))
      throw LookupError("unknown table '" + t + "'");
    auto &out = refs[t];
    for (const auto &fk : schema.foreign_keys())
      if (fk.fk_table == t) {
        out.insert(fk.pk_table);
        work.push_back(fk.pk_table);
      }
  }

  enum class Mark { New, Active, Done };
  std::map<std::string, Mark> mark;
  std::vector<std::string> order, stack;
  std::function<void(const std::string &)> visit = [&](const std::string &t) {
    auto &m = mark[t];
    if (m == Mark::Done)
      return;
    if (m == Mark::Active) {
      std::string cycle;
      auto it = std::find(stack.begin(), stack.end(), t);
      for (; it != stack.end(); ++it)
        cycle += *it + " -> ";
      throw CycleError("foreign-key cycle: " + cycle + t);
    }
    m = Mark::Active;
    stack.push_back(t);
    for (const auto &r : refs[t])
      visit(r);
    stack.pop_back();
    mark[t] = Mark::Done;
    order.push_back(t);
  };
  for (const auto &[t, _] : refs)
    visit(t);
  return order;
}

std::vector<AttachStats> attach_all(Database &db, std::span<const AttachSpecEntry> entries,
                                    const AttachOptions &options) {
  std::vector<AttachStats> out;
  for (const auto &table : attach_order(db.schema(), entries)) {
    std::vector<DescriptorId> ids;
    for (const auto &e : entries)
      if (e.fk_table == table)
        ids.push_back(db.catalog().register_parachute(build_descriptor(db, e, options)));
    if (!ids.empty())
      out.push_back(attach(db, table, ids, options.parallel));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Maintenance

namespace {

/// Rows of `table` whose `column` changed and must be pushed downstream.
struct Change {
  std::string table;
  std::string column;
  std::set<uint32_t> rows;
};

/// Recomputes FK rows for every descriptor fed by a changed column, and
/// follows the resulting parachute-column changes transitively.
size_t propagate(Database &db, std::vector<Change> work) {
  size_t recomputed = 0;
  while (!work.empty()) {
    auto change = std::move(work.back());
    work.pop_back();
    if (change.rows.empty())
      continue;
    for (const auto &d : db.catalog().descriptors()) {
      const bool fk_side = d.fk_table == change.table && d.fk_column == change.column;
      const bool pk_side = d.pk_table == change.table && d.source_column == change.column;
      if ((!fk_side && !pk_side) || !db.table(d.fk_table).has_packed(d.column_name()))
        continue;
      if (pk_side && d.kind == ParachuteKind::StringFingerprint && !d.via && d.helper_column) {
        auto &helper = db.mutable_packed(d.pk_table, *d.helper_column);
        const auto &src = db.table(d.pk_table).column(d.source_column);
        for (uint32_t r : change.rows)
          helper.set(r, src.is_null(r) ? 0u : static_cast<uint32_t>(fingerprint(d.partition(), src.get_string(r)).mask));
      }

      std::set<uint32_t> fk_rows;
      if (fk_side) {
        fk_rows = change.rows;
      } else {
        const auto &pk_keys = db.table(d.pk_table).column(d.pk_column);
        const auto &fk_index = db.key_index(d.fk_table, d.fk_column, KeyMode::Relaxed);
        for (uint32_t r : change.rows) {
          if (pk_keys.is_null(r))
            continue;
          for (uint32_t f = fk_index.find(pk_keys.get_int(r)); f != KeyIndex::kNone; f = fk_index.next(f))
            fk_rows.insert(f);
        }
      }
      if (fk_rows.empty())
        continue;

      const auto &pk_index = db.key_index(d.pk_table, d.pk_column, mode_of(d));
      const auto &fk_col = db.table(d.fk_table).column(d.fk_column);
      std::set<int64_t> pending;
      auto source = [&](uint32_t p) { return source_value(db, d, p); };
      std::vector<std::pair<uint32_t, uint32_t>> values;
      for (uint32_t f : fk_rows) {
        const uint32_t p = fk_col.is_null(f) ? kernels::kNullKey : pk_index.find(fk_col.get_int(f));
        values.emplace_back(f, fk_row_value(d, pk_index, fk_col, f, p, source, pending));
      }
      const auto id = d.id;
      const auto fk_table = d.fk_table;
      const auto column = d.column_name();
      auto &col = db.mutable_packed(fk_table, column);
      for (auto [f, v] : values)
        col.set(f, v);
      if (!pending.empty())
        db.catalog().pending()[id].insert(pending.begin(), pending.end());
      recomputed += values.size();
      work.push_back(Change{fk_table, column, std::move(fk_rows)});
    }
  }
  return recomputed;
}

} // namespace

size_t patch_pending(Database &db, std::string_view pk_table) {
  size_t patched = 0;
  auto &pending = db.catalog().pending();
  for (auto it = pending.begin(); it != pending.end();) {
    const auto d = db.catalog().descriptor(it->first);
    if (d.pk_table != pk_table) {
      ++it;
      continue;
    }
    const auto &pk_index = db.key_index(d.pk_table, d.pk_column, mode_of(d));
    const auto &fk_index = db.key_index(d.fk_table, d.fk_column, KeyMode::Relaxed);
    std::set<uint32_t> rows;
    for (auto k = it->second.begin(); k != it->second.end();) {
      if (pk_index.find(*k) == KeyIndex::kNone) {
        ++k;
        continue;
      }
      for (uint32_t f = fk_index.find(*k); f != KeyIndex::kNone; f = fk_index.next(f))
        rows.insert(f);
      k = it->second.erase(k);
    }
    const bool now_empty = it->second.empty();
    it = now_empty ? pending.erase(it) : std::next(it);
    if (!rows.empty()) {
      patched += rows.size();
      // Treat the rows as if their FK column changed.
      propagate(db, {Change{d.fk_table, d.fk_column, std::move(rows)}});
    }
  }
  return patched;
}

MaintenanceStats maintain_insert(Database &db, std::string_view table_name, const TableData &batch) {
  MaintenanceStats stats;
  stats.rows = batch.row_count();
  if (batch.row_count() == 0)
    return stats;
  const auto &def = db.schema().table(table_name);
  const auto &table = db.table(table_name);
  if (batch.column_names() != table.column_names())
    throw ValidationError("insert batch columns do not match table '" + std::string(table_name) + "'");

  if (def.primary_key) {
    const auto &keys = batch.column(*def.primary_key);
    const auto &existing = db.key_index(table_name, *def.primary_key, KeyMode::Relaxed);
    std::set<int64_t> seen;
    for (size_t r = 0; r < keys.size(); ++r) {
      if (keys.is_null(r))
        throw ValidationError("NULL primary key in insert batch for " + def.name);
      const auto k = keys.get_int(r);
      if (existing.find(k) != KeyIndex::kNone || !seen.insert(k).second)
        throw ValidationError("duplicate primary key " + std::to_string(k) + " inserted into " + def.name);
    }
  }

  // Compute everything before touching the table so errors leave it intact.
  const auto t_lookup = Clock::now();
  std::vector<std::pair<std::string, std::vector<uint32_t>>> new_values;
  std::vector<std::pair<DescriptorId, std::set<int64_t>>> new_pending;
  std::map<std::pair<std::string, bool>, std::vector<uint32_t>> partners;
  double write_seconds = 0;
  for (const auto *d : db.catalog().on_table(table_name)) {
    const auto &pk_index = db.key_index(d->pk_table, d->pk_column, mode_of(*d));
    const auto &fk_col = batch.column(d->fk_column);
    auto key = std::make_pair(d->fk_column, d->relaxed);
    if (!partners.count(key)) {
      std::vector<uint32_t> out(batch.row_count());
      kernels::lookup_partners(pk_index, fk_col, 0, out, false);
      stats.lookups += out.size();
      partners.emplace(key, std::move(out));
    }
    const auto t_write = Clock::now();
    const auto &first = partners.at(key);
    std::vector<uint32_t> values(batch.row_count());
    std::set<int64_t> pending;
    auto source = [&](uint32_t p) { return source_value(db, *d, p); };
    for (size_t r = 0; r < values.size(); ++r)
      values[r] = fk_row_value(*d, pk_index, fk_col, r, first[r], source, pending);
    new_values.emplace_back(d->column_name(), std::move(values));
    new_pending.emplace_back(d->id, std::move(pending));
    write_seconds += seconds_since(t_write);
  }
  stats.lookup_seconds = seconds_since(t_lookup) - write_seconds;

  const auto t_write = Clock::now();
  auto &target = db.mutable_table(table_name);
  const size_t base = target.row_count();
  target.append_rows(batch);
  for (auto &[column, values] : new_values) {
    auto &col = target.mutable_packed(column);
    for (size_t r = 0; r < values.size(); ++r)
      col.set(base + r, values[r]);
  }
  for (auto &[id, keys] : new_pending)
    if (!keys.empty())
      db.catalog().pending()[id].insert(keys.begin(), keys.end());
  // Helper fingerprints for new PK rows.
  for (const auto &d : db.catalog().descriptors()) {
    if (d.pk_table != table_name || d.via || d.kind != ParachuteKind::StringFingerprint || !d.helper_column ||
        !target.has_packed(*d.helper_column))
      continue;
    auto &helper = target.mutable_packed(*d.helper_column);
    const auto &src = target.column(d.source_column);
    for (size_t r = base; r < target.row_count(); ++r)
      helper.set(r, src.is_null(r) ? 0u : static_cast<uint32_t>(fingerprint(d.partition(), src.get_string(r)).mask));
  }
  stats.write_seconds = write_seconds + seconds_since(t_write);
  stats.recomputed = stats.rows * new_values.size();

  // PK-side insert: nothing to recompute except rows waiting for these keys.
  stats.recomputed += patch_pending(db, table_name);
  return stats;
}

MaintenanceStats maintain_update(Database &db, std::string_view pk_table, std::span<const RowUpdate> updates) {
  MaintenanceStats stats;
  if (updates.empty())
    return stats;
  const auto &def = db.schema().table(pk_table);
  if (!def.primary_key)
    throw ValidationError("table '" + def.name + "' has no primary key to address updates");
  const auto &index = db.key_index(pk_table, *def.primary_key, KeyMode::Relaxed);

  const auto t_lookup = Clock::now();
  std::vector<std::pair<uint32_t, const RowUpdate *>> targets;
  for (const auto &u : updates) {
    const auto &col = def.column(u.column);
    if (u.column == *def.primary_key)
      throw ValidationError("primary key updates are not supported");
    if (u.value ? (is_int(*u.value) != (col.type == LogicalType::Int64)) : !col.nullable)
      throw ValidationError("update value does not fit column " + def.name + "." + u.column);
    const uint32_t first = index.find(u.key);
    if (first == KeyIndex::kNone)
      throw LookupError("update of unknown key " + std::to_string(u.key) + " in " + def.name);
    for (uint32_t r = first; r != KeyIndex::kNone; r = index.next(r))
      targets.emplace_back(r, &u);
  }
  stats.lookups = targets.size();
  stats.lookup_seconds = seconds_since(t_lookup);

  const auto t_write = Clock::now();
  std::map<std::string, std::set<uint32_t>> changed;
  auto &table = db.mutable_table(pk_table);
  for (auto [row, u] : targets) {
    table.mutable_column(u->column).set(row, u->value);
    changed[u->column].insert(row);
  }
  stats.rows = targets.size();
  std::vector<Change> work;
  for (auto &[column, rows] : changed)
    work.push_back(Change{std::string(pk_table), column, std::move(rows)});
  stats.recomputed = propagate(db, std::move(work));
  stats.recomputed += patch_pending(db, pk_table);
  stats.write_seconds = seconds_since(t_write);
  return stats;
}

SkewReport skew_check(const Database &db, DescriptorId id, double threshold) {
  SkewReport report;
  const auto &d = db.catalog().descriptor(id);
  if (!d.has_histogram())
    return report;
  const auto &h = d.histogram();
  const auto &table = db.table(d.fk_table);
  const auto &col = table.packed(d.column_name());
  const auto &fk = table.column(d.fk_column);
  std::vector<uint64_t> weights(h.bin_count(), 0);
  uint64_t total = 0;
  for (size_t r = 0; r < table.row_count(); ++r) {
    if (fk.is_null(r))
      continue;
    const uint32_t v = col.get(r);
    if (v < weights.size()) {
      ++weights[v];
      ++total;
    }
  }
  if (total == 0)
    return report;
  report.max_bin_weight = *std::max_element(weights.begin(), weights.end());
  report.mean_bin_weight = static_cast<double>(total) / static_cast<double>(weights.size());
  report.ratio = static_cast<double>(report.max_bin_weight) / report.mean_bin_weight;
  report.needs_reattach = report.ratio > threshold;
  return report;
}

} // namespace parachute
