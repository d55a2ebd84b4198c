#pragma once

#include "parachute/attach.hpp"
#include "parachute/engine.hpp"
#include "parachute/planner.hpp"

#include <nlohmann/json_fwd.hpp>
#include <span>

namespace parachute {

/// Synthetic snowflake workload: two fact tables (movie_info_idx,
/// movie_keyword) referencing three dimensions (title, info_type, keyword).
struct SnowflakeData {
  uint64_t seed = 0;
  unsigned scale = 1;
  Schema schema;
  std::vector<TableData> tables;
  std::vector<AttachSpecEntry> spec;
  std::vector<Query> queries;

  const TableData &table(std::string_view name) const;
};

struct SnowflakeConfig {
  double zipf = 1.1;
  size_t queries = 50;
  /// Rows at scale 1.
  size_t titles = 20000;
  size_t keywords = 4000;
  size_t info_types = 113;
  size_t movie_info = 50000;
  size_t movie_keywords = 100000;
};

/// Deterministic in (seed, scale, config). Fact and dimension sizes scale
/// linearly except info_type.
SnowflakeData generate_snowflake(uint64_t seed, unsigned scale, const SnowflakeConfig &config = {});

/// Number of query templates the generator cycles through.
size_t snowflake_template_count();

/// schema.json, attach_spec.json, one CSV per table and queries/qNN.json.
void write_snowflake(const SnowflakeData &data, const std::string &dir);

/// Reads a directory written by write_snowflake (seed and scale unknown).
SnowflakeData load_snowflake(const std::string &dir);

/// Fresh database over copies of the generated tables, nothing attached.
Database make_database(const SnowflakeData &data);

/// `n` new rows for a fact table continuing its primary key sequence, with
/// Zipf-distributed foreign keys into existing dimension rows.
TableData generate_fact_batch(const Database &db, std::string_view table, size_t n, uint64_t seed);

/// Draws ranks 0..n-1 with P(r) proportional to 1/(r+1)^s.
class ZipfSampler {
public:
  ZipfSampler(size_t n, double s);
  /// `u` uniform in [0, 1).
  size_t rank(double u) const;

private:
  std::vector<double> cdf_;
};

/// Plan used for a query: its own, or greedy over the table sizes.
QueryPlan plan_for(const Database &db, const Query &q);

/// Query rewritten for `mode`: parachute predicates injected at the blocked
/// pairs for modes parachute/both, untouched otherwise.
Query prepare_query(const Database &db, const Query &q, const QueryPlan &plan, ExecMode mode);

struct SweepRow {
  unsigned pbw = 0;
  ExecMode mode = ExecMode::Off;
  double dangling_fraction = 0;
  double exec_seconds = 0;
  size_t extra_space_bytes = 0;
  size_t result_rows = 0;
  size_t parachute_predicates = 0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  /// Every query returned the same result multiset in every mode and pbw.
  bool results_consistent = true;
  /// No run emitted fewer rows than the oracle's non-dangling set.
  bool sound = true;
};

struct SweepOptions {
  uint64_t seed = 0;
  /// Runs per (query, mode); the fastest is reported.
  unsigned repeats = 1;
  bool parallel_attach = true;
};

SweepReport sweep(const SnowflakeData &data, std::span<const unsigned> pbws, std::span<const ExecMode> modes,
                  const SweepOptions &options = {});

void to_json(nlohmann::json &j, const SweepRow &r);
std::string sweep_csv(const SweepReport &r);

struct InsertBenchRow {
  double fraction = 0;
  /// "numeric" or "string".
  std::string kind;
  size_t rows = 0;
  double lookup_seconds = 0;
  double write_seconds = 0;
  double seconds = 0;
};

/// Inserts fraction × |movie_keyword| rows into movie_keyword under a single
/// numeric (title.production_year) or fingerprint (keyword.keyword, with
/// helper) parachute and times the maintenance work.
std::vector<InsertBenchRow> insert_bench(const SnowflakeData &data, std::span<const double> fractions, unsigned pbw,
                                         uint64_t seed, unsigned repeats = 3);

void to_json(nlohmann::json &j, const InsertBenchRow &r);

} // namespace parachute
