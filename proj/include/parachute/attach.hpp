#pragma once

#include "parachute/database.hpp"

#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace parachute {

/// One line of an attach specification.
struct AttachSpecEntry {
  std::string fk_table;
  std::string pk_table;
  /// Column of pk_table, or a parachute column on pk_table (transitive).
  std::string source_column;
  ParachuteKind kind = ParachuteKind::NumericHistogram;
  std::optional<unsigned> pbw;
  /// Needed only when several FKs connect the two tables.
  std::optional<std::string> fk_column;
};

std::vector<AttachSpecEntry> attach_spec_from_json(const nlohmann::json &j);
std::vector<AttachSpecEntry> load_attach_spec(const std::string &path);
nlohmann::json attach_spec_to_json(std::span<const AttachSpecEntry> entries);

struct AttachOptions {
  unsigned pbw = 8;
  bool relaxed = false;
  /// FK rows sampled to estimate the joined value distribution.
  size_t sample_size = 10000;
  uint64_t seed = 0;
  bool parallel = true;
};

/// Joins a sample of `m` FK rows to the PK table and counts the source
/// values of their partners.
WeightedSample estimate_distribution(const Database &db, const ForeignKey &fk, std::string_view source_column, size_t m,
                                     uint64_t seed, KeyMode mode = KeyMode::Strict);

/// Builds (but does not register) the descriptor for one spec entry.
ParachuteDescriptor build_descriptor(const Database &db, const AttachSpecEntry &entry, const AttachOptions &options);

/// Materialises the fingerprint helper column on the PK table and returns its
/// name. Idempotent.
std::string build_helper(Database &db, const ParachuteDescriptor &desc, bool parallel = true);

struct DescriptorAttachStats {
  DescriptorId descriptor = 0;
  std::string column;
  unsigned pbw = 0;
  size_t extra_space_bytes = 0;
};

struct AttachStats {
  std::string fk_table;
  size_t rows = 0;
  size_t lookups = 0;
  double lookup_seconds = 0;
  double write_seconds = 0;
  double seconds = 0;
  size_t bytes_added = 0;
  std::vector<DescriptorAttachStats> descriptors;
};

/// Writes the parachute columns of `descriptors` (all on fk_table) in one
/// pass over fk_table. Partner lookups are shared per FK column.
AttachStats attach(Database &db, std::string_view fk_table, std::span<const DescriptorId> descriptors,
                   bool parallel = true);

/// Tables in an order where every table follows all tables it references,
/// restricted to the tables reachable from the entries. Throws CycleError.
std::vector<std::string> attach_order(const Schema &schema, std::span<const AttachSpecEntry> entries);

/// Builds, registers and attaches every entry in attach order.
std::vector<AttachStats> attach_all(Database &db, std::span<const AttachSpecEntry> entries,
                                    const AttachOptions &options);

struct MaintenanceStats {
  size_t rows = 0;
  size_t lookups = 0;
  size_t recomputed = 0;
  double lookup_seconds = 0;
  double write_seconds = 0;
};

/// Appends `batch` to fk_table and computes parachute values for the new
/// rows only, under the existing histograms (out-of-range values clamp).
MaintenanceStats maintain_insert(Database &db, std::string_view table, const TableData &batch);

struct RowUpdate {
  int64_t key = 0;
  std::string column;
  std::optional<Datum> value;
};

/// Applies updates to non-key columns of pk_table rows (identified by primary
/// key) and recomputes the parachute values of every FK row that reaches a
/// changed row, following transitive descriptors.
MaintenanceStats maintain_update(Database &db, std::string_view pk_table, std::span<const RowUpdate> updates);

/// Fills rows waiting for a PK partner (relaxed mode) whose partner now
/// exists. Returns the number of rows patched.
size_t patch_pending(Database &db, std::string_view pk_table);

struct SkewReport {
  uint64_t max_bin_weight = 0;
  double mean_bin_weight = 0;
  double ratio = 0;
  bool needs_reattach = false;
};

inline constexpr double kDefaultSkewThreshold = 4.0;

/// Compares the heaviest stored bin to the mean bin weight. Fingerprint
/// parachutes never report skew.
SkewReport skew_check(const Database &db, DescriptorId id, double threshold = kDefaultSkewThreshold);

} // namespace parachute
