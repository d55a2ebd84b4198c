#pragma once

#include "parachute/database.hpp"
#include "parachute/planner.hpp"

#include <array>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <span>

namespace parachute {

/// One 64-bit hash shared by hash tables and bloom filters.
uint64_t hash_key(int64_t key, uint64_t seed);
/// Composite keys fold every component into one hash.
uint64_t hash_keys(std::span<const int64_t> keys, uint64_t seed);

/// Fixed-size bloom filter: 2^16 bits, two positions from the two 32-bit
/// halves of one hash, each reduced to [0, 2^16) by multiply-shift.
class BloomFilter {
public:
  static constexpr uint32_t kBits = 1u << 16;
  static constexpr double kMaxFill = 0.34;

  static uint32_t position(uint32_t half) { return static_cast<uint32_t>((uint64_t{half} * kBits) >> 32); }

  void insert(uint64_t hash) {
    set(position(static_cast<uint32_t>(hash)));
    set(position(static_cast<uint32_t>(hash >> 32)));
  }
  bool probe(uint64_t hash) const {
    return test(position(static_cast<uint32_t>(hash))) && test(position(static_cast<uint32_t>(hash >> 32)));
  }

  size_t bits_set() const { return bits_set_; }
  double fill() const { return static_cast<double>(bits_set_) / kBits; }

  bool operator==(const BloomFilter &) const = default;

private:
  void set(uint32_t bit) {
    uint64_t &w = words_[bit >> 6];
    const uint64_t m = uint64_t{1} << (bit & 63);
    bits_set_ += (w & m) == 0;
    w |= m;
  }
  bool test(uint32_t bit) const { return (words_[bit >> 6] >> (bit & 63)) & 1u; }

  std::array<uint64_t, kBits / 64> words_{};
  size_t bits_set_ = 0;
};

/// Inserts every hash; nullopt (discarded) when more than `max_fill` of the
/// bits end up set.
std::optional<BloomFilter> bloom_build(std::span<const uint64_t> hashes, double max_fill = BloomFilter::kMaxFill);

enum class ExecMode { Off, Psf, Parachute, Both };

std::string_view to_string(ExecMode m);
ExecMode exec_mode_from_string(std::string_view s);
inline bool uses_bloom(ExecMode m) { return m == ExecMode::Psf || m == ExecMode::Both; }
inline bool uses_parachutes(ExecMode m) { return m == ExecMode::Parachute || m == ExecMode::Both; }

struct ExecOptions {
  size_t batch_size = 2048;
  /// Probe rows a bloom filter sees before the pass-rate check.
  size_t disable_after = 4000;
  /// A filter passing more than this fraction at the check is disabled.
  double disable_pass_ratio = 0.6;
  double bloom_max_fill = BloomFilter::kMaxFill;
  uint64_t hash_seed = 0;
  /// Optional per-alias row restriction applied with the base filters.
  std::map<std::string, std::vector<uint32_t>> row_filters;
};

struct AliasMetrics {
  std::string alias;
  std::string table;
  int pipeline = 0;
  bool probe = false;
  size_t scanned = 0;
  size_t after_base = 0;
  size_t after_parachute = 0;
  size_t after_bloom = 0;
  size_t emitted = 0;
  /// Ascending ids of the emitted rows.
  std::vector<uint32_t> emitted_rows;
};

struct FilterTarget {
  std::string alias;
  std::string column;
  size_t probed = 0;
  size_t passed = 0;
  bool disabled = false;
};

struct FilterMetrics {
  /// Plan node whose hash table the filter summarises.
  int join_node = 0;
  int pipeline = 0;
  /// Build-side key columns, "alias.column".
  std::vector<std::string> keys;
  size_t distinct_hashes = 0;
  double fill = 0;
  bool built = false;
  bool discarded = false;
  bool disabled = false;
  std::vector<FilterTarget> targets;
};

struct PipelineMetrics {
  int id = 0;
  std::string probe;
  double seconds = 0;
  size_t output_rows = 0;
};

struct ExecMetrics {
  std::string query_id;
  ExecMode mode = ExecMode::Off;
  std::vector<AliasMetrics> aliases;
  std::vector<FilterMetrics> filters;
  std::vector<PipelineMetrics> pipelines;
  size_t result_rows = 0;
  size_t parachute_predicates = 0;
  double seconds = 0;
  std::optional<double> dangling_fraction;

  const AliasMetrics &alias(std::string_view a) const;
  std::map<std::string, std::vector<uint32_t>> emitted_sets() const;
};

/// Join result as row ids, one column per alias.
struct ResultSet {
  std::vector<std::string> aliases;
  /// Row-major, width aliases.size().
  std::vector<uint32_t> rows;

  size_t size() const { return aliases.empty() ? 0 : rows.size() / aliases.size(); }
  /// Tuples reordered to `order` and sorted: comparable across plans.
  std::vector<std::vector<uint32_t>> canonical(const std::vector<std::string> &order) const;
};

/// Order-independent digest of the projected values of every result row.
uint64_t result_checksum(const Database &db, const Query &q, const ResultSet &r);
/// Projected values of one result row.
std::vector<std::optional<Datum>> project_row(const Database &db, const Query &q, const ResultSet &r, size_t row);

struct ExecResult {
  ResultSet rows;
  ExecMetrics metrics;
};

/// Runs `plan` pipeline by pipeline in id order. Parachute predicates come
/// from q.parachute_predicates (modes parachute/both); bloom filters from
/// every completed hash table flow to later probe scans (modes psf/both).
ExecResult execute(const Database &db, const QueryPlan &plan, const Query &q, ExecMode mode,
                   const ExecOptions &options = {});

struct OracleSets;

struct DanglingCounts {
  /// Σ(emitted - non-dangling) over aliases.
  double emitted_dangling = 0;
  /// Σ(rows - non-dangling) over aliases.
  double total_dangling = 0;
  double fraction() const { return total_dangling <= 0 ? 0.0 : emitted_dangling / total_dangling; }
};

/// Throws ValidationError when the oracle belongs to another query.
DanglingCounts dangling_counts(const ExecMetrics &metrics, const OracleSets &oracle);
/// Fraction of dangling rows still emitted; 0 when nothing dangles.
double dangling_report(const ExecMetrics &metrics, const OracleSets &oracle);

void to_json(nlohmann::json &j, const ExecMetrics &m);
/// Without the emitted row lists.
nlohmann::json metrics_summary_json(const ExecMetrics &m);

} // namespace parachute
