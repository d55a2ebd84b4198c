#pragma once

#include "parachute/fingerprint.hpp"
#include "parachute/histogram.hpp"
#include "parachute/schema.hpp"

#include <cstdint>
#include <map>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace parachute {

enum class ParachuteKind : uint8_t { NumericHistogram, LowcardString, StringFingerprint };

std::string_view to_string(ParachuteKind kind);
ParachuteKind parachute_kind_from_string(std::string_view name);

using DescriptorId = uint32_t;

/// A parachute column on `fk_table` encoding `pk_table.source_column` of the
/// join partner reached through fk_column = pk_column.
struct ParachuteDescriptor {
  DescriptorId id = 0;
  std::string fk_table;
  std::string fk_column;
  std::string pk_table;
  std::string pk_column;
  /// Column of pk_table, or the name of a parachute column on pk_table for
  /// transitive descriptors.
  std::string source_column;
  unsigned pbw = 0;
  ParachuteKind kind = ParachuteKind::NumericHistogram;
  std::variant<EquiDepthHistogram, BytePartition> representation;
  std::optional<std::string> helper_column;
  bool nullable_source = false;
  /// Relaxed PK-FK: multi-matches OR-ed, missing partners marked pending.
  bool relaxed = false;
  /// Upstream descriptor (on pk_table) this one is propagated from.
  std::optional<DescriptorId> via;
  /// Table/column whose predicates this parachute can translate. Equals
  /// (pk_table, source_column) for one-hop descriptors.
  std::string origin_table;
  std::string origin_column;

  /// Name of the packed column on fk_table.
  std::string column_name() const { return "parachute_" + pk_table + "_" + source_column; }

  const EquiDepthHistogram &histogram() const { return std::get<EquiDepthHistogram>(representation); }
  const BytePartition &partition() const { return std::get<BytePartition>(representation); }
  bool has_histogram() const { return std::holds_alternative<EquiDepthHistogram>(representation); }

  bool operator==(const ParachuteDescriptor &) const = default;
};

std::string helper_column_name(std::string_view source_column, unsigned pbw);

void to_json(nlohmann::json &j, const ParachuteDescriptor &d);
ParachuteDescriptor descriptor_from_json(const nlohmann::json &j);

/// FK rows waiting for their PK partner (relaxed mode), per descriptor.
struct PendingKeys {
  DescriptorId descriptor = 0;
  std::set<int64_t> keys;
};

/// Schema plus the registry of parachute descriptors.
class Catalog {
public:
  Catalog() = default;
  explicit Catalog(Schema schema) : schema_(std::move(schema)) {}

  const Schema &schema() const { return schema_; }

  /// Validates and stores `d`; a descriptor with the same (fk_table,
  /// pk_table, source_column) is replaced in place and keeps its id.
  DescriptorId register_parachute(ParachuteDescriptor d);

  const std::vector<ParachuteDescriptor> &descriptors() const { return descriptors_; }
  const ParachuteDescriptor &descriptor(DescriptorId id) const;
  const ParachuteDescriptor *find(std::string_view fk_table, std::string_view pk_table,
                                  std::string_view source_column) const;
  /// One-hop descriptors on fk_table whose origin is (origin_table, origin_column).
  std::vector<const ParachuteDescriptor *> find_by_origin(std::string_view fk_table, std::string_view origin_table,
                                                          std::string_view origin_column) const;
  /// Descriptors whose column lives on `fk_table`.
  std::vector<const ParachuteDescriptor *> on_table(std::string_view fk_table) const;
  /// Descriptors whose partner table is `pk_table`.
  std::vector<const ParachuteDescriptor *> referencing(std::string_view pk_table) const;

  std::map<DescriptorId, std::set<int64_t>> &pending() { return pending_; }
  const std::map<DescriptorId, std::set<int64_t>> &pending() const { return pending_; }

  /// Throws ValidationError describing the first violated invariant.
  void validate(const ParachuteDescriptor &d) const;

private:
  Schema schema_;
  std::vector<ParachuteDescriptor> descriptors_;
  std::map<DescriptorId, std::set<int64_t>> pending_;
};

void to_json(nlohmann::json &j, const Catalog &c);
Catalog catalog_from_json(const nlohmann::json &j);

} // namespace parachute
