#pragma once

#include "parachute/common.hpp"

#include <map>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace parachute {

struct ColumnDef {
  std::string name;
  LogicalType type = LogicalType::Int64;
  bool nullable = true;
};

struct TableDef {
  std::string name;
  std::vector<ColumnDef> columns;
  std::optional<std::string> primary_key;

  const ColumnDef *find_column(std::string_view column) const;
  const ColumnDef &column(std::string_view column) const;
};

struct ForeignKey {
  std::string fk_table;
  std::string fk_column;
  std::string pk_table;
  std::string pk_column;
};

using ClassId = uint32_t;

/// Tables, PK-FK edges and the equivalence classes of join keys. Classes are
/// the connected components of the graph with one edge per FK column pair.
class Schema {
public:
  Schema() = default;
  Schema(std::vector<TableDef> tables, std::vector<ForeignKey> fks);

  const std::vector<TableDef> &tables() const { return tables_; }
  const std::vector<ForeignKey> &foreign_keys() const { return fks_; }

  bool has_table(std::string_view name) const;
  const TableDef &table(std::string_view name) const;

  /// Class of (table, column), nullopt for non-key columns.
  /// Throws LookupError for unknown tables or columns.
  std::optional<ClassId> attribute_class(std::string_view table, std::string_view column) const;

  /// FK edges from fk_table to pk_table.
  std::vector<const ForeignKey *> find_fks(std::string_view fk_table, std::string_view pk_table) const;
  const ForeignKey *find_fk(std::string_view fk_table, std::string_view fk_column,
                            std::string_view pk_table, std::string_view pk_column) const;

  size_t class_count() const { return class_count_; }

private:
  std::vector<TableDef> tables_;
  std::vector<ForeignKey> fks_;
  std::map<std::pair<std::string, std::string>, ClassId> classes_;
  size_t class_count_ = 0;
};

/// Schema-level is-joinable: the two tables share an attribute class.
bool tables_joinable(const Schema &schema, std::string_view left, std::string_view right);

void to_json(nlohmann::json &j, const Schema &schema);
Schema schema_from_json(const nlohmann::json &j);
Schema load_schema(const std::string &path);

} // namespace parachute
