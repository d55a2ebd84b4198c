#pragma once

#include "parachute/catalog.hpp"
#include "parachute/storage.hpp"

#include <map>
#include <memory>
#include <string>
#include <tuple>

namespace parachute {

/// Catalog plus loaded table data. Key indexes are built lazily and cached
/// until the owning table changes.
class Database {
public:
  Database() = default;
  explicit Database(Catalog catalog) : catalog_(std::move(catalog)) {}

  Database(Database &&) = default;
  Database &operator=(Database &&) = default;

  Catalog &catalog() { return catalog_; }
  const Catalog &catalog() const { return catalog_; }
  const Schema &schema() const { return catalog_.schema(); }

  bool has_table(std::string_view name) const { return tables_.find(name) != tables_.end(); }
  const TableData &table(std::string_view name) const;
  /// Mutable access drops the cached key indexes of that table.
  TableData &mutable_table(std::string_view name);
  void put_table(TableData table);
  /// Packed columns are never indexed, so these keep the index cache.
  PackedColumn &mutable_packed(std::string_view table, std::string_view column);
  void put_packed(std::string_view table, const std::string &column, PackedColumn col);
  const std::map<std::string, TableData, std::less<>> &tables() const { return tables_; }

  const KeyIndex &key_index(std::string_view table, std::string_view column, KeyMode mode) const;
  void invalidate(std::string_view table);

private:
  Catalog catalog_;
  std::map<std::string, TableData, std::less<>> tables_;
  mutable std::map<std::tuple<std::string, std::string, KeyMode>, std::unique_ptr<KeyIndex>> indexes_;
};

/// Reads `<dir>/<table>.csv` for every schema table.
Database load_csv_directory(const Schema &schema, const std::string &dir);

/// Bundle layout: `<dir>/catalog.json` plus one binary file per column.
void save_bundle(const Database &db, const std::string &dir);
Database load_bundle(const std::string &dir);

} // namespace parachute
