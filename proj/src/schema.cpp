#include "parachute/schema.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <set>

namespace parachute {

const ColumnDef *TableDef::find_column(std::string_view column) const {
  for (const auto &c : columns)
    if (c.name == column)
      return &c;
  return nullptr;
}

const ColumnDef &TableDef::column(std::string_view column) const {
  if (const auto *c = find_column(column))
    return *c;
  throw LookupError("table '" + name + "' has no column '" + std::string(column) + "'");
}

namespace {

class UnionFind {
public:
  explicit UnionFind(size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  size_t find(size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(size_t a, size_t b) {
    a = find(a);
    b = find(b);
    if (a != b)
      parent_[std::max(a, b)] = std::min(a, b);
  }

private:
  std::vector<size_t> parent_;
};

} // namespace

Schema::Schema(std::vector<TableDef> tables, std::vector<ForeignKey> fks)
    : tables_(std::move(tables)), fks_(std::move(fks)) {
  std::set<std::string> names;
  for (const auto &t : tables_) {
    if (!names.insert(t.name).second)
      throw ValidationError("duplicate table '" + t.name + "'");
    std::set<std::string> cols;
    for (const auto &c : t.columns)
      if (!cols.insert(c.name).second)
        throw ValidationError("duplicate column '" + t.name + "." + c.name + "'");
    if (t.primary_key) {
      const auto &pk = t.column(*t.primary_key);
      if (pk.type != LogicalType::Int64)
        throw ValidationError("primary key '" + t.name + "." + pk.name + "' must be int64");
    }
  }

  // Endpoints of FK edges, indexed densely for the union-find.
  std::map<std::pair<std::string, std::string>, size_t> node_of;
  auto node = [&](const std::string &table, const std::string &column) {
    auto key = std::make_pair(table, column);
    auto [it, inserted] = node_of.emplace(key, node_of.size());
    return it->second;
  };
  for (const auto &fk : fks_) {
    if (!has_table(fk.fk_table))
      throw ValidationError("foreign key references unknown table '" + fk.fk_table + "'");
    if (!has_table(fk.pk_table))
      throw ValidationError("foreign key references unknown table '" + fk.pk_table + "'");
    const auto *fc = table(fk.fk_table).find_column(fk.fk_column);
    const auto *pc = table(fk.pk_table).find_column(fk.pk_column);
    if (!fc)
      throw ValidationError("foreign key column '" + fk.fk_table + "." + fk.fk_column + "' does not exist");
    if (!pc)
      throw ValidationError("referenced column '" + fk.pk_table + "." + fk.pk_column + "' does not exist");
    if (fc->type != LogicalType::Int64 || pc->type != LogicalType::Int64)
      throw ValidationError("foreign key '" + fk.fk_table + "." + fk.fk_column + "' must join int64 columns");
    node(fk.fk_table, fk.fk_column);
    node(fk.pk_table, fk.pk_column);
  }
  UnionFind uf(node_of.size());
  for (const auto &fk : fks_)
    uf.unite(node_of.at({fk.fk_table, fk.fk_column}), node_of.at({fk.pk_table, fk.pk_column}));

  // Dense class ids in order of first appearance of the component root.
  std::map<size_t, ClassId> class_of_root;
  for (const auto &[key, idx] : node_of) {
    const size_t root = uf.find(idx);
    auto [it, inserted] = class_of_root.emplace(root, static_cast<ClassId>(class_of_root.size()));
    classes_[key] = it->second;
  }
  class_count_ = class_of_root.size();
}

bool Schema::has_table(std::string_view name) const {
  for (const auto &t : tables_)
    if (t.name == name)
      return true;
  return false;
}

const TableDef &Schema::table(std::string_view name) const {
  for (const auto &t : tables_)
    if (t.name == name)
      return t;
  throw LookupError("unknown table '" + std::string(name) + "'");
}

std::optional<ClassId> Schema::attribute_class(std::string_view table_name, std::string_view column) const {
  table(table_name).column(column);
  auto it = classes_.find({std::string(table_name), std::string(column)});
  if (it == classes_.end())
    return std::nullopt;
  return it->second;
}

std::vector<const ForeignKey *> Schema::find_fks(std::string_view fk_table, std::string_view pk_table) const {
  std::vector<const ForeignKey *> out;
  for (const auto &fk : fks_)
    if (fk.fk_table == fk_table && fk.pk_table == pk_table)
      out.push_back(&fk);
  return out;
}

const ForeignKey *Schema::find_fk(std::string_view fk_table, std::string_view fk_column,
                                  std::string_view pk_table, std::string_view pk_column) const {
  for (const auto &fk : fks_)
    if (fk.fk_table == fk_table && fk.fk_column == fk_column && fk.pk_table == pk_table &&
        fk.pk_column == pk_column)
      return &fk;
  return nullptr;
}

bool tables_joinable(const Schema &schema, std::string_view left, std::string_view right) {
  std::set<ClassId> left_classes;
  for (const auto &c : schema.table(left).columns)
    if (auto cls = schema.attribute_class(left, c.name))
      left_classes.insert(*cls);
  for (const auto &c : schema.table(right).columns)
    if (auto cls = schema.attribute_class(right, c.name); cls && left_classes.count(*cls))
      return true;
  return false;
}

void to_json(nlohmann::json &j, const Schema &schema) {
  j = nlohmann::json::object();
  auto &tables = j["tables"] = nlohmann::json::array();
  for (const auto &t : schema.tables()) {
    nlohmann::json jt{{"name", t.name}};
    if (t.primary_key)
      jt["primary_key"] = *t.primary_key;
    auto &cols = jt["columns"] = nlohmann::json::array();
    for (const auto &c : t.columns)
      cols.push_back({{"name", c.name}, {"type", std::string(to_string(c.type))}, {"nullable", c.nullable}});
    tables.push_back(std::move(jt));
  }
  auto &fks = j["foreign_keys"] = nlohmann::json::array();
  for (const auto &fk : schema.foreign_keys())
    fks.push_back({{"fk_table", fk.fk_table},
                   {"fk_column", fk.fk_column},
                   {"pk_table", fk.pk_table},
                   {"pk_column", fk.pk_column}});
}

Schema schema_from_json(const nlohmann::json &j) {
  try {
    std::vector<TableDef> tables;
    for (const auto &jt : j.at("tables")) {
      TableDef t;
      t.name = jt.at("name").get<std::string>();
      if (jt.contains("primary_key") && !jt["primary_key"].is_null())
        t.primary_key = jt["primary_key"].get<std::string>();
      for (const auto &jc : jt.at("columns")) {
        ColumnDef c;
        c.name = jc.at("name").get<std::string>();
        c.type = logical_type_from_string(jc.at("type").get<std::string>());
        c.nullable = jc.value("nullable", true);
        t.columns.push_back(std::move(c));
      }
      tables.push_back(std::move(t));
    }
    std::vector<ForeignKey> fks;
    if (j.contains("foreign_keys"))
      for (const auto &jf : j["foreign_keys"])
        fks.push_back({jf.at("fk_table").get<std::string>(), jf.at("fk_column").get<std::string>(),
                       jf.at("pk_table").get<std::string>(), jf.at("pk_column").get<std::string>()});
    return Schema(std::move(tables), std::move(fks));
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("invalid schema JSON: ") + e.what());
  }
}

Schema load_schema(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw LookupError("cannot open schema file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception &e) {
    throw ParseError("schema file '" + path + "': " + e.what());
  }
  return schema_from_json(j);
}

} // namespace parachute
