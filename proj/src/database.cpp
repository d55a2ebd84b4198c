#include "parachute/database.hpp"

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

namespace parachute {

namespace fs = std::filesystem;

const TableData &Database::table(std::string_view name) const {
  auto it = tables_.find(name);
  if (it == tables_.end())
    throw LookupError("table '" + std::string(name) + "' is not loaded");
  return it->second;
}

TableData &Database::mutable_table(std::string_view name) {
  auto it = tables_.find(name);
  if (it == tables_.end())
    throw LookupError("table '" + std::string(name) + "' is not loaded");
  invalidate(name);
  return it->second;
}

void Database::put_table(TableData table) {
  if (!schema().has_table(table.name()))
    throw LookupError("table '" + table.name() + "' is not in the schema");
  invalidate(table.name());
  auto name = table.name();
  tables_.insert_or_assign(std::move(name), std::move(table));
}

PackedColumn &Database::mutable_packed(std::string_view table_name, std::string_view column) {
  auto it = tables_.find(table_name);
  if (it == tables_.end())
    throw LookupError("table '" + std::string(table_name) + "' is not loaded");
  return it->second.mutable_packed(column);
}

void Database::put_packed(std::string_view table_name, const std::string &column, PackedColumn col) {
  auto it = tables_.find(table_name);
  if (it == tables_.end())
    throw LookupError("table '" + std::string(table_name) + "' is not loaded");
  it->second.put_packed(column, std::move(col));
}

const KeyIndex &Database::key_index(std::string_view table_name, std::string_view column, KeyMode mode) const {
  auto key = std::make_tuple(std::string(table_name), std::string(column), mode);
  auto it = indexes_.find(key);
  if (it != indexes_.end())
    return *it->second;
  auto idx = std::make_unique<KeyIndex>(table(table_name), column, mode);
  return *indexes_.emplace(std::move(key), std::move(idx)).first->second;
}

void Database::invalidate(std::string_view table_name) {
  std::erase_if(indexes_, [&](const auto &entry) { return std::get<0>(entry.first) == table_name; });
}

Database load_csv_directory(const Schema &schema, const std::string &dir) {
  Database db{Catalog(schema)};
  for (const auto &t : schema.tables()) {
    const auto path = (fs::path(dir) / (t.name + ".csv")).string();
    if (!fs::exists(path))
      throw LookupError("missing CSV for table '" + t.name + "': " + path);
    db.put_table(ingest_csv(schema, t.name, path));
  }
  return db;
}

// ---------------------------------------------------------------------------
// Bundle files

namespace {

constexpr char kColumnMagic[4] = {'P', 'C', 'O', 'L'};
constexpr char kPackedMagic[4] = {'P', 'P', 'A', 'K'};

template <class T> void put(std::ostream &out, T v) { out.write(reinterpret_cast<const char *>(&v), sizeof(T)); }

template <class T> T take(std::istream &in, const std::string &file) {
  T v;
  if (!in.read(reinterpret_cast<char *>(&v), sizeof(T)))
    throw ParseError("truncated bundle file " + file);
  return v;
}

void write_column(const std::string &path, const ColumnVector &col) {
  std::ofstream out(path, std::ios::binary);
  out.write(kColumnMagic, 4);
  put<uint32_t>(out, col.type() == LogicalType::Int64 ? 0u : 1u);
  put<uint64_t>(out, col.size());
  for (size_t base = 0; base < col.size(); base += 64) {
    uint64_t word = 0;
    for (size_t r = base; r < std::min(col.size(), base + 64); ++r)
      if (col.is_null(r))
        word |= uint64_t{1} << (r - base);
    put(out, word);
  }
  if (col.type() == LogicalType::Int64) {
    out.write(reinterpret_cast<const char *>(col.ints().data()), static_cast<std::streamsize>(col.size() * 8));
  } else {
    for (const auto &s : col.strings()) {
      put<uint32_t>(out, static_cast<uint32_t>(s.size()));
      out.write(s.data(), static_cast<std::streamsize>(s.size()));
    }
  }
  if (!out)
    throw Error("cannot write " + path);
}

ColumnVector read_column(const std::string &path, LogicalType expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw LookupError("missing bundle file " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kColumnMagic, 4) != 0)
    throw ParseError("bad column file " + path);
  const auto type = take<uint32_t>(in, path) == 0 ? LogicalType::Int64 : LogicalType::String;
  if (type != expected)
    throw ParseError("column file " + path + " has the wrong type");
  const auto rows = take<uint64_t>(in, path);
  std::vector<uint64_t> nulls((rows + 63) / 64);
  for (auto &w : nulls)
    w = take<uint64_t>(in, path);
  ColumnVector col(type);
  for (uint64_t r = 0; r < rows; ++r) {
    const bool null = (nulls[r >> 6] >> (r & 63)) & 1u;
    if (type == LogicalType::Int64) {
      const auto v = take<int64_t>(in, path);
      null ? col.append_null() : col.append_int(v);
    } else {
      const auto len = take<uint32_t>(in, path);
      std::string s(len, '\0');
      if (!in.read(s.data(), len))
        throw ParseError("truncated bundle file " + path);
      null ? col.append_null() : col.append_string(std::move(s));
    }
  }
  return col;
}

void write_packed(const std::string &path, const PackedColumn &col) {
  std::ofstream out(path, std::ios::binary);
  // 16-byte header: magic, width, row count.
  out.write(kPackedMagic, 4);
  put<uint32_t>(out, col.width());
  put<uint64_t>(out, col.size());
  const auto payload = col.payload();
  out.write(reinterpret_cast<const char *>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (!out)
    throw Error("cannot write " + path);
}

PackedColumn read_packed(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw LookupError("missing bundle file " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kPackedMagic, 4) != 0)
    throw ParseError("bad packed column file " + path);
  const auto width = take<uint32_t>(in, path);
  const auto rows = take<uint64_t>(in, path);
  std::vector<uint8_t> payload((rows * width + 7) / 8);
  if (!in.read(reinterpret_cast<char *>(payload.data()), static_cast<std::streamsize>(payload.size())))
    throw ParseError("truncated bundle file " + path);
  return PackedColumn::from_payload(width, rows, payload);
}

} // namespace

void save_bundle(const Database &db, const std::string &dir) {
  fs::create_directories(dir);
  nlohmann::json j;
  j["format"] = "parachute-bundle-1";
  j["catalog"] = db.catalog();
  auto &tables = j["tables"] = nlohmann::json::array();
  for (const auto &[name, t] : db.tables()) {
    nlohmann::json jt{{"name", name}, {"rows", t.row_count()}};
    auto &cols = jt["columns"] = nlohmann::json::array();
    for (const auto &c : t.column_names()) {
      const auto file = name + "." + c + ".col";
      write_column((fs::path(dir) / file).string(), t.column(c));
      cols.push_back({{"name", c}, {"file", file}});
    }
    auto &packed = jt["packed"] = nlohmann::json::array();
    for (const auto &[c, col] : t.packed_columns()) {
      const auto file = name + "." + c + ".pak";
      write_packed((fs::path(dir) / file).string(), col);
      packed.push_back({{"name", c}, {"width", col.width()}, {"file", file}});
    }
    tables.push_back(std::move(jt));
  }
  std::ofstream out(fs::path(dir) / "catalog.json");
  out << j.dump(2) << "\n";
  if (!out)
    throw Error("cannot write bundle catalog in " + dir);
}

Database load_bundle(const std::string &dir) {
  const auto catalog_path = fs::path(dir) / "catalog.json";
  std::ifstream in(catalog_path);
  if (!in)
    throw LookupError("no bundle at " + dir + " (missing catalog.json)");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception &e) {
    throw ParseError("invalid bundle catalog: " + std::string(e.what()));
  }
  Database db{catalog_from_json(j.at("catalog"))};
  for (const auto &jt : j.at("tables")) {
    const auto name = jt.at("name").get<std::string>();
    const auto &def = db.schema().table(name);
    std::vector<ColumnVector> cols;
    for (const auto &c : def.columns)
      cols.push_back(read_column((fs::path(dir) / (name + "." + c.name + ".col")).string(), c.type));
    auto t = TableData::from_columns(def, std::move(cols));
    if (t.row_count() != jt.at("rows").get<size_t>())
      throw ParseError("bundle table '" + name + "' row count mismatch");
    for (const auto &jp : jt.at("packed"))
      t.put_packed(jp.at("name").get<std::string>(),
                   read_packed((fs::path(dir) / jp.at("file").get<std::string>()).string()));
    db.put_table(std::move(t));
  }
  return db;
}

} // namespace parachute
