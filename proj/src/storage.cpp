#include "parachute/storage.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <random>
#include <ranges>
#include <set>
#include <sstream>

namespace parachute {

// ---------------------------------------------------------------------------
// ColumnVector

void ColumnVector::grow_bitmap() {
  if ((size_ >> 6) >= nulls_.size())
    nulls_.push_back(0);
}

std::optional<Datum> ColumnVector::get(size_t row) const {
  if (is_null(row))
    return std::nullopt;
  if (type_ == LogicalType::Int64)
    return Datum{ints_[row]};
  return Datum{strings_[row]};
}

void ColumnVector::append_int(int64_t v) {
  if (type_ != LogicalType::Int64)
    throw ValidationError("int64 value appended to a string column");
  grow_bitmap();
  ints_.push_back(v);
  ++size_;
}

void ColumnVector::append_string(std::string v) {
  if (type_ != LogicalType::String)
    throw ValidationError("string value appended to an int64 column");
  grow_bitmap();
  strings_.push_back(std::move(v));
  ++size_;
}

void ColumnVector::append_null() {
  grow_bitmap();
  nulls_[size_ >> 6] |= uint64_t{1} << (size_ & 63);
  if (type_ == LogicalType::Int64)
    ints_.push_back(0);
  else
    strings_.emplace_back();
  ++size_;
}

void ColumnVector::append(const std::optional<Datum> &v) {
  if (!v)
    append_null();
  else if (is_int(*v))
    append_int(as_int(*v));
  else
    append_string(as_string(*v));
}

void ColumnVector::set(size_t row, const std::optional<Datum> &v) {
  if (row >= size_)
    throw LookupError("row " + std::to_string(row) + " out of range");
  const uint64_t bit = uint64_t{1} << (row & 63);
  if (!v) {
    nulls_[row >> 6] |= bit;
    return;
  }
  if (is_int(*v) != (type_ == LogicalType::Int64))
    throw ValidationError("value type does not match column type");
  nulls_[row >> 6] &= ~bit;
  if (is_int(*v))
    ints_[row] = as_int(*v);
  else
    strings_[row] = as_string(*v);
}

bool ColumnVector::has_nulls() const {
  return std::any_of(nulls_.begin(), nulls_.end(), [](uint64_t w) { return w != 0; });
}

// ---------------------------------------------------------------------------
// PackedColumn

PackedColumn::PackedColumn(unsigned width, size_t rows) : width_(width), rows_(rows) {
  if (width < 1 || width > kMaxParachuteWidth)
    throw ValidationError("packed column width must be in [1, 32], got " + std::to_string(width));
  mask_ = (uint64_t{1} << width) - 1;
  bytes_.assign(payload_bytes() + 8, 0);
}

void PackedColumn::set(size_t row, uint32_t value) {
  if (value > max_value())
    throw ValidationError("value " + std::to_string(value) + " does not fit in " + std::to_string(width_) + " bits");
  const size_t bit = row * width_;
  uint8_t *p = bytes_.data() + (bit >> 3);
  uint64_t word;
  std::memcpy(&word, p, sizeof(word));
  const unsigned shift = bit & 7;
  word &= ~(mask_ << shift);
  word |= (uint64_t{value} & mask_) << shift;
  std::memcpy(p, &word, sizeof(word));
}

void PackedColumn::pack_chunk(size_t first_row, const uint32_t *values, size_t n) {
  if (first_row % 64 != 0 || (n % 64 != 0 && first_row + n != rows_) || first_row + n > rows_)
    throw ValidationError("pack_chunk needs a 64-row aligned chunk");
  const size_t nbytes = (n * width_ + 7) / 8;
  std::vector<uint8_t> buf(nbytes + 8, 0);
  for (size_t i = 0; i < n; ++i) {
    const size_t bit = i * width_;
    uint64_t word;
    std::memcpy(&word, buf.data() + (bit >> 3), sizeof(word));
    word |= (uint64_t{values[i]} & mask_) << (bit & 7);
    std::memcpy(buf.data() + (bit >> 3), &word, sizeof(word));
  }
  std::memcpy(bytes_.data() + first_row * width_ / 8, buf.data(), nbytes);
}

void PackedColumn::append(uint32_t value) {
  resize(rows_ + 1);
  set(rows_ - 1, value);
}

void PackedColumn::resize(size_t rows) {
  const size_t old_bits = rows_ * width_;
  rows_ = rows;
  bytes_.resize(payload_bytes() + 8, 0);
  // Clear any stale bits beyond the old payload (shrinking then growing).
  const size_t new_bits = rows_ * width_;
  if (new_bits < old_bits) {
    const size_t first = (new_bits + 7) / 8;
    std::fill(bytes_.begin() + static_cast<std::ptrdiff_t>(first), bytes_.end(), 0);
    if (new_bits & 7)
      bytes_[new_bits >> 3] &= static_cast<uint8_t>((1u << (new_bits & 7)) - 1);
  }
}

PackedColumn PackedColumn::from_payload(unsigned width, size_t rows, std::span<const uint8_t> payload) {
  PackedColumn col(width, rows);
  if (payload.size() != col.payload_bytes())
    throw ParseError("packed column payload has " + std::to_string(payload.size()) + " bytes, expected " +
                     std::to_string(col.payload_bytes()));
  std::copy(payload.begin(), payload.end(), col.bytes_.begin());
  return col;
}

bool PackedColumn::operator==(const PackedColumn &other) const {
  if (width_ != other.width_ || rows_ != other.rows_)
    return false;
  for (size_t i = 0; i < rows_; ++i)
    if (get(i) != other.get(i))
      return false;
  return true;
}

// ---------------------------------------------------------------------------
// TableData

TableData::TableData(const TableDef &def) : name_(def.name) {
  for (const auto &c : def.columns) {
    names_.push_back(c.name);
    columns_.emplace_back(c.type);
  }
}

TableData TableData::from_columns(const TableDef &def, std::vector<ColumnVector> columns) {
  TableData t(def);
  if (columns.size() != t.columns_.size())
    throw ValidationError("table '" + def.name + "' expects " + std::to_string(t.columns_.size()) + " columns");
  for (size_t c = 0; c < columns.size(); ++c) {
    if (columns[c].type() != t.columns_[c].type())
      throw ValidationError("column '" + def.columns[c].name + "' has the wrong type");
    if (columns[c].size() != columns[0].size())
      throw ValidationError("column '" + def.columns[c].name + "' length differs");
  }
  t.row_count_ = columns.empty() ? 0 : columns[0].size();
  t.columns_ = std::move(columns);
  return t;
}

bool TableData::has_column(std::string_view column) const {
  return std::find(names_.begin(), names_.end(), column) != names_.end();
}

const ColumnVector &TableData::column(std::string_view column) const {
  auto it = std::find(names_.begin(), names_.end(), column);
  if (it == names_.end())
    throw LookupError("table '" + name_ + "' has no column '" + std::string(column) + "'");
  return columns_[static_cast<size_t>(it - names_.begin())];
}

ColumnVector &TableData::mutable_column(std::string_view column) {
  return const_cast<ColumnVector &>(std::as_const(*this).column(column));
}

bool TableData::has_packed(std::string_view column) const { return packed_.find(column) != packed_.end(); }

const PackedColumn &TableData::packed(std::string_view column) const {
  auto it = packed_.find(column);
  if (it == packed_.end())
    throw LookupError("table '" + name_ + "' has no packed column '" + std::string(column) + "'");
  return it->second;
}

PackedColumn &TableData::mutable_packed(std::string_view column) {
  return const_cast<PackedColumn &>(std::as_const(*this).packed(column));
}

void TableData::put_packed(const std::string &column, PackedColumn col) {
  if (col.size() != row_count_)
    throw ValidationError("packed column '" + column + "' has " + std::to_string(col.size()) +
                          " rows, table '" + name_ + "' has " + std::to_string(row_count_));
  packed_.insert_or_assign(column, std::move(col));
}

void TableData::append_rows(const TableData &batch) {
  for (size_t c = 0; c < names_.size(); ++c) {
    const auto &src = batch.column(names_[c]);
    auto &dst = columns_[c];
    for (size_t r = 0; r < batch.row_count(); ++r)
      dst.append(src.get(r));
  }
  row_count_ += batch.row_count();
  for (auto &[name, col] : packed_)
    col.resize(row_count_);
}

void TableData::append_row(const std::vector<std::optional<Datum>> &values) {
  if (values.size() != names_.size())
    throw ValidationError("row has " + std::to_string(values.size()) + " values, table '" + name_ + "' has " +
                          std::to_string(names_.size()) + " columns");
  for (size_t c = 0; c < names_.size(); ++c)
    columns_[c].append(values[c]);
  ++row_count_;
  for (auto &[name, col] : packed_)
    col.resize(row_count_);
}

TableData TableData::select_rows(std::span<const uint32_t> rows) const {
  TableData out;
  out.name_ = name_;
  out.names_ = names_;
  for (const auto &c : columns_) {
    ColumnVector v(c.type());
    for (uint32_t r : rows)
      v.append(c.get(r));
    out.columns_.push_back(std::move(v));
  }
  out.row_count_ = rows.size();
  return out;
}

void TableData::check_invariants() const {
  for (size_t c = 0; c < names_.size(); ++c)
    if (columns_[c].size() != row_count_)
      throw ValidationError("column '" + names_[c] + "' length differs from row count");
  for (const auto &[name, col] : packed_)
    if (col.size() != row_count_)
      throw ValidationError("packed column '" + name + "' length differs from row count");
}

// ---------------------------------------------------------------------------
// CSV ingestion

namespace {

struct CsvField {
  std::string text;
  bool quoted = false;
};

/// Splits a CSV document into records. Double quotes delimit fields that may
/// contain separators, quotes ("") and newlines.
class CsvReader {
public:
  explicit CsvReader(std::string_view text) : text_(text) {}

  bool next(std::vector<CsvField> &record) {
    record.clear();
    if (pos_ >= text_.size())
      return false;
    ++line_;
    CsvField field;
    while (true) {
      if (pos_ >= text_.size()) {
        record.push_back(std::move(field));
        return true;
      }
      const char c = text_[pos_];
      if (c == '"' && field.text.empty() && !field.quoted) {
        field.quoted = true;
        ++pos_;
        while (true) {
          if (pos_ >= text_.size())
            throw ParseError("unterminated quoted field at row " + std::to_string(line_));
          const char q = text_[pos_++];
          if (q == '"') {
            if (pos_ < text_.size() && text_[pos_] == '"') {
              field.text.push_back('"');
              ++pos_;
            } else {
              break;
            }
          } else {
            if (q == '\n')
              ++extra_lines_;
            field.text.push_back(q);
          }
        }
      } else if (c == ',') {
        record.push_back(std::move(field));
        field = {};
        ++pos_;
      } else if (c == '\n' || c == '\r') {
        record.push_back(std::move(field));
        if (c == '\r' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '\n')
          ++pos_;
        ++pos_;
        return true;
      } else {
        field.text.push_back(c);
        ++pos_;
      }
    }
  }

  size_t line() const { return line_; }

private:
  std::string_view text_;
  size_t pos_ = 0;
  size_t line_ = 0;
  size_t extra_lines_ = 0;
};

} // namespace

TableData ingest_csv_text(const Schema &schema, std::string_view table, std::string_view text) {
  const TableDef &def = schema.table(table);
  TableData data(def);
  CsvReader reader(text);
  std::vector<CsvField> record;
  if (!reader.next(record))
    throw ParseError("table '" + def.name + "': CSV has no header row");

  // Map CSV position -> schema column index.
  std::vector<size_t> position(record.size());
  std::set<std::string> seen;
  for (size_t i = 0; i < record.size(); ++i) {
    const auto &name = record[i].text;
    auto it = std::find_if(def.columns.begin(), def.columns.end(), [&](const ColumnDef &c) { return c.name == name; });
    if (it == def.columns.end())
      throw ParseError("table '" + def.name + "': header names unknown column '" + name + "'");
    if (!seen.insert(name).second)
      throw ParseError("table '" + def.name + "': header repeats column '" + name + "'");
    position[i] = static_cast<size_t>(it - def.columns.begin());
  }
  if (seen.size() != def.columns.size())
    throw ParseError("table '" + def.name + "': header does not list every declared column");

  std::vector<std::optional<Datum>> row(def.columns.size());
  while (reader.next(record)) {
    const size_t line = reader.line() - 1; // data rows, header excluded
    if (record.size() == 1 && record[0].text.empty() && !record[0].quoted)
      continue; // blank line
    if (record.size() != position.size())
      throw ParseError("table '" + def.name + "' row " + std::to_string(line) + ": expected " +
                       std::to_string(position.size()) + " fields, got " + std::to_string(record.size()));
    for (size_t i = 0; i < record.size(); ++i) {
      const ColumnDef &col = def.columns[position[i]];
      const CsvField &f = record[i];
      auto &slot = row[position[i]];
      if (f.text.empty() && !f.quoted) {
        if (!col.nullable)
          throw ParseError("table '" + def.name + "' row " + std::to_string(line) + ": empty field in non-nullable column '" +
                           col.name + "'");
        slot.reset();
        continue;
      }
      if (col.type == LogicalType::Int64) {
        int64_t v = 0;
        const char *begin = f.text.data();
        const char *end = begin + f.text.size();
        auto [ptr, ec] = std::from_chars(begin, end, v);
        if (ec != std::errc() || ptr != end)
          throw ParseError("table '" + def.name + "' row " + std::to_string(line) + ", column '" + col.name +
                           "': cannot parse '" + f.text + "' as int64");
        slot = Datum{v};
      } else {
        slot = Datum{f.text};
      }
    }
    data.append_row(row);
  }
  return data;
}

TableData ingest_csv(const Schema &schema, std::string_view table, const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw LookupError("table '" + std::string(table) + "': cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ingest_csv_text(schema, table, buffer.str());
}

std::string to_csv(const TableData &table) {
  std::string out;
  auto put_text = [&out](const std::string &v) {
    const bool quote = v.empty() || v.find_first_of(",\"\r\n") != std::string::npos;
    if (!quote) {
      out += v;
      return;
    }
    out.push_back('"');
    for (char c : v) {
      if (c == '"')
        out.push_back('"');
      out.push_back(c);
    }
    out.push_back('"');
  };
  const auto &names = table.column_names();
  for (size_t i = 0; i < names.size(); ++i) {
    if (i)
      out.push_back(',');
    put_text(names[i]);
  }
  out.push_back('\n');
  for (size_t r = 0; r < table.row_count(); ++r) {
    for (size_t i = 0; i < names.size(); ++i) {
      if (i)
        out.push_back(',');
      const auto &col = table.column(names[i]);
      if (col.is_null(r))
        continue;
      if (col.type() == LogicalType::Int64)
        out += std::to_string(col.get_int(r));
      else
        put_text(col.get_string(r));
    }
    out.push_back('\n');
  }
  return out;
}

void write_csv(const TableData &table, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw LookupError("cannot write '" + path + "'");
  out << to_csv(table);
}

// ---------------------------------------------------------------------------
// Sampling and key index

std::vector<uint32_t> sample_rows(size_t row_count, size_t m, uint64_t seed) {
  std::vector<uint32_t> out;
  if (m >= row_count) {
    out.resize(row_count);
    std::iota(out.begin(), out.end(), 0u);
    return out;
  }
  out.resize(m);
  std::mt19937_64 rng(seed);
  // iota_view is only an input range here, so sample into random-access storage.
  auto population = std::views::iota(uint32_t{0}, static_cast<uint32_t>(row_count));
  std::ranges::sample(population, out.begin(), static_cast<std::ptrdiff_t>(m), rng);
  std::sort(out.begin(), out.end());
  return out;
}

KeyIndex::KeyIndex(const TableData &table, std::string_view key_column, KeyMode mode) : mode_(mode) {
  const auto &col = table.column(key_column);
  if (col.type() != LogicalType::Int64)
    throw ValidationError("key column '" + table.name() + "." + std::string(key_column) + "' is not int64");
  head_.reserve(col.size());
  if (mode == KeyMode::Relaxed)
    next_.assign(col.size(), kNone);
  // Insert in reverse so chains list rows in ascending order.
  for (size_t i = col.size(); i-- > 0;) {
    if (col.is_null(i)) {
      if (mode == KeyMode::Strict)
        throw ValidationError("key column '" + table.name() + "." + std::string(key_column) + "' has NULL at row " +
                              std::to_string(i));
      continue;
    }
    const int64_t key = col.get_int(i);
    auto [it, inserted] = head_.try_emplace(key, static_cast<uint32_t>(i));
    if (!inserted) {
      if (mode == KeyMode::Strict)
        throw ValidationError("duplicate key " + std::to_string(key) + " in '" + table.name() + "." +
                              std::string(key_column) + "'");
      next_[i] = it->second;
      it->second = static_cast<uint32_t>(i);
    }
  }
}

std::vector<uint32_t> KeyIndex::rows(int64_t key) const {
  std::vector<uint32_t> out;
  for (uint32_t r = find(key); r != kNone; r = next(r))
    out.push_back(r);
  return out;
}

} // namespace parachute
