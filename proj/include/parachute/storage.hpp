#pragma once

#include "parachute/common.hpp"
#include "parachute/schema.hpp"

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace parachute {

/// A typed column with a NULL bitmap (bit set = NULL).
class ColumnVector {
public:
  ColumnVector() = default;
  explicit ColumnVector(LogicalType type) : type_(type) {}

  LogicalType type() const { return type_; }
  size_t size() const { return size_; }

  bool is_null(size_t row) const { return (nulls_[row >> 6] >> (row & 63)) & 1u; }
  int64_t get_int(size_t row) const { return ints_[row]; }
  const std::string &get_string(size_t row) const { return strings_[row]; }
  /// Value at row; nullopt for NULL.
  std::optional<Datum> get(size_t row) const;

  void append_int(int64_t v);
  void append_string(std::string v);
  void append_null();
  void append(const std::optional<Datum> &v);

  void set(size_t row, const std::optional<Datum> &v);

  std::span<const int64_t> ints() const { return ints_; }
  std::span<const std::string> strings() const { return strings_; }
  bool has_nulls() const;

private:
  void grow_bitmap();

  LogicalType type_ = LogicalType::Int64;
  size_t size_ = 0;
  std::vector<int64_t> ints_;
  std::vector<std::string> strings_;
  std::vector<uint64_t> nulls_;
};

/// Bytes of fixed metadata stored with every packed column (magic, width,
/// row count). Part of the reported extra-space formula.
inline constexpr size_t kPackedColumnHeaderBytes = 16;

/// Non-nullable unsigned values packed at exactly `width` bits per row,
/// little-endian bit order.
class PackedColumn {
public:
  PackedColumn() = default;
  PackedColumn(unsigned width, size_t rows);

  unsigned width() const { return width_; }
  size_t size() const { return rows_; }
  uint32_t max_value() const { return width_ == 32 ? UINT32_MAX : (uint32_t{1} << width_) - 1; }

  uint32_t get(size_t row) const {
    const size_t bit = row * width_;
    uint64_t word;
    std::memcpy(&word, bytes_.data() + (bit >> 3), sizeof(word));
    return static_cast<uint32_t>((word >> (bit & 7)) & mask_);
  }
  void set(size_t row, uint32_t value);
  /// Writes values[0..n) at rows first_row.. through a private buffer so
  /// that concurrent calls on disjoint 64-row aligned chunks never touch the
  /// same byte. Requires first_row % 64 == 0 and n % 64 == 0 unless the chunk
  /// ends the column.
  void pack_chunk(size_t first_row, const uint32_t *values, size_t n);
  void append(uint32_t value);
  void resize(size_t rows);

  /// ceil(rows * width / 8): the payload size.
  size_t payload_bytes() const { return (rows_ * width_ + 7) / 8; }
  /// payload + header, the extra space this column adds to its table.
  size_t extra_space_bytes() const { return payload_bytes() + kPackedColumnHeaderBytes; }

  std::span<const uint8_t> payload() const { return {bytes_.data(), payload_bytes()}; }
  /// Raw buffer including 8 bytes of zero padding past the payload.
  uint8_t *mutable_data() { return bytes_.data(); }

  static PackedColumn from_payload(unsigned width, size_t rows, std::span<const uint8_t> payload);

  bool operator==(const PackedColumn &other) const;

private:
  unsigned width_ = 1;
  size_t rows_ = 0;
  uint64_t mask_ = 1;
  std::vector<uint8_t> bytes_ = std::vector<uint8_t>(8, 0);
};

/// In-memory table: schema columns in declaration order plus packed
/// parachute/helper columns by name.
class TableData {
public:
  TableData() = default;
  explicit TableData(const TableDef &def);
  /// Adopts `columns` (declaration order); all must have the same length.
  static TableData from_columns(const TableDef &def, std::vector<ColumnVector> columns);

  const std::string &name() const { return name_; }
  size_t row_count() const { return row_count_; }
  const std::vector<std::string> &column_names() const { return names_; }

  bool has_column(std::string_view column) const;
  const ColumnVector &column(std::string_view column) const;
  ColumnVector &mutable_column(std::string_view column);

  bool has_packed(std::string_view column) const;
  const PackedColumn &packed(std::string_view column) const;
  PackedColumn &mutable_packed(std::string_view column);
  void put_packed(const std::string &column, PackedColumn col);
  const std::map<std::string, PackedColumn, std::less<>> &packed_columns() const { return packed_; }

  /// Appends every row of `batch` (same schema columns). Packed columns are
  /// extended with zeros; callers fill them afterwards.
  void append_rows(const TableData &batch);
  /// Adds one row. `values` follows column_names() order.
  void append_row(const std::vector<std::optional<Datum>> &values);

  /// Table holding the given rows of this one (schema columns only).
  TableData select_rows(std::span<const uint32_t> rows) const;

  void check_invariants() const;

private:
  std::string name_;
  size_t row_count_ = 0;
  std::vector<std::string> names_;
  std::vector<ColumnVector> columns_;
  std::map<std::string, PackedColumn, std::less<>> packed_;
};

/// Loads `path` as the table `table` of `schema`. Header must list the
/// declared columns in any order.
TableData ingest_csv(const Schema &schema, std::string_view table, const std::string &path);
/// Same, reading from an in-memory CSV document.
TableData ingest_csv_text(const Schema &schema, std::string_view table, std::string_view text);

/// Header plus one line per row; NULL is an empty field, empty strings and
/// strings with separators are quoted.
std::string to_csv(const TableData &table);
void write_csv(const TableData &table, const std::string &path);

/// min(m, row_count) distinct row indices chosen uniformly without
/// replacement, ascending, deterministic in `seed`.
std::vector<uint32_t> sample_rows(size_t row_count, size_t m, uint64_t seed);

enum class KeyMode { Strict, Relaxed };

/// Hash index from int64 key to row ids. Strict mode rejects duplicate keys;
/// relaxed mode chains all rows sharing a key.
class KeyIndex {
public:
  static constexpr uint32_t kNone = UINT32_MAX;

  KeyIndex() = default;
  KeyIndex(const TableData &table, std::string_view key_column, KeyMode mode);

  KeyMode mode() const { return mode_; }
  size_t size() const { return head_.size(); }

  /// First row with this key, or kNone.
  uint32_t find(int64_t key) const {
    auto it = head_.find(key);
    return it == head_.end() ? kNone : it->second;
  }
  /// Next row with the same key after `row`, or kNone.
  uint32_t next(uint32_t row) const { return next_.empty() ? kNone : next_[row]; }

  std::vector<uint32_t> rows(int64_t key) const;

private:
  KeyMode mode_ = KeyMode::Strict;
  std::unordered_map<int64_t, uint32_t> head_;
  std::vector<uint32_t> next_;
};

} // namespace parachute
