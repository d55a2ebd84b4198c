#pragma once

#include "parachute/fingerprint.hpp"
#include "parachute/histogram.hpp"
#include "parachute/storage.hpp"
#include "parachute/translate.hpp"

#include <cstdint>
#include <span>
#include <vector>

// Data-parallel kernels behind attach, maintenance and the parachute scan.
// Every kernel has an OpenMP version and a serial reference; the two must
// produce identical output and are cross-checked in the tests.
namespace parachute::kernels {

/// Partner marker for a NULL FK value (never joins).
inline constexpr uint32_t kNullKey = UINT32_MAX - 1;
/// Partner marker for an FK value without PK row.
inline constexpr uint32_t kNoPartner = KeyIndex::kNone;

/// Inputs smaller than this run serially even when parallel is requested.
inline constexpr size_t kParallelThreshold = 1 << 14;

/// out[i] = first PK row for fk[begin + i], kNullKey or kNoPartner.
void lookup_partners_serial(const KeyIndex &pk, const ColumnVector &fk, size_t begin, std::span<uint32_t> out);
void lookup_partners_parallel(const KeyIndex &pk, const ColumnVector &fk, size_t begin, std::span<uint32_t> out);

/// out[r] = bin(src[r]) for every row.
void encode_bins_serial(const EquiDepthHistogram &h, const ColumnVector &src, std::span<uint32_t> out);
void encode_bins_parallel(const EquiDepthHistogram &h, const ColumnVector &src, std::span<uint32_t> out);

/// out[r] = fingerprint(src[r]); NULL gets the empty mask.
void fingerprint_column_serial(const BytePartition &p, const ColumnVector &src, std::span<uint32_t> out);
void fingerprint_column_parallel(const BytePartition &p, const ColumnVector &src, std::span<uint32_t> out);

/// Packs values into col rows [0, values.size()).
void pack_serial(std::span<const uint32_t> values, PackedColumn &col);
void pack_parallel(std::span<const uint32_t> values, PackedColumn &col);

/// Keeps the rows of sel[0..n) whose packed value passes `pred`, in order.
/// Returns the surviving count; survivors are compacted to the front of sel.
size_t filter_packed_serial(const PackedColumn &col, const CompiledPredicate &pred, std::span<uint32_t> sel);
size_t filter_packed_parallel(const PackedColumn &col, const CompiledPredicate &pred, std::span<uint32_t> sel);

// Dispatchers: parallel when asked and the input is large enough.
void lookup_partners(const KeyIndex &pk, const ColumnVector &fk, size_t begin, std::span<uint32_t> out, bool parallel);
void encode_bins(const EquiDepthHistogram &h, const ColumnVector &src, std::span<uint32_t> out, bool parallel);
void fingerprint_column(const BytePartition &p, const ColumnVector &src, std::span<uint32_t> out, bool parallel);
void pack(std::span<const uint32_t> values, PackedColumn &col, bool parallel);
size_t filter_packed(const PackedColumn &col, const CompiledPredicate &pred, std::span<uint32_t> sel, bool parallel);

} // namespace parachute::kernels
