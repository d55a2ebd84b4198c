#include "parachute/kernels.hpp"

#include <omp.h>

namespace parachute::kernels {

namespace {

inline uint32_t partner_of(const KeyIndex &pk, const ColumnVector &fk, size_t row) {
  return fk.is_null(row) ? kNullKey : pk.find(fk.get_int(row));
}

inline uint32_t bin_of(const EquiDepthHistogram &h, const ColumnVector &src, size_t row) {
  if (src.is_null(row))
    return h.bin_null();
  return src.type() == LogicalType::Int64 ? h.bin(src.get_int(row)) : h.bin(std::string_view(src.get_string(row)));
}

inline uint32_t fp_of(const BytePartition &p, const ColumnVector &src, size_t row) {
  return src.is_null(row) ? 0u : static_cast<uint32_t>(fingerprint(p, src.get_string(row)).mask);
}

auto signed_size(size_t n) { return static_cast<std::ptrdiff_t>(n); }

} // namespace

void lookup_partners_serial(const KeyIndex &pk, const ColumnVector &fk, size_t begin, std::span<uint32_t> out) {
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = partner_of(pk, fk, begin + i);
}

void lookup_partners_parallel(const KeyIndex &pk, const ColumnVector &fk, size_t begin, std::span<uint32_t> out) {
  const auto n = signed_size(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    out[static_cast<size_t>(i)] = partner_of(pk, fk, begin + static_cast<size_t>(i));
}

void encode_bins_serial(const EquiDepthHistogram &h, const ColumnVector &src, std::span<uint32_t> out) {
  for (size_t r = 0; r < src.size(); ++r)
    out[r] = bin_of(h, src, r);
}

void encode_bins_parallel(const EquiDepthHistogram &h, const ColumnVector &src, std::span<uint32_t> out) {
  // bin() throws on kind mismatch or NULL without NULL bin; exceptions must
  // not escape the parallel region, so check once up front.
  if ((src.type() == LogicalType::Int64) != (h.kind() == HistogramKind::Numeric))
    throw ValidationError("histogram kind does not match column type");
  if (src.has_nulls())
    (void)h.bin_null();
  const auto n = signed_size(src.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < n; ++r)
    out[static_cast<size_t>(r)] = bin_of(h, src, static_cast<size_t>(r));
}

void fingerprint_column_serial(const BytePartition &p, const ColumnVector &src, std::span<uint32_t> out) {
  for (size_t r = 0; r < src.size(); ++r)
    out[r] = fp_of(p, src, r);
}

void fingerprint_column_parallel(const BytePartition &p, const ColumnVector &src, std::span<uint32_t> out) {
  const auto n = signed_size(src.size());
#pragma omp parallel for schedule(dynamic, 4096)
  for (std::ptrdiff_t r = 0; r < n; ++r)
    out[static_cast<size_t>(r)] = fp_of(p, src, static_cast<size_t>(r));
}

void pack_serial(std::span<const uint32_t> values, PackedColumn &col) {
  for (size_t r = 0; r < values.size(); ++r)
    col.set(r, values[r]);
}

void pack_parallel(std::span<const uint32_t> values, PackedColumn &col) {
  if (values.size() != col.size()) {
    pack_serial(values, col);
    return;
  }
  constexpr size_t kChunk = 64 * 64;
  const auto chunks = signed_size((values.size() + kChunk - 1) / kChunk);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < chunks; ++c) {
    const size_t first = static_cast<size_t>(c) * kChunk;
    col.pack_chunk(first, values.data() + first, std::min(kChunk, values.size() - first));
  }
}

size_t filter_packed_serial(const PackedColumn &col, const CompiledPredicate &pred, std::span<uint32_t> sel) {
  size_t kept = 0;
  for (uint32_t row : sel) {
    sel[kept] = row;
    kept += pred.test(col.get(row)) ? 1 : 0;
  }
  return kept;
}

size_t filter_packed_parallel(const PackedColumn &col, const CompiledPredicate &pred, std::span<uint32_t> sel) {
  const int threads = omp_get_max_threads();
  std::vector<std::vector<uint32_t>> parts(static_cast<size_t>(threads));
  const size_t n = sel.size();
#pragma omp parallel num_threads(threads)
  {
    const auto t = static_cast<size_t>(omp_get_thread_num());
    const size_t lo = n * t / static_cast<size_t>(threads);
    const size_t hi = n * (t + 1) / static_cast<size_t>(threads);
    auto &part = parts[t];
    part.reserve(hi - lo);
    for (size_t i = lo; i < hi; ++i)
      if (pred.test(col.get(sel[i])))
        part.push_back(sel[i]);
  }
  size_t kept = 0;
  for (const auto &part : parts) {
    std::copy(part.begin(), part.end(), sel.begin() + signed_size(kept));
    kept += part.size();
  }
  return kept;
}

void lookup_partners(const KeyIndex &pk, const ColumnVector &fk, size_t begin, std::span<uint32_t> out, bool parallel) {
  if (parallel && out.size() >= kParallelThreshold)
    lookup_partners_parallel(pk, fk, begin, out);
  else
    lookup_partners_serial(pk, fk, begin, out);
}

void encode_bins(const EquiDepthHistogram &h, const ColumnVector &src, std::span<uint32_t> out, bool parallel) {
  if (parallel && src.size() >= kParallelThreshold)
    encode_bins_parallel(h, src, out);
  else
    encode_bins_serial(h, src, out);
}

void fingerprint_column(const BytePartition &p, const ColumnVector &src, std::span<uint32_t> out, bool parallel) {
  if (parallel && src.size() >= kParallelThreshold)
    fingerprint_column_parallel(p, src, out);
  else
    fingerprint_column_serial(p, src, out);
}

void pack(std::span<const uint32_t> values, PackedColumn &col, bool parallel) {
  if (parallel && values.size() >= kParallelThreshold)
    pack_parallel(values, col);
  else
    pack_serial(values, col);
}

size_t filter_packed(const PackedColumn &col, const CompiledPredicate &pred, std::span<uint32_t> sel, bool parallel) {
  if (parallel && sel.size() >= kParallelThreshold)
    return filter_packed_parallel(col, pred, sel);
  return filter_packed_serial(col, pred, sel);
}

} // namespace parachute::kernels
