// Serial vs OpenMP kernels over one million rows.
#include "parachute/fingerprint.hpp"
#include "parachute/kernels.hpp"

#include <benchmark/benchmark.h>
#include <random>

using namespace parachute;

namespace {

constexpr size_t kRows = 1 << 20;

struct Inputs {
  TableData pk{TableDef{"pk", {{"id", LogicalType::Int64, false}}, "id"}};
  KeyIndex index;
  ColumnVector fk{LogicalType::Int64};
  ColumnVector years{LogicalType::Int64};
  ColumnVector text{LogicalType::String};
  EquiDepthHistogram hist = EquiDepthHistogram::numeric({1950, 1970, 1985, 1995, 2003, 2010, 2016}, false);
  BytePartition part = round_robin_partition(16);
  std::vector<uint32_t> bins;
  PackedColumn packed{8, kRows};

  Inputs() {
    std::mt19937_64 rng(1);
    for (int64_t i = 0; i < 100000; ++i)
      pk.append_row({Datum{i}});
    index = KeyIndex(pk, "id", KeyMode::Strict);
    const char *alphabet = "abcdefghijklmnopqrstuvwxyz -";
    bins.resize(kRows);
    for (size_t r = 0; r < kRows; ++r) {
      fk.append_int(static_cast<int64_t>(rng() % 100000));
      years.append_int(1900 + static_cast<int64_t>(rng() % 125));
      std::string s(8 + rng() % 16, ' ');
      for (char &c : s)
        c = alphabet[rng() % 28];
      text.append_string(std::move(s));
      bins[r] = static_cast<uint32_t>(rng() % 256);
    }
    kernels::pack_serial(bins, packed);
  }
};

const Inputs &inputs() {
  static const Inputs in;
  return in;
}

template <bool Parallel> void BM_LookupPartners(benchmark::State &state) {
  const auto &in = inputs();
  std::vector<uint32_t> out(kRows);
  for (auto _ : state) {
    Parallel ? kernels::lookup_partners_parallel(in.index, in.fk, 0, out)
             : kernels::lookup_partners_serial(in.index, in.fk, 0, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * kRows));
}

template <bool Parallel> void BM_EncodeBins(benchmark::State &state) {
  const auto &in = inputs();
  std::vector<uint32_t> out(kRows);
  for (auto _ : state) {
    Parallel ? kernels::encode_bins_parallel(in.hist, in.years, out) : kernels::encode_bins_serial(in.hist, in.years, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * kRows));
}

template <bool Parallel> void BM_Fingerprint(benchmark::State &state) {
  const auto &in = inputs();
  std::vector<uint32_t> out(kRows);
  for (auto _ : state) {
    Parallel ? kernels::fingerprint_column_parallel(in.part, in.text, out)
             : kernels::fingerprint_column_serial(in.part, in.text, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * kRows));
}

template <bool Parallel> void BM_Pack(benchmark::State &state) {
  const auto &in = inputs();
  PackedColumn col(8, kRows);
  for (auto _ : state) {
    Parallel ? kernels::pack_parallel(in.bins, col) : kernels::pack_serial(in.bins, col);
    benchmark::DoNotOptimize(col.mutable_data());
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * kRows));
}

template <bool Parallel> void BM_FilterPacked(benchmark::State &state) {
  const auto &in = inputs();
  const CompiledPredicate pred(TranslatedPredicate{tpred::BinBetween{40, 90}});
  std::vector<uint32_t> all(kRows), sel(kRows);
  for (uint32_t r = 0; r < kRows; ++r)
    all[r] = r;
  for (auto _ : state) {
    sel = all;
    const size_t n = Parallel ? kernels::filter_packed_parallel(in.packed, pred, sel)
                              : kernels::filter_packed_serial(in.packed, pred, sel);
    benchmark::DoNotOptimize(n);
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * kRows));
}

} // namespace

BENCHMARK_TEMPLATE(BM_LookupPartners, false)->Name("lookup_partners/serial")->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_LookupPartners, true)->Name("lookup_partners/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_EncodeBins, false)->Name("encode_bins/serial")->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_EncodeBins, true)->Name("encode_bins/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_Fingerprint, false)->Name("fingerprint_column/serial")->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_Fingerprint, true)->Name("fingerprint_column/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_Pack, false)->Name("pack/serial")->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_Pack, true)->Name("pack/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_FilterPacked, false)->Name("filter_packed/serial")->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_FilterPacked, true)->Name("filter_packed/parallel")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
