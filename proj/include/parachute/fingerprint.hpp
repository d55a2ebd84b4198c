#pragma once

#include "parachute/common.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <nlohmann/json_fwd.hpp>
#include <span>
#include <string>
#include <string_view>

namespace parachute {

/// Assignment of every byte value to one of `clusters()` clusters.
class BytePartition {
public:
  BytePartition() = default;
  /// Validates that every cluster id is < clusters and every cluster is used.
  BytePartition(std::array<uint16_t, 256> cluster_of, unsigned clusters);

  unsigned clusters() const { return clusters_; }
  unsigned cluster(uint8_t byte) const { return cluster_of_[byte]; }
  const std::array<uint16_t, 256> &cluster_of() const { return cluster_of_; }

  /// Every ASCII letter shares its cluster with its other-case twin.
  bool case_pairs_coclustered() const;

  bool operator==(const BytePartition &) const = default;

private:
  std::array<uint16_t, 256> cluster_of_{};
  unsigned clusters_ = 1;
};

/// Strategy for building byte partitions from a value sample.
class PartitionStrategy {
public:
  virtual ~PartitionStrategy() = default;
  virtual BytePartition build(std::span<const std::string> sample, unsigned clusters) const = 0;
};

/// cluster_of[b] = b mod clusters.
class RoundRobinStrategy final : public PartitionStrategy {
public:
  BytePartition build(std::span<const std::string> sample, unsigned clusters) const override;
};

BytePartition round_robin_partition(unsigned clusters);

/// Set of clusters present in a string, as a mask with bit i = cluster i.
struct Fingerprint {
  uint64_t mask = 0;
  bool operator==(const Fingerprint &) const = default;
};

/// OR of the cluster bits of every byte of `s`. Requires clusters <= 64.
Fingerprint fingerprint(const BytePartition &partition, std::string_view s);

/// Mask of the literal bytes of a LIKE pattern ('%' and '_' removed). With
/// `case_insensitive`, the masks of the lower- and upper-cased pattern are OR-ed.
Fingerprint pattern_mask(const BytePartition &partition, std::string_view pattern, bool case_insensitive);

/// True iff every cluster of `pmask` is present in `fp`.
inline bool mask_matches(Fingerprint fp, Fingerprint pmask) { return (fp.mask & pmask.mask) == pmask.mask; }

/// Renders cluster 0 first, e.g. "1010" for clusters {0, 2} of 4.
std::string fingerprint_to_string(Fingerprint fp, unsigned clusters);

void to_json(nlohmann::json &j, const BytePartition &p);
BytePartition partition_from_json(const nlohmann::json &j, unsigned clusters);

} // namespace parachute
