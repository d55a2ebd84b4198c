#include "parachute/fingerprint.hpp"

#include <nlohmann/json.hpp>
#include <vector>

namespace parachute {

BytePartition::BytePartition(std::array<uint16_t, 256> cluster_of, unsigned clusters)
    : cluster_of_(cluster_of), clusters_(clusters) {
  if (clusters < 1 || clusters > 256)
    throw ValidationError("byte partition needs 1..256 clusters, got " + std::to_string(clusters));
  std::vector<bool> used(clusters, false);
  for (auto c : cluster_of_) {
    if (c >= clusters)
      throw ValidationError("byte assigned to cluster " + std::to_string(c) + " of " + std::to_string(clusters));
    used[c] = true;
  }
  for (unsigned c = 0; c < clusters; ++c)
    if (!used[c])
      throw ValidationError("cluster " + std::to_string(c) + " has no byte");
}

bool BytePartition::case_pairs_coclustered() const {
  for (int c = 'a'; c <= 'z'; ++c)
    if (cluster_of_[static_cast<size_t>(c)] != cluster_of_[static_cast<size_t>(c - 32)])
      return false;
  return true;
}

BytePartition RoundRobinStrategy::build(std::span<const std::string>, unsigned clusters) const {
  return round_robin_partition(clusters);
}

BytePartition round_robin_partition(unsigned clusters) {
  if (clusters < 1 || clusters > 256)
    throw ValidationError("round-robin partition needs 1..256 clusters, got " + std::to_string(clusters));
  std::array<uint16_t, 256> cluster_of{};
  for (unsigned b = 0; b < 256; ++b)
    cluster_of[b] = static_cast<uint16_t>(b % clusters);
  return BytePartition(cluster_of, clusters);
}

Fingerprint fingerprint(const BytePartition &partition, std::string_view s) {
  if (partition.clusters() > 64)
    throw ValidationError("fingerprints support at most 64 clusters");
  uint64_t mask = 0;
  for (char c : s)
    mask |= uint64_t{1} << partition.cluster(static_cast<uint8_t>(c));
  return {mask};
}

namespace {

std::string strip_wildcards(std::string_view pattern) {
  std::string out;
  for (char c : pattern)
    if (c != '%' && c != '_')
      out.push_back(c);
  return out;
}

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : c; }
char ascii_upper(char c) { return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 32) : c; }

} // namespace

Fingerprint pattern_mask(const BytePartition &partition, std::string_view pattern, bool case_insensitive) {
  std::string literal = strip_wildcards(pattern);
  if (!case_insensitive)
    return fingerprint(partition, literal);
  std::string lower = literal, upper = literal;
  for (auto &c : lower)
    c = ascii_lower(c);
  for (auto &c : upper)
    c = ascii_upper(c);
  return {fingerprint(partition, lower).mask | fingerprint(partition, upper).mask};
}

std::string fingerprint_to_string(Fingerprint fp, unsigned clusters) {
  std::string out;
  for (unsigned i = 0; i < clusters; ++i)
    out.push_back((fp.mask >> i) & 1 ? '1' : '0');
  return out;
}

void to_json(nlohmann::json &j, const BytePartition &p) {
  j = nlohmann::json::array();
  for (auto c : p.cluster_of())
    j.push_back(c);
}

BytePartition partition_from_json(const nlohmann::json &j, unsigned clusters) {
  if (!j.is_array() || j.size() != 256)
    throw ParseError("byte partition must be a 256-entry array");
  std::array<uint16_t, 256> cluster_of{};
  for (size_t i = 0; i < 256; ++i)
    cluster_of[i] = j[i].get<uint16_t>();
  return BytePartition(cluster_of, clusters);
}

} // namespace parachute
