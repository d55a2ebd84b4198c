#pragma once

#include "parachute/database.hpp"
#include "parachute/planner.hpp"

#include <nlohmann/json_fwd.hpp>

namespace parachute {

class CyclicError : public Error {
public:
  using Error::Error;
};

/// Tree over the query aliases; each child shares its join classes with its
/// parent (running intersection).
struct JoinTree {
  std::vector<std::string> aliases;
  /// Parent index per alias, -1 for the root.
  std::vector<int> parent;
  int root = 0;
  /// Aliases ordered so every parent precedes its children.
  std::vector<int> top_down;
};

/// GYO reduction over the hypergraph alias -> query join classes. Throws
/// CyclicError when the query is not acyclic.
JoinTree join_tree(const Query &q);

/// Non-dangling rows per alias: rows that take part in at least one result of
/// the full join after base predicates.
struct OracleSets {
  std::string query_id;
  std::map<std::string, std::vector<uint32_t>> rows;
  std::map<std::string, size_t> table_rows;
};

/// Yannakakis semi-join phase: base filters, then bottom-up and top-down
/// semi-joins along join_tree(q). Parachute predicates are ignored.
OracleSets semijoin_reduce(const Database &db, const Query &q);

/// Rows of `alias` that pass its base predicates and local key checks.
std::vector<uint32_t> filter_rows(const Database &db, const Query &q, std::string_view alias);

/// oracle ⊆ emitted for every alias. `full` reports emitted == oracle.
bool verify_no_false_negatives(const std::map<std::string, std::vector<uint32_t>> &emitted, const OracleSets &oracle,
                               bool *full = nullptr);

void to_json(nlohmann::json &j, const OracleSets &o);
OracleSets oracle_sets_from_json(const nlohmann::json &j);

} // namespace parachute
