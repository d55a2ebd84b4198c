#pragma once

#include "parachute/catalog.hpp"
#include "parachute/predicate.hpp"

#include <map>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>
#include <vector>

namespace parachute {

struct ColumnRef {
  std::string alias;
  std::string column;
  bool operator==(const ColumnRef &) const = default;
  auto operator<=>(const ColumnRef &) const = default;
};

std::string to_string(const ColumnRef &c);
/// Parses "alias.column".
ColumnRef column_ref_from_string(std::string_view s);

struct JoinEdge {
  ColumnRef left;
  ColumnRef right;
  bool operator==(const JoinEdge &) const = default;
  /// Same edge regardless of orientation.
  bool same_as(const JoinEdge &other) const {
    return *this == other || (left == other.right && right == other.left);
  }
};

struct Relation {
  std::string alias;
  std::string table;
  bool operator==(const Relation &) const = default;
};

struct ColumnPredicate {
  std::string column;
  BasePredicate predicate;
};

/// A translated predicate on a parachute column of the alias's table.
struct ParachutePredicate {
  DescriptorId descriptor = 0;
  std::string column;
  /// "alias.column" whose predicate was translated.
  std::string source;
  TranslatedPredicate predicate;
};

/// Binary join tree stored as a node array. Leaves name an alias; inner
/// nodes join build (left) with probe (right).
struct QueryPlan {
  struct Node {
    std::string alias; // leaves only
    int build = -1;
    int probe = -1;
    std::vector<JoinEdge> condition;
    bool is_leaf() const { return build < 0; }
  };
  std::vector<Node> nodes;
  int root = -1;

  int add_leaf(std::string alias);
  int add_join(int build, int probe, std::vector<JoinEdge> condition = {});

  /// Aliases of the subtree under `node`, left to right.
  std::vector<std::string> leaves(int node) const;
  std::vector<std::string> leaves() const { return leaves(root); }
};

struct Query {
  std::string id;
  std::vector<Relation> relations;
  std::vector<JoinEdge> joins;
  std::map<std::string, std::vector<ColumnPredicate>> predicates;
  std::map<std::string, std::vector<ParachutePredicate>> parachute_predicates;
  std::vector<ColumnRef> projection;
  std::optional<QueryPlan> plan;

  const Relation &relation(std::string_view alias) const;
  /// Position of alias in `relations`; throws LookupError.
  size_t alias_index(std::string_view alias) const;
};

/// Checks aliases, tables, columns, constant types, that every join edge
/// joins two columns of one schema attribute class, and connectivity.
void validate_query(const Query &q, const Schema &schema);

/// Equivalence classes of (alias, column) under the query's join edges.
class QueryClasses {
public:
  explicit QueryClasses(const Query &q);
  /// Class of a column, or -1 when it takes part in no join.
  int class_of(const ColumnRef &c) const;
  /// Sorted classes with a column on `alias`.
  const std::vector<int> &alias_classes(std::string_view alias) const;
  bool joinable(std::string_view a, std::string_view b) const;

private:
  std::map<ColumnRef, int> class_;
  std::map<std::string, std::vector<int>, std::less<>> by_alias_;
};

/// Fills empty join conditions with the query edges crossing build/probe and
/// checks that supplied conditions are declared edges covering every alias.
void complete_plan(QueryPlan &plan, const Query &q);

struct PipelineSet {
  std::vector<std::string> aliases;
  std::map<std::string, int, std::less<>> pipeline;
  std::map<std::string, bool, std::less<>> is_probe;
  int count = 0;
  /// less[p][q]: p's output is (transitively) materialised into q's build.
  std::vector<std::vector<bool>> less;
  /// Probe alias of every pipeline id.
  std::vector<std::string> probe_of;

  int of(std::string_view alias) const;
  bool probe(std::string_view alias) const;
};

/// Pipeline ids follow execution order: a pipeline's build inputs get
/// smaller ids.
PipelineSet decompose_pipelines(const QueryPlan &plan);

/// R ≺ S: R's pipeline runs before S's, or same pipeline with S the probe.
bool precedes(std::string_view r, std::string_view s, const PipelineSet &p);

enum class FlowMode {
  /// Probe-side filtering: R ≺ S, R ↔ S, S probe.
  Psf,
  /// Lookahead information passing: same pipeline, S probe.
  Lip,
  /// PSF that may also push to build sides: R ≺ S, R ↔ S.
  PsfBuild,
  /// Nothing flows.
  None,
};

std::string_view to_string(FlowMode m);
FlowMode flow_mode_from_string(std::string_view s);

struct FlowAnalysis {
  std::vector<std::string> aliases;
  std::vector<std::vector<bool>> direct;
  std::vector<std::vector<bool>> closure;

  size_t index(std::string_view alias) const;
  bool flows(std::string_view r, std::string_view s) const { return direct[index(r)][index(s)]; }
  bool flows_transitive(std::string_view r, std::string_view s) const { return closure[index(r)][index(s)]; }
};

bool flows(std::string_view r, std::string_view s, const PipelineSet &p, const QueryClasses &classes, FlowMode mode);

/// Direct flow matrix and its transitive closure (Warshall), irreflexive.
FlowAnalysis analyze_flows(const PipelineSet &p, const QueryClasses &classes, FlowMode mode);

/// Paths of length exactly k (k >= 1) in the direct flow relation.
std::vector<std::vector<bool>> flow_power(const FlowAnalysis &f, unsigned k);

struct BlockedPair {
  std::string source;
  std::string target;
  DescriptorId descriptor = 0;
  std::string source_column;
  std::vector<BasePredicate> predicates;
};

/// Pairs where information cannot flow from source to target although the
/// target references the source through an FK that carries a one-hop
/// parachute on a filtered source column with a translatable predicate.
/// Ordered by target pipeline id.
std::vector<BlockedPair> blocked_pairs(const Query &q, const QueryPlan &plan, const Catalog &catalog,
                                       FlowMode mode = FlowMode::Psf);

struct RewriteResult {
  Query query;
  std::vector<std::string> warnings;
  size_t injected = 0;
};

/// Conjoins the translated source predicates of every pair to the target's
/// parachute predicates. Untranslatable conjuncts are skipped with a warning.
RewriteResult drop_parachutes(const Query &q, const std::vector<BlockedPair> &pairs, const Catalog &catalog);

/// Rows per table, for greedy_plan.
using TableStats = std::map<std::string, size_t, std::less<>>;

/// Fixed selectivity assumed for one base predicate.
double predicate_selectivity(const BasePredicate &p);

/// Left-deep plan: start with the smallest estimated filtered cardinality,
/// then repeatedly probe with the smallest connected alias.
QueryPlan greedy_plan(const Query &q, const TableStats &stats);

/// Parses the compact form "((it mi_idx) t)": a pair is (build probe).
QueryPlan parse_plan(std::string_view text);

void to_json(nlohmann::json &j, const QueryPlan &plan);
QueryPlan plan_from_json(const nlohmann::json &j);
void to_json(nlohmann::json &j, const Query &q);
Query query_from_json(const nlohmann::json &j);
Query load_query(const std::string &path);
QueryPlan load_plan(const std::string &path);

} // namespace parachute
