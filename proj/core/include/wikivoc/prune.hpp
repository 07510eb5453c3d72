#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "wikivoc/catgraph.hpp"
#include "wikivoc/common.hpp"

namespace wikivoc::prune {

using graph::CatId;
using graph::CategoryGraph;
using graph::PruneMode;
using graph::PruneStats;
using graph::StageTag;
using graph::Subtree;

// title (normalized) -> relevant? Parsed from `title<TAB>relevant|irrelevant`.
struct AnnotationSet {
  std::map<std::string, bool> labels;

  static AnnotationSet parse(std::string_view text);
  static AnnotationSet load(const std::string& path);
};

// Removes members labeled irrelevant (with propagation). Every member at
// level <= max_level must be labeled; missing labels are a hard error
// listing the titles.
Subtree apply_annotations(const Subtree& st, const CategoryGraph& g,
                          const AnnotationSet& ann, std::uint32_t max_level,
                          PruneMode mode = PruneMode::reachability,
                          PruneStats* stats = nullptr);

struct CommunityAssignment {
  std::unordered_map<CatId, std::uint32_t> community_of;  // dense ids from 0
  std::uint32_t community_count = 0;
  double modularity = 0.0;
  // Modularity of the evolving partition after each aggregation level,
  // evaluated on the original projection; non-decreasing.
  std::vector<double> level_modularity;
};

struct Edge {
  std::uint32_t u = 0;
  std::uint32_t v = 0;
};

// Newman-Girvan modularity of a partition of an undirected unweighted
// graph: Q = sum_c (e_c/m - (d_c/2m)^2). Computed in exact integer
// arithmetic before one final division, so summation order cannot perturb
// the result. Self-loops contribute 2 to their node's degree.
// Throws DataError when a node is missing from the partition or m == 0.
double modularity(const std::vector<std::uint32_t>& community_of,
                  std::size_t node_count, const std::vector<Edge>& edges);

// Louvain over the undirected projection of parent-child links among
// members (multi-edges collapsed, self-loops dropped at graph build).
// Deterministic for a given (seed, resolution): node visit order is a
// seeded permutation, ties break toward the smallest community id.
// An edgeless subtree yields all-singleton communities with modularity 0.
CommunityAssignment louvain(const Subtree& st, const CategoryGraph& g,
                            double resolution = 1.0, std::uint64_t seed = 0);

// name + lemmatized terms, one per line in the file form. Lines are
// re-lemmatized on load (idempotent if already lemmas).
struct ReferenceTermList {
  std::string name;
  std::unordered_set<std::string> terms;

  static ReferenceTermList load(const std::string& name, const std::string& path);
  static ReferenceTermList from_lines(const std::string& name, std::string_view text);
};

std::unordered_set<std::string> reference_union(
    const std::vector<ReferenceTermList>& refs);

// Keeps a community iff some member's lemmatized title occurs in the
// reference union; members of dropped communities are removed with
// propagation. An empty reference union is an error (it would delete
// everything).
Subtree filter_communities(const Subtree& st, const CategoryGraph& g,
                           const CommunityAssignment& communities,
                           const std::vector<ReferenceTermList>& refs,
                           PruneMode mode = PruneMode::reachability,
                           PruneStats* stats = nullptr,
                           std::uint32_t* communities_kept = nullptr);

enum class RuleKind { title_suffix, title_prefix, title_contains, title_exact, parent_of };

const char* rule_kind_name(RuleKind k);
RuleKind rule_kind_from_name(std::string_view name);

struct Rule {
  RuleKind kind;
  std::string pattern;  // normalized title form
};

struct RuleSet {
  std::vector<Rule> rules;

  // `kind<TAB>pattern` lines; '#' comments allowed. Unknown kind or empty
  // pattern raises DataError with the line number.
  static RuleSet parse(std::string_view text);
  static RuleSet load(const std::string& path);
};

// A member matches if its title satisfies any title_* rule, or any of its
// in-subtree parents' titles equals a parent_of pattern exactly. Matches
// are removed with propagation; per-rule hit counts (overlaps counted per
// rule) are reported via `per_rule_hits`.
Subtree apply_rules(const Subtree& st, const CategoryGraph& g, const RuleSet& rules,
                    PruneMode mode = PruneMode::reachability,
                    PruneStats* stats = nullptr,
                    std::vector<std::uint64_t>* per_rule_hits = nullptr);

bool title_matches_rule(const std::string& title, const Rule& rule);

}  // namespace wikivoc::prune
