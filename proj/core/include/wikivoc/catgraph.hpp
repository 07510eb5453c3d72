#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "wikivoc/common.hpp"
#include "wikivoc/ingest.hpp"

namespace wikivoc::graph {

using CatId = std::uint32_t;
using PageId = std::uint32_t;
constexpr CatId kNoCat = 0xFFFFFFFFu;

// Immutable after build. parent_links/child_links are exact transposes;
// cycles are allowed and expected.
struct CategoryGraph {
  std::vector<std::string> category_titles;             // CatId -> title
  std::unordered_map<std::string, CatId> category_ids;  // title -> CatId
  std::vector<std::vector<CatId>> parent_links;         // child -> parents
  std::vector<std::vector<CatId>> child_links;          // parent -> children
  std::vector<std::string> page_titles;                 // PageId -> title
  std::unordered_map<std::string, PageId> page_ids;
  std::vector<std::vector<PageId>> page_links;          // category -> pages
  std::unordered_map<std::string, std::string> redirects;  // alias -> canonical

  std::size_t category_count() const { return category_titles.size(); }
  std::size_t page_count() const { return page_titles.size(); }
  CatId category_id(const std::string& normalized_title) const;

  // Every id in any link list exists; both link directions agree.
  void check_invariants() const;
};

struct LoadSummary {
  std::uint64_t categories = 0;
  std::uint64_t pages = 0;
  std::uint64_t category_edges = 0;
  std::uint64_t page_link_edges = 0;
  std::uint64_t redirect_entries = 0;
  std::uint64_t duplicate_edges = 0;
  std::uint64_t self_loops_dropped = 0;
  std::uint64_t unknown_title_links = 0;  // dump inconsistencies, skipped
  std::uint64_t invalid_titles = 0;       // empty after normalization
};

// Two-phase: feed every title-defining record, then edges. Links that
// reference unknown titles are counted and skipped, not fatal (real dumps
// are inconsistent).
class GraphBuilder {
public:
  // Normalizes and registers; duplicates collapse to the first id.
  void add_category(std::string_view raw_title);
  void add_page(std::string_view raw_title);
  void add_category_edge(std::string_view child_raw, std::string_view parent_raw);
  void add_page_link(std::string_view page_raw, std::string_view category_raw);
  void add_redirect(std::string_view alias_raw, std::string_view canonical_raw);

  // Dispatch on record shape: titles TSV rows register categories (ns 14)
  // or pages (ns 0); cat_edges / cat_pages / redirects rows add links.
  void consume_tsv(const ingest::RawRecord& rec, ingest::TsvKind kind);

  // MediaWiki SQL rows. `page` rows must be consumed before `categorylinks`
  // rows (cl_from is a page id).
  void consume_sql(const ingest::RawRecord& rec);

  CategoryGraph finish(LoadSummary& summary);

private:
  CatId intern_category(std::string_view raw, bool create);
  PageId intern_page(std::string_view raw, bool create);

  CategoryGraph g_;
  LoadSummary sum_;
  std::unordered_map<std::uint64_t, std::string> sql_page_title_by_id_;
  std::unordered_map<std::uint64_t, int> sql_page_ns_by_id_;
};

// The stage that admitted / last touched a member.
enum class StageTag : std::uint8_t { bfs, manual, community, classifier, rule };
const char* stage_tag_name(StageTag t);
StageTag stage_tag_from_name(std::string_view name);

// The evolving domain subtree: members with BFS levels (seed = 1) and
// per-member provenance.
struct Subtree {
  std::vector<CatId> seeds;                       // input order
  std::vector<bool> member;                       // indexed by CatId
  std::vector<std::uint32_t> level;               // 0 = not a member
  std::vector<StageTag> provenance;
  std::size_t member_count = 0;

  bool contains(CatId c) const { return c < member.size() && member[c]; }
  std::vector<CatId> members_sorted() const;      // ascending CatId
  void check_invariants(const CategoryGraph& g) const;
};

// Breadth-first closure of the seeds over child links, cycle-safe. A node
// first reached at depth d gets level d; revisits are never re-enqueued.
// Unknown seed titles raise DataError naming the title.
Subtree bfs_subtree(const CategoryGraph& g, const std::vector<std::string>& seed_titles);

enum class PruneMode { reachability, strict_children };

struct PruneStats {
  std::uint64_t removed_direct = 0;      // requested (plus strict children)
  std::uint64_t removed_propagated = 0;  // lost reachability
  std::uint64_t remaining = 0;
};

// Removes `removed` from the subtree.
//   reachability:     survivors = members still reachable from seeds
//                     through surviving members only.
//   strict_children:  children of removed members are removed too, even if
//                     otherwise reachable, recursively, then reachability
//                     re-applies.
// Seeds may not be removed (DataError); seeds are also exempt from the
// strict-children expansion since they anchor the subtree, as are ids in
// `closure_exempt` (e.g. members a human explicitly labeled relevant).
// Levels are recomputed on the surviving induced subgraph. Survivors are
// re-tagged with `tag`.
Subtree prune_unreachable(const Subtree& st, const CategoryGraph& g,
                          const std::vector<CatId>& removed, PruneMode mode,
                          StageTag tag, PruneStats* stats = nullptr,
                          const std::vector<CatId>* closure_exempt = nullptr);

// Snapshot TSV (bit-exact): `title<TAB>level<TAB>stage_tag`, sorted by
// (level, title).
std::string subtree_to_snapshot(const Subtree& st, const CategoryGraph& g);
Subtree subtree_from_snapshot(const CategoryGraph& g, std::string_view text,
                              const std::vector<std::string>& seed_titles);

// Diagnostic for the level-assignment ambiguity: per member, the maximum
// over in-subtree parents of level(parent)+1, compared to the BFS level.
std::vector<std::uint32_t> max_parent_levels(const Subtree& st, const CategoryGraph& g);

}  // namespace wikivoc::graph
