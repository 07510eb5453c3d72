#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "wikivoc/catgraph.hpp"
#include "wikivoc/common.hpp"
#include "wikivoc/keyphrase.hpp"
#include "wikivoc/prune.hpp"

namespace wikivoc::vocab {

struct VocabCategory {
  std::string title;
  std::uint32_t level = 0;
  std::vector<std::string> parents;  // in-vocabulary, sorted
  bool core = false;
};

struct VocabPage {
  std::string title;
  bool canonical = true;  // false for redirect aliases
  std::vector<std::string> categories;  // sorted, non-empty
};

struct Vocabulary {
  std::vector<VocabCategory> categories;  // sorted by (level, title)
  std::vector<VocabPage> pages;           // sorted by title
  // metadata
  std::vector<std::string> seeds;
  std::map<std::string, std::uint64_t> stage_counts;
  std::string config_hash;  // pipeline config fingerprint, hex
  std::uint32_t core_max_level = 7;
  std::uint64_t redirect_aliases = 0;
  std::uint64_t dropped_redirects = 0;  // chain too long or target missing
  std::uint64_t pruned_unigrams = 0;

  const VocabCategory* find_category(const std::string& title) const;
  const VocabPage* find_page(const std::string& title) const;

  // pages -> categories, non-seed categories -> >= 1 in-vocab parent,
  // unique titles, core flag consistent with core_max_level.
  void check_invariants() const;
};

// Attaches every page linked to a surviving category; redirect aliases
// resolve through chains up to `redirect_bound` hops and join their
// target's category set as non-canonical entries. Longer chains and
// aliases of missing targets are dropped (counted).
Vocabulary attach_pages(const graph::Subtree& st, const graph::CategoryGraph& g,
                        std::uint32_t core_max_level = 7,
                        std::uint32_t redirect_bound = 5);

// Re-flags categories: core == (level <= core_max_level). A page is core
// iff it links to at least one core category (derived, used in counts).
void split_core_ancillary(Vocabulary& v, std::uint32_t core_max_level);

bool page_is_core(const Vocabulary& v, const VocabPage& page);

struct CoreCounts {
  std::uint64_t core_categories = 0;
  std::uint64_t ancillary_categories = 0;
  std::uint64_t core_pages = 0;
  std::uint64_t ancillary_pages = 0;
  double core_term_fraction = 0.0;  // of categories + pages
};

CoreCounts core_counts(const Vocabulary& v);

// Removes single-token page terms whose lemma is not covered by the
// reference union. Categories are untouched.
void prune_unigrams(Vocabulary& v, const std::vector<prune::ReferenceTermList>& refs);

// ---- cross-vocabulary statistics -------------------------------------------

struct NamedTermSet {
  std::string name;
  std::unordered_set<std::string> terms;  // lemmatized
};

struct VennRegion {
  std::vector<std::string> members;  // names of the sets in the region
  std::uint64_t count = 0;
};

struct VocabStats {
  std::vector<VennRegion> regions;               // all non-empty subsets
  std::map<std::string, double> mean_exclusive_token_length;
  std::map<std::string, std::uint64_t> set_sizes;
  std::map<std::uint32_t, std::uint64_t> categories_per_level;  // ours only
  std::map<std::uint32_t, std::uint64_t> terms_per_level;
};

// Venn region cardinalities for 2 or 3 term sets plus mean token length of
// each set's exclusive terms. Level histograms are filled when `leveled`
// is provided (a page's level is the minimum over its categories).
VocabStats compare_vocabs(const std::vector<NamedTermSet>& sets,
                          const Vocabulary* leveled = nullptr);

// Distinct lemmatized terms of the vocabulary (categories + pages).
std::unordered_set<std::string> vocabulary_lemmas(const Vocabulary& v);

// term -> categories index for abstract tagging (pages map to their
// categories; category titles map to themselves).
keyphrase::TermCategoryIndex build_term_index(const Vocabulary& v);

// All term strings of the vocabulary (for lexicon compilation).
std::vector<std::string> vocabulary_terms(const Vocabulary& v);

// ---- persistence ------------------------------------------------------------
// Directory layout: categories.tsv, pages.tsv, links.tsv, meta.json.
// load(save(v)) == v field-for-field; referential integrity is validated
// on load with the offending title named.

void save_vocab(const Vocabulary& v, const std::string& dir);
Vocabulary load_vocab(const std::string& dir);

}  // namespace wikivoc::vocab
