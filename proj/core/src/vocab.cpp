#include "wikivoc/vocab.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "wikivoc/text.hpp"

namespace wikivoc::vocab {

namespace fs = std::filesystem;

const VocabCategory* Vocabulary::find_category(const std::string& title) const {
  for (const auto& c : categories)
    if (c.title == title) return &c;
  return nullptr;
}

const VocabPage* Vocabulary::find_page(const std::string& title) const {
  auto it = std::lower_bound(pages.begin(), pages.end(), title,
                             [](const VocabPage& p, const std::string& t) {
                               return p.title < t;
                             });
  return it != pages.end() && it->title == title ? &*it : nullptr;
}

void Vocabulary::check_invariants() const {
  std::unordered_map<std::string, const VocabCategory*> by_title;
  for (const auto& c : categories) {
    if (!by_title.emplace(c.title, &c).second)
      throw DataError("vocabulary: duplicate category '" + c.title + "'");
    if (c.core != (c.level <= core_max_level))
      throw DataError("vocabulary: core flag inconsistent for '" + c.title + "'");
  }
  std::unordered_set<std::string> seed_set(seeds.begin(), seeds.end());
  for (const auto& c : categories) {
    if (seed_set.count(c.title)) continue;
    if (c.parents.empty())
      throw DataError("vocabulary: non-seed category '" + c.title +
                      "' has no in-vocabulary parent");
    for (const auto& p : c.parents)
      if (!by_title.count(p))
        throw DataError("vocabulary: category '" + c.title +
                        "' references missing parent '" + p + "'");
  }
  std::unordered_set<std::string> page_titles;
  for (const auto& p : pages) {
    if (!page_titles.insert(p.title).second)
      throw DataError("vocabulary: duplicate page '" + p.title + "'");
    if (p.categories.empty())
      throw DataError("vocabulary: page '" + p.title + "' links to no category");
    for (const auto& c : p.categories)
      if (!by_title.count(c))
        throw DataError("vocabulary: page '" + p.title +
                        "' references missing category '" + c + "'");
  }
}

Vocabulary attach_pages(const graph::Subtree& st, const graph::CategoryGraph& g,
                        std::uint32_t core_max_level, std::uint32_t redirect_bound) {
  Vocabulary v;
  v.core_max_level = core_max_level;
  for (graph::CatId s : st.seeds) v.seeds.push_back(g.category_titles[s]);

  // Categories, with in-vocabulary parents.
  for (graph::CatId c : st.members_sorted()) {
    VocabCategory vc;
    vc.title = g.category_titles[c];
    vc.level = st.level[c];
    vc.core = vc.level <= core_max_level;
    for (graph::CatId p : g.parent_links[c])
      if (st.member[p]) vc.parents.push_back(g.category_titles[p]);
    std::sort(vc.parents.begin(), vc.parents.end());
    v.categories.push_back(std::move(vc));
  }
  std::sort(v.categories.begin(), v.categories.end(),
            [](const VocabCategory& a, const VocabCategory& b) {
              if (a.level != b.level) return a.level < b.level;
              return a.title < b.title;
            });

  // Canonical pages: every page linked to a surviving category.
  std::map<std::string, std::unordered_set<std::string>> page_cats;
  for (graph::CatId c : st.members_sorted()) {
    const std::string& cat_title = g.category_titles[c];
    for (graph::PageId p : g.page_links[c])
      page_cats[g.page_titles[p]].insert(cat_title);
  }

  // Redirect aliases: resolve chains, join the target's categories.
  for (const auto& [alias, target] : g.redirects) {
    std::string cur = target;
    bool resolved = false;
    for (std::uint32_t hop = 0; hop < redirect_bound; ++hop) {
      if (page_cats.count(cur)) {
        resolved = true;
        break;
      }
      auto it = g.redirects.find(cur);
      if (it == g.redirects.end()) break;
      cur = it->second;
    }
    if (!resolved || page_cats.count(alias)) {
      ++v.dropped_redirects;
      continue;
    }
    VocabPage alias_page;
    alias_page.title = alias;
    alias_page.canonical = false;
    const auto& cats = page_cats.at(cur);
    alias_page.categories.assign(cats.begin(), cats.end());
    std::sort(alias_page.categories.begin(), alias_page.categories.end());
    v.pages.push_back(std::move(alias_page));
    ++v.redirect_aliases;
  }

  for (auto& [title, cats] : page_cats) {
    VocabPage page;
    page.title = title;
    page.canonical = true;
    page.categories.assign(cats.begin(), cats.end());
    std::sort(page.categories.begin(), page.categories.end());
    v.pages.push_back(std::move(page));
  }
  std::sort(v.pages.begin(), v.pages.end(),
            [](const VocabPage& a, const VocabPage& b) { return a.title < b.title; });
  return v;
}

void split_core_ancillary(Vocabulary& v, std::uint32_t core_max_level) {
  v.core_max_level = core_max_level;
  for (auto& c : v.categories) c.core = c.level <= core_max_level;
}

bool page_is_core(const Vocabulary& v, const VocabPage& page) {
  for (const auto& cat_title : page.categories) {
    const VocabCategory* c = v.find_category(cat_title);
    if (c && c->core) return true;
  }
  return false;
}

CoreCounts core_counts(const Vocabulary& v) {
  CoreCounts counts;
  std::unordered_map<std::string, bool> core_of;
  for (const auto& c : v.categories) {
    core_of.emplace(c.title, c.core);
    if (c.core)
      ++counts.core_categories;
    else
      ++counts.ancillary_categories;
  }
  for (const auto& p : v.pages) {
    bool core = false;
    for (const auto& cat : p.categories) {
      auto it = core_of.find(cat);
      if (it != core_of.end() && it->second) {
        core = true;
        break;
      }
    }
    if (core)
      ++counts.core_pages;
    else
      ++counts.ancillary_pages;
  }
  std::uint64_t total = v.categories.size() + v.pages.size();
  counts.core_term_fraction =
      total == 0 ? 0.0
                 : static_cast<double>(counts.core_categories + counts.core_pages) /
                       static_cast<double>(total);
  return counts;
}

void prune_unigrams(Vocabulary& v, const std::vector<prune::ReferenceTermList>& refs) {
  std::unordered_set<std::string> ref_terms = prune::reference_union(refs);
  std::uint64_t removed = 0;
  std::vector<VocabPage> kept;
  kept.reserve(v.pages.size());
  for (auto& p : v.pages) {
    if (count_tokens(p.title) == 1 &&
        !ref_terms.count(keyphrase::lemmatize_phrase(p.title))) {
      ++removed;
      continue;
    }
    kept.push_back(std::move(p));
  }
  v.pages = std::move(kept);
  v.pruned_unigrams += removed;
}

// ---------------------------------------------------------------------------
// Comparison statistics

VocabStats compare_vocabs(const std::vector<NamedTermSet>& sets,
                          const Vocabulary* leveled) {
  if (sets.size() < 2 || sets.size() > 3)
    throw ConfigError("compare_vocabs: expected 2 or 3 term sets");
  VocabStats stats;
  for (const auto& s : sets) stats.set_sizes[s.name] = s.terms.size();

  // Region of each term = bitmask of the sets containing it.
  std::unordered_map<std::string, std::uint32_t> mask_of;
  for (std::size_t i = 0; i < sets.size(); ++i)
    for (const auto& t : sets[i].terms) mask_of[t] |= (1u << i);

  std::map<std::uint32_t, std::uint64_t> region_counts;
  for (std::uint32_t mask = 1; mask < (1u << sets.size()); ++mask)
    region_counts[mask] = 0;
  for (const auto& [term, mask] : mask_of) ++region_counts[mask];

  for (const auto& [mask, count] : region_counts) {
    VennRegion region;
    for (std::size_t i = 0; i < sets.size(); ++i)
      if (mask & (1u << i)) region.members.push_back(sets[i].name);
    region.count = count;
    stats.regions.push_back(std::move(region));
  }

  for (std::size_t i = 0; i < sets.size(); ++i) {
    std::uint64_t token_sum = 0, exclusive = 0;
    for (const auto& t : sets[i].terms) {
      if (mask_of.at(t) == (1u << i)) {
        ++exclusive;
        token_sum += count_tokens(t);
      }
    }
    stats.mean_exclusive_token_length[sets[i].name] =
        exclusive == 0 ? 0.0
                       : static_cast<double>(token_sum) / static_cast<double>(exclusive);
  }

  if (leveled) {
    std::unordered_map<std::string, std::uint32_t> cat_level;
    for (const auto& c : leveled->categories) {
      ++stats.categories_per_level[c.level];
      ++stats.terms_per_level[c.level];
      cat_level.emplace(c.title, c.level);
    }
    for (const auto& p : leveled->pages) {
      std::uint32_t min_level = 0;
      for (const auto& cat : p.categories) {
        auto it = cat_level.find(cat);
        if (it != cat_level.end() && (min_level == 0 || it->second < min_level))
          min_level = it->second;
      }
      if (min_level > 0) ++stats.terms_per_level[min_level];
    }
  }
  return stats;
}

std::unordered_set<std::string> vocabulary_lemmas(const Vocabulary& v) {
  std::unordered_set<std::string> lemmas;
  for (const auto& c : v.categories) lemmas.insert(keyphrase::lemmatize_phrase(c.title));
  for (const auto& p : v.pages) lemmas.insert(keyphrase::lemmatize_phrase(p.title));
  lemmas.erase(std::string());
  return lemmas;
}

keyphrase::TermCategoryIndex build_term_index(const Vocabulary& v) {
  keyphrase::TermCategoryIndex index;
  for (const auto& c : v.categories) index[c.title].push_back(c.title);
  for (const auto& p : v.pages) {
    auto& cats = index[p.title];
    for (const auto& c : p.categories)
      if (std::find(cats.begin(), cats.end(), c) == cats.end()) cats.push_back(c);
  }
  for (auto& [term, cats] : index) std::sort(cats.begin(), cats.end());
  return index;
}

std::vector<std::string> vocabulary_terms(const Vocabulary& v) {
  std::vector<std::string> terms;
  terms.reserve(v.categories.size() + v.pages.size());
  for (const auto& c : v.categories) terms.push_back(c.title);
  for (const auto& p : v.pages) terms.push_back(p.title);
  return terms;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

constexpr int kFormatVersion = 1;

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

std::vector<std::string> split_pipes(std::string_view s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  for (;;) {
    std::size_t bar = s.find('|', start);
    if (bar == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, bar - start));
    start = bar + 1;
  }
}

std::string join_pipes(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out.push_back('|');
    out += items[i];
  }
  return out;
}

}  // namespace

void save_vocab(const Vocabulary& v, const std::string& dir) {
  fs::create_directories(dir);
  std::string cats;
  for (const auto& c : v.categories) {
    cats += c.title;
    cats.push_back('\t');
    cats += std::to_string(c.level);
    cats.push_back('\t');
    cats += c.core ? "core" : "ancillary";
    cats.push_back('\t');
    cats += join_pipes(c.parents);
    cats.push_back('\n');
  }
  write_file(fs::path(dir) / "categories.tsv", cats);

  std::string pages;
  for (const auto& p : v.pages) {
    pages += p.title;
    pages.push_back('\t');
    pages += p.canonical ? "canonical" : "alias";
    pages.push_back('\t');
    pages += join_pipes(p.categories);
    pages.push_back('\n');
  }
  write_file(fs::path(dir) / "pages.tsv", pages);

  // links.tsv: child -> parent, sorted.
  std::vector<std::pair<std::string, std::string>> links;
  for (const auto& c : v.categories)
    for (const auto& p : c.parents) links.emplace_back(c.title, p);
  std::sort(links.begin(), links.end());
  std::string links_text;
  for (const auto& [child, parent] : links) {
    links_text += child;
    links_text.push_back('\t');
    links_text += parent;
    links_text.push_back('\n');
  }
  write_file(fs::path(dir) / "links.tsv", links_text);

  nlohmann::json meta;
  meta["format_version"] = kFormatVersion;
  meta["seeds"] = v.seeds;
  meta["config_hash"] = v.config_hash;
  meta["core_max_level"] = v.core_max_level;
  meta["stage_counts"] = v.stage_counts;
  meta["redirect_aliases"] = v.redirect_aliases;
  meta["dropped_redirects"] = v.dropped_redirects;
  meta["pruned_unigrams"] = v.pruned_unigrams;
  meta["category_count"] = v.categories.size();
  meta["page_count"] = v.pages.size();
  write_file(fs::path(dir) / "meta.json", meta.dump(2) + "\n");
}

Vocabulary load_vocab(const std::string& dir) {
  Vocabulary v;
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_file(fs::path(dir) / "meta.json"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("meta.json: ") + e.what());
  }
  if (meta.value("format_version", 0) != kFormatVersion)
    throw DataError("vocabulary format version mismatch in " + dir);
  v.seeds = meta.value("seeds", std::vector<std::string>{});
  v.config_hash = meta.value("config_hash", std::string());
  v.core_max_level = meta.value<std::uint32_t>("core_max_level", 7);
  if (meta.contains("stage_counts"))
    v.stage_counts = meta["stage_counts"].get<std::map<std::string, std::uint64_t>>();
  v.redirect_aliases = meta.value<std::uint64_t>("redirect_aliases", 0);
  v.dropped_redirects = meta.value<std::uint64_t>("dropped_redirects", 0);
  v.pruned_unigrams = meta.value<std::uint64_t>("pruned_unigrams", 0);

  auto for_each_line = [](const std::string& text, auto&& fn) {
    std::size_t start = 0;
    std::uint64_t line_no = 0;
    while (start < text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string::npos) end = text.size();
      std::string_view line(text.data() + start, end - start);
      start = end + 1;
      ++line_no;
      if (line.empty()) continue;
      fn(line, line_no);
    }
  };

  std::string cats = read_file(fs::path(dir) / "categories.tsv");
  for_each_line(cats, [&](std::string_view line, std::uint64_t line_no) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      std::size_t tab = line.find('\t', start);
      if (tab == std::string_view::npos) {
        fields.emplace_back(line.substr(start));
        break;
      }
      fields.emplace_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    if (fields.size() != 4)
      throw DataError("categories.tsv line " + std::to_string(line_no) +
                      ": expected 4 fields");
    VocabCategory c;
    c.title = fields[0];
    c.level = 0;
    std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), c.level);
    if (c.level == 0)
      throw DataError("categories.tsv line " + std::to_string(line_no) +
                      ": bad level '" + fields[1] + "'");
    if (fields[2] == "core")
      c.core = true;
    else if (fields[2] == "ancillary")
      c.core = false;
    else
      throw DataError("categories.tsv line " + std::to_string(line_no) +
                      ": bad core flag '" + fields[2] + "'");
    c.parents = split_pipes(fields[3]);
    v.categories.push_back(std::move(c));
  });

  std::string pages = read_file(fs::path(dir) / "pages.tsv");
  for_each_line(pages, [&](std::string_view line, std::uint64_t line_no) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      std::size_t tab = line.find('\t', start);
      if (tab == std::string_view::npos) {
        fields.emplace_back(line.substr(start));
        break;
      }
      fields.emplace_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    if (fields.size() != 3)
      throw DataError("pages.tsv line " + std::to_string(line_no) +
                      ": expected 3 fields");
    VocabPage p;
    p.title = fields[0];
    if (fields[1] == "canonical")
      p.canonical = true;
    else if (fields[1] == "alias")
      p.canonical = false;
    else
      throw DataError("pages.tsv line " + std::to_string(line_no) +
                      ": bad kind '" + fields[1] + "'");
    p.categories = split_pipes(fields[2]);
    v.pages.push_back(std::move(p));
  });

  // Canonical order regardless of how the files were produced.
  std::sort(v.categories.begin(), v.categories.end(),
            [](const VocabCategory& a, const VocabCategory& b) {
              if (a.level != b.level) return a.level < b.level;
              return a.title < b.title;
            });
  std::sort(v.pages.begin(), v.pages.end(),
            [](const VocabPage& a, const VocabPage& b) { return a.title < b.title; });
  v.check_invariants();
  return v;
}

}  // namespace wikivoc::vocab
