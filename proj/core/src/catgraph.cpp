#include "wikivoc/catgraph.hpp"

#include <algorithm>
#include <charconv>
#include <deque>

#include "wikivoc/text.hpp"

namespace wikivoc::graph {

CatId CategoryGraph::category_id(const std::string& normalized_title) const {
  auto it = category_ids.find(normalized_title);
  return it == category_ids.end() ? kNoCat : it->second;
}

void CategoryGraph::check_invariants() const {
  const std::size_t n = category_count();
  if (parent_links.size() != n || child_links.size() != n || page_links.size() != n)
    throw std::logic_error("graph: link table size mismatch");
  for (CatId c = 0; c < n; ++c) {
    for (CatId p : parent_links[c]) {
      if (p >= n) throw std::logic_error("graph: parent id out of range");
      const auto& ch = child_links[p];
      if (!std::binary_search(ch.begin(), ch.end(), c))
        throw std::logic_error("graph: transpose violation");
    }
    for (CatId ch : child_links[c]) {
      const auto& pa = parent_links[ch];
      if (!std::binary_search(pa.begin(), pa.end(), c))
        throw std::logic_error("graph: transpose violation");
    }
    for (PageId p : page_links[c])
      if (p >= page_count()) throw std::logic_error("graph: page id out of range");
  }
}

// ---------------------------------------------------------------------------
// GraphBuilder

CatId GraphBuilder::intern_category(std::string_view raw, bool create) {
  std::string t = normalize_title(raw);
  if (t.empty()) {
    ++sum_.invalid_titles;
    return kNoCat;
  }
  auto it = g_.category_ids.find(t);
  if (it != g_.category_ids.end()) return it->second;
  if (!create) return kNoCat;
  CatId id = static_cast<CatId>(g_.category_titles.size());
  g_.category_ids.emplace(t, id);
  g_.category_titles.push_back(std::move(t));
  g_.parent_links.emplace_back();
  g_.child_links.emplace_back();
  g_.page_links.emplace_back();
  return id;
}

PageId GraphBuilder::intern_page(std::string_view raw, bool create) {
  std::string t = normalize_title(raw);
  if (t.empty()) {
    ++sum_.invalid_titles;
    return kNoCat;
  }
  auto it = g_.page_ids.find(t);
  if (it != g_.page_ids.end()) return it->second;
  if (!create) return kNoCat;
  PageId id = static_cast<PageId>(g_.page_titles.size());
  g_.page_ids.emplace(t, id);
  g_.page_titles.push_back(std::move(t));
  return id;
}

void GraphBuilder::add_category(std::string_view raw) { intern_category(raw, true); }
void GraphBuilder::add_page(std::string_view raw) { intern_page(raw, true); }

void GraphBuilder::add_category_edge(std::string_view child_raw,
                                     std::string_view parent_raw) {
  CatId child = intern_category(child_raw, false);
  CatId parent = intern_category(parent_raw, false);
  if (child == kNoCat || parent == kNoCat) {
    ++sum_.unknown_title_links;
    return;
  }
  if (child == parent) {
    ++sum_.self_loops_dropped;
    return;
  }
  g_.parent_links[child].push_back(parent);
  g_.child_links[parent].push_back(child);
  ++sum_.category_edges;
}

void GraphBuilder::add_page_link(std::string_view page_raw,
                                 std::string_view category_raw) {
  PageId page = intern_page(page_raw, false);
  CatId cat = intern_category(category_raw, false);
  if (page == kNoCat || cat == kNoCat) {
    ++sum_.unknown_title_links;
    return;
  }
  g_.page_links[cat].push_back(page);
  ++sum_.page_link_edges;
}

void GraphBuilder::add_redirect(std::string_view alias_raw,
                                std::string_view canonical_raw) {
  std::string alias = normalize_title(alias_raw);
  std::string canonical = normalize_title(canonical_raw);
  if (alias.empty() || canonical.empty()) {
    ++sum_.invalid_titles;
    return;
  }
  if (alias == canonical) return;
  g_.redirects.emplace(std::move(alias), std::move(canonical));
  ++sum_.redirect_entries;
}

void GraphBuilder::consume_tsv(const ingest::RawRecord& rec, ingest::TsvKind kind) {
  using ingest::TsvKind;
  switch (kind) {
    case TsvKind::titles: {
      int ns = 0;
      const std::string& s = rec.columns[2];
      std::from_chars(s.data(), s.data() + s.size(), ns);
      if (ns == 14)
        add_category(rec.columns[1]);
      else if (ns == 0)
        add_page(rec.columns[1]);
      // other namespaces ignored
      break;
    }
    case TsvKind::cat_edges:
      add_category_edge(rec.columns[0], rec.columns[1]);
      break;
    case TsvKind::cat_pages:
      add_page_link(rec.columns[0], rec.columns[1]);
      break;
    case TsvKind::redirects:
      add_redirect(rec.columns[0], rec.columns[1]);
      break;
  }
}

void GraphBuilder::consume_sql(const ingest::RawRecord& rec) {
  using ingest::Table;
  switch (rec.table) {
    case Table::category:
      // (cat_id, cat_title, cat_pages, cat_subcats, cat_files)
      add_category(rec.columns[1]);
      break;
    case Table::page: {
      // (page_id, page_namespace, page_title, ...)
      std::uint64_t id = 0;
      int ns = 0;
      const std::string& ids = rec.columns[0];
      const std::string& nss = rec.columns[1];
      std::from_chars(ids.data(), ids.data() + ids.size(), id);
      std::from_chars(nss.data(), nss.data() + nss.size(), ns);
      sql_page_title_by_id_[id] = rec.columns[2];
      sql_page_ns_by_id_[id] = ns;
      if (ns == 14)
        add_category(rec.columns[2]);
      else if (ns == 0)
        add_page(rec.columns[2]);
      break;
    }
    case Table::categorylinks: {
      // (cl_from, cl_to, cl_sortkey, cl_timestamp, cl_sortkey_prefix,
      //  cl_collation, cl_type); cl_from is a page id, cl_to a category title.
      std::uint64_t from = 0;
      const std::string& fs = rec.columns[0];
      std::from_chars(fs.data(), fs.data() + fs.size(), from);
      auto it = sql_page_title_by_id_.find(from);
      if (it == sql_page_title_by_id_.end()) {
        ++sum_.unknown_title_links;
        return;
      }
      const std::string& type = rec.columns[6];
      if (type == "subcat")
        add_category_edge(it->second, rec.columns[1]);
      else if (type == "page")
        add_page_link(it->second, rec.columns[1]);
      // "file" links ignored
      break;
    }
  }
}

namespace {
void dedup_links(std::vector<std::vector<CatId>>& links, std::uint64_t& dups) {
  for (auto& v : links) {
    std::sort(v.begin(), v.end());
    auto last = std::unique(v.begin(), v.end());
    dups += static_cast<std::uint64_t>(v.end() - last);
    v.erase(last, v.end());
    v.shrink_to_fit();
  }
}
}  // namespace

CategoryGraph GraphBuilder::finish(LoadSummary& summary) {
  dedup_links(g_.parent_links, sum_.duplicate_edges);
  std::uint64_t child_dups = 0;
  dedup_links(g_.child_links, child_dups);
  dedup_links(g_.page_links, sum_.duplicate_edges);
  sum_.categories = g_.category_count();
  sum_.pages = g_.page_count();
  summary = sum_;
  sql_page_title_by_id_.clear();
  sql_page_ns_by_id_.clear();
  return std::move(g_);
}

// ---------------------------------------------------------------------------
// Subtree

const char* stage_tag_name(StageTag t) {
  switch (t) {
    case StageTag::bfs: return "bfs";
    case StageTag::manual: return "manual";
    case StageTag::community: return "community";
    case StageTag::classifier: return "classifier";
    case StageTag::rule: return "rule";
  }
  return "?";
}

StageTag stage_tag_from_name(std::string_view name) {
  if (name == "bfs") return StageTag::bfs;
  if (name == "manual") return StageTag::manual;
  if (name == "community") return StageTag::community;
  if (name == "classifier") return StageTag::classifier;
  if (name == "rule") return StageTag::rule;
  throw DataError("unknown stage tag: " + std::string(name));
}

std::vector<CatId> Subtree::members_sorted() const {
  std::vector<CatId> out;
  out.reserve(member_count);
  for (CatId c = 0; c < member.size(); ++c)
    if (member[c]) out.push_back(c);
  return out;
}

void Subtree::check_invariants(const CategoryGraph& g) const {
  const std::size_t n = g.category_count();
  if (member.size() != n || level.size() != n || provenance.size() != n)
    throw std::logic_error("subtree: table size mismatch");
  for (CatId s : seeds) {
    if (!contains(s)) throw std::logic_error("subtree: seed not a member");
    if (level[s] != 1) throw std::logic_error("subtree: seed level != 1");
  }
  // Recompute BFS levels over member-internal edges; they must agree.
  std::vector<std::uint32_t> expect(n, 0);
  std::deque<CatId> queue;
  for (CatId s : seeds) {
    if (expect[s] == 0) {
      expect[s] = 1;
      queue.push_back(s);
    }
  }
  std::size_t seen = 0;
  while (!queue.empty()) {
    CatId u = queue.front();
    queue.pop_front();
    ++seen;
    for (CatId v : g.child_links[u]) {
      if (member[v] && expect[v] == 0) {
        expect[v] = expect[u] + 1;
        queue.push_back(v);
      }
    }
  }
  if (seen != member_count)
    throw std::logic_error("subtree: member unreachable from seeds");
  for (CatId c = 0; c < n; ++c) {
    if (member[c] != (expect[c] != 0))
      throw std::logic_error("subtree: membership mismatch");
    if (member[c] && level[c] != expect[c])
      throw std::logic_error("subtree: level mismatch");
  }
}

Subtree bfs_subtree(const CategoryGraph& g,
                    const std::vector<std::string>& seed_titles) {
  Subtree st;
  const std::size_t n = g.category_count();
  st.member.assign(n, false);
  st.level.assign(n, 0);
  st.provenance.assign(n, StageTag::bfs);

  for (const std::string& raw : seed_titles) {
    std::string t = normalize_title(raw);
    CatId id = g.category_id(t);
    if (id == kNoCat) throw DataError("unknown seed title: '" + t + "'");
    if (std::find(st.seeds.begin(), st.seeds.end(), id) == st.seeds.end())
      st.seeds.push_back(id);
  }

  std::deque<CatId> queue;
  for (CatId s : st.seeds) {
    if (!st.member[s]) {
      st.member[s] = true;
      st.level[s] = 1;
      ++st.member_count;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    CatId u = queue.front();
    queue.pop_front();
    for (CatId v : g.child_links[u]) {
      if (!st.member[v]) {  // dedup: never re-enqueued, cycles terminate
        st.member[v] = true;
        st.level[v] = st.level[u] + 1;
        ++st.member_count;
        queue.push_back(v);
      }
    }
  }
  return st;
}

Subtree prune_unreachable(const Subtree& st, const CategoryGraph& g,
                          const std::vector<CatId>& removed, PruneMode mode,
                          StageTag tag, PruneStats* stats,
                          const std::vector<CatId>* closure_exempt) {
  const std::size_t n = g.category_count();
  std::vector<bool> drop(n, false);
  std::uint64_t requested = 0;
  for (CatId c : removed) {
    if (!st.contains(c))
      throw DataError("prune: id " + std::to_string(c) + " is not a member");
    for (CatId s : st.seeds)
      if (s == c)
        throw DataError("prune: cannot remove seed '" + g.category_titles[c] + "'");
    if (!drop[c]) {
      drop[c] = true;
      ++requested;
    }
  }

  if (mode == PruneMode::strict_children) {
    // Downward closure: every member child of a removed member is removed
    // too, recursively, even if otherwise reachable. Seeds and explicitly
    // exempted members anchor their subtrees.
    std::vector<bool> exempt(n, false);
    for (CatId s : st.seeds) exempt[s] = true;
    if (closure_exempt)
      for (CatId c : *closure_exempt)
        if (c < n) exempt[c] = true;
    std::deque<CatId> frontier(removed.begin(), removed.end());
    while (!frontier.empty()) {
      CatId c = frontier.front();
      frontier.pop_front();
      for (CatId ch : g.child_links[c]) {
        if (!st.contains(ch) || drop[ch] || exempt[ch]) continue;
        drop[ch] = true;
        ++requested;
        frontier.push_back(ch);
      }
    }
  }

  Subtree out;
  out.seeds = st.seeds;
  out.member.assign(n, false);
  out.level.assign(n, 0);
  out.provenance = st.provenance;

  std::deque<CatId> queue;
  for (CatId s : out.seeds) {
    out.member[s] = true;
    out.level[s] = 1;
    ++out.member_count;
    queue.push_back(s);
  }
  while (!queue.empty()) {
    CatId u = queue.front();
    queue.pop_front();
    for (CatId v : g.child_links[u]) {
      if (st.member[v] && !drop[v] && !out.member[v]) {
        out.member[v] = true;
        out.level[v] = out.level[u] + 1;
        ++out.member_count;
        queue.push_back(v);
      }
    }
  }
  for (CatId c = 0; c < n; ++c)
    if (out.member[c]) out.provenance[c] = tag;

  if (stats) {
    stats->removed_direct = requested;
    stats->removed_propagated = st.member_count - out.member_count - requested;
    stats->remaining = out.member_count;
  }
  return out;
}

std::string subtree_to_snapshot(const Subtree& st, const CategoryGraph& g) {
  struct Row {
    std::uint32_t level;
    const std::string* title;
    StageTag tag;
  };
  std::vector<Row> rows;
  rows.reserve(st.member_count);
  for (CatId c = 0; c < st.member.size(); ++c)
    if (st.member[c])
      rows.push_back(Row{st.level[c], &g.category_titles[c], st.provenance[c]});
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.level != b.level) return a.level < b.level;
    return *a.title < *b.title;
  });
  std::string out;
  for (const Row& r : rows) {
    out += *r.title;
    out.push_back('\t');
    out += std::to_string(r.level);
    out.push_back('\t');
    out += stage_tag_name(r.tag);
    out.push_back('\n');
  }
  return out;
}

Subtree subtree_from_snapshot(const CategoryGraph& g, std::string_view text,
                              const std::vector<std::string>& seed_titles) {
  Subtree st;
  const std::size_t n = g.category_count();
  st.member.assign(n, false);
  st.level.assign(n, 0);
  st.provenance.assign(n, StageTag::bfs);
  std::size_t start = 0;
  std::uint64_t line_no = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::size_t t1 = line.find('\t');
    std::size_t t2 = t1 == std::string_view::npos ? std::string_view::npos
                                                  : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos)
      throw DataError("snapshot line " + std::to_string(line_no) +
                      ": expected 3 fields");
    std::string title(line.substr(0, t1));
    std::string_view level_s = line.substr(t1 + 1, t2 - t1 - 1);
    std::string_view tag_s = line.substr(t2 + 1);
    CatId id = g.category_id(title);
    if (id == kNoCat)
      throw DataError("snapshot references unknown category '" + title + "'");
    std::uint32_t level = 0;
    std::from_chars(level_s.data(), level_s.data() + level_s.size(), level);
    if (level == 0)
      throw DataError("snapshot line " + std::to_string(line_no) + ": bad level");
    st.member[id] = true;
    st.level[id] = level;
    st.provenance[id] = stage_tag_from_name(tag_s);
    ++st.member_count;
  }
  for (const std::string& raw : seed_titles) {
    CatId id = g.category_id(normalize_title(raw));
    if (id == kNoCat || !st.member[id])
      throw DataError("snapshot is missing seed '" + raw + "'");
    st.seeds.push_back(id);
  }
  return st;
}

std::vector<std::uint32_t> max_parent_levels(const Subtree& st,
                                             const CategoryGraph& g) {
  std::vector<std::uint32_t> out(st.level);
  for (CatId c = 0; c < st.member.size(); ++c) {
    if (!st.member[c]) continue;
    for (CatId p : g.parent_links[c])
      if (st.member[p] && st.level[p] + 1 > out[c]) out[c] = st.level[p] + 1;
  }
  return out;
}

}  // namespace wikivoc::graph
