#include "wikivoc/prune.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <tuple>

#include "wikivoc/keyphrase.hpp"
#include "wikivoc/text.hpp"

namespace wikivoc::prune {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

// ---------------------------------------------------------------------------
// Annotations

AnnotationSet AnnotationSet::parse(std::string_view text) {
  AnnotationSet ann;
  std::size_t start = 0;
  std::uint64_t line_no = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line[0] == '#') continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos)
      throw DataError("annotation line " + std::to_string(line_no) +
                      ": expected `title<TAB>relevant|irrelevant`");
    std::string title = normalize_title(line.substr(0, tab));
    std::string_view label = line.substr(tab + 1);
    bool relevant;
    if (label == "relevant")
      relevant = true;
    else if (label == "irrelevant")
      relevant = false;
    else
      throw DataError("annotation line " + std::to_string(line_no) +
                      ": unknown label '" + std::string(label) + "'");
    if (title.empty())
      throw DataError("annotation line " + std::to_string(line_no) + ": empty title");
    auto [it, inserted] = ann.labels.emplace(std::move(title), relevant);
    if (!inserted && it->second != relevant)
      throw DataError("annotation line " + std::to_string(line_no) +
                      ": conflicting label for '" + it->first + "'");
  }
  return ann;
}

AnnotationSet AnnotationSet::load(const std::string& path) {
  return parse(read_file(path));
}

Subtree apply_annotations(const Subtree& st, const CategoryGraph& g,
                          const AnnotationSet& ann, std::uint32_t max_level,
                          PruneMode mode, PruneStats* stats) {
  std::vector<std::string> missing;
  std::vector<CatId> removed;
  for (CatId c = 0; c < st.member.size(); ++c) {
    if (!st.member[c]) continue;
    auto it = ann.labels.find(g.category_titles[c]);
    if (st.level[c] <= max_level && it == ann.labels.end()) {
      missing.push_back(g.category_titles[c]);
      continue;
    }
    if (it != ann.labels.end() && !it->second) removed.push_back(c);
  }
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    std::string msg = "unlabeled members at level <= " + std::to_string(max_level) + ":";
    for (const std::string& t : missing) {
      msg += " '";
      msg += t;
      msg += "'";
    }
    throw DataError(msg);
  }
  return prune_unreachable(st, g, removed, mode, StageTag::manual, stats);
}

// ---------------------------------------------------------------------------
// Modularity

double modularity(const std::vector<std::uint32_t>& community_of,
                  std::size_t node_count, const std::vector<Edge>& edges) {
  if (community_of.size() != node_count)
    throw DataError("modularity: partition does not cover all nodes");
  if (edges.empty()) throw DataError("modularity: graph has no edges");

  std::uint32_t max_comm = 0;
  for (std::uint32_t c : community_of) max_comm = std::max(max_comm, c);
  std::vector<std::uint64_t> intra(max_comm + 1, 0);   // e_c
  std::vector<std::uint64_t> degree(max_comm + 1, 0);  // d_c
  for (const Edge& e : edges) {
    if (e.u >= node_count || e.v >= node_count)
      throw DataError("modularity: edge endpoint out of range");
    std::uint32_t cu = community_of[e.u];
    std::uint32_t cv = community_of[e.v];
    degree[cu] += e.u == e.v ? 2 : 1;
    if (e.u != e.v) degree[cv] += 1;
    if (cu == cv) intra[cu] += 1;
  }
  const std::uint64_t m = edges.size();
  // Q = sum_c (e_c/m - (d_c/2m)^2) = sum_c (4*m*e_c - d_c^2) / (4m^2).
  // The numerator is exact in signed 128-bit; one division at the end keeps
  // the result independent of summation order.
  __int128 numerator = 0;
  for (std::size_t c = 0; c < intra.size(); ++c) {
    numerator += static_cast<__int128>(4) * m * intra[c];
    numerator -= static_cast<__int128>(degree[c]) * degree[c];
  }
  double denom = 4.0 * static_cast<double>(m) * static_cast<double>(m);
  return static_cast<double>(numerator) / denom;
}

// ---------------------------------------------------------------------------
// Louvain

namespace {

// Undirected projection of parent-child links among members; returns dense
// node ids (position in members_sorted) and collapsed edges.
struct Projection {
  std::vector<CatId> nodes;  // dense -> CatId
  std::unordered_map<CatId, std::uint32_t> dense;
  std::vector<Edge> edges;
};

Projection project_subtree(const Subtree& st, const CategoryGraph& g) {
  Projection p;
  p.nodes = st.members_sorted();
  p.dense.reserve(p.nodes.size());
  for (std::uint32_t i = 0; i < p.nodes.size(); ++i) p.dense.emplace(p.nodes[i], i);
  for (std::uint32_t i = 0; i < p.nodes.size(); ++i) {
    CatId c = p.nodes[i];
    for (CatId parent : g.parent_links[c]) {
      auto it = p.dense.find(parent);
      if (it == p.dense.end()) continue;
      std::uint32_t j = it->second;
      if (i < j)
        p.edges.push_back(Edge{i, j});
      else if (j < i)
        p.edges.push_back(Edge{j, i});
      // i == j cannot happen: self-loops dropped at build
    }
  }
  std::sort(p.edges.begin(), p.edges.end(), [](const Edge& a, const Edge& b) {
    if (a.u != b.u) return a.u < b.u;
    return a.v < b.v;
  });
  p.edges.erase(std::unique(p.edges.begin(), p.edges.end(),
                            [](const Edge& a, const Edge& b) {
                              return a.u == b.u && a.v == b.v;
                            }),
                p.edges.end());
  return p;
}

// One aggregation level of weighted Louvain local moves.
struct LevelGraph {
  std::size_t n = 0;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> adj;  // no self here
  std::vector<double> self_loop;  // weight of u-u (counted once)
  std::vector<double> degree;     // sum of incident weights, self-loops twice
  double total_weight = 0;        // m (each edge once, self-loops once)
};

LevelGraph make_level_graph(std::size_t n,
                            const std::vector<std::tuple<std::uint32_t, std::uint32_t, double>>& edges) {
  LevelGraph lg;
  lg.n = n;
  lg.adj.resize(n);
  lg.self_loop.assign(n, 0.0);
  lg.degree.assign(n, 0.0);
  for (const auto& [u, v, w] : edges) {
    if (u == v) {
      lg.self_loop[u] += w;
      lg.degree[u] += 2 * w;
    } else {
      lg.adj[u].emplace_back(v, w);
      lg.adj[v].emplace_back(u, w);
      lg.degree[u] += w;
      lg.degree[v] += w;
    }
    lg.total_weight += w;
  }
  return lg;
}

// Local-move phase. Returns the node->community map (dense, renumbered) and
// whether anything moved.
std::pair<std::vector<std::uint32_t>, bool> louvain_one_level(
    const LevelGraph& lg, double resolution, Rng& rng) {
  const std::size_t n = lg.n;
  std::vector<std::uint32_t> comm(n);
  for (std::uint32_t i = 0; i < n; ++i) comm[i] = i;
  std::vector<double> tot(lg.degree);  // sum of degrees per community

  std::vector<std::uint32_t> order(n);
  for (std::uint32_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);

  const double m = lg.total_weight;
  bool any_move = false;
  constexpr double kEps = 1e-12;

  bool improved = true;
  while (improved) {
    improved = false;
    for (std::uint32_t u : order) {
      std::uint32_t old_comm = comm[u];
      // Weight from u to each neighboring community.
      std::unordered_map<std::uint32_t, double> link;
      link.emplace(old_comm, 0.0);
      for (const auto& [v, w] : lg.adj[u]) link[comm[v]] += w;

      tot[old_comm] -= lg.degree[u];
      double base = link[old_comm] - resolution * tot[old_comm] * lg.degree[u] / (2.0 * m);
      std::uint32_t best = old_comm;
      double best_gain = base;
      // Candidates scanned in ascending community id, and only a strict
      // improvement replaces the incumbent, so ties resolve to the
      // smallest community id.
      std::vector<std::pair<std::uint32_t, double>> cands(link.begin(), link.end());
      std::sort(cands.begin(), cands.end());
      for (const auto& [c, w] : cands) {
        if (c == old_comm) continue;
        double gain = w - resolution * tot[c] * lg.degree[u] / (2.0 * m);
        if (gain > best_gain + kEps) {
          best = c;
          best_gain = gain;
        }
      }
      tot[best] += lg.degree[u];
      if (best != old_comm) {
        comm[u] = best;
        improved = true;
        any_move = true;
      }
    }
  }

  // Renumber densely by first appearance over node order 0..n-1.
  std::unordered_map<std::uint32_t, std::uint32_t> remap;
  for (std::uint32_t i = 0; i < n; ++i) {
    auto [it, inserted] = remap.emplace(comm[i], static_cast<std::uint32_t>(remap.size()));
    comm[i] = it->second;
  }
  return {std::move(comm), any_move};
}

}  // namespace

CommunityAssignment louvain(const Subtree& st, const CategoryGraph& g,
                            double resolution, std::uint64_t seed) {
  if (st.member_count == 0) throw DataError("louvain: empty subtree");
  Projection proj = project_subtree(st, g);
  const std::size_t n = proj.nodes.size();

  CommunityAssignment result;
  if (proj.edges.empty()) {
    // n singleton communities, modularity 0 by convention.
    for (std::uint32_t i = 0; i < n; ++i) result.community_of.emplace(proj.nodes[i], i);
    result.community_count = static_cast<std::uint32_t>(n);
    result.modularity = 0.0;
    return result;
  }

  Rng rng(seed);
  // node -> community of the ORIGINAL graph, refined level by level.
  std::vector<std::uint32_t> node_comm(n);
  for (std::uint32_t i = 0; i < n; ++i) node_comm[i] = i;

  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> edges;
  edges.reserve(proj.edges.size());
  for (const Edge& e : proj.edges) edges.emplace_back(e.u, e.v, 1.0);
  std::size_t level_n = n;

  for (;;) {
    LevelGraph lg = make_level_graph(level_n, edges);
    auto [comm, moved] = louvain_one_level(lg, resolution, rng);
    if (!moved) break;
    for (std::uint32_t i = 0; i < n; ++i) node_comm[i] = comm[node_comm[i]];
    result.level_modularity.push_back(modularity(node_comm, n, proj.edges));
    // Aggregate: communities become supernodes, intra weight becomes self-loops.
    std::uint32_t next_n = 0;
    for (std::uint32_t c : comm) next_n = std::max(next_n, c + 1);
    if (next_n == level_n) break;  // nothing merged
    std::map<std::pair<std::uint32_t, std::uint32_t>, double> agg;
    for (const auto& [u, v, w] : edges) {
      std::uint32_t cu = comm[u], cv = comm[v];
      if (cu > cv) std::swap(cu, cv);
      agg[{cu, cv}] += w;
    }
    edges.clear();
    for (const auto& [key, w] : agg) edges.emplace_back(key.first, key.second, w);
    level_n = next_n;
  }

  // Canonical dense ids: first appearance over members in CatId order.
  std::unordered_map<std::uint32_t, std::uint32_t> remap;
  for (std::uint32_t i = 0; i < n; ++i) {
    auto [it, inserted] = remap.emplace(node_comm[i], static_cast<std::uint32_t>(remap.size()));
    result.community_of.emplace(proj.nodes[i], it->second);
  }
  result.community_count = static_cast<std::uint32_t>(remap.size());

  std::vector<std::uint32_t> partition(n);
  for (std::uint32_t i = 0; i < n; ++i) partition[i] = result.community_of.at(proj.nodes[i]);
  result.modularity = modularity(partition, n, proj.edges);
  return result;
}

// ---------------------------------------------------------------------------
// Reference lists and community filtering

ReferenceTermList ReferenceTermList::from_lines(const std::string& name,
                                                std::string_view text) {
  ReferenceTermList refs;
  refs.name = name;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line[0] == '#') continue;
    std::string lemma = keyphrase::lemmatize_phrase(line);
    if (!lemma.empty()) refs.terms.insert(std::move(lemma));
  }
  if (refs.terms.empty()) throw DataError("reference list '" + name + "' is empty");
  return refs;
}

ReferenceTermList ReferenceTermList::load(const std::string& name,
                                          const std::string& path) {
  return from_lines(name, read_file(path));
}

std::unordered_set<std::string> reference_union(
    const std::vector<ReferenceTermList>& refs) {
  std::unordered_set<std::string> all;
  for (const auto& r : refs) all.insert(r.terms.begin(), r.terms.end());
  return all;
}

Subtree filter_communities(const Subtree& st, const CategoryGraph& g,
                           const CommunityAssignment& communities,
                           const std::vector<ReferenceTermList>& refs,
                           PruneMode mode, PruneStats* stats,
                           std::uint32_t* communities_kept) {
  std::unordered_set<std::string> ref_terms = reference_union(refs);
  if (ref_terms.empty())
    throw DataError("filter_communities: empty reference union would delete everything");

  std::vector<bool> keep(communities.community_count, false);
  for (CatId c = 0; c < st.member.size(); ++c) {
    if (!st.member[c]) continue;
    auto it = communities.community_of.find(c);
    if (it == communities.community_of.end())
      throw DataError("filter_communities: member '" + g.category_titles[c] +
                      "' has no community");
    if (keep[it->second]) continue;
    if (ref_terms.count(keyphrase::lemmatize_phrase(g.category_titles[c])))
      keep[it->second] = true;
  }

  std::vector<CatId> removed;
  for (CatId c = 0; c < st.member.size(); ++c) {
    if (!st.member[c]) continue;
    if (!keep[communities.community_of.at(c)]) removed.push_back(c);
  }
  if (communities_kept) {
    std::uint32_t kept = 0;
    for (bool b : keep)
      if (b) ++kept;
    *communities_kept = kept;
  }
  return prune_unreachable(st, g, removed, mode, StageTag::community, stats);
}

// ---------------------------------------------------------------------------
// Rules

const char* rule_kind_name(RuleKind k) {
  switch (k) {
    case RuleKind::title_suffix: return "title_suffix";
    case RuleKind::title_prefix: return "title_prefix";
    case RuleKind::title_contains: return "title_contains";
    case RuleKind::title_exact: return "title_exact";
    case RuleKind::parent_of: return "parent_of";
  }
  return "?";
}

RuleKind rule_kind_from_name(std::string_view name) {
  if (name == "title_suffix") return RuleKind::title_suffix;
  if (name == "title_prefix") return RuleKind::title_prefix;
  if (name == "title_contains") return RuleKind::title_contains;
  if (name == "title_exact") return RuleKind::title_exact;
  if (name == "parent_of") return RuleKind::parent_of;
  throw DataError("unknown rule kind: '" + std::string(name) + "'");
}

RuleSet RuleSet::parse(std::string_view text) {
  RuleSet rs;
  std::size_t start = 0;
  std::uint64_t line_no = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line[0] == '#') continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos)
      throw DataError("rule line " + std::to_string(line_no) +
                      ": expected `kind<TAB>pattern`");
    RuleKind kind;
    try {
      kind = rule_kind_from_name(line.substr(0, tab));
    } catch (const DataError&) {
      throw DataError("rule line " + std::to_string(line_no) + ": unknown kind '" +
                      std::string(line.substr(0, tab)) + "'");
    }
    std::string pattern = normalize_title(line.substr(tab + 1));
    if (pattern.empty())
      throw DataError("rule line " + std::to_string(line_no) + ": empty pattern");
    rs.rules.push_back(Rule{kind, std::move(pattern)});
  }
  return rs;
}

RuleSet RuleSet::load(const std::string& path) { return parse(read_file(path)); }

bool title_matches_rule(const std::string& title, const Rule& rule) {
  const std::string& p = rule.pattern;
  switch (rule.kind) {
    case RuleKind::title_suffix:
      return title.size() >= p.size() &&
             title.compare(title.size() - p.size(), p.size(), p) == 0;
    case RuleKind::title_prefix:
      return title.size() >= p.size() && title.compare(0, p.size(), p) == 0;
    case RuleKind::title_contains:
      return title.find(p) != std::string::npos;
    case RuleKind::title_exact:
      return title == p;
    case RuleKind::parent_of:
      return false;  // applies to parents, not the member's own title
  }
  return false;
}

Subtree apply_rules(const Subtree& st, const CategoryGraph& g, const RuleSet& rules,
                    PruneMode mode, PruneStats* stats,
                    std::vector<std::uint64_t>* per_rule_hits) {
  std::vector<std::uint64_t> hits(rules.rules.size(), 0);
  std::vector<bool> matched(st.member.size(), false);

  for (CatId c = 0; c < st.member.size(); ++c) {
    if (!st.member[c]) continue;
    const std::string& title = g.category_titles[c];
    for (std::size_t r = 0; r < rules.rules.size(); ++r) {
      const Rule& rule = rules.rules[r];
      bool hit = false;
      if (rule.kind == RuleKind::parent_of) {
        for (CatId parent : g.parent_links[c]) {
          if (st.member[parent] && g.category_titles[parent] == rule.pattern) {
            hit = true;
            break;
          }
        }
      } else {
        hit = title_matches_rule(title, rule);
      }
      if (hit) {
        ++hits[r];
        matched[c] = true;
      }
    }
  }

  std::vector<CatId> removed;
  for (CatId c = 0; c < matched.size(); ++c)
    if (matched[c]) removed.push_back(c);
  if (per_rule_hits) *per_rule_hits = std::move(hits);
  return prune_unreachable(st, g, removed, mode, StageTag::rule, stats);
}

}  // namespace wikivoc::prune
