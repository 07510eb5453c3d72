#include <algorithm>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "wikivoc/catgraph.hpp"
#include "wikivoc/common.hpp"
#include "wikivoc/prune.hpp"

using namespace wikivoc;
using namespace wikivoc::graph;
using namespace wikivoc::prune;

namespace {

CategoryGraph build(const std::vector<std::string>& cats,
                    const std::vector<std::pair<std::string, std::string>>& edges) {
  GraphBuilder b;
  for (const auto& c : cats) b.add_category(c);
  for (const auto& [child, parent] : edges) b.add_category_edge(child, parent);
  LoadSummary sum;
  return b.finish(sum);
}

std::set<std::string> titles_of(const Subtree& st, const CategoryGraph& g) {
  std::set<std::string> out;
  for (CatId c : st.members_sorted()) out.insert(g.category_titles[c]);
  return out;
}

// Independent modularity oracle: direct per-pair evaluation of
// Q = (1/2m) * sum_ij (A_ij - d_i d_j / 2m) [c_i == c_j].
double oracle_modularity(const std::vector<std::uint32_t>& comm, std::size_t n,
                         const std::vector<Edge>& edges) {
  std::vector<std::vector<double>> adj(n, std::vector<double>(n, 0.0));
  std::vector<double> degree(n, 0.0);
  double m = static_cast<double>(edges.size());
  for (const Edge& e : edges) {
    if (e.u == e.v) {
      adj[e.u][e.u] += 2.0;
      degree[e.u] += 2.0;
    } else {
      adj[e.u][e.v] += 1.0;
      adj[e.v][e.u] += 1.0;
      degree[e.u] += 1.0;
      degree[e.v] += 1.0;
    }
  }
  double q = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (comm[i] == comm[j]) q += adj[i][j] - degree[i] * degree[j] / (2.0 * m);
  return q / (2.0 * m);
}

// Enumerate all set partitions via restricted growth strings.
void enumerate_partitions(std::size_t n,
                          const std::function<void(const std::vector<std::uint32_t>&)>& fn) {
  std::vector<std::uint32_t> rgs(n, 0);
  std::function<void(std::size_t, std::uint32_t)> rec = [&](std::size_t i,
                                                            std::uint32_t max_used) {
    if (i == n) {
      fn(rgs);
      return;
    }
    for (std::uint32_t c = 0; c <= max_used + 1 && c < n; ++c) {
      rgs[i] = c;
      rec(i + 1, std::max(max_used, c));
    }
  };
  if (n == 0) return;
  rgs[0] = 0;
  rec(1, 0);
}

double best_partition_modularity(std::size_t n, const std::vector<Edge>& edges) {
  double best = -1.0;
  enumerate_partitions(n, [&](const std::vector<std::uint32_t>& comm) {
    best = std::max(best, modularity(comm, n, edges));
  });
  return best;
}

// Two triangles {0,1,2} and {3,4,5} joined by the bridge 2-3.
std::vector<Edge> two_triangles_bridge() {
  return {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {2, 3}};
}

}  // namespace

TEST_CASE("modularity trivial and hand-computed partitions") {
  // all nodes in one community -> 0
  std::vector<Edge> edges = two_triangles_bridge();
  CHECK(modularity(std::vector<std::uint32_t>(6, 0), 6, edges) == doctest::Approx(0.0));

  // two disjoint triangles, triangle partition -> 1/2
  std::vector<Edge> disjoint = {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}};
  CHECK(modularity({0, 0, 0, 1, 1, 1}, 6, disjoint) == doctest::Approx(0.5).epsilon(1e-12));

  // two triangles + bridge, triangle partition -> 5/14
  CHECK(modularity({0, 0, 0, 1, 1, 1}, 6, edges) ==
        doctest::Approx(5.0 / 14.0).epsilon(1e-12));
}

TEST_CASE("modularity errors") {
  std::vector<Edge> edges = {{0, 1}};
  CHECK_THROWS_AS(modularity({0}, 2, edges), DataError);       // node missing
  CHECK_THROWS_AS(modularity({0, 0}, 2, {}), DataError);       // no edges
}

TEST_CASE("modularity matches the per-pair oracle on all partitions, n <= 8") {
  struct Fixture {
    std::size_t n;
    std::vector<Edge> edges;
  };
  std::vector<Fixture> fixtures;
  fixtures.push_back({6, two_triangles_bridge()});
  fixtures.push_back({6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}}});
  // two 4-cliques joined by one edge
  std::vector<Edge> cliques8;
  for (std::uint32_t i = 0; i < 4; ++i)
    for (std::uint32_t j = i + 1; j < 4; ++j) {
      cliques8.push_back({i, j});
      cliques8.push_back({i + 4, j + 4});
    }
  cliques8.push_back({3, 4});
  fixtures.push_back({8, cliques8});
  // path and cycle of 7, star of 6, self-loop case
  std::vector<Edge> path7, cycle7, star6;
  for (std::uint32_t i = 0; i + 1 < 7; ++i) path7.push_back({i, i + 1});
  cycle7 = path7;
  cycle7.push_back({6, 0});
  for (std::uint32_t i = 1; i < 6; ++i) star6.push_back({0, i});
  fixtures.push_back({7, path7});
  fixtures.push_back({7, cycle7});
  fixtures.push_back({6, star6});
  fixtures.push_back({4, {{0, 1}, {1, 1}, {2, 3}}});  // with a self-loop

  for (const auto& f : fixtures) {
    enumerate_partitions(f.n, [&](const std::vector<std::uint32_t>& comm) {
      double mine = modularity(comm, f.n, f.edges);
      double oracle = oracle_modularity(comm, f.n, f.edges);
      REQUIRE(mine == doctest::Approx(oracle).epsilon(1e-12));
    });
  }
}

TEST_CASE("louvain on two triangles plus bridge finds the optimum") {
  std::vector<Edge> edges = two_triangles_bridge();
  // Louvain projects the links undirected, so seeding every node keeps the
  // BFS side trivial and the projection equal to the edge list.
  std::vector<std::string> cats;
  for (int i = 0; i < 6; ++i) cats.push_back("n" + std::to_string(i));
  std::vector<std::pair<std::string, std::string>> ge;
  for (const Edge& e : edges) ge.emplace_back(cats[e.u], cats[e.v]);
  CategoryGraph g = build(cats, ge);
  Subtree st = bfs_subtree(g, {"n0", "n1", "n2", "n3", "n4", "n5"});
  REQUIRE(st.member_count == 6);

  CommunityAssignment ca = louvain(st, g, 1.0, 3);
  CHECK(ca.community_count == 2);
  CHECK(ca.modularity == doctest::Approx(5.0 / 14.0).epsilon(1e-9));
  // oracle: exhaustive enumeration confirms 5/14 is the optimum
  CHECK(best_partition_modularity(6, edges) ==
        doctest::Approx(5.0 / 14.0).epsilon(1e-12));
  // the two triangles are the communities
  auto comm_of = [&](const std::string& t) {
    return ca.community_of.at(g.category_id(t));
  };
  CHECK(comm_of("n0") == comm_of("n1"));
  CHECK(comm_of("n1") == comm_of("n2"));
  CHECK(comm_of("n3") == comm_of("n4"));
  CHECK(comm_of("n4") == comm_of("n5"));
  CHECK(comm_of("n0") != comm_of("n3"));
}

TEST_CASE("louvain: edgeless graph yields singletons with modularity 0") {
  CategoryGraph g = build({"a", "b", "c"}, {});
  Subtree st = bfs_subtree(g, {"a", "b", "c"});
  CommunityAssignment ca = louvain(st, g, 1.0, 1);
  CHECK(ca.community_count == 3);
  CHECK(ca.modularity == 0.0);
}

TEST_CASE("louvain is deterministic given seed and beats singletons") {
  Rng rng(404);
  for (int trial = 0; trial < 6; ++trial) {
    std::size_t n = 8 + rng.below(40);
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < 3 * n; ++i) {
      std::uint32_t u = static_cast<std::uint32_t>(rng.below(n));
      std::uint32_t v = static_cast<std::uint32_t>(rng.below(n));
      if (u != v) edges.push_back({std::min(u, v), std::max(u, v)});
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
      return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    edges.erase(std::unique(edges.begin(), edges.end(),
                            [](const Edge& a, const Edge& b) {
                              return a.u == b.u && a.v == b.v;
                            }),
                edges.end());
    if (edges.empty()) continue;
    std::vector<std::string> cats;
    std::vector<std::string> seeds;
    for (std::size_t i = 0; i < n; ++i) {
      cats.push_back("n" + std::to_string(i));
      seeds.push_back(cats.back());
    }
    std::vector<std::pair<std::string, std::string>> ge;
    for (const Edge& e : edges) ge.emplace_back(cats[e.u], cats[e.v]);
    CategoryGraph g = build(cats, ge);
    Subtree st = bfs_subtree(g, seeds);

    CommunityAssignment a = louvain(st, g, 1.0, 99);
    CommunityAssignment b = louvain(st, g, 1.0, 99);
    CHECK(a.community_of == b.community_of);
    CHECK(a.modularity == b.modularity);

    // never below the all-singletons (starting) partition
    std::vector<std::uint32_t> singletons(st.member_count);
    for (std::uint32_t i = 0; i < singletons.size(); ++i) singletons[i] = i;
    std::vector<Edge> proj_edges = edges;
    double singleton_q = modularity(singletons, st.member_count, proj_edges);
    CHECK(a.modularity >= singleton_q - 1e-12);

    // recorded per-level modularity is non-decreasing and ends at the result
    for (std::size_t i = 1; i < a.level_modularity.size(); ++i)
      CHECK(a.level_modularity[i] >= a.level_modularity[i - 1] - 1e-12);
    if (!a.level_modularity.empty())
      CHECK(a.level_modularity.back() == doctest::Approx(a.modularity).epsilon(1e-12));
  }
}

TEST_CASE("louvain reaches >= 0.999 of the enumerated optimum on separable fixtures") {
  struct Fixture {
    std::size_t n;
    std::vector<Edge> edges;
  };
  std::vector<Fixture> fixtures;
  fixtures.push_back({6, two_triangles_bridge()});
  fixtures.push_back({6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}}});
  std::vector<Edge> cliques8;
  for (std::uint32_t i = 0; i < 4; ++i)
    for (std::uint32_t j = i + 1; j < 4; ++j) {
      cliques8.push_back({i, j});
      cliques8.push_back({i + 4, j + 4});
    }
  cliques8.push_back({3, 4});
  fixtures.push_back({8, cliques8});

  for (const auto& f : fixtures) {
    std::vector<std::string> cats;
    std::vector<std::string> seeds;
    for (std::size_t i = 0; i < f.n; ++i) {
      cats.push_back("n" + std::to_string(i));
      seeds.push_back(cats.back());
    }
    std::vector<std::pair<std::string, std::string>> ge;
    for (const Edge& e : f.edges) ge.emplace_back(cats[e.u], cats[e.v]);
    CategoryGraph g = build(cats, ge);
    Subtree st = bfs_subtree(g, seeds);
    CommunityAssignment ca = louvain(st, g, 1.0, 17);
    double best = best_partition_modularity(f.n, f.edges);
    CHECK(ca.modularity >= 0.999 * best);
  }
}

TEST_CASE("annotations parse and reject conflicts") {
  AnnotationSet ann = AnnotationSet::parse(
      "# labels\nComputer_science\trelevant\nOpera\tirrelevant\n");
  CHECK(ann.labels.at("computer science") == true);
  CHECK(ann.labels.at("opera") == false);
  CHECK_THROWS_AS(AnnotationSet::parse("a\trelevant\na\tirrelevant\n"), DataError);
  CHECK_THROWS_AS(AnnotationSet::parse("a\tmaybe\n"), DataError);
  CHECK_THROWS_AS(AnnotationSet::parse("no tab here\n"), DataError);
}

TEST_CASE("apply_annotations removes the irrelevant with propagation") {
  // 10 members: seed s; level2: a(irrelevant) with exclusive descendants
  // d1,d2,d3; b with c1..c4
  CategoryGraph g = build(
      {"s", "a", "b", "d1", "d2", "d3", "c1", "c2", "c3", "c4"},
      {{"a", "s"}, {"b", "s"}, {"d1", "a"}, {"d2", "a"}, {"d3", "d1"},
       {"c1", "b"}, {"c2", "b"}, {"c3", "c1"}, {"c4", "c1"}});
  Subtree st = bfs_subtree(g, {"s"});
  REQUIRE(st.member_count == 10);
  AnnotationSet ann;
  ann.labels = {{"s", true}, {"a", false}, {"b", true}};
  PruneStats stats;
  Subtree out = apply_annotations(st, g, ann, 2, PruneMode::reachability, &stats);
  CHECK(out.member_count == 6);  // a + 3 exclusive descendants removed
  CHECK(titles_of(out, g) ==
        std::set<std::string>{"s", "b", "c1", "c2", "c3", "c4"});
  for (CatId c : out.members_sorted())
    CHECK(out.provenance[c] == StageTag::manual);
}

TEST_CASE("apply_annotations: all relevant leaves the subtree unchanged") {
  CategoryGraph g = build({"s", "a"}, {{"a", "s"}});
  Subtree st = bfs_subtree(g, {"s"});
  AnnotationSet ann;
  ann.labels = {{"s", true}, {"a", true}};
  Subtree out = apply_annotations(st, g, ann, 2);
  CHECK(titles_of(out, g) == titles_of(st, g));
}

TEST_CASE("apply_annotations enforces completeness listing missing titles") {
  CategoryGraph g = build({"s", "a", "b"}, {{"a", "s"}, {"b", "s"}});
  Subtree st = bfs_subtree(g, {"s"});
  AnnotationSet ann;
  ann.labels = {{"s", true}, {"a", true}};  // b unlabeled at level 2
  try {
    apply_annotations(st, g, ann, 2);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("'b'") != std::string::npos);
  }
}

TEST_CASE("reference lists load lemmatized and reject empties") {
  ReferenceTermList refs =
      ReferenceTermList::from_lines("r", "Machine Learning\nalgorithms\n# c\n");
  CHECK(refs.terms.count("machine learn"));  // per-token lemmas
  CHECK(refs.terms.count("algorithm"));
  CHECK_THROWS_AS(ReferenceTermList::from_lines("r", "# only comments\n"), DataError);
}

TEST_CASE("filter_communities keeps exactly ref-overlapping clusters") {
  // two blobs under the root: x* (ref-covered) and y* (not)
  CategoryGraph g = build(
      {"root", "x1", "x2", "x3", "y1", "y2", "y3"},
      {{"x1", "root"}, {"x2", "x1"}, {"x3", "x1"}, {"x2", "x3"},
       {"y1", "root"}, {"y2", "y1"}, {"y3", "y1"}, {"y2", "y3"}});
  Subtree st = bfs_subtree(g, {"root"});
  CommunityAssignment ca = louvain(st, g, 1.0, 5);
  ReferenceTermList refs;
  refs.name = "r";
  refs.terms = {"x2", "root"};
  PruneStats stats;
  std::uint32_t kept = 0;
  Subtree out = filter_communities(st, g, ca, {refs}, PruneMode::reachability,
                                   &stats, &kept);
  CHECK(out.contains(g.category_id("x1")));
  CHECK(out.contains(g.category_id("x2")));
  // naive double-loop oracle over communities
  std::set<std::uint32_t> oracle_kept;
  for (CatId c : st.members_sorted()) {
    const std::string& title = g.category_titles[c];
    if (refs.terms.count(title)) oracle_kept.insert(ca.community_of.at(c));
  }
  for (CatId c : st.members_sorted()) {
    bool should_survive_directly = oracle_kept.count(ca.community_of.at(c)) > 0;
    if (!should_survive_directly) CHECK_FALSE(out.contains(c));
  }
  CHECK(kept == oracle_kept.size());
}

TEST_CASE("filter_communities with empty reference union is an error") {
  CategoryGraph g = build({"root", "a"}, {{"a", "root"}});
  Subtree st = bfs_subtree(g, {"root"});
  CommunityAssignment ca = louvain(st, g, 1.0, 1);
  CHECK_THROWS_AS(filter_communities(st, g, ca, {}, PruneMode::reachability),
                  DataError);
}

TEST_CASE("rule parsing: kinds, normalization, errors") {
  RuleSet rs = RuleSet::parse(
      "title_suffix\tby subject\n"
      "# comment\n"
      "parent_of\tClassification_system_by_subject\n");
  REQUIRE(rs.rules.size() == 2);
  CHECK(rs.rules[0].kind == RuleKind::title_suffix);
  CHECK(rs.rules[0].pattern == "by subject");
  CHECK(rs.rules[1].kind == RuleKind::parent_of);
  CHECK(rs.rules[1].pattern == "classification system by subject");
  CHECK(RuleSet::parse("").rules.empty());
  try {
    RuleSet::parse("bogus_kind\tx\n");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
}

TEST_CASE("apply_rules removes matches and reports per-rule hits") {
  CategoryGraph g = build(
      {"s", "novels by subject", "megacorp office", "classification system by subject",
       "child of classifier", "fine topic"},
      {{"novels by subject", "s"}, {"megacorp office", "s"},
       {"classification system by subject", "s"},
       {"child of classifier", "classification system by subject"},
       {"fine topic", "s"}});
  Subtree st = bfs_subtree(g, {"s"});
  RuleSet rs = RuleSet::parse(
      "title_suffix\tby subject\n"
      "title_prefix\tmegacorp\n"
      "parent_of\tclassification system by subject\n");
  PruneStats stats;
  std::vector<std::uint64_t> hits;
  Subtree out = apply_rules(st, g, rs, PruneMode::reachability, &stats, &hits);
  CHECK(titles_of(out, g) == std::set<std::string>{"s", "fine topic"});
  // suffix hits both `novels by subject` and `classification system by subject`
  CHECK(hits[0] == 2);
  CHECK(hits[1] == 1);
  CHECK(hits[2] == 1);  // the child, via its parent's exact title
}

TEST_CASE("title rules are order-invariant and match a naive scan") {
  Rng rng(31);
  std::vector<std::string> tokens = {"alpha", "beta",  "gamma", "delta",
                                     "by",    "subject", "corp", "misc"};
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::string> cats = {"s"};
    for (int i = 0; i < 20; ++i) {
      std::string t = tokens[rng.below(tokens.size())] + " " +
                      tokens[rng.below(tokens.size())] + " " + std::to_string(i);
      cats.push_back(t);
    }
    std::vector<std::pair<std::string, std::string>> edges;
    for (std::size_t i = 1; i < cats.size(); ++i)
      edges.emplace_back(cats[i], cats[rng.below(i)]);
    CategoryGraph g = build(cats, edges);
    Subtree st = bfs_subtree(g, {"s"});

    RuleSet forward = RuleSet::parse("title_contains\talpha\ntitle_suffix\t7\n");
    RuleSet backward = RuleSet::parse("title_suffix\t7\ntitle_contains\talpha\n");
    Subtree a = apply_rules(st, g, forward);
    Subtree b = apply_rules(st, g, backward);
    CHECK(titles_of(a, g) == titles_of(b, g));

    // naive per-member scan oracle of the direct match set
    std::set<std::string> direct;
    for (CatId c : st.members_sorted()) {
      const std::string& t = g.category_titles[c];
      if (t.find("alpha") != std::string::npos ||
          (t.size() >= 1 && t.back() == '7'))
        direct.insert(t);
    }
    for (const auto& t : direct) CHECK_FALSE(a.contains(g.category_id(t)));
  }
}
