#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "wikivoc/catgraph.hpp"
#include "wikivoc/keyphrase.hpp"
#include "wikivoc/pipeline.hpp"
#include "wikivoc/prune.hpp"

// Synthetic dataset generator. The graph plants four irrelevant regions so
// that every pruning stage has real work to do:
//   A - shallow branch, labeled away by the manual annotation stage
//   B - deep isolated branch, dropped by the community-overlap filter
//   C - deep branch cross-linked into relevant communities; survives the
//       community filter and is removed by the classifier (it also supplies
//       the annotated training negatives)
//   D - rule-pattern titles over relevant-looking text, removed by the rules
// Structures are generated and then simulated through the manual and
// community stages with the real pipeline operations; if the planted
// constraints do not hold for a draw, the generator redraws with a derived
// salt, so every rng_seed deterministically yields a valid fixture.

namespace wikivoc::pipeline {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string>& relevant_tokens() {
  static const std::vector<std::string> tokens = {
      "algorithm",  "data",         "network",   "learning",  "graph",
      "system",     "model",        "computation", "code",    "logic",
      "neural",     "query",        "matrix",    "vector",    "binary",
      "protocol",   "cipher",       "parser",    "kernel",    "cache",
      "compiler",   "database",     "cluster",   "tensor",    "automaton",
      "inference",  "optimization", "search",    "hash",      "stream",
      "signal",     "circuit",      "scheduler", "index",     "recursion",
      "entropy",    "gradient",     "topology",  "encoding",  "register"};
  return tokens;
}

const std::vector<std::string>& irrelevant_tokens() {
  static const std::vector<std::string> tokens = {
      "opera",    "garden",   "cuisine",   "poetry",    "football",
      "painting", "geology",  "novel",     "fashion",   "dance",
      "temple",   "wildlife", "ballet",    "harvest",   "folklore",
      "pottery",  "carnival", "orchard",   "saga",      "mythology",
      "costume",  "vineyard", "chapel",    "meadow",    "safari",
      "regatta",  "quilt",    "parade",    "lagoon",    "sonnet",
      "tapestry", "waterfall", "bistro",   "museum",    "festival",
      "glacier",  "marble",   "perfume",   "sculpture", "violin"};
  return tokens;
}

const std::vector<std::string>& qualifier_tokens() {
  static const std::vector<std::string> tokens = {
      "method",    "framework", "analysis", "theory",    "interface",
      "structure", "design",    "review",   "technique", "standard"};
  return tokens;
}

struct Cat {
  std::string title;
  bool relevant;
  std::vector<std::uint32_t> parents;  // indexes into the category list
};

struct Page {
  std::string title;
  std::vector<std::uint32_t> cats;
};

struct Draw {
  std::vector<Cat> cats;
  std::vector<std::uint32_t> rel_ids;
  std::vector<std::uint32_t> branch_a, branch_b, branch_c, branch_d;
  std::vector<Page> pages;
  std::vector<std::pair<std::string, std::string>> redirects;
  std::vector<std::string> seeds;

  // filled by simulation
  std::string annotations_tsv;
  std::vector<std::string> ref_terms;           // lemmatized
  std::vector<std::string> negative_titles;     // classifier training negatives
  std::vector<std::string> sample_titles;       // for sample-eval
  std::unordered_map<std::string, bool> truth;  // by title
};

std::string make_title(Rng& rng, const std::vector<std::string>& pool,
                       std::set<std::string>& used, std::size_t tokens) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::string t;
    for (std::size_t i = 0; i < tokens; ++i) {
      if (i) t.push_back(' ');
      t += pool[rng.below(pool.size())];
    }
    if (used.insert(t).second) return t;
  }
  for (std::uint64_t n = 2;; ++n) {
    std::string t = pool[rng.below(pool.size())] + " " +
                    qualifier_tokens()[rng.below(qualifier_tokens().size())] + " " +
                    std::to_string(n);
    if (used.insert(t).second) return t;
  }
}

Draw draw_structure(const FixtureSpec& spec, Rng& rng) {
  Draw d;
  d.seeds = {"computation theory", "data systems", "statistical learning"};
  std::set<std::string> used;
  for (const auto& s : d.seeds) used.insert(s);

  // Token pools scale with the fixture so the token-covering reference set
  // stays well below the classifier's negative pool.
  const std::uint32_t rel_target = spec.categories * 55 / 100;
  std::size_t pool_size = std::clamp<std::size_t>(rel_target / 3, 10,
                                                  relevant_tokens().size());
  std::vector<std::string> rel_pool(relevant_tokens().begin(),
                                    relevant_tokens().begin() + pool_size);
  std::vector<std::string> irr_pool(
      irrelevant_tokens().begin(),
      irrelevant_tokens().begin() +
          std::min(pool_size + 5, irrelevant_tokens().size()));

  auto add = [&d](std::string title, bool relevant,
                  std::vector<std::uint32_t> parents) -> std::uint32_t {
    d.cats.push_back(Cat{std::move(title), relevant, std::move(parents)});
    return static_cast<std::uint32_t>(d.cats.size() - 1);
  };

  const std::uint32_t n_rel = rel_target;
  const std::uint32_t n_irr = spec.categories - n_rel;

  for (const auto& s : d.seeds) add(s, true, {});
  d.rel_ids = {0, 1, 2};
  while (d.rel_ids.size() < n_rel) {
    std::string title = make_title(rng, rel_pool, used, 2);
    std::vector<std::uint32_t> parents;
    std::size_t pick_from =
        d.rel_ids.size() > 12 && rng.chance(0.7) ? d.rel_ids.size() - 12 : 0;
    parents.push_back(d.rel_ids[pick_from + rng.below(d.rel_ids.size() - pick_from)]);
    if (rng.chance(0.3)) {
      std::uint32_t extra = d.rel_ids[rng.below(d.rel_ids.size())];
      if (extra != parents[0]) parents.push_back(extra);
    }
    d.rel_ids.push_back(add(std::move(title), true, std::move(parents)));
  }
  // Relevant back-edges: cycles through the core.
  for (int i = 0; i < 4 && d.rel_ids.size() > 20; ++i) {
    std::uint32_t deep = d.rel_ids[d.rel_ids.size() - 1 - rng.below(8)];
    std::uint32_t shallow = d.rel_ids[rng.below(6)];
    if (deep != shallow) d.cats[shallow].parents.push_back(deep);
  }

  // Scaffold BFS levels (before branches attach; attaching children cannot
  // change them).
  std::vector<std::uint32_t> level(d.cats.size(), 0);
  {
    std::vector<std::vector<std::uint32_t>> children(d.cats.size());
    for (std::uint32_t c = 0; c < d.cats.size(); ++c)
      for (std::uint32_t p : d.cats[c].parents) children[p].push_back(c);
    std::vector<std::uint32_t> frontier = {0, 1, 2};
    level[0] = level[1] = level[2] = 1;
    while (!frontier.empty()) {
      std::vector<std::uint32_t> next;
      for (std::uint32_t u : frontier)
        for (std::uint32_t v : children[u])
          if (level[v] == 0) {
            level[v] = level[u] + 1;
            next.push_back(v);
          }
      frontier = std::move(next);
    }
  }
  std::vector<std::uint32_t> rel_deep;
  for (std::uint32_t c : d.rel_ids)
    if (level[c] >= 3) rel_deep.push_back(c);
  if (rel_deep.size() < 4) return d;  // too shallow; caller redraws

  const std::uint32_t n_a = std::max(6u, n_irr * 14 / 100);
  const std::uint32_t n_b = std::max(6u, n_irr * 18 / 100);
  const std::uint32_t n_d = std::min(10u, n_irr / 6);
  const std::uint32_t n_c = n_irr - n_a - n_b - n_d;

  auto grow = [&](std::uint32_t root, std::uint32_t count,
                  std::vector<std::uint32_t>& ids, double dense) {
    ids.push_back(root);
    while (ids.size() < count) {
      std::string title = make_title(rng, irr_pool, used, 2);
      std::vector<std::uint32_t> parents{ids[rng.below(ids.size())]};
      if (rng.chance(dense)) {
        std::uint32_t extra = ids[rng.below(ids.size())];
        if (extra != parents[0]) parents.push_back(extra);
      }
      ids.push_back(add(std::move(title), false, std::move(parents)));
    }
  };

  {  // A: child of a seed, annotated away at the manual stage
    std::string title = make_title(rng, irr_pool, used, 2);
    grow(add(std::move(title), false, {static_cast<std::uint32_t>(rng.below(3))}),
         n_a, d.branch_a, 0.3);
  }
  {  // B: deep and isolated, no reference overlap
    std::string title = make_title(rng, irr_pool, used, 2);
    grow(add(std::move(title), false, {rel_deep[rng.below(rel_deep.size())]}), n_b,
         d.branch_b, 0.5);
  }
  {  // C: heavily cross-linked into the relevant region
    std::string title = make_title(rng, irr_pool, used, 2);
    std::vector<std::uint32_t> parents{rel_deep[rng.below(rel_deep.size())],
                                       rel_deep[rng.below(rel_deep.size())]};
    std::sort(parents.begin(), parents.end());
    parents.erase(std::unique(parents.begin(), parents.end()), parents.end());
    grow(add(std::move(title), false, std::move(parents)), n_c, d.branch_c, 0.35);
    for (std::size_t i = 0; i < d.branch_c.size(); i += 2)
      d.cats[d.branch_c[i]].parents.push_back(rel_deep[rng.below(rel_deep.size())]);
  }
  {  // D: rule-pattern titles under relevant parents
    used.insert("classification system by subject");
    std::uint32_t parent_of_root = add("classification system by subject", false,
                                       {rel_deep[rng.below(rel_deep.size())]});
    d.branch_d.push_back(parent_of_root);
    while (d.branch_d.size() < n_d) {
      std::size_t kind = d.branch_d.size() % 3;
      std::string title;
      if (kind == 2) {
        title = make_title(rng, rel_pool, used, 3);  // reserves it
      } else {
        title = kind == 0 ? rel_pool[rng.below(rel_pool.size())] +
                                std::string(" by subject")
                          : std::string("megacorp ") +
                                rel_pool[rng.below(rel_pool.size())] + " " +
                                qualifier_tokens()[rng.below(qualifier_tokens().size())];
        if (!used.insert(title).second) continue;  // pattern collision, redraw
      }
      std::uint32_t parent =
          kind == 2 ? parent_of_root : rel_deep[rng.below(rel_deep.size())];
      d.branch_d.push_back(add(std::move(title), false, {parent}));
    }
  }

  // Pages and redirects.
  std::set<std::string> used_pages;
  std::vector<std::uint32_t> irr_cat_ids;
  for (auto* b : {&d.branch_a, &d.branch_b, &d.branch_c, &d.branch_d})
    irr_cat_ids.insert(irr_cat_ids.end(), b->begin(), b->end());
  while (d.pages.size() < spec.pages) {
    bool relevant = d.pages.size() % 4 != 3;
    const auto& pool = relevant ? rel_pool : irr_pool;
    const auto& cat_pool = relevant ? d.rel_ids : irr_cat_ids;
    std::size_t tokens = rng.chance(0.15) ? 1 : (rng.chance(0.5) ? 2 : 3);
    std::string title = make_title(rng, pool, used_pages, tokens);
    if (used.count(title)) continue;
    Page p;
    p.title = title;
    p.cats.push_back(cat_pool[rng.below(cat_pool.size())]);
    if (rng.chance(0.25)) {
      std::uint32_t extra = cat_pool[rng.below(cat_pool.size())];
      if (extra != p.cats[0]) p.cats.push_back(extra);
    }
    d.pages.push_back(std::move(p));
    if (d.pages.size() % 10 == 0) {
      std::string alias = "the " + d.pages.back().title + " overview";
      if (!used_pages.count(alias) && !used.count(alias)) {
        d.redirects.emplace_back(alias, d.pages.back().title);
        used_pages.insert(alias);
      }
    }
  }
  if (!d.redirects.empty()) {
    // a two-hop chain, plus one chain past the resolution bound
    d.redirects.emplace_back("shortcut to " + d.redirects.front().first,
                             d.redirects.front().first);
    std::string prev = d.pages.front().title;
    for (int i = 0; i < 7; ++i) {
      std::string alias = "hop " + std::to_string(i) + " " + d.pages.front().title;
      d.redirects.emplace_back(alias, prev);
      prev = alias;
    }
  }

  for (const Cat& c : d.cats) d.truth.emplace(c.title, c.relevant);
  return d;
}

// Builds the graph, runs the manual and community stages with the real
// operations, and derives annotations, references, training negatives and
// the review sample. Returns false when the draw violates a planted
// constraint.
bool simulate(const FixtureSpec& spec, Draw& d, Rng& rng) {
  if (d.branch_d.empty()) return false;
  graph::GraphBuilder builder;
  for (const Cat& c : d.cats) builder.add_category(c.title);
  for (const Page& p : d.pages) builder.add_page(p.title);
  for (const Cat& c : d.cats)
    for (std::uint32_t p : c.parents) builder.add_category_edge(c.title, d.cats[p].title);
  for (const Page& p : d.pages)
    for (std::uint32_t c : p.cats) builder.add_page_link(p.title, d.cats[c].title);
  for (const auto& [alias, target] : d.redirects) builder.add_redirect(alias, target);
  graph::LoadSummary sum;
  graph::CategoryGraph g = builder.finish(sum);

  graph::Subtree full = graph::bfs_subtree(g, d.seeds);
  if (full.member_count != d.cats.size()) return false;  // something unreachable

  // Branch roots planted deep must actually be deep, and the A root shallow.
  auto level_of = [&](std::uint32_t idx) {
    return full.level[g.category_id(d.cats[idx].title)];
  };
  if (level_of(d.branch_a.front()) > 3) return false;
  for (auto* b : {&d.branch_b, &d.branch_c, &d.branch_d})
    if (level_of(b->front()) <= 3) return false;

  // Manual annotations: complete for levels 1..3.
  d.annotations_tsv.clear();
  for (graph::CatId c : full.members_sorted()) {
    if (full.level[c] > 3) continue;
    d.annotations_tsv += g.category_titles[c];
    d.annotations_tsv +=
        d.truth.at(g.category_titles[c]) ? "\trelevant\n" : "\tirrelevant\n";
  }
  prune::AnnotationSet ann = prune::AnnotationSet::parse(d.annotations_tsv);
  graph::Subtree post_manual =
      prune::apply_annotations(full, g, ann, 3, graph::PruneMode::reachability);

  // References drive both the community filter and the classifier's
  // positive labels. First pass: a token-covering subset of the relevant
  // survivors (so positive examples span the whole token space). After
  // simulating the community stage once, top the list up to match the
  // realized negative pool, then simulate again (more references only keep
  // more communities, so the pool cannot shrink).
  std::vector<std::string> rel_survivors;
  for (graph::CatId c : post_manual.members_sorted())
    if (d.truth.at(g.category_titles[c])) rel_survivors.push_back(g.category_titles[c]);
  std::set<std::string> chosen;
  {
    std::set<std::string> covered;
    for (const auto& title : rel_survivors) {
      bool adds = false;
      for (const auto& tok : tokenize_words(title))
        if (!covered.count(tok)) adds = true;
      if (!adds) continue;
      for (const auto& tok : tokenize_words(title)) covered.insert(tok);
      chosen.insert(title);
    }
    for (const auto& s : d.seeds) chosen.insert(normalize_title(s));
  }

  std::unordered_set<std::string> branch_d_titles;
  for (std::uint32_t idx : d.branch_d) branch_d_titles.insert(d.cats[idx].title);

  std::uint64_t positives = 0, rel_kept = 0, rule_targets = 0;
  auto simulate_communities = [&](const std::set<std::string>& ref_titles) {
    prune::ReferenceTermList refs;
    refs.name = "refs";
    for (const auto& t : ref_titles) refs.terms.insert(keyphrase::lemmatize_phrase(t));
    prune::CommunityAssignment ca =
        prune::louvain(post_manual, g, 1.0, spec.rng_seed + 3);
    graph::Subtree post_comm = prune::filter_communities(
        post_manual, g, ca, {refs}, graph::PruneMode::reachability);
    d.negative_titles.clear();
    positives = 0;
    rel_kept = 0;
    rule_targets = 0;
    for (graph::CatId c : post_comm.members_sorted()) {
      const std::string& title = g.category_titles[c];
      if (refs.terms.count(keyphrase::lemmatize_phrase(title))) ++positives;
      if (d.truth.at(title)) {
        ++rel_kept;
      } else if (branch_d_titles.count(title)) {
        ++rule_targets;
      } else {
        d.negative_titles.push_back(title);
      }
    }
  };

  simulate_communities(chosen);
  // Top up the references toward the realized pool size.
  std::size_t target =
      std::min<std::size_t>(rel_survivors.size() / 2,
                            d.negative_titles.size() > 4
                                ? d.negative_titles.size() - 4
                                : 0);
  for (std::size_t i = 0; chosen.size() < target && i < rel_survivors.size(); ++i)
    chosen.insert(rel_survivors[i]);
  simulate_communities(chosen);

  d.ref_terms.clear();
  for (const auto& t : chosen) d.ref_terms.push_back(keyphrase::lemmatize_phrase(t));
  std::sort(d.ref_terms.begin(), d.ref_terms.end());
  d.ref_terms.erase(std::unique(d.ref_terms.begin(), d.ref_terms.end()),
                    d.ref_terms.end());

  // The community filter must keep (nearly) every relevant category, and
  // the surviving negative pool must cover the positives.
  if (rel_kept * 100 < rel_survivors.size() * 99) return false;
  if (d.negative_titles.size() < positives + 2) return false;

  // Rule targets must still be present for the rules stage.
  if (rule_targets < d.branch_d.size() / 2) return false;

  // Review sample for the per-level evaluation, drawn from the
  // pre-community-detection subtree.
  std::vector<graph::CatId> members = post_manual.members_sorted();
  rng.shuffle(members);
  std::size_t take = std::min<std::size_t>(members.size(), 60);
  d.sample_titles.clear();
  for (std::size_t i = 0; i < take; ++i)
    d.sample_titles.push_back(g.category_titles[members[i]]);
  std::sort(d.sample_titles.begin(), d.sample_titles.end());
  return true;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
}

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

}  // namespace

FixtureTruth gen_fixture(const FixtureSpec& spec) {
  if (spec.categories < 80 || spec.pages < 10 || spec.documents < 3)
    throw ConfigError("gen_fixture: need at least 80 categories, 10 pages, 3 documents");

  Draw d;
  Rng sample_rng(spec.rng_seed);
  bool ok = false;
  for (std::uint64_t attempt = 0; attempt < 64 && !ok; ++attempt) {
    Rng rng(spec.rng_seed ^ (0x9e3779b97f4a7c15ULL * attempt));
    d = draw_structure(spec, rng);
    if (d.cats.size() != spec.categories) continue;
    ok = simulate(spec, d, rng);
  }
  if (!ok)
    throw DataError("gen_fixture: could not satisfy planted constraints; "
                    "try different size parameters");

  fs::create_directories(spec.dir);

  std::string titles_tsv;
  for (std::size_t i = 0; i < d.cats.size(); ++i)
    titles_tsv += std::to_string(i) + "\t" + d.cats[i].title + "\t14\n";
  for (std::size_t i = 0; i < d.pages.size(); ++i)
    titles_tsv += std::to_string(d.cats.size() + i) + "\t" + d.pages[i].title + "\t0\n";
  write_file(fs::path(spec.dir) / "titles.tsv", titles_tsv);

  std::string edges_tsv;
  for (const Cat& c : d.cats)
    for (std::uint32_t p : c.parents) edges_tsv += c.title + "\t" + d.cats[p].title + "\n";
  write_file(fs::path(spec.dir) / "cat_edges.tsv", edges_tsv);

  std::string cat_pages_tsv;
  for (const Page& p : d.pages)
    for (std::uint32_t c : p.cats)
      cat_pages_tsv += p.title + "\t" + d.cats[c].title + "\n";
  write_file(fs::path(spec.dir) / "cat_pages.tsv", cat_pages_tsv);

  std::string redirects_tsv;
  for (const auto& [alias, target] : d.redirects)
    redirects_tsv += alias + "\t" + target + "\n";
  write_file(fs::path(spec.dir) / "redirects.tsv", redirects_tsv);

  write_file(fs::path(spec.dir) / "annotations.tsv", d.annotations_tsv);

  {
    std::string a_text, b_text;
    for (std::size_t i = 0; i < d.ref_terms.size(); ++i)
      (i % 2 == 0 ? a_text : b_text) += d.ref_terms[i] + "\n";
    write_file(fs::path(spec.dir) / "refs_a.txt", a_text);
    write_file(fs::path(spec.dir) / "refs_b.txt", b_text);
  }

  {
    std::string negatives_tsv;
    for (const auto& t : d.negative_titles) negatives_tsv += t + "\tirrelevant\n";
    write_file(fs::path(spec.dir) / "classifier_negatives.tsv", negatives_tsv);
  }

  {
    std::string sample_tsv;
    for (const auto& t : d.sample_titles)
      sample_tsv += t + (d.truth.at(t) ? "\trelevant\n" : "\tirrelevant\n");
    write_file(fs::path(spec.dir) / "sample_annotations.tsv", sample_tsv);
  }

  write_file(fs::path(spec.dir) / "rules.tsv",
             "title_suffix\tby subject\n"
             "title_prefix\tmegacorp\n"
             "parent_of\tclassification system by subject\n");

  // Corpus: documents mentioning planted relevant terms, two of them with no
  // vocabulary mentions at all.
  {
    std::vector<std::string> rel_page_titles;
    for (const Page& p : d.pages)
      if (d.cats[p.cats[0]].relevant) rel_page_titles.push_back(p.title);
    const std::vector<std::string> fillers = {
        "we study",       "this paper presents", "our approach uses",
        "we evaluate",    "results show that",   "we propose",
        "in contrast to", "building on",         "experiments confirm"};
    std::string corpus_jsonl;
    for (std::uint32_t doc = 0; doc < spec.documents; ++doc) {
      std::vector<std::string> mentioned;
      std::string text;
      bool empty_doc = doc + 2 >= spec.documents;
      std::size_t sentences = 3 + sample_rng.below(4);
      for (std::size_t s = 0; s < sentences; ++s) {
        text += fillers[sample_rng.below(fillers.size())];
        text.push_back(' ');
        if (empty_doc) {
          text += "plain prose with nothing from any list";
        } else {
          const std::string& term =
              rel_page_titles[sample_rng.below(rel_page_titles.size())];
          text += term;
          mentioned.push_back(term);
          if (sample_rng.chance(0.4)) {
            const std::string& extra =
                d.cats[d.rel_ids[sample_rng.below(d.rel_ids.size())]].title;
            text += " for " + extra;
            mentioned.push_back(extra);
          }
        }
        text += ". ";
      }
      std::sort(mentioned.begin(), mentioned.end());
      mentioned.erase(std::unique(mentioned.begin(), mentioned.end()), mentioned.end());
      std::vector<std::string> gold;
      for (const auto& m : mentioned)
        if (sample_rng.chance(0.6)) gold.push_back(m);
      if (!empty_doc && sample_rng.chance(0.7))
        gold.push_back("phrase outside every vocabulary");
      corpus_jsonl += "{\"id\": \"doc" + std::to_string(doc) + "\", \"abstract\": \"" +
                      json_escape(text) + "\", \"keyphrases\": [";
      for (std::size_t i = 0; i < gold.size(); ++i) {
        if (i) corpus_jsonl += ", ";
        corpus_jsonl += "\"" + json_escape(gold[i]) + "\"";
      }
      corpus_jsonl += "]}\n";
    }
    write_file(fs::path(spec.dir) / "corpus.jsonl", corpus_jsonl);
  }

  write_file(fs::path(spec.dir) / "tag_sample.txt",
             "We study " + d.pages.front().title + " and related methods. " +
                 "Our system builds on " + d.cats[d.rel_ids[3 % d.rel_ids.size()]].title +
                 " together with " + d.pages[2 % d.pages.size()].title + ".\n");

  FixtureTruth out_truth;
  for (const Cat& c : d.cats)
    (c.relevant ? out_truth.relevant_categories : out_truth.irrelevant_categories)
        .push_back(c.title);
  std::sort(out_truth.relevant_categories.begin(), out_truth.relevant_categories.end());
  std::sort(out_truth.irrelevant_categories.begin(),
            out_truth.irrelevant_categories.end());
  {
    std::string rel_text, irr_text;
    for (const auto& t : out_truth.relevant_categories) rel_text += t + "\n";
    for (const auto& t : out_truth.irrelevant_categories) irr_text += t + "\n";
    write_file(fs::path(spec.dir) / "truth_relevant.tsv", rel_text);
    write_file(fs::path(spec.dir) / "truth_irrelevant.tsv", irr_text);
  }

  {
    std::string dir = spec.dir;
    std::string toml;
    toml += "# generated fixture configuration (flat dotted keys = CLI flags)\n";
    toml += "seeds = [\"computation theory\", \"data systems\", \"statistical learning\"]\n";
    toml += "out-dir = \"" + dir + "/out\"\n";
    toml += "threads = 1\n";
    toml += "seed-rng = " + std::to_string(spec.rng_seed) + "\n";
    toml += "input.titles = \"" + dir + "/titles.tsv\"\n";
    toml += "input.cat-edges = \"" + dir + "/cat_edges.tsv\"\n";
    toml += "input.cat-pages = \"" + dir + "/cat_pages.tsv\"\n";
    toml += "input.redirects = \"" + dir + "/redirects.tsv\"\n";
    toml += "input.annotations = \"" + dir + "/annotations.tsv\"\n";
    toml += "input.classifier-negatives = \"" + dir + "/classifier_negatives.tsv\"\n";
    toml += "input.rules = \"" + dir + "/rules.tsv\"\n";
    toml += "input.references = [\"refs_a=" + dir + "/refs_a.txt\", \"refs_b=" + dir +
            "/refs_b.txt\"]\n";
    toml += "input.corpus = \"" + dir + "/corpus.jsonl\"\n";
    toml += "input.tag-text = \"" + dir + "/tag_sample.txt\"\n";
    toml += "louvain.seed = " + std::to_string(spec.rng_seed + 3) + "\n";
    toml += "embedding.dimension = 16\n";
    toml += "embedding.walks-per-node = 8\n";
    toml += "embedding.walk-length = 20\n";
    toml += "embedding.window = 4\n";
    toml += "embedding.negatives = 5\n";
    toml += "embedding.epochs = 3\n";
    toml += "embedding.seed = " + std::to_string(spec.rng_seed + 1) + "\n";
    toml += "mlp.hidden = 32\n";
    toml += "mlp.epochs = 120\n";
    toml += "mlp.batch-size = 16\n";
    toml += "mlp.learning-rate = 0.1\n";
    toml += "mlp.seed = " + std::to_string(spec.rng_seed + 2) + "\n";
    toml += "classifier.threshold = 0.25\n";
    toml += "vocab.core-max-level = 4\n";
    toml += "eval.sample-annotations = \"" + dir + "/sample_annotations.tsv\"\n";
    toml += "eval.sample-variants = [\"cd=" + dir + "/out/subtree.communities.tsv\", " +
            "\"ml=" + dir + "/out/subtree.classifier.tsv\", \"rule=" + dir +
            "/out/subtree.rules.tsv\"]\n";
    write_file(fs::path(spec.dir) / "pipeline.toml", toml);
  }

  return out_truth;
}

}  // namespace wikivoc::pipeline
