// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one pass/fail line each. Exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "wikivoc/catgraph.hpp"
#include "wikivoc/classify.hpp"
#include "wikivoc/common.hpp"
#include "wikivoc/ingest.hpp"
#include "wikivoc/keyphrase.hpp"
#include "wikivoc/pipeline.hpp"
#include "wikivoc/prune.hpp"

namespace fs = std::filesystem;
using namespace wikivoc;

namespace {

int failures = 0;

void report(const char* name, bool ok, const std::string& detail = "") {
  std::printf("%s  %s%s%s\n", ok ? "PASS" : "FAIL", name,
              detail.empty() ? "" : " -- ", detail.c_str());
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

// ---------------------------------------------------------------------------
// 1. Graph oracle equivalence

void criterion_graph_oracle() {
  auto start = std::chrono::steady_clock::now();
  Rng rng(10001);
  bool ok = true;
  std::string detail;
  for (int trial = 0; trial < 100 && ok; ++trial) {
    std::size_t n = 2 + rng.below(1999);
    graph::GraphBuilder builder;
    std::vector<std::string> cats(n);
    for (std::size_t i = 0; i < n; ++i) {
      cats[i] = "n" + std::to_string(i);
      builder.add_category(cats[i]);
    }
    std::size_t e = n + rng.below(2 * n);
    for (std::size_t i = 0; i < e; ++i) {
      std::size_t u = rng.below(n), v = rng.below(n);
      if (u != v) builder.add_category_edge(cats[u], cats[v]);
    }
    graph::LoadSummary sum;
    graph::CategoryGraph g = builder.finish(sum);
    std::vector<std::string> seeds;
    std::size_t n_seeds = 1 + rng.below(3);
    for (std::size_t i = 0; i < n_seeds; ++i) seeds.push_back(cats[rng.below(n)]);
    graph::Subtree st = graph::bfs_subtree(g, seeds);

    // oracle: relaxation to fixpoint (no shared BFS machinery)
    const std::uint32_t kInf = 0xFFFFFFFF;
    std::vector<std::uint32_t> level(n, kInf);
    for (const auto& s : seeds) level[g.category_id(normalize_title(s))] = 1;
    bool changed = true;
    while (changed) {
      changed = false;
      for (graph::CatId c = 0; c < n; ++c) {
        if (level[c] == kInf) continue;
        for (graph::CatId ch : g.child_links[c])
          if (level[c] + 1 < level[ch]) {
            level[ch] = level[c] + 1;
            changed = true;
          }
      }
    }
    for (graph::CatId c = 0; c < n && ok; ++c) {
      bool oracle_member = level[c] != kInf;
      if (st.contains(c) != oracle_member) {
        ok = false;
        detail = "membership mismatch";
      } else if (oracle_member && st.level[c] != level[c]) {
        ok = false;
        detail = "level mismatch";
      }
    }
    if (!ok) break;

    // prune both modes against an oracle recomputation
    std::vector<graph::CatId> removable;
    for (graph::CatId c : st.members_sorted()) {
      bool is_seed = false;
      for (graph::CatId s : st.seeds) is_seed |= (s == c);
      if (!is_seed) removable.push_back(c);
    }
    std::vector<graph::CatId> removed;
    std::vector<bool> dropped(n, false);
    for (graph::CatId c : removable)
      if (rng.chance(0.15)) {
        removed.push_back(c);
        dropped[c] = true;
      }
    for (graph::PruneMode mode :
         {graph::PruneMode::reachability, graph::PruneMode::strict_children}) {
      std::vector<bool> drop = dropped;
      if (mode == graph::PruneMode::strict_children) {
        // oracle closure expansion (seeds exempt)
        std::vector<bool> is_seed(n, false);
        for (graph::CatId s : st.seeds) is_seed[s] = true;
        bool grew = true;
        while (grew) {
          grew = false;
          for (graph::CatId c = 0; c < n; ++c) {
            if (!drop[c]) continue;
            for (graph::CatId ch : g.child_links[c])
              if (st.contains(ch) && !drop[ch] && !is_seed[ch]) {
                drop[ch] = true;
                grew = true;
              }
          }
        }
      }
      std::vector<std::uint32_t> plevel(n, kInf);
      for (graph::CatId s : st.seeds) plevel[s] = 1;
      changed = true;
      while (changed) {
        changed = false;
        for (graph::CatId c = 0; c < n; ++c) {
          if (plevel[c] == kInf) continue;
          for (graph::CatId ch : g.child_links[c]) {
            if (!st.contains(ch) || drop[ch]) continue;
            if (plevel[c] + 1 < plevel[ch]) {
              plevel[ch] = plevel[c] + 1;
              changed = true;
            }
          }
        }
      }
      graph::Subtree pruned =
          graph::prune_unreachable(st, g, removed, mode, graph::StageTag::rule);
      for (graph::CatId c = 0; c < n && ok; ++c) {
        bool oracle_member = plevel[c] != kInf;
        if (pruned.contains(c) != oracle_member) {
          ok = false;
          detail = "prune membership mismatch";
        } else if (oracle_member && pruned.level[c] != plevel[c]) {
          ok = false;
          detail = "prune level mismatch";
        }
      }
    }
  }
  double elapsed = seconds_since(start);
  if (ok && elapsed >= 30.0) {
    ok = false;
    detail = "suite took " + format_double(elapsed) + "s (budget 30s)";
  }
  report("1. graph oracle equivalence (100 random graphs, n <= 2000, < 30 s)", ok,
         detail.empty() ? format_double(elapsed) + "s" : detail);
}

// ---------------------------------------------------------------------------
// 2. Louvain correctness

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
  rec(1, 0);
}

double oracle_modularity(const std::vector<std::uint32_t>& comm, std::size_t n,
                         const std::vector<prune::Edge>& edges) {
  std::vector<std::vector<double>> adj(n, std::vector<double>(n, 0.0));
  std::vector<double> degree(n, 0.0);
  double m = static_cast<double>(edges.size());
  for (const auto& e : edges) {
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

void criterion_louvain() {
  bool ok = true;
  std::string detail;

  // two triangles joined by one bridge
  std::vector<prune::Edge> edges = {{0, 1}, {1, 2}, {0, 2}, {3, 4},
                                    {4, 5}, {3, 5}, {2, 3}};
  graph::GraphBuilder builder;
  std::vector<std::string> cats, seeds;
  for (int i = 0; i < 6; ++i) {
    cats.push_back("n" + std::to_string(i));
    builder.add_category(cats.back());
    seeds.push_back(cats.back());
  }
  for (const auto& e : edges) builder.add_category_edge(cats[e.u], cats[e.v]);
  graph::LoadSummary sum;
  graph::CategoryGraph g = builder.finish(sum);
  graph::Subtree st = graph::bfs_subtree(g, seeds);
  prune::CommunityAssignment ca = prune::louvain(st, g, 1.0, 3);
  if (ca.community_count != 2) {
    ok = false;
    detail = "expected 2 communities, got " + std::to_string(ca.community_count);
  }
  if (ok && std::abs(ca.modularity - 5.0 / 14.0) > 1e-9) {
    ok = false;
    detail = "modularity " + format_double(ca.modularity) + " != 5/14 within 1e-9";
  }

  // enumeration proves 5/14 is the optimum, and the modularity function
  // matches an independent per-pair oracle on every partition of every
  // n <= 8 fixture within 1e-12.
  if (ok) {
    double best = -1;
    enumerate_partitions(6, [&](const std::vector<std::uint32_t>& comm) {
      best = std::max(best, prune::modularity(comm, 6, edges));
    });
    if (std::abs(best - 5.0 / 14.0) > 1e-12) {
      ok = false;
      detail = "enumerated optimum disagrees with 5/14";
    }
  }
  if (ok) {
    std::vector<std::pair<std::size_t, std::vector<prune::Edge>>> fixtures;
    fixtures.push_back({6, edges});
    std::vector<prune::Edge> cliques8;
    for (std::uint32_t i = 0; i < 4; ++i)
      for (std::uint32_t j = i + 1; j < 4; ++j) {
        cliques8.push_back({i, j});
        cliques8.push_back({i + 4, j + 4});
      }
    cliques8.push_back({3, 4});
    fixtures.push_back({8, cliques8});
    std::vector<prune::Edge> path7;
    for (std::uint32_t i = 0; i + 1 < 7; ++i) path7.push_back({i, i + 1});
    fixtures.push_back({7, path7});
    std::vector<prune::Edge> star6;
    for (std::uint32_t i = 1; i < 6; ++i) star6.push_back({0, i});
    fixtures.push_back({6, star6});
    for (const auto& [n, fedges] : fixtures) {
      if (!ok) break;
      enumerate_partitions(n, [&](const std::vector<std::uint32_t>& comm) {
        if (!ok) return;
        double mine = prune::modularity(comm, n, fedges);
        double oracle = oracle_modularity(comm, n, fedges);
        if (std::abs(mine - oracle) > 1e-12) {
          ok = false;
          detail = "modularity oracle mismatch";
        }
      });
    }
  }
  report("2. louvain: 2 communities at 5/14 +- 1e-9; modularity == oracle on all "
         "partitions (n <= 8, 1e-12)",
         ok, detail);
}

// ---------------------------------------------------------------------------
// 3. Classifier numerics

classify::FeatureVec dense_feature(const std::vector<double>& values) {
  classify::FeatureVec f;
  f.dim = static_cast<std::uint32_t>(values.size());
  for (std::uint32_t i = 0; i < values.size(); ++i)
    if (values[i] != 0.0) f.entries.emplace_back(i, values[i]);
  return f;
}

classify::LabeledSet separable_set(std::size_t per_class, std::uint64_t seed) {
  classify::LabeledSet set;
  Rng rng(seed);
  const double wx = 1.0 / std::sqrt(2.0), wy = -1.0 / std::sqrt(2.0), b = 0.3;
  std::size_t pos = 0, neg = 0;
  graph::CatId next = 0;
  while (pos < per_class || neg < per_class) {
    double x = rng.uniform(-3, 3), y = rng.uniform(-3, 3);
    double side = wx * x + wy * y + b;
    if (std::abs(side) < 0.5) continue;
    bool positive = side > 0;
    if (positive && pos >= per_class) continue;
    if (!positive && neg >= per_class) continue;
    (positive ? pos : neg) += 1;
    set.entries.push_back(
        classify::LabeledExample{next++, dense_feature({x, y}), positive});
  }
  set.positive_count = pos;
  set.negative_count = neg;
  return set;
}

void criterion_classifier() {
  bool ok = true;
  std::string detail;

  // gradient check
  Rng rng(424242);
  double worst = 0;
  for (int probe = 0; probe < 50; ++probe) {
    classify::MlpModel model(6, 8, rng.next_u64());
    std::vector<double> x(6);
    for (auto& v : x) v = rng.uniform(-2, 2);
    classify::FeatureVec f = dense_feature(x);
    bool label = rng.chance(0.5);
    std::vector<double> grad(model.parameter_count(), 0.0);
    model.loss(f, label, &grad);
    const double h = 1e-5;
    for (std::size_t k = 0; k < model.parameter_count(); ++k) {
      double saved = model.parameters()[k];
      model.parameters()[k] = saved + h;
      double up = model.loss(f, label, nullptr);
      model.parameters()[k] = saved - h;
      double down = model.loss(f, label, nullptr);
      model.parameters()[k] = saved;
      double fd = (up - down) / (2 * h);
      double scale = std::max({1e-4, std::abs(fd), std::abs(grad[k])});
      worst = std::max(worst, std::abs(fd - grad[k]) / scale);
    }
  }
  if (worst >= 1e-4) {
    ok = false;
    detail = "max relative gradient error " + format_double(worst);
  }

  classify::MlpConfig cfg;
  cfg.hidden = 16;
  cfg.epochs = 120;
  cfg.batch_size = 16;
  cfg.learning_rate = 0.1;
  cfg.rng_seed = 3;
  double separable_f1 = 0, permuted_f1 = 0;
  if (ok) {
    classify::LabeledSet set = separable_set(100, 21);
    separable_f1 = classify::train_mlp(set, 10, cfg).cv_f1;
    if (separable_f1 < 0.95) {
      ok = false;
      detail = "separable cv F1 " + format_double(separable_f1) + " < 0.95";
    }
  }
  if (ok) {
    classify::LabeledSet set = separable_set(100, 21);
    Rng shuffle_rng(1234);
    std::vector<bool> labels;
    for (const auto& ex : set.entries) labels.push_back(ex.positive);
    shuffle_rng.shuffle(labels);
    for (std::size_t i = 0; i < labels.size(); ++i)
      set.entries[i].positive = labels[i];
    permuted_f1 = classify::train_mlp(set, 10, cfg).cv_f1;
    if (permuted_f1 < 0.4 || permuted_f1 > 0.6) {
      ok = false;
      detail = "permuted cv F1 " + format_double(permuted_f1) + " outside 0.5 +- 0.1";
    }
  }
  report("3. classifier numerics: gradcheck < 1e-4; separable F1 >= 0.95; permuted "
         "F1 = 0.5 +- 0.1",
         ok,
         ok ? "gradcheck " + format_double(worst) + ", separable " +
                  format_double(separable_f1) + ", permuted " +
                  format_double(permuted_f1)
            : detail);
}

// ---------------------------------------------------------------------------
// 4. Matcher oracle equivalence, 10^4 randomized cases

void criterion_matcher() {
  Rng rng(31337);
  std::vector<std::string> vocab = {"alpha", "beta", "gamma", "delta",
                                    "eps",   "zeta", "eta"};
  bool ok = true;
  std::string detail;
  for (int trial = 0; trial < 10000 && ok; ++trial) {
    std::vector<std::string> terms;
    std::size_t n_terms = 1 + rng.below(10);
    for (std::size_t i = 0; i < n_terms; ++i) {
      std::string term;
      std::size_t len = 1 + rng.below(4);
      for (std::size_t j = 0; j < len; ++j) {
        if (j) term.push_back(' ');
        term += vocab[rng.below(vocab.size())];
      }
      terms.push_back(term);
    }
    std::string text;
    std::size_t text_len = rng.below(40);
    for (std::size_t j = 0; j < text_len; ++j) {
      if (j) text.push_back(' ');
      text += vocab[rng.below(vocab.size())];
    }

    keyphrase::CompiledLexicon lex = keyphrase::CompiledLexicon::compile(terms);
    std::set<std::tuple<std::string, std::size_t, std::size_t>> mine;
    for (const auto& m : lex.extract(text).matches)
      for (const auto& occ : m.occurrences)
        mine.insert({m.lemma, occ.begin_token, occ.end_token});

    // naive scan
    std::vector<std::string> text_lemmas = keyphrase::lemmatize_tokens(text);
    std::set<std::vector<std::string>> patterns;
    for (const auto& term : terms) {
      auto lemmas = keyphrase::lemmatize_tokens(term);
      if (!lemmas.empty()) patterns.insert(lemmas);
    }
    std::set<std::tuple<std::string, std::size_t, std::size_t>> oracle;
    for (const auto& pattern : patterns) {
      if (pattern.size() > text_lemmas.size()) continue;
      for (std::size_t s = 0; s + pattern.size() <= text_lemmas.size(); ++s) {
        bool match = true;
        for (std::size_t k = 0; k < pattern.size(); ++k)
          if (text_lemmas[s + k] != pattern[k]) {
            match = false;
            break;
          }
        if (match) {
          std::string key;
          for (std::size_t k = 0; k < pattern.size(); ++k) {
            if (k) key.push_back(' ');
            key += pattern[k];
          }
          oracle.insert({key, s, s + pattern.size()});
        }
      }
    }
    if (mine != oracle) {
      ok = false;
      detail = "discrepancy at trial " + std::to_string(trial);
    }
  }
  report("4. matcher == naive scan on 10^4 randomized (lexicon, text) cases", ok,
         detail);
}

// ---------------------------------------------------------------------------
// 5. Metric exactness

void criterion_metrics() {
  bool ok = true;
  std::string detail;
  keyphrase::Corpus corpus;
  corpus.documents = {
      {"d1", "alpha beta then gamma delta eps",
       {"alpha beta", "gamma", "missing1", "missing2", "missing3"}},
      {"d2", "gamma delta eps", {"absent1", "absent2"}},
      {"d3", "zeta", {"zeta"}},
  };
  keyphrase::CompiledLexicon lex = keyphrase::CompiledLexicon::compile(
      {"alpha beta", "gamma", "delta", "eps", "zeta"});
  keyphrase::EvalReport r = keyphrase::evaluate(corpus, lex);
  auto expect = [&](bool cond, const std::string& what) {
    if (ok && !cond) {
      ok = false;
      detail = what;
    }
  };
  expect(r.precision == 3.0 / 8.0, "precision != 3/8 exactly");
  expect(r.recall == 3.0 / 8.0, "recall != 3/8 exactly");
  expect(r.f1 == 3.0 / 8.0, "f1 != 3/8 exactly");
  expect(r.per_document[0].precision == 0.5 && r.per_document[1].precision == 0.0 &&
             r.per_document[2].precision == 1.0,
         "per-document precisions wrong");

  // stddev two-pass oracle within 1e-12
  double mean = (0.5 + 0.0 + 1.0) / 3.0;
  double var = ((0.5 - mean) * (0.5 - mean) + mean * mean +
                (1.0 - mean) * (1.0 - mean)) /
               3.0;
  expect(std::abs(r.precision_stddev - std::sqrt(var)) <= 1e-12,
         "stddev differs from two-pass oracle");

  // ECDF: values 0, 0.5, 1 with fractions 1/3, 2/3, 1
  expect(r.ecdf.size() == 3, "ecdf size");
  if (ok) {
    expect(r.ecdf[0].value == 0.0 &&
               std::abs(r.ecdf[0].cum_fraction - 1.0 / 3.0) <= 1e-12,
           "ecdf[0]");
    expect(r.ecdf[1].value == 0.5 &&
               std::abs(r.ecdf[1].cum_fraction - 2.0 / 3.0) <= 1e-12,
           "ecdf[1]");
    expect(r.ecdf[2].value == 1.0 && r.ecdf[2].cum_fraction == 1.0, "ecdf[2]");
  }

  if (ok) {
    keyphrase::CompiledLexicon null_lex =
        keyphrase::CompiledLexicon::compile({"never matches anything"});
    keyphrase::EvalReport zero = keyphrase::evaluate(corpus, null_lex);
    keyphrase::ComparisonCounts c = keyphrase::compare_reports(r, zero);
    expect(c.better == 2 && c.equal == 1 && c.worse == 0,
           "compare_reports != better=2 equal=1");
  }
  report("5. metric exactness: P = R = F1 = 3/8; stddev/ECDF oracles (1e-12); "
         "compare better=2 equal=1",
         ok, detail);
}

// ---------------------------------------------------------------------------
// 6. Nested-match behavior on the worked extraction example

void criterion_nested_example() {
  keyphrase::CompiledLexicon lex = keyphrase::CompiledLexicon::compile(
      {"fuzzy neural network", "neural network", "artificial immune system"});
  std::string abstract_text =
      "This study applies a fuzzy neural network and an artificial immune "
      "system to radio frequency identification in warehouse management.";
  keyphrase::ExtractResult r = lex.extract(abstract_text);
  std::set<std::string> found;
  for (const auto& m : r.matches) found.insert(m.lemma);
  bool ok = found == std::set<std::string>{"fuzzy neural network", "neural network",
                                           "artificial immune system"};
  report("6. nested extraction returns all three mini-lexicon phrases", ok,
         ok ? "" : "got " + std::to_string(found.size()) + " patterns");
}

// ---------------------------------------------------------------------------
// 7. End-to-end determinism and planted-truth recovery

std::map<std::string, std::string> artifact_contents(const std::string& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().filename() == ".lock") continue;
    out[fs::relative(entry.path(), dir).string()] = slurp(entry.path().string());
  }
  return out;
}

pipeline::PipelineConfig fixture_config(const std::string& dir, std::uint64_t seed,
                                        int threads) {
  pipeline::PipelineConfig cfg;
  cfg.seeds = {"computation theory", "data systems", "statistical learning"};
  cfg.out_dir = dir + "/out";
  cfg.rng_seed = seed;
  cfg.threads = threads;
  cfg.tsv_titles = dir + "/titles.tsv";
  cfg.tsv_cat_edges = dir + "/cat_edges.tsv";
  cfg.tsv_cat_pages = dir + "/cat_pages.tsv";
  cfg.tsv_redirects = dir + "/redirects.tsv";
  cfg.annotations = dir + "/annotations.tsv";
  cfg.classifier_negatives = dir + "/classifier_negatives.tsv";
  cfg.rules = dir + "/rules.tsv";
  cfg.references = {"refs_a=" + dir + "/refs_a.txt", "refs_b=" + dir + "/refs_b.txt"};
  cfg.corpus = dir + "/corpus.jsonl";
  cfg.tag_text = dir + "/tag_sample.txt";
  cfg.louvain_seed = seed + 3;
  cfg.embedding.dimension = 16;
  cfg.embedding.walks_per_node = 8;
  cfg.embedding.walk_length = 20;
  cfg.embedding.window = 4;
  cfg.embedding.epochs = 3;
  cfg.embedding.rng_seed = seed + 1;
  cfg.mlp.hidden = 32;
  cfg.mlp.epochs = 120;
  cfg.mlp.batch_size = 16;
  cfg.mlp.learning_rate = 0.1;
  cfg.mlp.rng_seed = seed + 2;
  cfg.classifier_threshold = 0.25;
  cfg.core_max_level = 4;
  return cfg;
}

void criterion_end_to_end() {
  auto start = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  std::string base = "/tmp/wikivoc_acceptance_e2e";
  fs::remove_all(base);
  pipeline::FixtureSpec spec;
  spec.rng_seed = 42;
  spec.dir = base;
  pipeline::FixtureTruth truth = pipeline::gen_fixture(spec);

  auto run_once = [&](int threads) {
    fs::remove_all(base + "/out");
    pipeline::PipelineConfig cfg = fixture_config(base, 42, threads);
    pipeline::run_all(cfg);
    return artifact_contents(base + "/out");
  };

  auto run1 = run_once(1);
  auto run2 = run_once(1);
  auto run8 = run_once(8);
  if (run1 != run2) {
    ok = false;
    detail = "two identical runs differ";
  }
  if (ok && run1 != run8) {
    ok = false;
    detail = "thread count changes artifacts";
  }

  if (ok) {
    std::set<std::string> final_set;
    std::istringstream in(run1.at("subtree.rules.tsv"));
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) final_set.insert(line.substr(0, line.find('\t')));
    std::size_t recovered = 0, leaked = 0;
    for (const auto& t : truth.relevant_categories)
      if (final_set.count(t)) ++recovered;
    for (const auto& t : truth.irrelevant_categories)
      if (final_set.count(t)) ++leaked;
    double recovery =
        double(recovered) / double(truth.relevant_categories.size());
    double leakage = double(leaked) / double(truth.irrelevant_categories.size());
    if (recovery < 0.95) {
      ok = false;
      detail = "recovery " + format_double(recovery) + " < 0.95";
    } else if (leakage > 0.05) {
      ok = false;
      detail = "leakage " + format_double(leakage) + " > 0.05";
    } else {
      detail = "recovery " + format_double(recovery) + ", leakage " +
               format_double(leakage);
    }
  }
  double elapsed = seconds_since(start);
  if (ok && elapsed >= 60.0) {
    ok = false;
    detail = "took " + format_double(elapsed) + "s (budget 60s for one run)";
  } else if (ok) {
    detail += ", " + format_double(elapsed) + "s for three runs";
  }
  report("7. end-to-end: byte-identical across runs and threads 1/8; recovery >= "
         "95%, leakage <= 5%, < 60 s",
         ok, detail);
}

// ---------------------------------------------------------------------------
// 8. Dump parsing at scale

struct GeneratedDump {
  std::string sql;
  std::vector<std::vector<std::string>> fields;
};

GeneratedDump generate_dump(std::size_t tuples, std::uint64_t seed, bool keep_fields) {
  Rng rng(seed);
  const std::string nasty = "ab'\"\\\n\tc,() %_;x";
  GeneratedDump out;
  out.sql.reserve(tuples * 40);
  out.sql += "-- adversarial dump\nDROP TABLE IF EXISTS `category`;\n"
             "CREATE TABLE `category` ( `x` int, `note` varchar(10) "
             "COMMENT 'semi;colon' );\n";
  std::size_t emitted = 0;
  while (emitted < tuples) {
    std::size_t batch = std::min<std::size_t>(tuples - emitted, 1 + rng.below(64));
    out.sql += "INSERT INTO `category` VALUES ";
    for (std::size_t t = 0; t < batch; ++t) {
      if (t) out.sql.push_back(',');
      out.sql.push_back('(');
      std::vector<std::string> row;
      for (std::size_t c = 0; c < 5; ++c) {
        if (c) out.sql.push_back(',');
        if (rng.chance(0.3)) {
          std::string num = std::to_string(rng.below(100000));
          out.sql += num;
          if (keep_fields) row.push_back(num);
        } else {
          std::string value;
          std::size_t len = rng.below(10);
          for (std::size_t i = 0; i < len; ++i)
            value.push_back(nasty[rng.below(nasty.size())]);
          out.sql.push_back('\'');
          for (char ch : value) {
            switch (ch) {
              case '\'': out.sql += "\\'"; break;
              case '"': out.sql += "\\\""; break;
              case '\\': out.sql += "\\\\"; break;
              case '\n': out.sql += "\\n"; break;
              case '\t': out.sql += "\\t"; break;
              default: out.sql.push_back(ch);
            }
          }
          out.sql.push_back('\'');
          if (keep_fields) row.push_back(value);
        }
      }
      out.sql.push_back(')');
      if (keep_fields) out.fields.push_back(std::move(row));
    }
    out.sql += ";\n";
    emitted += batch;
  }
  return out;
}

void criterion_dump_parsing() {
  bool ok = true;
  std::string detail;

  // 10^5 adversarial tuples parse to exactly the generator's list
  {
    GeneratedDump dump = generate_dump(100000, 2026, true);
    ingest::SqlDumpParser parser(ingest::ByteSource::from_string(dump.sql),
                                 ingest::TableSchema{ingest::Table::category, 5});
    ingest::RawRecord rec;
    std::size_t i = 0;
    while (parser.next(rec)) {
      if (i >= dump.fields.size() || rec.columns != dump.fields[i]) {
        ok = false;
        detail = "mismatch at tuple " + std::to_string(i);
        break;
      }
      ++i;
    }
    if (ok && i != dump.fields.size()) {
      ok = false;
      detail = "tuple count " + std::to_string(i);
    }
  }

  // 10^6 tuples from a file in < 10 s, streaming (no accumulation)
  double elapsed = 0;
  if (ok) {
    GeneratedDump dump = generate_dump(1000000, 77, false);
    std::string path = "/tmp/wikivoc_acceptance_dump.sql";
    {
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      out << dump.sql;
    }
    auto start = std::chrono::steady_clock::now();
    ingest::SqlDumpParser parser(ingest::ByteSource::open_file(path),
                                 ingest::TableSchema{ingest::Table::category, 5});
    ingest::RawRecord rec;
    std::uint64_t count = 0, checksum = 0;
    while (parser.next(rec)) {
      ++count;
      checksum ^= fnv1a(rec.columns[1]);
    }
    elapsed = seconds_since(start);
    if (count != 1000000) {
      ok = false;
      detail = "parsed " + std::to_string(count) + " of 1e6 tuples";
    } else if (elapsed >= 10.0) {
      ok = false;
      detail = "took " + format_double(elapsed) + "s (budget 10s)";
    }
    fs::remove(path);
    (void)checksum;
  }
  report("8. dump parsing: 10^5 adversarial tuples exact; 10^6 tuples < 10 s "
         "streaming",
         ok, ok ? format_double(elapsed) + "s for 1e6 tuples" : detail);
}

// ---------------------------------------------------------------------------
// 9. Optional large-scale checks (environment-gated)

// Expects WIKIVOC_LARGE_SCALE_DIR to contain an `out/` directory with a
// released vocabulary under out/vocab/ (attach-pages layout) plus
// corpus.jsonl (the full annotated test set). Stage counts from any present
// reports are printed for comparison but not asserted (cluster counts are
// seed-dependent); the headline F1 of the loaded vocabulary must land
// within +-0.01 of 0.090.
void criterion_large_scale() {
  const char* dir = std::getenv("WIKIVOC_LARGE_SCALE_DIR");
  if (!dir) {
    std::printf("SKIP  9. large-scale checks (set WIKIVOC_LARGE_SCALE_DIR with a "
                "released vocabulary and the full corpus)\n");
    return;
  }
  try {
    pipeline::PipelineConfig cfg;
    cfg.out_dir = std::string(dir) + "/out";
    cfg.corpus = std::string(dir) + "/corpus.jsonl";
    cfg.force = true;  // the release was produced elsewhere
    for (const char* stage : {"extract", "filter-manual", "filter-communities",
                              "filter-classifier", "filter-rules", "communities"}) {
      std::string path = cfg.out_dir + "/" + stage + ".report.json";
      if (fs::exists(path))
        std::printf("      stage count report: %s\n", slurp(path).c_str());
    }
    pipeline::run_stage(cfg, pipeline::Stage::evaluate);
    std::string report_json = slurp(cfg.out_dir + "/evaluate.report.json");
    // pull sets.vocab.f1 out of the summary
    std::size_t vocab_pos = report_json.find("\"vocab\"");
    std::size_t f1_pos =
        vocab_pos == std::string::npos ? std::string::npos
                                       : report_json.find("\"f1\":", vocab_pos);
    bool ok = false;
    std::string detail = "no vocab f1 in evaluate.report.json";
    if (f1_pos != std::string::npos) {
      double f1 = std::strtod(report_json.c_str() + f1_pos + 5, nullptr);
      ok = std::abs(f1 - 0.090) <= 0.01;
      detail = "vocab F1 " + format_double(f1) + " vs 0.090 +- 0.01";
    }
    report("9. large-scale: loaded-release F1 within +-0.01 of 0.090", ok, detail);
  } catch (const std::exception& e) {
    report("9. large-scale evaluation", false, e.what());
  }
}

}  // namespace

int main(int, char**) {
  criterion_graph_oracle();
  criterion_louvain();
  criterion_classifier();
  criterion_matcher();
  criterion_metrics();
  criterion_nested_example();
  criterion_end_to_end();
  criterion_dump_parsing();
  criterion_large_scale();
  if (failures) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
