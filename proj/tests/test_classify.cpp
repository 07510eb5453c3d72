#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "wikivoc/catgraph.hpp"
#include "wikivoc/classify.hpp"
#include "wikivoc/common.hpp"
#include "wikivoc/prune.hpp"

using namespace wikivoc;
using namespace wikivoc::graph;
using namespace wikivoc::classify;

namespace {

CategoryGraph build(const std::vector<std::string>& cats,
                    const std::vector<std::pair<std::string, std::string>>& edges) {
  GraphBuilder b;
  for (const auto& c : cats) b.add_category(c);
  for (const auto& [child, parent] : edges) b.add_category_edge(child, parent);
  LoadSummary sum;
  return b.finish(sum);
}

FeatureVec dense_feature(const std::vector<double>& values) {
  FeatureVec f;
  f.dim = static_cast<std::uint32_t>(values.size());
  for (std::uint32_t i = 0; i < values.size(); ++i)
    if (values[i] != 0.0) f.entries.emplace_back(i, values[i]);
  return f;
}

// Two disconnected cliques of `size` nodes each; every node is a seed so the
// membership covers the whole graph.
struct CliqueFixture {
  CategoryGraph g;
  Subtree st;
  std::vector<CatId> clique_a, clique_b;
};

CliqueFixture make_cliques(std::size_t size) {
  CliqueFixture f;
  std::vector<std::string> cats;
  std::vector<std::string> seeds;
  std::vector<std::pair<std::string, std::string>> edges;
  for (std::size_t i = 0; i < 2 * size; ++i) {
    cats.push_back("n" + std::to_string(i));
    seeds.push_back(cats.back());
  }
  for (std::size_t i = 0; i < size; ++i)
    for (std::size_t j = i + 1; j < size; ++j) {
      edges.emplace_back(cats[i], cats[j]);
      edges.emplace_back(cats[size + i], cats[size + j]);
    }
  f.g = build(cats, edges);
  f.st = bfs_subtree(f.g, seeds);
  for (std::size_t i = 0; i < size; ++i) {
    f.clique_a.push_back(f.g.category_id(cats[i]));
    f.clique_b.push_back(f.g.category_id(cats[size + i]));
  }
  return f;
}

double cosine(const std::vector<float>& a, const std::vector<float>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += double(a[i]) * b[i];
    na += double(a[i]) * a[i];
    nb += double(b[i]) * b[i];
  }
  return dot / (std::sqrt(na) * std::sqrt(nb) + 1e-300);
}

struct CliqueCosines {
  double intra, inter;
};

CliqueCosines clique_cosines(const CliqueFixture& f, const EmbeddingMap& emb) {
  double intra = 0, inter = 0;
  std::size_t ni = 0, nx = 0;
  auto& a = f.clique_a;
  auto& b = f.clique_b;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      intra += cosine(emb.at(a[i]), emb.at(a[j]));
      intra += cosine(emb.at(b[i]), emb.at(b[j]));
      ni += 2;
    }
    for (std::size_t j = 0; j < b.size(); ++j) {
      inter += cosine(emb.at(a[i]), emb.at(b[j]));
      ++nx;
    }
  }
  return {intra / double(ni), inter / double(nx)};
}

}  // namespace

TEST_CASE("random_walks: isolated node, forced alternation, determinism") {
  CategoryGraph g1 = build({"lonely"}, {});
  Subtree st1 = bfs_subtree(g1, {"lonely"});
  EmbeddingConfig cfg;
  cfg.dimension = 4;
  cfg.walks_per_node = 3;
  cfg.walk_length = 5;
  auto walks = random_walks(st1, g1, cfg);
  REQUIRE(walks.size() == 3);
  for (const auto& w : walks) CHECK(w.size() == 1);

  // 2-node path: walks alternate between the two nodes
  CategoryGraph g2 = build({"a", "b"}, {{"b", "a"}});
  Subtree st2 = bfs_subtree(g2, {"a"});
  cfg.walk_length = 4;
  auto walks2 = random_walks(st2, g2, cfg);
  for (const auto& w : walks2) {
    REQUIRE(w.size() == 4);
    for (std::size_t i = 1; i < w.size(); ++i) CHECK(w[i] != w[i - 1]);
  }

  // same seed -> identical corpora
  auto again = random_walks(st2, g2, cfg);
  CHECK(walks2 == again);

  // on a branching graph a different seed changes the corpus
  CliqueFixture f = make_cliques(4);
  EmbeddingConfig cfg2;
  cfg2.walk_length = 8;
  auto w1 = random_walks(f.st, f.g, cfg2);
  cfg2.rng_seed = 999;
  auto w2 = random_walks(f.st, f.g, cfg2);
  CHECK(w1 != w2);
}

TEST_CASE("walk count and length bounds hold") {
  CliqueFixture f = make_cliques(5);
  EmbeddingConfig cfg;
  cfg.walks_per_node = 7;
  cfg.walk_length = 9;
  auto walks = random_walks(f.st, f.g, cfg);
  CHECK(walks.size() == 7 * f.st.member_count);
  for (const auto& w : walks) {
    CHECK(w.size() <= 9);
    CHECK(!w.empty());
  }
}

TEST_CASE("embeddings separate disconnected cliques") {
  CliqueFixture f = make_cliques(6);
  EmbeddingConfig cfg;
  cfg.dimension = 8;
  cfg.walks_per_node = 10;
  cfg.walk_length = 12;
  cfg.window = 3;
  cfg.epochs = 4;
  cfg.rng_seed = 42;
  auto walks = random_walks(f.st, f.g, cfg);
  EmbeddingTrainInfo info;
  EmbeddingMap emb = train_node_embeddings(walks, cfg, &info);
  REQUIRE(emb.size() == f.st.member_count);
  for (const auto& [id, v] : emb)
    for (float x : v) CHECK(std::isfinite(x));

  CliqueCosines c = clique_cosines(f, emb);
  CHECK(c.intra > c.inter);

  // epoch-averaged loss decreases from first to last epoch
  REQUIRE(info.epoch_loss.size() == 4);
  for (double l : info.epoch_loss) CHECK(std::isfinite(l));
  CHECK(info.epoch_loss.back() < info.epoch_loss.front());

  // a different seed gives different vectors but the same separation
  cfg.rng_seed = 777;
  auto walks2 = random_walks(f.st, f.g, cfg);
  EmbeddingMap emb2 = train_node_embeddings(walks2, cfg);
  CHECK(emb.at(f.clique_a[0]) != emb2.at(f.clique_a[0]));
  CliqueCosines c2 = clique_cosines(f, emb2);
  CHECK(c2.intra > c2.inter);
}

TEST_CASE("tiny corpus trains to finite vectors") {
  CategoryGraph g = build({"a", "b"}, {{"b", "a"}});
  Subtree st = bfs_subtree(g, {"a"});
  EmbeddingConfig cfg;
  cfg.dimension = 2;
  cfg.epochs = 1;
  cfg.walks_per_node = 2;
  cfg.walk_length = 4;
  auto emb = train_node_embeddings(random_walks(st, g, cfg), cfg);
  for (const auto& [id, v] : emb)
    for (float x : v) CHECK(std::isfinite(x));
}

TEST_CASE("feature vectors: text part has unit or zero norm") {
  FeatureVec f = build_feature("machine learning", {}, 0);
  double norm = 0;
  for (const auto& [idx, val] : f.entries) norm += val * val;
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-9));

  FeatureVec tiny = build_feature("ab", {}, 0);  // too short for 3-grams
  CHECK(tiny.entries.empty());

  // identical titles hash identically; entries sorted by index
  FeatureVec f2 = build_feature("machine learning", {}, 0);
  CHECK(f.entries == f2.entries);
  for (std::size_t i = 1; i < f.entries.size(); ++i)
    CHECK(f.entries[i].first > f.entries[i - 1].first);
}

TEST_CASE("assemble_training_set: fixture counts and precedence") {
  // 4 ref-matching members; 2 annotated negatives, each with children.
  CategoryGraph g = build(
      {"s", "p1", "p2", "p3", "p4", "neg1", "neg2", "n1", "n2", "n3", "n4",
       "n5", "n6", "n7", "n8"},
      {{"p1", "s"}, {"p2", "s"}, {"p3", "s"}, {"p4", "s"}, {"neg1", "s"},
       {"neg2", "s"}, {"n1", "neg1"}, {"n2", "neg1"}, {"n3", "neg1"},
       {"n4", "neg2"}, {"n5", "neg2"}, {"n6", "neg2"}, {"n7", "s"},
       {"n8", "s"}});
  Subtree st = bfs_subtree(g, {"s"});
  prune::ReferenceTermList refs;
  refs.name = "r";
  refs.terms = {"p1", "p2", "p3", "p4"};
  prune::AnnotationSet negatives;
  negatives.labels = {{"neg1", false}, {"neg2", false}};
  EmbeddingMap emb;  // empty embeddings; text features only
  FeatureSet features = build_features(st, g, emb, 4);

  LabeledSet set = assemble_training_set(st, g, {refs}, negatives, features, 9);
  CHECK(set.positive_count == 4);
  CHECK(set.negative_count == 4);  // sampled from pool of 8 (2 negatives + 6 kids)
  std::set<CatId> ids;
  for (const auto& ex : set.entries) CHECK(ids.insert(ex.id).second);

  // determinism in the seed; positives independent of it
  LabeledSet again = assemble_training_set(st, g, {refs}, negatives, features, 9);
  REQUIRE(again.entries.size() == set.entries.size());
  for (std::size_t i = 0; i < set.entries.size(); ++i)
    CHECK(again.entries[i].id == set.entries[i].id);
  LabeledSet other = assemble_training_set(st, g, {refs}, negatives, features, 10);
  std::set<CatId> pos1, pos2;
  for (const auto& ex : set.entries)
    if (ex.positive) pos1.insert(ex.id);
  for (const auto& ex : other.entries)
    if (ex.positive) pos2.insert(ex.id);
  CHECK(pos1 == pos2);

  // a ref-matching annotated negative counts as positive, excluded from pool
  prune::ReferenceTermList refs2;
  refs2.name = "r2";
  refs2.terms = {"p1", "p2", "p3", "p4", "neg1"};
  LabeledSet overlap =
      assemble_training_set(st, g, {refs2}, negatives, features, 9);
  CHECK(overlap.positive_count == 5);
  for (const auto& ex : overlap.entries)
    if (ex.id == g.category_id("neg1")) CHECK(ex.positive);
}

TEST_CASE("assemble_training_set error paths") {
  CategoryGraph g = build({"s", "a", "neg"}, {{"a", "s"}, {"neg", "s"}});
  Subtree st = bfs_subtree(g, {"s"});
  EmbeddingMap emb;
  FeatureSet features = build_features(st, g, emb, 4);
  prune::AnnotationSet negatives;
  negatives.labels = {{"neg", false}};

  prune::ReferenceTermList no_match;
  no_match.name = "r";
  no_match.terms = {"absent"};
  CHECK_THROWS_AS(assemble_training_set(st, g, {no_match}, negatives, features, 1),
                  DataError);

  prune::ReferenceTermList two;
  two.name = "r";
  two.terms = {"a", "s"};  // 2 positives, pool of 1
  CHECK_THROWS_AS(assemble_training_set(st, g, {two}, negatives, features, 1),
                  DataError);

  prune::AnnotationSet bad;
  bad.labels = {{"neg", true}};  // relevant label not allowed here
  prune::ReferenceTermList one;
  one.name = "r";
  one.terms = {"a"};
  CHECK_THROWS_AS(assemble_training_set(st, g, {one}, bad, features, 1), DataError);
}

TEST_CASE("softmax output sums to one for extreme inputs") {
  MlpModel model(4, 8, 123);
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> x(4);
    for (auto& v : x) v = rng.uniform(-100, 100);
    auto p = model.forward(dense_feature(x));
    CHECK(std::abs(p[0] + p[1] - 1.0) <= 1e-9);
    CHECK(p[0] >= 0.0);
    CHECK(p[1] >= 0.0);
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(314);
  double worst = 0;
  for (int probe = 0; probe < 50; ++probe) {
    MlpModel model(6, 8, rng.next_u64());
    std::vector<double> x(6);
    for (auto& v : x) v = rng.uniform(-2, 2);
    FeatureVec f = dense_feature(x);
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
  CHECK(worst < 1e-4);
}

namespace {

struct Synthetic {
  LabeledSet set;
};

// 2-D linearly separable set with margin >= 1.0 between the classes.
Synthetic separable_set(std::size_t per_class, std::uint64_t seed) {
  Synthetic s;
  Rng rng(seed);
  const double wx = 1.0 / std::sqrt(2.0), wy = -1.0 / std::sqrt(2.0), b = 0.3;
  std::size_t pos = 0, neg = 0;
  CatId next_id = 0;
  while (pos < per_class || neg < per_class) {
    double x = rng.uniform(-3, 3), y = rng.uniform(-3, 3);
    double side = wx * x + wy * y + b;
    if (std::abs(side) < 0.5) continue;  // enforce the margin
    bool positive = side > 0;
    if (positive && pos >= per_class) continue;
    if (!positive && neg >= per_class) continue;
    (positive ? pos : neg) += 1;
    s.set.entries.push_back(
        LabeledExample{next_id++, dense_feature({x, y}), positive});
  }
  s.set.positive_count = pos;
  s.set.negative_count = neg;
  return s;
}

}  // namespace

TEST_CASE("10-fold CV on the separable synthetic set reaches F1 >= 0.95") {
  Synthetic s = separable_set(100, 21);
  MlpConfig cfg;
  cfg.hidden = 16;
  cfg.epochs = 120;
  cfg.batch_size = 16;
  cfg.learning_rate = 0.1;
  cfg.rng_seed = 3;
  TrainResult r = train_mlp(s.set, 10, cfg);
  CHECK(r.cv_f1 >= 0.95);
  // the retrained model classifies fresh points from the same law
  Synthetic holdout = separable_set(25, 99);
  std::size_t correct = 0;
  for (const auto& ex : holdout.set.entries)
    if (predict(r.model, ex.features).positive == ex.positive) ++correct;
  CHECK(double(correct) / holdout.set.entries.size() >= 0.95);
}

TEST_CASE("10-fold CV on permuted labels sits near 0.5") {
  Synthetic s = separable_set(100, 21);
  Rng rng(1234);
  std::vector<bool> labels;
  for (const auto& ex : s.set.entries) labels.push_back(ex.positive);
  rng.shuffle(labels);
  for (std::size_t i = 0; i < labels.size(); ++i) s.set.entries[i].positive = labels[i];

  MlpConfig cfg;
  cfg.hidden = 16;
  cfg.epochs = 120;
  cfg.batch_size = 16;
  cfg.learning_rate = 0.1;
  cfg.rng_seed = 3;
  TrainResult r = train_mlp(s.set, 10, cfg);
  CHECK(r.cv_f1 >= 0.4);
  CHECK(r.cv_f1 <= 0.6);
}

TEST_CASE("stratified folds partition exactly with per-fold class balance") {
  Rng trial_rng(64);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t pos = 5 + trial_rng.below(80);
    std::size_t neg = 5 + trial_rng.below(80);
    std::uint32_t folds = 2 + static_cast<std::uint32_t>(trial_rng.below(9));
    if (pos + neg < folds) continue;
    LabeledSet set;
    CatId next = 0;
    for (std::size_t i = 0; i < pos; ++i)
      set.entries.push_back(LabeledExample{next++, dense_feature({1.0}), true});
    for (std::size_t i = 0; i < neg; ++i)
      set.entries.push_back(LabeledExample{next++, dense_feature({1.0}), false});
    set.positive_count = pos;
    set.negative_count = neg;

    auto fold_of = stratified_folds(set, folds, trial);
    REQUIRE(fold_of.size() == set.entries.size());
    std::vector<std::size_t> fold_pos(folds, 0), fold_neg(folds, 0);
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
      REQUIRE(fold_of[i] < folds);
      (set.entries[i].positive ? fold_pos : fold_neg)[fold_of[i]] += 1;
    }
    // partition is exact and each class spreads within one sample per fold
    std::size_t total = 0;
    for (std::uint32_t f = 0; f < folds; ++f) total += fold_pos[f] + fold_neg[f];
    CHECK(total == pos + neg);
    auto spread = [](const std::vector<std::size_t>& counts) {
      auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
      return *hi - *lo;
    };
    CHECK(spread(fold_pos) <= 1);
    CHECK(spread(fold_neg) <= 1);
  }
  // and train_mlp reports one F1 per fold
  Synthetic s = separable_set(50, 8);
  MlpConfig cfg;
  cfg.epochs = 1;
  cfg.hidden = 4;
  cfg.rng_seed = 17;
  TrainResult r = train_mlp(s.set, 10, cfg);
  CHECK(r.fold_f1.size() == 10);
}

TEST_CASE("train_mlp validates inputs") {
  Synthetic s = separable_set(3, 8);
  MlpConfig cfg;
  CHECK_THROWS_AS(train_mlp(s.set, 20, cfg), DataError);  // fewer examples than folds
  s.set.entries.pop_back();
  s.set.negative_count -= 1;
  s.set.entries.pop_back();
  s.set.negative_count -= 1;
  CHECK_THROWS_AS(train_mlp(s.set, 2, cfg), DataError);  // unbalanced
}

TEST_CASE("predict: class order, threshold, tie rule, dimension mismatch") {
  // force known softmax outputs by constructing a model with zero weights:
  // probabilities are then (0.5, 0.5) and the >= tie rule labels positive.
  MlpModel model(2, 2, 1);
  std::fill(model.parameters().begin(), model.parameters().end(), 0.0);
  Prediction p = predict(model, dense_feature({1.0, 2.0}), 0.5);
  CHECK(p.probability == doctest::Approx(0.5));
  CHECK(p.positive);  // exactly at threshold -> positive

  // outputs (0.8, 0.2) -> negative; (0.2, 0.8) -> positive with p = 0.8:
  // softmax with b2 = (ln 4, 0) gives exactly (0.8, 0.2).
  model.parameters()[model.parameter_count() - 2] = std::log(4.0);  // b2[0]
  p = predict(model, dense_feature({1.0, 2.0}), 0.5);
  CHECK(p.probability == doctest::Approx(0.2).epsilon(1e-12));
  CHECK_FALSE(p.positive);
  model.parameters()[model.parameter_count() - 2] = 0.0;
  model.parameters()[model.parameter_count() - 1] = std::log(4.0);  // b2[1]
  p = predict(model, dense_feature({1.0, 2.0}), 0.5);
  CHECK(p.probability == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(p.positive);
  model.parameters()[model.parameter_count() - 1] = 0.0;

  // bias the output layer toward class 1 (positive is index 1)
  model.parameters()[model.parameter_count() - 1] = 2.0;
  p = predict(model, dense_feature({1.0, 2.0}), 0.5);
  CHECK(p.probability > 0.5);
  CHECK(p.positive);
  // and toward class 0
  model.parameters()[model.parameter_count() - 1] = -2.0;
  p = predict(model, dense_feature({1.0, 2.0}), 0.5);
  CHECK(p.probability < 0.5);
  CHECK_FALSE(p.positive);

  CHECK_THROWS_AS(predict(model, dense_feature({1.0, 2.0, 3.0})), DataError);
}

TEST_CASE("model JSON round-trip preserves parameters exactly") {
  MlpModel model(5, 3, 77);
  std::string json_text = model.to_json(0xabcdef12345ULL);
  std::uint64_t hash = 0;
  MlpModel back = MlpModel::from_json(json_text, &hash);
  CHECK(hash == 0xabcdef12345ULL);
  CHECK(back.parameters() == model.parameters());
  CHECK(back.input_dim() == 5);
  CHECK(back.hidden_dim() == 3);
  CHECK_THROWS_AS(MlpModel::from_json("{}", nullptr), DataError);
}

TEST_CASE("filter_by_classifier: all-positive model changes nothing") {
  CategoryGraph g = build({"s", "a", "b"}, {{"a", "s"}, {"b", "a"}});
  Subtree st = bfs_subtree(g, {"s"});
  EmbeddingMap emb;
  FeatureSet features = build_features(st, g, emb, 2);
  MlpModel model(2 + kTextHashDim, 2, 1);
  std::fill(model.parameters().begin(), model.parameters().end(), 0.0);
  // zero model emits p = 0.5 everywhere; threshold 0.5 keeps all (>= rule)
  Subtree out = filter_by_classifier(st, g, model, features, 0.5);
  CHECK(out.member_count == st.member_count);
}

TEST_CASE("filter_by_classifier removes negatives with strict children") {
  // s -> x -> c1, c2; c2 also child of s-side node k (reachable elsewhere)
  CategoryGraph g = build({"s", "x", "c1", "c2", "k"},
                          {{"x", "s"}, {"c1", "x"}, {"c2", "x"}, {"k", "s"},
                           {"c2", "k"}});
  Subtree st = bfs_subtree(g, {"s"});
  EmbeddingMap emb;
  FeatureSet features = build_features(st, g, emb, 2);
  // model predicting negative for everything (bias toward class 0)
  MlpModel model(2 + kTextHashDim, 2, 1);
  std::fill(model.parameters().begin(), model.parameters().end(), 0.0);
  model.parameters()[model.parameter_count() - 2] = 10.0;  // b2[0]

  // "x" predicted negative and removed; c1, c2 fall in the strict closure;
  // seeds are exempt; "k" is protected by a human 'relevant' annotation.
  prune::AnnotationSet human;
  human.labels = {{"k", true}};
  graph::PruneStats stats;
  std::uint64_t negative_seeds = 0, overrides = 0;
  Subtree out = filter_by_classifier(st, g, model, features, 0.5, &human, &stats,
                                     &negative_seeds, &overrides);
  CHECK(negative_seeds == 1);
  CHECK(overrides == 1);
  std::set<std::string> survivors;
  for (CatId c : out.members_sorted()) survivors.insert(g.category_titles[c]);
  CHECK(survivors == std::set<std::string>{"s", "k"});
}

TEST_CASE("label overrides replace the model") {
  CategoryGraph g = build({"s", "a", "b"}, {{"a", "s"}, {"b", "s"}});
  Subtree st = bfs_subtree(g, {"s"});
  auto labels = parse_label_overrides("a\tnegative\nb\tpositive\n");
  Subtree out = filter_by_labels(st, g, labels);
  std::set<std::string> survivors;
  for (CatId c : out.members_sorted()) survivors.insert(g.category_titles[c]);
  CHECK(survivors == std::set<std::string>{"s", "b"});
  CHECK_THROWS_AS(parse_label_overrides("a\tmaybe\n"), DataError);
}
