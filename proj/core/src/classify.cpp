#include "wikivoc/classify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <unordered_set>

#include "json.hpp"
#include "wikivoc/keyphrase.hpp"
#include "wikivoc/text.hpp"

namespace wikivoc::classify {

// ---------------------------------------------------------------------------
// Embeddings

void EmbeddingConfig::validate() const {
  if (dimension < 2) throw ConfigError("embedding dimension must be >= 2");
  if (!walks_per_node || !walk_length || !window || !negatives || !epochs)
    throw ConfigError("embedding config values must be positive");
  if (learning_rate <= 0) throw ConfigError("embedding learning rate must be positive");
}

std::uint64_t EmbeddingConfig::config_hash() const {
  std::string repr = std::to_string(dimension) + "|" + std::to_string(walks_per_node) +
                     "|" + std::to_string(walk_length) + "|" + std::to_string(window) +
                     "|" + std::to_string(negatives) + "|" + std::to_string(epochs) +
                     "|" + format_double(learning_rate) + "|" + std::to_string(rng_seed);
  return fnv1a(repr);
}

std::vector<std::vector<CatId>> random_walks(const Subtree& st,
                                             const CategoryGraph& g,
                                             const EmbeddingConfig& cfg) {
  cfg.validate();
  if (st.member_count == 0) throw DataError("random_walks: empty subtree");

  // Undirected neighborhood among members, sorted for determinism.
  std::vector<CatId> members = st.members_sorted();
  std::unordered_map<CatId, std::vector<CatId>> neighbors;
  neighbors.reserve(members.size());
  for (CatId c : members) {
    std::vector<CatId> ns;
    for (CatId p : g.parent_links[c])
      if (st.member[p]) ns.push_back(p);
    for (CatId ch : g.child_links[c])
      if (st.member[ch]) ns.push_back(ch);
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    neighbors.emplace(c, std::move(ns));
  }

  Rng rng(cfg.rng_seed);
  std::vector<std::vector<CatId>> walks;
  walks.reserve(members.size() * cfg.walks_per_node);
  for (std::uint32_t w = 0; w < cfg.walks_per_node; ++w) {
    for (CatId start : members) {
      std::vector<CatId> walk{start};
      CatId cur = start;
      while (walk.size() < cfg.walk_length) {
        const auto& ns = neighbors[cur];
        if (ns.empty()) break;
        cur = ns[rng.below(ns.size())];
        walk.push_back(cur);
      }
      walks.push_back(std::move(walk));
    }
  }
  return walks;
}

EmbeddingMap train_node_embeddings(const std::vector<std::vector<CatId>>& walks,
                                   const EmbeddingConfig& cfg,
                                   EmbeddingTrainInfo* info) {
  cfg.validate();
  if (walks.empty()) throw DataError("train_node_embeddings: empty corpus");

  // Vocabulary and frequencies, dense ids in CatId order.
  std::map<CatId, std::uint64_t> freq;
  for (const auto& walk : walks)
    for (CatId c : walk) ++freq[c];
  std::vector<CatId> vocab;
  vocab.reserve(freq.size());
  std::vector<double> weight;
  for (const auto& [c, f] : freq) {
    vocab.push_back(c);
    weight.push_back(std::pow(static_cast<double>(f), 0.75));
  }
  std::unordered_map<CatId, std::uint32_t> dense;
  for (std::uint32_t i = 0; i < vocab.size(); ++i) dense.emplace(vocab[i], i);
  const std::size_t v = vocab.size();
  const std::uint32_t d = cfg.dimension;

  // Cumulative weights for frequency^0.75 negative sampling.
  std::vector<double> cumulative(v);
  double total = 0;
  for (std::size_t i = 0; i < v; ++i) {
    total += weight[i];
    cumulative[i] = total;
  }
  auto sample_negative = [&](Rng& rng) -> std::uint32_t {
    double r = rng.next_double() * total;
    auto it = std::lower_bound(cumulative.begin(), cumulative.end(), r);
    return static_cast<std::uint32_t>(it - cumulative.begin());
  };

  Rng rng(cfg.rng_seed ^ 0x5eedu);
  std::vector<double> in(v * d), out(v * d, 0.0);
  for (auto& x : in) x = (rng.next_double() - 0.5) / d;

  // Total (center, context) pairs per epoch, for the linear lr decay.
  std::uint64_t pairs_per_epoch = 0;
  for (const auto& walk : walks) {
    for (std::size_t i = 0; i < walk.size(); ++i) {
      std::size_t lo = i > cfg.window ? i - cfg.window : 0;
      std::size_t hi = std::min(walk.size(), i + cfg.window + 1);
      pairs_per_epoch += (hi - lo) - 1;
    }
  }
  const std::uint64_t total_pairs = pairs_per_epoch * cfg.epochs;
  std::uint64_t seen_pairs = 0;
  auto sigmoid = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };

  std::vector<double> grad_center(d);
  if (info) info->epoch_loss.clear();
  for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_loss = 0;
    std::uint64_t epoch_pairs = 0;
    for (const auto& walk : walks) {
      for (std::size_t i = 0; i < walk.size(); ++i) {
        std::uint32_t center = dense.at(walk[i]);
        std::size_t lo = i > cfg.window ? i - cfg.window : 0;
        std::size_t hi = std::min(walk.size(), i + cfg.window + 1);
        for (std::size_t j = lo; j < hi; ++j) {
          if (j == i) continue;
          std::uint32_t context = dense.at(walk[j]);
          double lr = cfg.learning_rate *
                      std::max(1e-4, 1.0 - static_cast<double>(seen_pairs) /
                                               static_cast<double>(total_pairs));
          ++seen_pairs;
          ++epoch_pairs;
          std::fill(grad_center.begin(), grad_center.end(), 0.0);
          double* vc = &in[static_cast<std::size_t>(center) * d];
          // positive pair
          {
            double* uo = &out[static_cast<std::size_t>(context) * d];
            double dot = 0;
            for (std::uint32_t k = 0; k < d; ++k) dot += vc[k] * uo[k];
            double s = sigmoid(dot);
            epoch_loss += -std::log(std::max(1e-12, s));
            double gscale = s - 1.0;  // d(-log sigmoid(x))/dx
            for (std::uint32_t k = 0; k < d; ++k) {
              grad_center[k] += gscale * uo[k];
              uo[k] -= lr * gscale * vc[k];
            }
          }
          for (std::uint32_t neg = 0; neg < cfg.negatives; ++neg) {
            std::uint32_t nid = sample_negative(rng);
            if (nid == context) continue;
            double* uo = &out[static_cast<std::size_t>(nid) * d];
            double dot = 0;
            for (std::uint32_t k = 0; k < d; ++k) dot += vc[k] * uo[k];
            double s = sigmoid(dot);
            epoch_loss += -std::log(std::max(1e-12, 1.0 - s));
            double gscale = s;  // d(-log sigmoid(-x))/dx
            for (std::uint32_t k = 0; k < d; ++k) {
              grad_center[k] += gscale * uo[k];
              uo[k] -= lr * gscale * vc[k];
            }
          }
          for (std::uint32_t k = 0; k < d; ++k) vc[k] -= lr * grad_center[k];
        }
      }
    }
    if (info)
      info->epoch_loss.push_back(epoch_pairs ? epoch_loss / static_cast<double>(epoch_pairs)
                                             : 0.0);
  }

  EmbeddingMap result;
  result.reserve(v);
  for (std::uint32_t i = 0; i < v; ++i) {
    std::vector<float> vec(d);
    for (std::uint32_t k = 0; k < d; ++k)
      vec[k] = static_cast<float>(in[static_cast<std::size_t>(i) * d + k]);
    result.emplace(vocab[i], std::move(vec));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Features

FeatureVec build_feature(const std::string& normalized_title,
                         const std::vector<float>& graph_embedding,
                         std::uint32_t graph_dim) {
  FeatureVec f;
  f.dim = graph_dim + kTextHashDim;
  f.entries.reserve(graph_dim + 3 * normalized_title.size());
  // Both parts unit-scaled so neither dominates the first layer.
  double graph_norm_sq = 0;
  for (std::uint32_t k = 0; k < graph_dim && k < graph_embedding.size(); ++k)
    graph_norm_sq += static_cast<double>(graph_embedding[k]) * graph_embedding[k];
  double graph_inv = graph_norm_sq > 0 ? 0.5 / std::sqrt(graph_norm_sq) : 0.0;
  for (std::uint32_t k = 0; k < graph_dim; ++k) {
    double val = k < graph_embedding.size() ? graph_embedding[k] * graph_inv : 0.0;
    if (val != 0.0) f.entries.emplace_back(k, val);
  }
  // Hashed character 3-5-grams, counted then L2-normalized.
  std::unordered_map<std::uint32_t, double> counts;
  const std::string& t = normalized_title;
  for (std::size_t n = 3; n <= 5; ++n) {
    if (t.size() < n) break;
    for (std::size_t i = 0; i + n <= t.size(); ++i) {
      std::uint64_t h = fnv1a(std::string_view(t).substr(i, n), 0x9e3779b9UL ^ n);
      counts[static_cast<std::uint32_t>(h % kTextHashDim)] += 1.0;
    }
  }
  double norm_sq = 0;
  for (const auto& [idx, val] : counts) norm_sq += val * val;
  if (norm_sq > 0) {
    double inv = 1.0 / std::sqrt(norm_sq);
    std::vector<std::pair<std::uint32_t, double>> text_entries;
    text_entries.reserve(counts.size());
    for (const auto& [idx, val] : counts)
      text_entries.emplace_back(graph_dim + idx, val * inv);
    std::sort(text_entries.begin(), text_entries.end());
    f.entries.insert(f.entries.end(), text_entries.begin(), text_entries.end());
  }
  return f;
}

FeatureSet build_features(const Subtree& st, const CategoryGraph& g,
                          const EmbeddingMap& embeddings, std::uint32_t graph_dim) {
  FeatureSet set;
  set.reserve(st.member_count);
  static const std::vector<float> kZero;
  for (CatId c : st.members_sorted()) {
    auto it = embeddings.find(c);
    set.emplace(c, build_feature(g.category_titles[c],
                                 it == embeddings.end() ? kZero : it->second,
                                 graph_dim));
  }
  return set;
}

// ---------------------------------------------------------------------------
// Training set

LabeledSet assemble_training_set(const Subtree& st, const CategoryGraph& g,
                                 const std::vector<prune::ReferenceTermList>& refs,
                                 const prune::AnnotationSet& negatives,
                                 const FeatureSet& features, std::uint64_t rng_seed,
                                 bool negatives_include_descendants) {
  if (refs.empty()) throw DataError("assemble_training_set: no reference lists");
  for (const auto& [title, relevant] : negatives.labels)
    if (relevant)
      throw DataError("assemble_training_set: annotation file contains a "
                      "'relevant' label ('" + title + "'); only negatives allowed");

  std::unordered_set<std::string> ref_terms = prune::reference_union(refs);
  std::vector<CatId> positives;
  std::vector<bool> is_positive(st.member.size(), false);
  for (CatId c : st.members_sorted()) {
    if (ref_terms.count(keyphrase::lemmatize_phrase(g.category_titles[c]))) {
      positives.push_back(c);
      is_positive[c] = true;
    }
  }
  if (positives.empty()) throw DataError("assemble_training_set: no positive examples");

  // Negative pool: annotated negatives in the subtree plus their in-subtree
  // children (or all descendants when configured), minus positives.
  std::vector<bool> in_pool(st.member.size(), false);
  std::vector<CatId> frontier;
  for (const auto& [title, relevant] : negatives.labels) {
    CatId c = g.category_id(title);
    if (c == graph::kNoCat || !st.contains(c)) continue;
    if (!in_pool[c]) {
      in_pool[c] = true;
      frontier.push_back(c);
    }
  }
  std::vector<CatId> expand = frontier;
  while (!expand.empty()) {
    std::vector<CatId> next;
    for (CatId c : expand) {
      for (CatId ch : g.child_links[c]) {
        if (!st.contains(ch) || in_pool[ch]) continue;
        in_pool[ch] = true;
        if (negatives_include_descendants) next.push_back(ch);
      }
    }
    expand = std::move(next);
  }
  std::vector<CatId> pool;
  for (CatId c = 0; c < in_pool.size(); ++c)
    if (in_pool[c] && !is_positive[c]) pool.push_back(c);

  if (pool.size() < positives.size())
    throw DataError("assemble_training_set: negative pool (" +
                    std::to_string(pool.size()) + ") smaller than positives (" +
                    std::to_string(positives.size()) + ")");

  Rng rng(rng_seed);
  rng.shuffle(pool);
  pool.resize(positives.size());
  std::sort(pool.begin(), pool.end());

  LabeledSet set;
  auto feature_of = [&](CatId c) -> const FeatureVec& {
    auto it = features.find(c);
    if (it == features.end())
      throw DataError("assemble_training_set: no features for '" +
                      g.category_titles[c] + "'");
    return it->second;
  };
  for (CatId c : positives)
    set.entries.push_back(LabeledExample{c, feature_of(c), true});
  for (CatId c : pool)
    set.entries.push_back(LabeledExample{c, feature_of(c), false});
  set.positive_count = positives.size();
  set.negative_count = pool.size();
  return set;
}

// ---------------------------------------------------------------------------
// MLP

struct MlpLayout {
  std::size_t w1 = 0, b1, w2, b2, total;
  std::uint32_t in, hid;

  MlpLayout(std::uint32_t input_dim, std::uint32_t hidden_dim)
      : in(input_dim), hid(hidden_dim) {
    b1 = static_cast<std::size_t>(in) * hid;
    w2 = b1 + hid;
    b2 = w2 + static_cast<std::size_t>(hid) * 2;
    total = b2 + 2;
  }
  std::size_t w1_at(std::uint32_t row, std::uint32_t col) const {
    return static_cast<std::size_t>(row) * hid + col;
  }
  std::size_t w2_at(std::uint32_t row, std::uint32_t col) const {
    return w2 + static_cast<std::size_t>(row) * 2 + col;
  }
};

MlpModel::MlpModel(std::uint32_t input_dim, std::uint32_t hidden_dim,
                   std::uint64_t rng_seed)
    : input_dim_(input_dim), hidden_dim_(hidden_dim) {
  MlpLayout lay(input_dim, hidden_dim);
  params_.assign(lay.total, 0.0);
  Rng rng(rng_seed ^ 0x31fb0cafeULL);
  double scale1 = std::sqrt(6.0 / (input_dim + hidden_dim));
  for (std::size_t i = 0; i < lay.b1; ++i) params_[i] = rng.uniform(-scale1, scale1);
  double scale2 = std::sqrt(6.0 / (hidden_dim + 2));
  for (std::size_t i = lay.w2; i < lay.b2; ++i) params_[i] = rng.uniform(-scale2, scale2);
}

namespace {

std::array<double, 2> softmax2(double z0, double z1) {
  double m = std::max(z0, z1);
  double e0 = std::exp(z0 - m), e1 = std::exp(z1 - m);
  double sum = e0 + e1;
  return {e0 / sum, e1 / sum};
}

}  // namespace

std::array<double, 2> MlpModel::forward(const FeatureVec& x) const {
  if (x.dim != input_dim_)
    throw DataError("predict: feature dimension " + std::to_string(x.dim) +
                    " does not match model input " + std::to_string(input_dim_));
  MlpLayout lay(input_dim_, hidden_dim_);
  std::vector<double> z1(hidden_dim_);
  for (std::uint32_t h = 0; h < hidden_dim_; ++h) z1[h] = params_[lay.b1 + h];
  for (const auto& [idx, val] : x.entries) {
    const double* row = &params_[lay.w1_at(idx, 0)];
    for (std::uint32_t h = 0; h < hidden_dim_; ++h) z1[h] += val * row[h];
  }
  double z2[2] = {params_[lay.b2], params_[lay.b2 + 1]};
  for (std::uint32_t h = 0; h < hidden_dim_; ++h) {
    double a = z1[h] > 0 ? z1[h] : 0;
    z2[0] += a * params_[lay.w2_at(h, 0)];
    z2[1] += a * params_[lay.w2_at(h, 1)];
  }
  return softmax2(z2[0], z2[1]);
}

double MlpModel::loss(const FeatureVec& x, bool positive,
                      std::vector<double>* grad) const {
  if (x.dim != input_dim_)
    throw DataError("loss: feature dimension mismatch");
  MlpLayout lay(input_dim_, hidden_dim_);
  std::vector<double> z1(hidden_dim_);
  for (std::uint32_t h = 0; h < hidden_dim_; ++h) z1[h] = params_[lay.b1 + h];
  for (const auto& [idx, val] : x.entries) {
    const double* row = &params_[lay.w1_at(idx, 0)];
    for (std::uint32_t h = 0; h < hidden_dim_; ++h) z1[h] += val * row[h];
  }
  std::vector<double> a1(hidden_dim_);
  for (std::uint32_t h = 0; h < hidden_dim_; ++h) a1[h] = z1[h] > 0 ? z1[h] : 0;
  double z2[2] = {params_[lay.b2], params_[lay.b2 + 1]};
  for (std::uint32_t h = 0; h < hidden_dim_; ++h) {
    z2[0] += a1[h] * params_[lay.w2_at(h, 0)];
    z2[1] += a1[h] * params_[lay.w2_at(h, 1)];
  }
  auto p = softmax2(z2[0], z2[1]);
  int label = positive ? 1 : 0;
  double loss = -std::log(std::max(1e-300, p[label]));

  if (grad) {
    if (grad->size() != params_.size()) grad->assign(params_.size(), 0.0);
    double dz2[2] = {p[0] - (label == 0 ? 1.0 : 0.0), p[1] - (label == 1 ? 1.0 : 0.0)};
    (*grad)[lay.b2] += dz2[0];
    (*grad)[lay.b2 + 1] += dz2[1];
    std::vector<double> da1(hidden_dim_);
    for (std::uint32_t h = 0; h < hidden_dim_; ++h) {
      (*grad)[lay.w2_at(h, 0)] += a1[h] * dz2[0];
      (*grad)[lay.w2_at(h, 1)] += a1[h] * dz2[1];
      da1[h] = params_[lay.w2_at(h, 0)] * dz2[0] + params_[lay.w2_at(h, 1)] * dz2[1];
    }
    for (std::uint32_t h = 0; h < hidden_dim_; ++h) {
      double dz1 = z1[h] > 0 ? da1[h] : 0.0;
      (*grad)[lay.b1 + h] += dz1;
      if (dz1 != 0.0) {
        for (const auto& [idx, val] : x.entries)
          (*grad)[lay.w1_at(idx, h)] += val * dz1;
      }
    }
  }
  return loss;
}

void MlpModel::apply_gradient(const std::vector<double>& grad, double lr,
                              const std::vector<std::uint32_t>& touched_w1_rows) {
  MlpLayout lay(input_dim_, hidden_dim_);
  for (std::uint32_t row : touched_w1_rows) {
    std::size_t base = lay.w1_at(row, 0);
    for (std::uint32_t h = 0; h < hidden_dim_; ++h)
      params_[base + h] -= lr * grad[base + h];
  }
  for (std::size_t i = lay.b1; i < lay.total; ++i) params_[i] -= lr * grad[i];
}

std::string MlpModel::to_json(std::uint64_t feature_config_hash) const {
  nlohmann::json j;
  j["format"] = "wikivoc-mlp";
  j["version"] = 1;
  j["layers"] = {input_dim_, hidden_dim_, 2};
  j["feature_config_hash"] = hex64(feature_config_hash);
  j["parameters"] = params_;  // row-major W1, b1, W2, b2
  return j.dump(2) + "\n";
}

MlpModel MlpModel::from_json(std::string_view text, std::uint64_t* feature_config_hash) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
  if (j.value("format", "") != "wikivoc-mlp" || j.value("version", 0) != 1)
    throw DataError("model file: unsupported format/version");
  auto layers = j.at("layers").get<std::vector<std::uint32_t>>();
  if (layers.size() != 3 || layers[2] != 2)
    throw DataError("model file: expected [input, hidden, 2] layers");
  MlpModel m;
  m.input_dim_ = layers[0];
  m.hidden_dim_ = layers[1];
  m.params_ = j.at("parameters").get<std::vector<double>>();
  MlpLayout lay(m.input_dim_, m.hidden_dim_);
  if (m.params_.size() != lay.total)
    throw DataError("model file: parameter count mismatch");
  for (double p : m.params_)
    if (!std::isfinite(p)) throw DataError("model file: non-finite parameter");
  if (feature_config_hash) {
    std::string h = j.value("feature_config_hash", "0000000000000000");
    *feature_config_hash = std::stoull(h, nullptr, 16);
  }
  return m;
}

Prediction predict(const MlpModel& model, const FeatureVec& x, double threshold) {
  auto p = model.forward(x);
  return Prediction{p[1] >= threshold, p[1]};
}

// ---------------------------------------------------------------------------
// Cross-validated training

namespace {

// Deals shuffled positives and negatives round-robin so each fold's class
// ratio is within one sample of the global ratio.
std::vector<std::uint32_t> stratified_fold_of(const LabeledSet& set,
                                              std::uint32_t folds, Rng& rng) {
  std::vector<std::uint32_t> pos_idx, neg_idx;
  for (std::uint32_t i = 0; i < set.entries.size(); ++i)
    (set.entries[i].positive ? pos_idx : neg_idx).push_back(i);
  rng.shuffle(pos_idx);
  rng.shuffle(neg_idx);
  std::vector<std::uint32_t> fold_of(set.entries.size());
  for (std::uint32_t i = 0; i < pos_idx.size(); ++i) fold_of[pos_idx[i]] = i % folds;
  for (std::uint32_t i = 0; i < neg_idx.size(); ++i) fold_of[neg_idx[i]] = i % folds;
  return fold_of;
}

}  // namespace

std::vector<std::uint32_t> stratified_folds(const LabeledSet& set,
                                            std::uint32_t folds,
                                            std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  return stratified_fold_of(set, folds, rng);
}

namespace {

MlpModel train_on(const std::vector<const LabeledExample*>& examples,
                  std::uint32_t input_dim, const MlpConfig& cfg, Rng& rng) {
  MlpModel model(input_dim, cfg.hidden, rng.next_u64());
  std::vector<double> grad(model.parameter_count(), 0.0);
  std::vector<std::uint32_t> order(examples.size());
  for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      std::size_t batch_end = std::min(order.size(), b + cfg.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      std::vector<std::uint32_t> touched;
      double batch_loss = 0;
      for (std::size_t k = b; k < batch_end; ++k) {
        const LabeledExample& ex = *examples[order[k]];
        batch_loss += model.loss(ex.features, ex.positive, &grad);
        for (const auto& [idx, val] : ex.features.entries) touched.push_back(idx);
      }
      if (!std::isfinite(batch_loss))
        throw DataError("train_mlp: non-finite loss (check the learning rate)");
      std::sort(touched.begin(), touched.end());
      touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
      double lr = cfg.learning_rate / static_cast<double>(batch_end - b);
      model.apply_gradient(grad, lr, touched);
    }
  }
  return model;
}

double f1_score(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  double denom = static_cast<double>(2 * tp + fp + fn);
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / denom;
}

}  // namespace

TrainResult train_mlp(const LabeledSet& set, std::uint32_t folds, const MlpConfig& cfg) {
  if (folds < 2) throw ConfigError("train_mlp: need at least 2 folds");
  if (set.entries.size() < folds)
    throw DataError("train_mlp: fewer examples than folds");
  std::uint64_t diff = set.positive_count > set.negative_count
                           ? set.positive_count - set.negative_count
                           : set.negative_count - set.positive_count;
  if (diff > 1) throw DataError("train_mlp: training set is not balanced");
  const std::uint32_t input_dim = set.entries.front().features.dim;

  Rng rng(cfg.rng_seed);
  std::vector<std::uint32_t> fold_of = stratified_fold_of(set, folds, rng);

  TrainResult result;
  for (std::uint32_t f = 0; f < folds; ++f) {
    std::vector<const LabeledExample*> train;
    std::vector<const LabeledExample*> held;
    for (std::uint32_t i = 0; i < set.entries.size(); ++i)
      (fold_of[i] == f ? held : train).push_back(&set.entries[i]);
    Rng fold_rng = rng.fork(f + 1);
    MlpModel model = train_on(train, input_dim, cfg, fold_rng);
    std::uint64_t tp = 0, fp = 0, fn = 0;
    for (const LabeledExample* ex : held) {
      bool pred = predict(model, ex->features).positive;
      if (pred && ex->positive) ++tp;
      if (pred && !ex->positive) ++fp;
      if (!pred && ex->positive) ++fn;
    }
    result.fold_f1.push_back(f1_score(tp, fp, fn));
  }
  double sum = 0;
  for (double f1 : result.fold_f1) sum += f1;
  result.cv_f1 = sum / static_cast<double>(folds);

  std::vector<const LabeledExample*> all;
  for (const LabeledExample& ex : set.entries) all.push_back(&ex);
  Rng final_rng = rng.fork(0);
  result.model = train_on(all, input_dim, cfg, final_rng);
  return result;
}

// ---------------------------------------------------------------------------
// Classifier-driven pruning

Subtree filter_by_classifier(const Subtree& st, const CategoryGraph& g,
                             const MlpModel& model, const FeatureSet& features,
                             double threshold,
                             const prune::AnnotationSet* human_labels,
                             graph::PruneStats* stats,
                             std::uint64_t* negative_seeds,
                             std::uint64_t* protected_overrides) {
  std::vector<CatId> removed;
  std::vector<CatId> shielded;  // human-relevant members, also closure-exempt
  std::uint64_t seed_negatives = 0;
  std::uint64_t overrides = 0;
  for (CatId c : st.members_sorted()) {
    auto it = features.find(c);
    if (it == features.end())
      throw DataError("filter_by_classifier: no features for '" +
                      g.category_titles[c] + "'");
    bool human_relevant = false;
    if (human_labels) {
      auto lit = human_labels->labels.find(g.category_titles[c]);
      human_relevant = lit != human_labels->labels.end() && lit->second;
    }
    if (human_relevant) shielded.push_back(c);
    if (!predict(model, it->second, threshold).positive) {
      bool is_seed = std::find(st.seeds.begin(), st.seeds.end(), c) != st.seeds.end();
      if (is_seed) {
        ++seed_negatives;  // seeds are human-vetted, never machine-removed
        continue;
      }
      if (human_relevant) {
        ++overrides;  // human said relevant; the model does not outrank that
        continue;
      }
      removed.push_back(c);
    }
  }
  if (negative_seeds) *negative_seeds = seed_negatives;
  if (protected_overrides) *protected_overrides = overrides;
  return prune_unreachable(st, g, removed, graph::PruneMode::strict_children,
                           StageTag::classifier, stats, &shielded);
}

std::map<std::string, bool> parse_label_overrides(std::string_view text) {
  std::map<std::string, bool> labels;
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
      throw DataError("label override line " + std::to_string(line_no) +
                      ": expected `title<TAB>positive|negative`");
    std::string title = normalize_title(line.substr(0, tab));
    std::string_view label = line.substr(tab + 1);
    bool positive;
    if (label == "positive")
      positive = true;
    else if (label == "negative")
      positive = false;
    else
      throw DataError("label override line " + std::to_string(line_no) +
                      ": unknown label '" + std::string(label) + "'");
    labels[title] = positive;
  }
  return labels;
}

Subtree filter_by_labels(const Subtree& st, const CategoryGraph& g,
                         const std::map<std::string, bool>& labels,
                         graph::PruneStats* stats) {
  std::vector<CatId> removed;
  for (const auto& [title, positive] : labels) {
    if (positive) continue;
    CatId c = g.category_id(title);
    if (c == graph::kNoCat || !st.contains(c)) continue;
    if (std::find(st.seeds.begin(), st.seeds.end(), c) != st.seeds.end()) continue;
    removed.push_back(c);
  }
  return prune_unreachable(st, g, removed, graph::PruneMode::strict_children,
                           StageTag::classifier, stats);
}

}  // namespace wikivoc::classify
