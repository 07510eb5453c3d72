#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "wikivoc/catgraph.hpp"
#include "wikivoc/common.hpp"
#include "wikivoc/prune.hpp"

namespace wikivoc::classify {

using graph::CatId;
using graph::CategoryGraph;
using graph::StageTag;
using graph::Subtree;

struct EmbeddingConfig {
  std::uint32_t dimension = 64;
  std::uint32_t walks_per_node = 10;
  std::uint32_t walk_length = 40;
  std::uint32_t window = 5;
  std::uint32_t negatives = 5;
  std::uint32_t epochs = 3;
  double learning_rate = 0.025;  // linearly decayed
  std::uint64_t rng_seed = 1;

  void validate() const;
  std::uint64_t config_hash() const;
};

// Uniform first-order walks over the undirected projection of parent-child
// links among members. Exactly walks_per_node walks per member; a walk
// stops early only at a neighborless node. Reproducible given rng_seed.
std::vector<std::vector<CatId>> random_walks(const Subtree& st,
                                             const CategoryGraph& g,
                                             const EmbeddingConfig& cfg);

using EmbeddingMap = std::unordered_map<CatId, std::vector<float>>;

struct EmbeddingTrainInfo {
  std::vector<double> epoch_loss;  // mean pair loss per epoch
};

// Skip-gram with negative sampling over the walk corpus; negatives drawn
// proportional to frequency^0.75. Single-threaded, deterministic given
// cfg.rng_seed.
EmbeddingMap train_node_embeddings(const std::vector<std::vector<CatId>>& walks,
                                   const EmbeddingConfig& cfg,
                                   EmbeddingTrainInfo* info = nullptr);

// Sparse feature vector: [0, graph_dim) dense graph embedding entries,
// [graph_dim, graph_dim + 2^16) hashed character 3-5-gram counts of the
// normalized title, L2-normalized.
struct FeatureVec {
  std::vector<std::pair<std::uint32_t, double>> entries;  // sorted by index
  std::uint32_t dim = 0;
};

constexpr std::uint32_t kTextHashDim = 1u << 16;

FeatureVec build_feature(const std::string& normalized_title,
                         const std::vector<float>& graph_embedding,
                         std::uint32_t graph_dim);

using FeatureSet = std::unordered_map<CatId, FeatureVec>;

FeatureSet build_features(const Subtree& st, const CategoryGraph& g,
                          const EmbeddingMap& embeddings, std::uint32_t graph_dim);

struct LabeledExample {
  CatId id;
  FeatureVec features;
  bool positive;
};

struct LabeledSet {
  std::vector<LabeledExample> entries;
  std::uint64_t positive_count = 0;
  std::uint64_t negative_count = 0;
};

// Positives: members whose lemmatized title is in the reference union.
// Negative pool: annotated-irrelevant members plus their in-subtree
// children (direct by default), minus positives; down-sampled without
// replacement to |positives| (seeded).
LabeledSet assemble_training_set(const Subtree& st, const CategoryGraph& g,
                                 const std::vector<prune::ReferenceTermList>& refs,
                                 const prune::AnnotationSet& negatives,
                                 const FeatureSet& features, std::uint64_t rng_seed,
                                 bool negatives_include_descendants = false);

struct MlpConfig {
  std::uint32_t hidden = 128;
  std::uint32_t epochs = 60;
  std::uint32_t batch_size = 32;
  double learning_rate = 0.05;
  std::uint64_t rng_seed = 1;
};

// Two-layer perceptron: ReLU hidden, softmax output (class 1 = positive),
// cross-entropy loss, mini-batch SGD. All parameters finite; softmax sums
// to 1 within 1e-9 (log-sum-exp stabilized).
class MlpModel {
public:
  MlpModel() = default;
  MlpModel(std::uint32_t input_dim, std::uint32_t hidden_dim, std::uint64_t rng_seed);

  std::uint32_t input_dim() const { return input_dim_; }
  std::uint32_t hidden_dim() const { return hidden_dim_; }

  // Softmax probabilities (2 entries, class 1 = positive). Throws on
  // feature dimension mismatch.
  std::array<double, 2> forward(const FeatureVec& x) const;

  // Cross-entropy loss of one example; when grad != nullptr, accumulates
  // analytic gradients (same layout as parameters()).
  double loss(const FeatureVec& x, bool positive, std::vector<double>* grad) const;

  // Flat parameter view, layout: W1 (input x hidden, row-major), b1,
  // W2 (hidden x 2, row-major), b2.
  std::vector<double>& parameters() { return params_; }
  const std::vector<double>& parameters() const { return params_; }
  std::size_t parameter_count() const { return params_.size(); }

  void apply_gradient(const std::vector<double>& grad, double lr,
                      const std::vector<std::uint32_t>& touched_w1_rows);

  std::string to_json(std::uint64_t feature_config_hash) const;
  static MlpModel from_json(std::string_view text, std::uint64_t* feature_config_hash);

private:
  friend struct MlpLayout;
  std::uint32_t input_dim_ = 0;
  std::uint32_t hidden_dim_ = 0;
  std::vector<double> params_;
};

struct Prediction {
  bool positive;
  double probability;  // positive-class probability
};

// label = positive iff probability >= threshold.
Prediction predict(const MlpModel& model, const FeatureVec& x, double threshold = 0.5);

struct TrainResult {
  MlpModel model;
  double cv_f1 = 0.0;
  std::vector<double> fold_f1;  // one per fold
};

// Seeded stratified fold assignment (entry index -> fold). Folds partition
// the set exactly; each fold's class ratio is within one sample of the
// global ratio.
std::vector<std::uint32_t> stratified_folds(const LabeledSet& set,
                                            std::uint32_t folds,
                                            std::uint64_t rng_seed);

// Stratified seeded k-fold cross-validation (mean positive-class F1 over
// held-out folds), then a final retrain on the full set. Non-finite loss
// raises DataError.
TrainResult train_mlp(const LabeledSet& set, std::uint32_t folds,
                      const MlpConfig& cfg);

// Members predicted negative are removed with strict_children propagation.
// Seeds are never removed (predicted-negative seeds are counted instead),
// and members carrying an explicit human `relevant` annotation outrank the
// model (counted in `protected_overrides`).
Subtree filter_by_classifier(const Subtree& st, const CategoryGraph& g,
                             const MlpModel& model, const FeatureSet& features,
                             double threshold = 0.5,
                             const prune::AnnotationSet* human_labels = nullptr,
                             graph::PruneStats* stats = nullptr,
                             std::uint64_t* negative_seeds = nullptr,
                             std::uint64_t* protected_overrides = nullptr);

// External label override for the classifier stage (TSV
// `title<TAB>positive|negative`): listed negatives are removed, everything
// else is kept.
Subtree filter_by_labels(const Subtree& st, const CategoryGraph& g,
                         const std::map<std::string, bool>& labels,
                         graph::PruneStats* stats = nullptr);

std::map<std::string, bool> parse_label_overrides(std::string_view text);

}  // namespace wikivoc::classify
