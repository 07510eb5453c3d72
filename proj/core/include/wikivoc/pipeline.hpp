#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wikivoc/catgraph.hpp"
#include "wikivoc/classify.hpp"
#include "wikivoc/common.hpp"
#include "wikivoc/keyphrase.hpp"
#include "wikivoc/prune.hpp"
#include "wikivoc/vocab.hpp"

namespace wikivoc::pipeline {

// One stage process at a time per output directory; stages communicate only
// through on-disk artifacts, each carrying the config hash and seeds that
// produced it.

enum class Stage {
  ingest,
  extract,
  filter_manual,
  communities,
  filter_communities,
  train_classifier,
  filter_classifier,
  filter_rules,
  attach_pages,
  compare,
  evaluate,
  coverage,
  tag,
};

const char* stage_name(Stage s);
Stage stage_from_name(std::string_view name);
std::vector<Stage> all_stages();

struct PipelineConfig {
  // raw inputs: either SQL dumps or normalized TSVs
  std::string sql_category;
  std::string sql_categorylinks;
  std::string sql_page;
  std::string tsv_titles;
  std::string tsv_cat_edges;
  std::string tsv_cat_pages;
  std::string tsv_redirects;

  std::vector<std::string> seeds = {"computer science", "information science",
                                    "computer engineering", "statistics",
                                    "mathematics"};

  std::string annotations;            // manual stage labels
  std::string classifier_negatives;   // irrelevant-only labels for training
  std::string label_overrides;        // optional external classifier labels
  std::string rules;
  std::vector<std::string> references;  // name=path entries
  std::string corpus;
  std::string tag_text;
  std::vector<std::string> sample_variants;  // name=path snapshot TSVs
  std::string sample_annotations;
  std::string out_dir = "out";

  bool stage_manual = true;
  bool stage_communities = true;
  bool stage_classifier = true;
  bool stage_rules = true;

  std::uint32_t annotation_max_level = 3;
  double louvain_resolution = 1.0;
  std::uint64_t louvain_seed = 7;
  classify::EmbeddingConfig embedding;
  classify::MlpConfig mlp;
  std::uint32_t cv_folds = 10;
  double classifier_threshold = 0.5;
  bool classifier_negatives_descendants = false;
  std::uint32_t core_max_level = 7;
  std::uint32_t redirect_bound = 5;
  bool strict_children = false;  // propagation mode for manual/community/rule stages
  bool eval_prune_unigrams = false;
  int threads = 1;
  std::uint64_t rng_seed = 42;
  bool force = false;  // accept mixed-provenance artifacts

  void validate() const;  // referenced files must exist
  std::uint64_t config_hash() const;
  graph::PruneMode default_mode() const {
    return strict_children ? graph::PruneMode::strict_children
                           : graph::PruneMode::reachability;
  }
};

// Runs one stage; writes its artifact(s) plus `<stage>.report.json` in
// out_dir. Re-running with unchanged inputs is byte-identical. Missing
// prerequisites raise DataError naming the stage to run first; provenance
// mismatches raise DataError unless cfg.force.
void run_stage(const PipelineConfig& cfg, Stage stage);

// All enabled stages in order (evaluation stages only where inputs exist).
void run_all(const PipelineConfig& cfg);

// ---- interactive annotation review ------------------------------------------

struct ReviewOptions {
  std::string snapshot_path;     // subtree snapshot to sample from
  std::string annotations_path;  // appended in place
  std::size_t sample_size = 20;
  std::uint64_t rng_seed = 42;
  std::string answers_path;  // scripted answers; required when not a tty
};

struct ReviewOutcome {
  std::size_t presented = 0;
  std::size_t labeled = 0;
  std::size_t skipped = 0;
};

// Presents a seeded random sample of unlabeled member titles (with level
// and parent context); accepts relevant / irrelevant / skip; appends to the
// annotation TSV. Resumable: already-labeled titles are never re-sampled.
ReviewOutcome annotate_review(const PipelineConfig& cfg, const ReviewOptions& opts,
                              std::istream& in, std::ostream& out,
                              bool input_is_terminal);

// ---- sample-based category-set evaluation ------------------------------------

void run_sample_eval(const PipelineConfig& cfg);

// ---- fixture generation -------------------------------------------------------

struct FixtureSpec {
  std::uint32_t categories = 200;
  std::uint32_t pages = 500;
  std::uint32_t documents = 30;
  std::uint64_t rng_seed = 42;
  std::string dir = "fixture";
};

struct FixtureTruth {
  std::vector<std::string> relevant_categories;
  std::vector<std::string> irrelevant_categories;
};

// Synthetic dataset with planted relevant/irrelevant branches, cycles,
// pages, redirects, a gold corpus, and the planted truth. Also writes a
// ready-to-run pipeline config (`pipeline.toml`) pointing at the files.
FixtureTruth gen_fixture(const FixtureSpec& spec);

// ---- shared helpers (used by stages, tools and tests) ------------------------

graph::CategoryGraph load_graph_artifacts(const PipelineConfig& cfg,
                                          graph::LoadSummary* summary = nullptr);

std::string snapshot_path_for(const PipelineConfig& cfg, Stage producer);

// The snapshot a consumer stage reads: the nearest enabled producer before
// `consumer` in pipeline order.
std::string input_snapshot_for(const PipelineConfig& cfg, Stage consumer);

std::vector<prune::ReferenceTermList> load_references(const PipelineConfig& cfg);

std::uint64_t file_hash(const std::string& path);

}  // namespace wikivoc::pipeline
