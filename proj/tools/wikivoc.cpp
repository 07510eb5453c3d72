// wikivoc: build and evaluate hierarchical subject-heading vocabularies from
// a crowd-sourced category tree.
//
// Pipeline stages run one at a time against an output directory and
// communicate only through files; every config key can be set in the TOML
// config file (--config) or overridden by a flag of the same dotted name.
// Exit codes: 0 ok, 1 usage/config error, 2 data/validation error,
// 3 internal error.

#include <unistd.h>

#include <iostream>

#include "CLI11.hpp"
#include "wikivoc/pipeline.hpp"

namespace {

using wikivoc::pipeline::PipelineConfig;

void add_config_options(CLI::App& app, PipelineConfig& cfg) {
  app.set_config("--config", "", "TOML config file; flags override its keys");
  // Keys in the config file are flat dotted names matching the flags
  // (input.titles = "..."), not sections.
  app.get_config_formatter_base()->parentSeparator('\x1f');

  app.add_option("--seeds", cfg.seeds, "seed category titles (level 1)")
      ->capture_default_str();
  app.add_option("--out-dir", cfg.out_dir, "artifact directory")
      ->capture_default_str();
  app.add_option("--threads", cfg.threads, "worker threads for evaluation")
      ->capture_default_str();
  app.add_option("--seed-rng", cfg.rng_seed, "master RNG seed recorded in artifacts")
      ->capture_default_str();
  app.add_flag("--strict-children", cfg.strict_children,
               "propagate removals to children in manual/community/rule stages");
  app.add_flag("--force", cfg.force, "accept mixed-provenance artifacts");

  app.add_option("--input.sql-category", cfg.sql_category,
                 "MediaWiki `category` SQL dump (gzip or plain)");
  app.add_option("--input.sql-categorylinks", cfg.sql_categorylinks,
                 "MediaWiki `categorylinks` SQL dump");
  app.add_option("--input.sql-page", cfg.sql_page, "MediaWiki `page` SQL dump");
  app.add_option("--input.titles", cfg.tsv_titles, "titles TSV (id, title, namespace)");
  app.add_option("--input.cat-edges", cfg.tsv_cat_edges,
                 "category edges TSV (child, parent)");
  app.add_option("--input.cat-pages", cfg.tsv_cat_pages,
                 "page links TSV (page, category)");
  app.add_option("--input.redirects", cfg.tsv_redirects,
                 "redirects TSV (alias, canonical)");
  app.add_option("--input.annotations", cfg.annotations,
                 "annotation TSV for the manual stage");
  app.add_option("--input.classifier-negatives", cfg.classifier_negatives,
                 "irrelevant-only annotation TSV for classifier training");
  app.add_option("--input.rules", cfg.rules, "rule file (kind<TAB>pattern)");
  app.add_option("--input.references", cfg.references,
                 "reference term lists, name=path");
  app.add_option("--input.corpus", cfg.corpus, "evaluation corpus (JSON lines)");
  app.add_option("--input.tag-text", cfg.tag_text, "text file for the tag stage");

  app.add_flag("--stages.manual,!--stages.no-manual", cfg.stage_manual,
               "enable the manual stage");
  app.add_flag("--stages.communities,!--stages.no-communities", cfg.stage_communities,
               "enable the community stages");
  app.add_flag("--stages.classifier,!--stages.no-classifier", cfg.stage_classifier,
               "enable the classifier stages");
  app.add_flag("--stages.rules,!--stages.no-rules", cfg.stage_rules,
               "enable the rules stage");

  app.add_option("--annotation.max-level", cfg.annotation_max_level,
                 "levels that must be fully annotated")
      ->capture_default_str();
  app.add_option("--louvain.resolution", cfg.louvain_resolution)->capture_default_str();
  app.add_option("--louvain.seed", cfg.louvain_seed)->capture_default_str();

  app.add_option("--embedding.dimension", cfg.embedding.dimension)
      ->capture_default_str();
  app.add_option("--embedding.walks-per-node", cfg.embedding.walks_per_node)
      ->capture_default_str();
  app.add_option("--embedding.walk-length", cfg.embedding.walk_length)
      ->capture_default_str();
  app.add_option("--embedding.window", cfg.embedding.window)->capture_default_str();
  app.add_option("--embedding.negatives", cfg.embedding.negatives)
      ->capture_default_str();
  app.add_option("--embedding.epochs", cfg.embedding.epochs)->capture_default_str();
  app.add_option("--embedding.learning-rate", cfg.embedding.learning_rate)
      ->capture_default_str();
  app.add_option("--embedding.seed", cfg.embedding.rng_seed)->capture_default_str();

  app.add_option("--mlp.hidden", cfg.mlp.hidden)->capture_default_str();
  app.add_option("--mlp.epochs", cfg.mlp.epochs)->capture_default_str();
  app.add_option("--mlp.batch-size", cfg.mlp.batch_size)->capture_default_str();
  app.add_option("--mlp.learning-rate", cfg.mlp.learning_rate)->capture_default_str();
  app.add_option("--mlp.seed", cfg.mlp.rng_seed)->capture_default_str();
  app.add_option("--mlp.folds", cfg.cv_folds)->capture_default_str();

  app.add_option("--classifier.threshold", cfg.classifier_threshold)
      ->capture_default_str();
  app.add_flag("--classifier.negatives-descendants",
               cfg.classifier_negatives_descendants,
               "negative pool uses all descendants instead of direct children");
  app.add_option("--classifier.label-overrides", cfg.label_overrides,
                 "external predictions TSV replacing the trained model");

  app.add_option("--vocab.core-max-level", cfg.core_max_level)->capture_default_str();
  app.add_option("--vocab.redirect-bound", cfg.redirect_bound)->capture_default_str();

  app.add_flag("--eval.prune-unigrams", cfg.eval_prune_unigrams,
               "drop unigram page terms not covered by the references before "
               "evaluation");
  app.add_option("--eval.sample-annotations", cfg.sample_annotations,
                 "labeled sample TSV for sample-eval");
  app.add_option("--eval.sample-variants", cfg.sample_variants,
                 "category-set snapshots for sample-eval, name=path");
}

int dispatch(int argc, char** argv) {
  CLI::App app{"hierarchical subject-heading vocabulary pipeline"};
  app.fallthrough(true);
  app.require_subcommand(1);
  PipelineConfig cfg;
  add_config_options(app, cfg);

  for (wikivoc::pipeline::Stage stage : wikivoc::pipeline::all_stages()) {
    CLI::App* sub = app.add_subcommand(
        wikivoc::pipeline::stage_name(stage),
        std::string("run the ") + wikivoc::pipeline::stage_name(stage) + " stage");
    sub->callback([&cfg, stage]() { wikivoc::pipeline::run_stage(cfg, stage); });
  }

  app.add_subcommand("run-all", "run every enabled stage in order")
      ->callback([&cfg]() { wikivoc::pipeline::run_all(cfg); });

  app.add_subcommand("sample-eval",
                     "per-level precision/recall of category sets against a "
                     "labeled sample")
      ->callback([&cfg]() { wikivoc::pipeline::run_sample_eval(cfg); });

  CLI::App* review = app.add_subcommand(
      "annotate-review", "review a random sample of unlabeled categories");
  wikivoc::pipeline::ReviewOptions review_opts;
  review->add_option("--snapshot", review_opts.snapshot_path,
                     "subtree snapshot to sample from")
      ->required();
  review->add_option("--annotations-out", review_opts.annotations_path,
                     "annotation TSV to append to")
      ->required();
  review->add_option("--sample-size", review_opts.sample_size)->capture_default_str();
  review->add_option("--review-seed", review_opts.rng_seed)->capture_default_str();
  review->add_option("--answers", review_opts.answers_path,
                     "scripted answers file (one of r/i/s/q per line)");
  review->callback([&cfg, &review_opts]() {
    wikivoc::pipeline::annotate_review(cfg, review_opts, std::cin, std::cout,
                                       isatty(fileno(stdin)) != 0);
  });

  CLI::App* fixture = app.add_subcommand(
      "gen-fixture", "generate a synthetic desk-scale dataset with planted truth");
  wikivoc::pipeline::FixtureSpec fixture_spec;
  fixture->add_option("--categories", fixture_spec.categories)->capture_default_str();
  fixture->add_option("--pages", fixture_spec.pages)->capture_default_str();
  fixture->add_option("--documents", fixture_spec.documents)->capture_default_str();
  fixture->add_option("--fixture-seed", fixture_spec.rng_seed)->capture_default_str();
  fixture->add_option("--dir", fixture_spec.dir)->capture_default_str();
  fixture->callback([&fixture_spec]() {
    auto truth = wikivoc::pipeline::gen_fixture(fixture_spec);
    std::cout << "fixture written to " << fixture_spec.dir << " ("
              << truth.relevant_categories.size() << " relevant, "
              << truth.irrelevant_categories.size() << " irrelevant categories)\n"
              << "run: wikivoc run-all --config " << fixture_spec.dir
              << "/pipeline.toml\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // 0
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // usage/config error
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const wikivoc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const wikivoc::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
