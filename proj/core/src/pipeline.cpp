#include "wikivoc/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>

#include "json.hpp"
#include "wikivoc/ingest.hpp"
#include "wikivoc/text.hpp"

namespace wikivoc::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Stage names and config

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::ingest: return "ingest";
    case Stage::extract: return "extract";
    case Stage::filter_manual: return "filter-manual";
    case Stage::communities: return "communities";
    case Stage::filter_communities: return "filter-communities";
    case Stage::train_classifier: return "train-classifier";
    case Stage::filter_classifier: return "filter-classifier";
    case Stage::filter_rules: return "filter-rules";
    case Stage::attach_pages: return "attach-pages";
    case Stage::compare: return "compare";
    case Stage::evaluate: return "evaluate";
    case Stage::coverage: return "coverage";
    case Stage::tag: return "tag";
  }
  return "?";
}

Stage stage_from_name(std::string_view name) {
  for (Stage s : all_stages())
    if (name == stage_name(s)) return s;
  throw ConfigError("unknown stage: '" + std::string(name) + "'");
}

std::vector<Stage> all_stages() {
  return {Stage::ingest,           Stage::extract,
          Stage::filter_manual,    Stage::communities,
          Stage::filter_communities, Stage::train_classifier,
          Stage::filter_classifier, Stage::filter_rules,
          Stage::attach_pages,     Stage::compare,
          Stage::evaluate,         Stage::coverage,
          Stage::tag};
}

void PipelineConfig::validate() const {
  if (seeds.empty()) throw ConfigError("config: at least one seed title required");
  auto must_exist = [](const std::string& path, const char* what) {
    if (!path.empty() && !fs::exists(path))
      throw ConfigError(std::string("config: ") + what + " file does not exist: " + path);
  };
  must_exist(sql_category, "input.sql-category");
  must_exist(sql_categorylinks, "input.sql-categorylinks");
  must_exist(sql_page, "input.sql-page");
  must_exist(tsv_titles, "input.titles");
  must_exist(tsv_cat_edges, "input.cat-edges");
  must_exist(tsv_cat_pages, "input.cat-pages");
  must_exist(tsv_redirects, "input.redirects");
  must_exist(annotations, "input.annotations");
  must_exist(classifier_negatives, "input.classifier-negatives");
  must_exist(label_overrides, "classifier.label-overrides");
  must_exist(rules, "input.rules");
  must_exist(corpus, "input.corpus");
  must_exist(tag_text, "input.tag-text");
  must_exist(sample_annotations, "eval.sample-annotations");
  for (const auto& entry : references) {
    std::size_t eq = entry.find('=');
    must_exist(eq == std::string::npos ? entry : entry.substr(eq + 1),
               "input.references");
  }
}

std::uint64_t PipelineConfig::config_hash() const {
  std::string repr;
  auto add = [&repr](const std::string& s) {
    repr += s;
    repr.push_back('\x1f');
  };
  add(sql_category);
  add(sql_categorylinks);
  add(sql_page);
  add(tsv_titles);
  add(tsv_cat_edges);
  add(tsv_cat_pages);
  add(tsv_redirects);
  for (const auto& s : seeds) add(s);
  add(annotations);
  add(classifier_negatives);
  add(label_overrides);
  add(rules);
  for (const auto& r : references) add(r);
  add(corpus);
  add(tag_text);
  add(std::to_string(stage_manual) + std::to_string(stage_communities) +
      std::to_string(stage_classifier) + std::to_string(stage_rules));
  add(std::to_string(annotation_max_level));
  add(format_double(louvain_resolution));
  add(std::to_string(louvain_seed));
  add(hex64(embedding.config_hash()));
  add(std::to_string(mlp.hidden) + "|" + std::to_string(mlp.epochs) + "|" +
      std::to_string(mlp.batch_size) + "|" + format_double(mlp.learning_rate) + "|" +
      std::to_string(mlp.rng_seed));
  add(std::to_string(cv_folds));
  add(format_double(classifier_threshold));
  add(std::to_string(classifier_negatives_descendants));
  add(std::to_string(core_max_level));
  add(std::to_string(redirect_bound));
  add(std::to_string(strict_children));
  add(std::to_string(eval_prune_unigrams));
  add(std::to_string(rng_seed));
  return fnv1a(repr);
}

// ---------------------------------------------------------------------------
// Artifact helpers

std::uint64_t file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file for hashing: " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    h = fnv1a(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
    if (!in) break;
  }
  return h;
}

namespace {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write file: " + path);
  out << content;
}

// One stage process per output directory.
class LockGuard {
public:
  explicit LockGuard(const std::string& out_dir) : path_(out_dir + "/.lock") {
    fs::create_directories(out_dir);
    int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0)
      throw DataError("output directory is locked by another stage process "
                      "(remove " + path_ + " if stale)");
    ::close(fd);
  }
  ~LockGuard() { ::unlink(path_.c_str()); }
  LockGuard(const LockGuard&) = delete;

private:
  std::string path_;
};

// Collects provenance while a stage runs, then writes <stage>.report.json.
class StageReport {
public:
  StageReport(const PipelineConfig& cfg, Stage stage) : cfg_(cfg), stage_(stage) {
    body_["stage"] = stage_name(stage);
    body_["config_hash"] = hex64(cfg.config_hash());
    body_["rng_seed"] = cfg.rng_seed;
  }

  // Record (and hash) an external input file.
  void input(const std::string& path) {
    inputs_[fs::path(path).filename().string()] = hex64(file_hash(path));
  }

  // Record an input artifact produced by `producer`, verifying provenance.
  void artifact_input(const std::string& path, Stage producer) {
    std::string report_path =
        cfg_.out_dir + "/" + stage_name(producer) + ".report.json";
    if (!fs::exists(path) || !fs::exists(report_path))
      throw DataError(std::string("missing artifact for stage '") +
                      stage_name(stage_) + "': run stage '" + stage_name(producer) +
                      "' first");
    json producer_report;
    try {
      producer_report = json::parse(read_text_file(report_path));
    } catch (const json::exception& e) {
      throw DataError(report_path + ": " + e.what());
    }
    std::string fname = fs::path(path).filename().string();
    std::string actual = hex64(file_hash(path));
    std::string recorded =
        producer_report.contains("outputs") && producer_report["outputs"].contains(fname)
            ? producer_report["outputs"][fname].get<std::string>()
            : std::string();
    if (recorded != actual && !cfg_.force)
      throw DataError("artifact '" + fname + "' does not match what stage '" +
                      stage_name(producer) + "' recorded; rerun it or pass --force");
    std::string producer_hash = producer_report.value("config_hash", "");
    if (producer_hash != hex64(cfg_.config_hash()) && !cfg_.force)
      throw DataError("artifact '" + fname + "' was produced under a different "
                      "config (hash " + producer_hash + "); rerun or pass --force");
    inputs_[fname] = actual;
  }

  // Write an output artifact and record its hash.
  void output(const std::string& path, const std::string& content) {
    write_text_file(path, content);
    outputs_[fs::path(path).filename().string()] = hex64(file_hash(path));
  }

  void note_output_file(const std::string& path) {
    outputs_[fs::path(path).filename().string()] = hex64(file_hash(path));
  }

  json& body() { return body_; }

  void finish() {
    body_["inputs"] = inputs_;
    body_["outputs"] = outputs_;
    write_text_file(cfg_.out_dir + "/" + stage_name(stage_) + ".report.json",
                    body_.dump(2) + "\n");
  }

private:
  const PipelineConfig& cfg_;
  Stage stage_;
  json body_;
  std::map<std::string, std::string> inputs_;
  std::map<std::string, std::string> outputs_;
};

json prune_stats_json(const graph::PruneStats& stats) {
  return json{{"removed_direct", stats.removed_direct},
              {"removed_propagated", stats.removed_propagated},
              {"remaining", stats.remaining}};
}

}  // namespace

// ---------------------------------------------------------------------------
// Graph artifact IO

namespace {

const char* kTitles = "titles.tsv";
const char* kCatEdges = "cat_edges.tsv";
const char* kCatPages = "cat_pages.tsv";
const char* kRedirects = "redirects.tsv";

std::string artifact(const PipelineConfig& cfg, const std::string& name) {
  return cfg.out_dir + "/" + name;
}

}  // namespace

graph::CategoryGraph load_graph_artifacts(const PipelineConfig& cfg,
                                          graph::LoadSummary* summary) {
  using ingest::ByteSource;
  using ingest::RawRecord;
  using ingest::TsvKind;
  using ingest::TsvReader;
  graph::GraphBuilder builder;
  RawRecord rec;
  for (auto [name, kind] :
       {std::pair{kTitles, TsvKind::titles}, std::pair{kCatEdges, TsvKind::cat_edges},
        std::pair{kCatPages, TsvKind::cat_pages},
        std::pair{kRedirects, TsvKind::redirects}}) {
    std::string path = artifact(cfg, name);
    if (!fs::exists(path))
      throw DataError("missing graph artifact '" + path + "': run stage 'ingest' first");
    TsvReader reader(ByteSource::open_file(path), kind);
    while (reader.next(rec)) builder.consume_tsv(rec, kind);
  }
  graph::LoadSummary sum;
  graph::CategoryGraph g = builder.finish(sum);
  if (summary) *summary = sum;
  return g;
}

std::string snapshot_path_for(const PipelineConfig& cfg, Stage producer) {
  switch (producer) {
    case Stage::extract: return artifact(cfg, "subtree.extract.tsv");
    case Stage::filter_manual: return artifact(cfg, "subtree.manual.tsv");
    case Stage::filter_communities: return artifact(cfg, "subtree.communities.tsv");
    case Stage::filter_classifier: return artifact(cfg, "subtree.classifier.tsv");
    case Stage::filter_rules: return artifact(cfg, "subtree.rules.tsv");
    default: throw std::logic_error("stage produces no subtree snapshot");
  }
}

namespace {

// Snapshot producers in pipeline order with their enable switches.
std::vector<std::pair<Stage, bool>> snapshot_chain(const PipelineConfig& cfg) {
  return {{Stage::extract, true},
          {Stage::filter_manual, cfg.stage_manual},
          {Stage::filter_communities, cfg.stage_communities},
          {Stage::filter_classifier, cfg.stage_classifier},
          {Stage::filter_rules, cfg.stage_rules}};
}

Stage producer_before(const PipelineConfig& cfg, Stage consumer) {
  auto chain = snapshot_chain(cfg);
  // Index of the slot the consumer draws from.
  std::size_t upto;
  switch (consumer) {
    case Stage::filter_manual: upto = 0; break;
    case Stage::communities:
    case Stage::filter_communities: upto = 1; break;
    case Stage::train_classifier:
    case Stage::filter_classifier: upto = 2; break;
    case Stage::filter_rules: upto = 3; break;
    case Stage::attach_pages: upto = 4; break;
    default: throw std::logic_error("stage consumes no subtree snapshot");
  }
  for (std::size_t i = upto + 1; i-- > 0;) {
    if (chain[i].second) return chain[i].first;
  }
  return Stage::extract;
}

}  // namespace

std::string input_snapshot_for(const PipelineConfig& cfg, Stage consumer) {
  return snapshot_path_for(cfg, producer_before(cfg, consumer));
}

std::vector<prune::ReferenceTermList> load_references(const PipelineConfig& cfg) {
  std::vector<prune::ReferenceTermList> refs;
  for (const auto& entry : cfg.references) {
    std::size_t eq = entry.find('=');
    std::string name, path;
    if (eq == std::string::npos) {
      path = entry;
      name = fs::path(entry).stem().string();
    } else {
      name = entry.substr(0, eq);
      path = entry.substr(eq + 1);
    }
    refs.push_back(prune::ReferenceTermList::load(name, path));
  }
  return refs;
}

// ---------------------------------------------------------------------------
// Stage implementations

namespace {

void run_ingest(const PipelineConfig& cfg, StageReport& report) {
  using namespace ingest;
  graph::GraphBuilder builder;
  RawRecord rec;

  bool any_input = false;
  auto parse_sql = [&](const std::string& path, Table table) {
    if (path.empty()) return;
    any_input = true;
    report.input(path);
    SqlDumpParser parser(ByteSource::open_file(path), default_schema(table));
    while (parser.next(rec)) builder.consume_sql(rec);
  };
  // Page rows must precede categorylinks rows (cl_from is a page id).
  parse_sql(cfg.sql_page, Table::page);
  parse_sql(cfg.sql_category, Table::category);
  parse_sql(cfg.sql_categorylinks, Table::categorylinks);

  auto parse_tsv = [&](const std::string& path, TsvKind kind) {
    if (path.empty()) return;
    any_input = true;
    report.input(path);
    TsvReader reader(ByteSource::open_file(path), kind);
    while (reader.next(rec)) builder.consume_tsv(rec, kind);
  };
  parse_tsv(cfg.tsv_titles, TsvKind::titles);
  parse_tsv(cfg.tsv_cat_edges, TsvKind::cat_edges);
  parse_tsv(cfg.tsv_cat_pages, TsvKind::cat_pages);
  parse_tsv(cfg.tsv_redirects, TsvKind::redirects);

  if (!any_input)
    throw ConfigError("ingest: no inputs configured (set input.* keys)");

  graph::LoadSummary sum;
  graph::CategoryGraph g = builder.finish(sum);

  // Normalized artifacts, deterministic id order.
  std::string titles;
  for (graph::CatId c = 0; c < g.category_count(); ++c) {
    titles += std::to_string(c);
    titles.push_back('\t');
    titles += g.category_titles[c];
    titles += "\t14\n";
  }
  for (graph::PageId p = 0; p < g.page_count(); ++p) {
    titles += std::to_string(g.category_count() + p);
    titles.push_back('\t');
    titles += g.page_titles[p];
    titles += "\t0\n";
  }
  report.output(artifact(cfg, kTitles), titles);

  std::string edges;
  for (graph::CatId child = 0; child < g.category_count(); ++child) {
    for (graph::CatId parent : g.parent_links[child]) {
      edges += g.category_titles[child];
      edges.push_back('\t');
      edges += g.category_titles[parent];
      edges.push_back('\n');
    }
  }
  report.output(artifact(cfg, kCatEdges), edges);

  std::string cat_pages;
  for (graph::CatId c = 0; c < g.category_count(); ++c) {
    for (graph::PageId p : g.page_links[c]) {
      cat_pages += g.page_titles[p];
      cat_pages.push_back('\t');
      cat_pages += g.category_titles[c];
      cat_pages.push_back('\n');
    }
  }
  report.output(artifact(cfg, kCatPages), cat_pages);

  std::vector<std::pair<std::string, std::string>> redirects(g.redirects.begin(),
                                                             g.redirects.end());
  std::sort(redirects.begin(), redirects.end());
  std::string redirects_text;
  for (const auto& [alias, canonical] : redirects) {
    redirects_text += alias;
    redirects_text.push_back('\t');
    redirects_text += canonical;
    redirects_text.push_back('\n');
  }
  report.output(artifact(cfg, kRedirects), redirects_text);

  report.body()["summary"] = {
      {"categories", sum.categories},
      {"pages", sum.pages},
      {"category_edges", sum.category_edges},
      {"page_link_edges", sum.page_link_edges},
      {"redirect_entries", sum.redirect_entries},
      {"duplicate_edges", sum.duplicate_edges},
      {"self_loops_dropped", sum.self_loops_dropped},
      {"unknown_title_links", sum.unknown_title_links},
      {"invalid_titles", sum.invalid_titles},
  };
}

json level_histogram(const std::vector<std::uint32_t>& levels,
                     const std::vector<bool>& member) {
  std::map<std::uint32_t, std::uint64_t> hist;
  for (std::size_t c = 0; c < member.size(); ++c)
    if (member[c]) ++hist[levels[c]];
  json j = json::object();
  for (const auto& [level, count] : hist) j[std::to_string(level)] = count;
  return j;
}

graph::CategoryGraph load_graph_checked(const PipelineConfig& cfg,
                                        StageReport& report) {
  for (const char* name : {kTitles, kCatEdges, kCatPages, kRedirects})
    report.artifact_input(artifact(cfg, name), Stage::ingest);
  return load_graph_artifacts(cfg);
}

void run_extract(const PipelineConfig& cfg, StageReport& report) {
  graph::CategoryGraph g = load_graph_checked(cfg, report);
  graph::Subtree st = graph::bfs_subtree(g, cfg.seeds);
  report.output(snapshot_path_for(cfg, Stage::extract), subtree_to_snapshot(st, g));
  report.body()["members"] = st.member_count;
  report.body()["seeds"] = cfg.seeds;
  report.body()["levels"] = level_histogram(st.level, st.member);
  // Both level metrics: BFS depth above, max-parent-depth here.
  std::vector<std::uint32_t> deep = graph::max_parent_levels(st, g);
  report.body()["levels_by_max_parent"] = level_histogram(deep, st.member);
}

graph::Subtree load_input_subtree(const PipelineConfig& cfg, Stage consumer,
                                  const graph::CategoryGraph& g, StageReport& report) {
  Stage producer = producer_before(cfg, consumer);
  std::string path = snapshot_path_for(cfg, producer);
  report.artifact_input(path, producer);
  return graph::subtree_from_snapshot(g, read_text_file(path), cfg.seeds);
}

void run_filter_manual(const PipelineConfig& cfg, StageReport& report) {
  if (cfg.annotations.empty())
    throw ConfigError("filter-manual: input.annotations not configured");
  graph::CategoryGraph g = load_graph_checked(cfg, report);
  graph::Subtree st = load_input_subtree(cfg, Stage::filter_manual, g, report);
  report.input(cfg.annotations);
  prune::AnnotationSet ann = prune::AnnotationSet::load(cfg.annotations);
  graph::PruneStats stats;
  graph::Subtree out = prune::apply_annotations(st, g, ann, cfg.annotation_max_level,
                                                cfg.default_mode(), &stats);
  report.output(snapshot_path_for(cfg, Stage::filter_manual),
                subtree_to_snapshot(out, g));
  report.body().update(prune_stats_json(stats));
  report.body()["labels"] = ann.labels.size();
}

void run_communities(const PipelineConfig& cfg, StageReport& report) {
  graph::CategoryGraph g = load_graph_checked(cfg, report);
  graph::Subtree st = load_input_subtree(cfg, Stage::communities, g, report);
  prune::CommunityAssignment ca =
      prune::louvain(st, g, cfg.louvain_resolution, cfg.louvain_seed);

  std::vector<std::pair<std::string, std::uint32_t>> rows;
  rows.reserve(ca.community_of.size());
  for (const auto& [cat, comm] : ca.community_of)
    rows.emplace_back(g.category_titles[cat], comm);
  std::sort(rows.begin(), rows.end());
  std::string text;
  for (const auto& [title, comm] : rows) {
    text += title;
    text.push_back('\t');
    text += std::to_string(comm);
    text.push_back('\n');
  }
  report.output(artifact(cfg, "communities.tsv"), text);

  std::vector<std::uint64_t> sizes(ca.community_count, 0);
  for (const auto& [cat, comm] : ca.community_of) ++sizes[comm];
  std::sort(sizes.begin(), sizes.end());
  double mean = sizes.empty() ? 0.0
                              : static_cast<double>(st.member_count) /
                                    static_cast<double>(sizes.size());
  double median = sizes.empty() ? 0.0
                 : sizes.size() % 2
                     ? static_cast<double>(sizes[sizes.size() / 2])
                     : (static_cast<double>(sizes[sizes.size() / 2 - 1]) +
                        static_cast<double>(sizes[sizes.size() / 2])) /
                           2.0;
  report.body()["communities"] = ca.community_count;
  report.body()["modularity"] = ca.modularity;
  report.body()["largest"] = sizes.empty() ? 0 : sizes.back();
  report.body()["smallest"] = sizes.empty() ? 0 : sizes.front();
  report.body()["mean_size"] = mean;
  report.body()["median_size"] = median;
  report.body()["louvain_seed"] = cfg.louvain_seed;
  report.body()["resolution"] = cfg.louvain_resolution;
}

prune::CommunityAssignment load_communities(const PipelineConfig& cfg,
                                            const graph::CategoryGraph& g,
                                            StageReport& report) {
  std::string path = artifact(cfg, "communities.tsv");
  report.artifact_input(path, Stage::communities);
  prune::CommunityAssignment ca;
  std::string text = read_text_file(path);
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos)
      throw DataError("communities.tsv: malformed line");
    std::string title(line.substr(0, tab));
    graph::CatId id = g.category_id(title);
    if (id == graph::kNoCat)
      throw DataError("communities.tsv references unknown category '" + title + "'");
    std::uint32_t comm = 0;
    std::string_view num = line.substr(tab + 1);
    std::from_chars(num.data(), num.data() + num.size(), comm);
    ca.community_of.emplace(id, comm);
    ca.community_count = std::max(ca.community_count, comm + 1);
  }
  return ca;
}

void run_filter_communities(const PipelineConfig& cfg, StageReport& report) {
  if (cfg.references.empty())
    throw ConfigError("filter-communities: input.references not configured");
  graph::CategoryGraph g = load_graph_checked(cfg, report);
  graph::Subtree st = load_input_subtree(cfg, Stage::filter_communities, g, report);
  prune::CommunityAssignment ca = load_communities(cfg, g, report);
  for (const auto& entry : cfg.references) {
    std::size_t eq = entry.find('=');
    report.input(eq == std::string::npos ? entry : entry.substr(eq + 1));
  }
  std::vector<prune::ReferenceTermList> refs = load_references(cfg);
  graph::PruneStats stats;
  std::uint32_t kept = 0;
  graph::Subtree out = prune::filter_communities(st, g, ca, refs, cfg.default_mode(),
                                                 &stats, &kept);
  report.output(snapshot_path_for(cfg, Stage::filter_communities),
                subtree_to_snapshot(out, g));
  report.body().update(prune_stats_json(stats));
  report.body()["communities_total"] = ca.community_count;
  report.body()["communities_kept"] = kept;
  report.body()["communities_removed"] = ca.community_count - kept;
}

std::string embeddings_to_tsv(const classify::EmbeddingMap& emb,
                              const graph::CategoryGraph& g) {
  std::vector<std::pair<std::string, const std::vector<float>*>> rows;
  rows.reserve(emb.size());
  for (const auto& [cat, vec] : emb) rows.emplace_back(g.category_titles[cat], &vec);
  std::sort(rows.begin(), rows.end());
  std::string out;
  for (const auto& [title, vec] : rows) {
    out += title;
    out.push_back('\t');
    for (std::size_t i = 0; i < vec->size(); ++i) {
      if (i) out.push_back(',');
      out += format_double(static_cast<double>((*vec)[i]));
    }
    out.push_back('\n');
  }
  return out;
}

classify::EmbeddingMap embeddings_from_tsv(const std::string& text,
                                           const graph::CategoryGraph& g) {
  classify::EmbeddingMap emb;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) throw DataError("embeddings.tsv: malformed line");
    std::string title(line.substr(0, tab));
    graph::CatId id = g.category_id(title);
    if (id == graph::kNoCat)
      throw DataError("embeddings.tsv references unknown category '" + title + "'");
    std::vector<float> vec;
    std::size_t p = tab + 1;
    while (p <= line.size()) {
      std::size_t comma = line.find(',', p);
      if (comma == std::string_view::npos) comma = line.size();
      double v = 0;
      std::from_chars(line.data() + p, line.data() + comma, v);
      vec.push_back(static_cast<float>(v));
      p = comma + 1;
    }
    emb.emplace(id, std::move(vec));
  }
  return emb;
}

void run_train_classifier(const PipelineConfig& cfg, StageReport& report) {
  if (cfg.references.empty())
    throw ConfigError("train-classifier: input.references not configured");
  if (cfg.classifier_negatives.empty())
    throw ConfigError("train-classifier: input.classifier-negatives not configured");
  graph::CategoryGraph g = load_graph_checked(cfg, report);
  graph::Subtree st = load_input_subtree(cfg, Stage::train_classifier, g, report);
  report.input(cfg.classifier_negatives);
  for (const auto& entry : cfg.references) {
    std::size_t eq = entry.find('=');
    report.input(eq == std::string::npos ? entry : entry.substr(eq + 1));
  }

  auto walks = classify::random_walks(st, g, cfg.embedding);
  classify::EmbeddingTrainInfo info;
  classify::EmbeddingMap emb = classify::train_node_embeddings(walks, cfg.embedding, &info);
  classify::FeatureSet features =
      classify::build_features(st, g, emb, cfg.embedding.dimension);

  std::vector<prune::ReferenceTermList> refs = load_references(cfg);
  prune::AnnotationSet negatives = prune::AnnotationSet::load(cfg.classifier_negatives);
  classify::LabeledSet set = classify::assemble_training_set(
      st, g, refs, negatives, features, cfg.rng_seed,
      cfg.classifier_negatives_descendants);
  classify::TrainResult trained = classify::train_mlp(set, cfg.cv_folds, cfg.mlp);

  report.output(artifact(cfg, "embeddings.tsv"), embeddings_to_tsv(emb, g));
  report.output(artifact(cfg, "model.json"),
                trained.model.to_json(cfg.embedding.config_hash()));
  report.body()["cv_f1"] = trained.cv_f1;
  report.body()["fold_f1"] = trained.fold_f1;
  report.body()["positives"] = set.positive_count;
  report.body()["negatives"] = set.negative_count;
  report.body()["embedding_epoch_loss"] = info.epoch_loss;
}

void run_filter_classifier(const PipelineConfig& cfg, StageReport& report) {
  graph::CategoryGraph g = load_graph_checked(cfg, report);
  graph::Subtree st = load_input_subtree(cfg, Stage::filter_classifier, g, report);

  graph::PruneStats stats;
  graph::Subtree out;
  if (!cfg.label_overrides.empty()) {
    // External predictions replace the trained model entirely.
    report.input(cfg.label_overrides);
    auto labels = classify::parse_label_overrides(read_text_file(cfg.label_overrides));
    out = classify::filter_by_labels(st, g, labels, &stats);
    report.body()["label_overrides"] = cfg.label_overrides;
  } else {
    std::string model_path = artifact(cfg, "model.json");
    report.artifact_input(model_path, Stage::train_classifier);
    std::uint64_t feature_hash = 0;
    classify::MlpModel model =
        classify::MlpModel::from_json(read_text_file(model_path), &feature_hash);
    if (feature_hash != cfg.embedding.config_hash() && !cfg.force)
      throw DataError("model.json was trained under a different embedding config; "
                      "rerun train-classifier or pass --force");
    std::string emb_path = artifact(cfg, "embeddings.tsv");
    report.artifact_input(emb_path, Stage::train_classifier);
    classify::EmbeddingMap emb = embeddings_from_tsv(read_text_file(emb_path), g);
    classify::FeatureSet features =
        classify::build_features(st, g, emb, cfg.embedding.dimension);
    prune::AnnotationSet human_labels;
    if (!cfg.annotations.empty()) {
      report.input(cfg.annotations);
      human_labels = prune::AnnotationSet::load(cfg.annotations);
    }
    std::uint64_t negative_seeds = 0, overrides = 0;
    out = classify::filter_by_classifier(
        st, g, model, features, cfg.classifier_threshold,
        cfg.annotations.empty() ? nullptr : &human_labels, &stats, &negative_seeds,
        &overrides);
    report.body()["negative_seeds_kept"] = negative_seeds;
    report.body()["human_relevant_kept"] = overrides;
    report.body()["threshold"] = cfg.classifier_threshold;
  }
  report.output(snapshot_path_for(cfg, Stage::filter_classifier),
                subtree_to_snapshot(out, g));
  report.body().update(prune_stats_json(stats));
}

void run_filter_rules(const PipelineConfig& cfg, StageReport& report) {
  if (cfg.rules.empty())
    throw ConfigError("filter-rules: input.rules not configured");
  graph::CategoryGraph g = load_graph_checked(cfg, report);
  graph::Subtree st = load_input_subtree(cfg, Stage::filter_rules, g, report);
  report.input(cfg.rules);
  prune::RuleSet rules = prune::RuleSet::load(cfg.rules);
  graph::PruneStats stats;
  std::vector<std::uint64_t> hits;
  graph::Subtree out =
      prune::apply_rules(st, g, rules, cfg.default_mode(), &stats, &hits);
  report.output(snapshot_path_for(cfg, Stage::filter_rules),
                subtree_to_snapshot(out, g));
  report.body().update(prune_stats_json(stats));
  json per_rule = json::array();
  for (std::size_t i = 0; i < rules.rules.size(); ++i) {
    per_rule.push_back(json{{"kind", prune::rule_kind_name(rules.rules[i].kind)},
                            {"pattern", rules.rules[i].pattern},
                            {"hits", hits[i]}});
  }
  report.body()["per_rule_hits"] = per_rule;
}

// Stage counts for the vocabulary metadata, harvested from prior reports.
std::map<std::string, std::uint64_t> harvest_stage_counts(const PipelineConfig& cfg) {
  std::map<std::string, std::uint64_t> counts;
  for (Stage s : {Stage::extract, Stage::filter_manual, Stage::filter_communities,
                  Stage::filter_classifier, Stage::filter_rules}) {
    std::string path = cfg.out_dir + "/" + stage_name(s) + ".report.json";
    if (!fs::exists(path)) continue;
    try {
      json j = json::parse(read_text_file(path));
      if (j.contains("remaining"))
        counts[stage_name(s)] = j["remaining"].get<std::uint64_t>();
      else if (j.contains("members"))
        counts[stage_name(s)] = j["members"].get<std::uint64_t>();
    } catch (const json::exception&) {
      // a corrupt report is not fatal for metadata
    }
  }
  return counts;
}

void run_attach_pages(const PipelineConfig& cfg, StageReport& report) {
  graph::CategoryGraph g = load_graph_checked(cfg, report);
  graph::Subtree st = load_input_subtree(cfg, Stage::attach_pages, g, report);
  vocab::Vocabulary v =
      vocab::attach_pages(st, g, cfg.core_max_level, cfg.redirect_bound);
  v.stage_counts = harvest_stage_counts(cfg);
  v.config_hash = hex64(cfg.config_hash());
  vocab::save_vocab(v, cfg.out_dir + "/vocab");
  for (const char* f : {"categories.tsv", "pages.tsv", "links.tsv", "meta.json"})
    report.note_output_file(cfg.out_dir + "/vocab/" + f);

  vocab::CoreCounts cc = vocab::core_counts(v);
  report.body()["categories"] = v.categories.size();
  report.body()["pages"] = v.pages.size();
  report.body()["redirect_aliases"] = v.redirect_aliases;
  report.body()["dropped_redirects"] = v.dropped_redirects;
  report.body()["mean_pages_per_category"] =
      v.categories.empty() ? 0.0
                           : static_cast<double>(v.pages.size()) /
                                 static_cast<double>(v.categories.size());
  report.body()["core_categories"] = cc.core_categories;
  report.body()["core_pages"] = cc.core_pages;
  report.body()["core_term_fraction"] = cc.core_term_fraction;
}

vocab::Vocabulary load_vocab_artifact(const PipelineConfig& cfg, StageReport& report) {
  std::string meta = cfg.out_dir + "/vocab/meta.json";
  if (!fs::exists(meta))
    throw DataError("missing vocabulary artifact: run stage 'attach-pages' first");
  report.artifact_input(cfg.out_dir + "/vocab/meta.json", Stage::attach_pages);
  vocab::Vocabulary v = vocab::load_vocab(cfg.out_dir + "/vocab");
  if (v.config_hash != hex64(cfg.config_hash()) && !cfg.force)
    throw DataError("vocabulary was produced under a different config; rerun "
                    "attach-pages or pass --force");
  return v;
}

void run_compare(const PipelineConfig& cfg, StageReport& report) {
  if (cfg.references.empty())
    throw ConfigError("compare: input.references not configured");
  if (cfg.references.size() > 2)
    throw ConfigError("compare: at most two reference lists are supported");
  vocab::Vocabulary v = load_vocab_artifact(cfg, report);
  std::vector<prune::ReferenceTermList> refs = load_references(cfg);
  std::vector<vocab::NamedTermSet> sets;
  sets.push_back(vocab::NamedTermSet{"vocab", vocab::vocabulary_lemmas(v)});
  for (auto& r : refs) sets.push_back(vocab::NamedTermSet{r.name, std::move(r.terms)});
  vocab::VocabStats stats = vocab::compare_vocabs(sets, &v);

  json regions = json::array();
  for (const auto& r : stats.regions) {
    std::string key;
    for (std::size_t i = 0; i < r.members.size(); ++i) {
      if (i) key += " & ";
      key += r.members[i];
    }
    regions.push_back(json{{"sets", r.members}, {"label", key}, {"count", r.count}});
  }
  report.body()["regions"] = regions;
  report.body()["set_sizes"] = stats.set_sizes;
  report.body()["mean_exclusive_token_length"] = stats.mean_exclusive_token_length;
  json cat_hist = json::object();
  for (const auto& [level, count] : stats.categories_per_level)
    cat_hist[std::to_string(level)] = count;
  report.body()["categories_per_level"] = cat_hist;
  json term_hist = json::object();
  for (const auto& [level, count] : stats.terms_per_level)
    term_hist[std::to_string(level)] = count;
  report.body()["terms_per_level"] = term_hist;
}

std::string docs_tsv(const keyphrase::EvalReport& r) {
  std::string out;
  for (const auto& d : r.per_document) {
    out += d.id;
    out.push_back('\t');
    out += std::to_string(d.extracted);
    out.push_back('\t');
    out += std::to_string(d.matched);
    out.push_back('\t');
    out += std::to_string(d.annotated);
    out.push_back('\t');
    out += format_double(d.precision);
    out.push_back('\n');
  }
  return out;
}

std::string ecdf_tsv(const keyphrase::EvalReport& r) {
  std::string out;
  for (const auto& p : r.ecdf) {
    out += format_double(p.value);
    out.push_back('\t');
    out += format_double(p.cum_fraction);
    out.push_back('\n');
  }
  return out;
}

json report_summary_json(const keyphrase::EvalReport& r) {
  return json{{"precision", r.precision},
              {"recall", r.recall},
              {"f1", r.f1},
              {"precision_stddev", r.precision_stddev},
              {"documents", r.per_document.size()}};
}

// Set names appear in artifact filenames; keep them path-safe and distinct
// from the built-in "vocab" set.
std::string safe_set_name(const std::string& name,
                          std::set<std::string>& taken) {
  std::string safe;
  for (char c : name)
    safe.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' ||
                           c == '_'
                       ? c
                       : '_');
  if (safe.empty()) safe = "set";
  std::string candidate = safe;
  for (int i = 2; !taken.insert(candidate).second; ++i)
    candidate = safe + "_" + std::to_string(i);
  return candidate;
}

// The lexicon sets evaluated by the evaluate stage: the vocabulary plus
// each reference list.
std::vector<std::pair<std::string, std::vector<std::string>>> eval_term_sets(
    const PipelineConfig& cfg, StageReport& report) {
  vocab::Vocabulary v = load_vocab_artifact(cfg, report);
  std::vector<prune::ReferenceTermList> refs;
  if (!cfg.references.empty()) {
    for (const auto& entry : cfg.references) {
      std::size_t eq = entry.find('=');
      report.input(eq == std::string::npos ? entry : entry.substr(eq + 1));
    }
    refs = load_references(cfg);
  }
  if (cfg.eval_prune_unigrams) {
    if (refs.empty())
      throw ConfigError("eval.prune-unigrams requires input.references");
    vocab::prune_unigrams(v, refs);
  }
  std::vector<std::pair<std::string, std::vector<std::string>>> sets;
  std::set<std::string> taken{"vocab"};
  sets.emplace_back("vocab", vocab::vocabulary_terms(v));
  for (const auto& r : refs) {
    std::vector<std::string> terms(r.terms.begin(), r.terms.end());
    std::sort(terms.begin(), terms.end());
    sets.emplace_back(safe_set_name(r.name, taken), std::move(terms));
  }
  return sets;
}

void run_evaluate(const PipelineConfig& cfg, StageReport& report) {
  if (cfg.corpus.empty()) throw ConfigError("evaluate: input.corpus not configured");
  report.input(cfg.corpus);
  keyphrase::Corpus corpus = keyphrase::load_corpus_jsonl(cfg.corpus);
  auto sets = eval_term_sets(cfg, report);

  std::vector<std::pair<std::string, keyphrase::EvalReport>> reports;
  json summary = json::object();
  for (const auto& [name, terms] : sets) {
    keyphrase::CompiledLexicon lex = keyphrase::CompiledLexicon::compile(terms);
    keyphrase::EvalReport r = keyphrase::evaluate(corpus, lex, cfg.threads);
    report.output(artifact(cfg, "eval." + name + ".docs.tsv"), docs_tsv(r));
    report.output(artifact(cfg, "eval." + name + ".ecdf.tsv"), ecdf_tsv(r));
    summary[name] = report_summary_json(r);
    reports.emplace_back(name, std::move(r));
  }
  json comparisons = json::array();
  for (std::size_t i = 0; i < reports.size(); ++i) {
    for (std::size_t j = i + 1; j < reports.size(); ++j) {
      keyphrase::ComparisonCounts c =
          keyphrase::compare_reports(reports[i].second, reports[j].second);
      comparisons.push_back(json{{"a", reports[i].first},
                                 {"b", reports[j].first},
                                 {"better", c.better},
                                 {"worse", c.worse},
                                 {"equal", c.equal}});
    }
  }
  report.body()["sets"] = summary;
  report.body()["comparisons"] = comparisons;
  report.body()["prune_unigrams"] = cfg.eval_prune_unigrams;
}

json coverage_json(const keyphrase::CoverageReport& c) {
  return json{{"unique_matched", c.unique_matched},
              {"total_matched", c.total_matched},
              {"corpus_unique", c.corpus_unique},
              {"corpus_total", c.corpus_total},
              {"unique_pct", c.unique_pct},
              {"total_pct", c.total_pct},
              {"total_to_unique_ratio", c.total_to_unique_ratio}};
}

void run_coverage(const PipelineConfig& cfg, StageReport& report) {
  if (cfg.corpus.empty()) throw ConfigError("coverage: input.corpus not configured");
  report.input(cfg.corpus);
  keyphrase::Corpus corpus = keyphrase::load_corpus_jsonl(cfg.corpus);
  vocab::Vocabulary v = load_vocab_artifact(cfg, report);

  // Core / ancillary lemma splits (a page is core iff linked to a core category).
  std::unordered_set<std::string> total, core, ancillary;
  for (const auto& c : v.categories) {
    std::string lemma = keyphrase::lemmatize_phrase(c.title);
    total.insert(lemma);
    (c.core ? core : ancillary).insert(lemma);
  }
  for (const auto& p : v.pages) {
    std::string lemma = keyphrase::lemmatize_phrase(p.title);
    total.insert(lemma);
    (vocab::page_is_core(v, p) ? core : ancillary).insert(lemma);
  }

  json sets = json::object();
  sets["vocab"] = coverage_json(keyphrase::coverage(corpus, total));
  sets["vocab.core"] = coverage_json(keyphrase::coverage(corpus, core));
  sets["vocab.ancillary"] = coverage_json(keyphrase::coverage(corpus, ancillary));
  if (!cfg.references.empty()) {
    for (const auto& entry : cfg.references) {
      std::size_t eq = entry.find('=');
      report.input(eq == std::string::npos ? entry : entry.substr(eq + 1));
    }
    for (const auto& r : load_references(cfg))
      sets[r.name] = coverage_json(keyphrase::coverage(corpus, r.terms));
  }
  report.body()["coverage"] = sets;
}

void run_tag(const PipelineConfig& cfg, StageReport& report) {
  if (cfg.tag_text.empty()) throw ConfigError("tag: input.tag-text not configured");
  report.input(cfg.tag_text);
  std::string text = read_text_file(cfg.tag_text);
  vocab::Vocabulary v = load_vocab_artifact(cfg, report);
  keyphrase::CompiledLexicon lex =
      keyphrase::CompiledLexicon::compile(vocab::vocabulary_terms(v));
  keyphrase::TermCategoryIndex index = vocab::build_term_index(v);
  keyphrase::TagResult tags = keyphrase::tag_abstract(index, lex, text);

  json matches = json::array();
  for (const auto& m : tags.matches) {
    matches.push_back(json{{"term", m.term},
                           {"start", m.start},
                           {"end", m.end},
                           {"categories", m.categories}});
  }
  json counts = json::array();
  for (const auto& c : tags.category_counts)
    counts.push_back(json{{"category", c.category}, {"count", c.count}});
  json output{{"matches", matches}, {"category_counts", counts}};
  report.output(artifact(cfg, "tag.output.json"), output.dump(2) + "\n");
  report.body()["matches"] = tags.matches.size();
  report.body()["categories"] = tags.category_counts.size();
}

}  // namespace

void run_stage(const PipelineConfig& cfg, Stage stage) {
  cfg.validate();
  LockGuard lock(cfg.out_dir);
  StageReport report(cfg, stage);
  switch (stage) {
    case Stage::ingest: run_ingest(cfg, report); break;
    case Stage::extract: run_extract(cfg, report); break;
    case Stage::filter_manual: run_filter_manual(cfg, report); break;
    case Stage::communities: run_communities(cfg, report); break;
    case Stage::filter_communities: run_filter_communities(cfg, report); break;
    case Stage::train_classifier: run_train_classifier(cfg, report); break;
    case Stage::filter_classifier: run_filter_classifier(cfg, report); break;
    case Stage::filter_rules: run_filter_rules(cfg, report); break;
    case Stage::attach_pages: run_attach_pages(cfg, report); break;
    case Stage::compare: run_compare(cfg, report); break;
    case Stage::evaluate: run_evaluate(cfg, report); break;
    case Stage::coverage: run_coverage(cfg, report); break;
    case Stage::tag: run_tag(cfg, report); break;
  }
  report.finish();
}

void run_all(const PipelineConfig& cfg) {
  run_stage(cfg, Stage::ingest);
  run_stage(cfg, Stage::extract);
  if (cfg.stage_manual) run_stage(cfg, Stage::filter_manual);
  if (cfg.stage_communities) {
    run_stage(cfg, Stage::communities);
    run_stage(cfg, Stage::filter_communities);
  }
  if (cfg.stage_classifier && cfg.label_overrides.empty()) {
    run_stage(cfg, Stage::train_classifier);
  }
  if (cfg.stage_classifier) run_stage(cfg, Stage::filter_classifier);
  if (cfg.stage_rules) run_stage(cfg, Stage::filter_rules);
  run_stage(cfg, Stage::attach_pages);
  if (!cfg.references.empty() && cfg.references.size() <= 2)
    run_stage(cfg, Stage::compare);
  if (!cfg.corpus.empty()) {
    run_stage(cfg, Stage::evaluate);
    run_stage(cfg, Stage::coverage);
  }
  if (!cfg.tag_text.empty()) run_stage(cfg, Stage::tag);
}

// ---------------------------------------------------------------------------
// Interactive annotation review

ReviewOutcome annotate_review(const PipelineConfig& cfg, const ReviewOptions& opts,
                              std::istream& in, std::ostream& out,
                              bool input_is_terminal) {
  std::unique_ptr<std::ifstream> answers_file;
  std::istream* answers = &in;
  if (!opts.answers_path.empty()) {
    answers_file = std::make_unique<std::ifstream>(opts.answers_path);
    if (!*answers_file)
      throw DataError("cannot open answers file: " + opts.answers_path);
    answers = answers_file.get();
  } else if (!input_is_terminal) {
    throw ConfigError("annotate-review needs a terminal or an --answers file");
  }

  graph::CategoryGraph g = load_graph_artifacts(cfg);
  graph::Subtree st =
      graph::subtree_from_snapshot(g, read_text_file(opts.snapshot_path), cfg.seeds);

  prune::AnnotationSet existing;
  if (fs::exists(opts.annotations_path))
    existing = prune::AnnotationSet::load(opts.annotations_path);

  std::vector<graph::CatId> unlabeled;
  for (graph::CatId c : st.members_sorted())
    if (!existing.labels.count(g.category_titles[c])) unlabeled.push_back(c);

  ReviewOutcome outcome;
  if (unlabeled.empty()) {
    out << "nothing to review: all " << st.member_count
        << " members already labeled\n";
    return outcome;
  }

  Rng rng(opts.rng_seed);
  rng.shuffle(unlabeled);
  if (unlabeled.size() > opts.sample_size) unlabeled.resize(opts.sample_size);

  std::ofstream append(opts.annotations_path, std::ios::app | std::ios::binary);
  if (!append) throw DataError("cannot append to " + opts.annotations_path);

  for (graph::CatId c : unlabeled) {
    const std::string& title = g.category_titles[c];
    out << title << " (level " << st.level[c] << ")";
    std::vector<std::string> parents;
    for (graph::CatId p : g.parent_links[c])
      if (st.member[p]) parents.push_back(g.category_titles[p]);
    std::sort(parents.begin(), parents.end());
    if (!parents.empty()) {
      out << "  parents:";
      for (const auto& p : parents) out << " [" << p << "]";
    }
    out << "\n[r]elevant / [i]rrelevant / [s]kip / [q]uit > ";
    out.flush();
    std::string answer;
    if (!std::getline(*answers, answer)) break;
    ++outcome.presented;
    if (answer == "r" || answer == "relevant") {
      append << title << "\trelevant\n";
      ++outcome.labeled;
    } else if (answer == "i" || answer == "irrelevant") {
      append << title << "\tirrelevant\n";
      ++outcome.labeled;
    } else if (answer == "q" || answer == "quit") {
      break;
    } else {
      ++outcome.skipped;
    }
  }
  out << "labeled " << outcome.labeled << ", skipped " << outcome.skipped << "\n";
  return outcome;
}

// ---------------------------------------------------------------------------
// Sample-based category-set evaluation

void run_sample_eval(const PipelineConfig& cfg) {
  if (cfg.sample_annotations.empty())
    throw ConfigError("sample-eval: eval.sample-annotations not configured");
  if (cfg.sample_variants.empty())
    throw ConfigError("sample-eval: eval.sample-variants not configured");
  cfg.validate();

  prune::AnnotationSet sample = prune::AnnotationSet::load(cfg.sample_annotations);
  std::map<std::string, bool> relevance(sample.labels.begin(), sample.labels.end());

  // Levels come from the snapshot the sample was drawn from: the subtree
  // before community detection.
  std::string levels_path = input_snapshot_for(cfg, Stage::filter_communities);
  if (!fs::exists(levels_path))
    throw DataError("sample-eval: missing snapshot " + levels_path);
  std::unordered_map<std::string, std::uint32_t> levels;
  {
    std::string text = read_text_file(levels_path);
    std::size_t start = 0;
    while (start < text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string::npos) end = text.size();
      std::string_view line(text.data() + start, end - start);
      start = end + 1;
      if (line.empty()) continue;
      std::size_t t1 = line.find('\t');
      std::size_t t2 = line.find('\t', t1 + 1);
      if (t1 == std::string_view::npos || t2 == std::string_view::npos) continue;
      std::uint32_t lvl = 0;
      std::from_chars(line.data() + t1 + 1, line.data() + t2, lvl);
      levels.emplace(std::string(line.substr(0, t1)), lvl);
    }
  }

  std::map<std::string, std::unordered_set<std::string>> variants;
  for (const auto& entry : cfg.sample_variants) {
    std::size_t eq = entry.find('=');
    if (eq == std::string::npos)
      throw ConfigError("eval.sample-variants entries must be name=path");
    std::string name = entry.substr(0, eq);
    std::string path = entry.substr(eq + 1);
    std::unordered_set<std::string> titles;
    std::string text = read_text_file(path);
    std::size_t start = 0;
    while (start < text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string::npos) end = text.size();
      std::string_view line(text.data() + start, end - start);
      start = end + 1;
      if (line.empty()) continue;
      std::size_t tab = line.find('\t');
      titles.insert(std::string(line.substr(0, tab)));
    }
    variants.emplace(std::move(name), std::move(titles));
  }

  keyphrase::SampleEvalTable table =
      keyphrase::evaluate_category_sample(relevance, variants, levels);

  json out;
  out["config_hash"] = hex64(cfg.config_hash());
  out["sample_size"] = relevance.size();
  json by_level = json::object();
  for (const auto& [level, row] : table) {
    json variants_json = json::object();
    for (const auto& [name, metric] : row) {
      json m;
      m["precision"] = metric.precision ? json(*metric.precision) : json(nullptr);
      m["recall"] = metric.recall ? json(*metric.recall) : json(nullptr);
      variants_json[name] = m;
    }
    by_level[std::to_string(level)] = variants_json;
  }
  out["levels"] = by_level;
  fs::create_directories(cfg.out_dir);
  write_text_file(cfg.out_dir + "/sample-eval.report.json", out.dump(2) + "\n");
}

}  // namespace wikivoc::pipeline
