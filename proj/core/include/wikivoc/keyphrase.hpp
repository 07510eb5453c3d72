#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "wikivoc/common.hpp"
#include "wikivoc/text.hpp"

namespace wikivoc::keyphrase {

// Deterministic rule-based English lemma for a single lowercase token:
// exception table first, then ordered suffix rules (ies->y, sses->ss,
// es-after-sibilant, s-drop, ing/ed with doubling repair). Idempotent on
// its own outputs; unknown tokens pass through.
std::string lemmatize(std::string_view token);

// Tokenize, lemmatize per token, join with single spaces. The equality
// basis for every match in this module.
std::string lemmatize_phrase(std::string_view text);
std::vector<std::string> lemmatize_tokens(std::string_view text);

struct Occurrence {
  std::size_t begin_token = 0;
  std::size_t end_token = 0;  // exclusive
};

struct MatchedPattern {
  std::uint32_t pattern_id = 0;
  std::string lemma;                    // space-joined lemma tokens
  std::vector<std::string> sources;     // original terms, insertion order
  std::vector<Occurrence> occurrences;  // all, including nested/overlapping
};

struct ExtractResult {
  std::vector<Token> tokens;            // with byte offsets into the text
  std::vector<MatchedPattern> matches;  // distinct patterns, by pattern_id
};

// Immutable multi-pattern matcher over lemma-token sequences (token-level
// Aho-Corasick). Matching yields exactly what a naive scan over all
// patterns yields, nested and overlapping occurrences included.
class CompiledLexicon {
public:
  // Terms that lemmatize to an empty token sequence are skipped (warning
  // count). Duplicate patterns after lemmatization merge; all source terms
  // are retained. Throws DataError if nothing compiles.
  static CompiledLexicon compile(const std::vector<std::string>& terms);

  std::size_t pattern_count() const { return patterns_.size(); }
  std::uint64_t skipped_terms() const { return skipped_; }
  const std::vector<std::string>& pattern_sources(std::uint32_t pattern_id) const;
  const std::string& pattern_lemma(std::uint32_t pattern_id) const;
  bool contains_lemma(const std::string& lemma_phrase) const;

  ExtractResult extract(std::string_view text) const;

private:
  CompiledLexicon() = default;
  std::uint32_t lemma_token_id(const std::string& lemma) const;

  struct Node {
    std::unordered_map<std::uint32_t, std::uint32_t> next;
    std::uint32_t fail = 0;
    std::uint32_t output_link = 0;         // nearest fail-ancestor with output
    std::vector<std::uint32_t> pattern_ids;  // patterns ending here
  };

  std::vector<Node> nodes_;
  std::unordered_map<std::string, std::uint32_t> lemma_token_ids_;
  struct PatternInfo {
    std::string lemma;
    std::uint32_t length = 0;  // in tokens
    std::vector<std::string> sources;
  };
  std::vector<PatternInfo> patterns_;
  std::unordered_map<std::string, std::uint32_t> pattern_by_lemma_;
  std::uint64_t skipped_ = 0;
};

struct Document {
  std::string id;
  std::string abstract;
  std::vector<std::string> keyphrases;  // gold, may be empty
};

struct Corpus {
  std::vector<Document> documents;  // ids unique
};

// JSON-lines, one object per line: {"id", "abstract", "keyphrases"}.
// Accepts "keywords" (string, ';'-separated) as a fallback field.
Corpus load_corpus_jsonl(const std::string& path);
Corpus parse_corpus_jsonl(std::string_view text);

struct DocResult {
  std::string id;
  std::uint64_t extracted = 0;
  std::uint64_t matched = 0;
  std::uint64_t annotated = 0;
  double precision = 0.0;  // matched/extracted, 0 when extracted == 0
};

struct EcdfPoint {
  double value = 0.0;
  double cum_fraction = 0.0;
};

struct ComparisonCounts {
  std::uint64_t better = 0;
  std::uint64_t worse = 0;
  std::uint64_t equal = 0;
};

struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double precision_stddev = 0.0;  // population, over per-document precision
  std::vector<DocResult> per_document;  // corpus order
  std::vector<EcdfPoint> ecdf;          // over per-document precision
  std::optional<ComparisonCounts> vs_baseline;
};

// Corpus-level exact-match evaluation. Per document, extracted counts
// distinct patterns; matched counts extracted patterns whose lemma equals a
// lemmatized gold phrase; annotated is the raw gold list length.
EvalReport evaluate(const Corpus& corpus, const CompiledLexicon& lexicon,
                    int threads = 1);

// Per-document precision comparison; requires identical document id sets.
ComparisonCounts compare_reports(const EvalReport& a, const EvalReport& b);

struct CoverageReport {
  std::uint64_t unique_matched = 0;
  std::uint64_t total_matched = 0;
  std::uint64_t corpus_unique = 0;  // distinct gold lemma phrases
  std::uint64_t corpus_total = 0;   // all gold occurrences
  double unique_pct = 0.0;
  double total_pct = 0.0;
  double total_to_unique_ratio = 0.0;  // 0 when unique_matched == 0
};

// How much of the gold keyphrase mass a term set covers.
CoverageReport coverage(const Corpus& corpus,
                        const std::unordered_set<std::string>& vocab_lemmas);

// ---- category-sample evaluation --------------------------------------------

struct SampleMetric {
  std::optional<double> precision;  // absent when the denominator is empty
  std::optional<double> recall;
};

// level -> variant name -> P/R of the variant's category set against the
// labeled sample. Sample titles must carry a level in `levels`.
using SampleEvalTable = std::map<std::uint32_t, std::map<std::string, SampleMetric>>;

SampleEvalTable evaluate_category_sample(
    const std::map<std::string, bool>& sample_relevance,  // title -> relevant
    const std::map<std::string, std::unordered_set<std::string>>& variant_sets,
    const std::unordered_map<std::string, std::uint32_t>& levels);

// ---- abstract tagging -------------------------------------------------------

// term (page or category title) -> category titles it counts toward.
using TermCategoryIndex = std::unordered_map<std::string, std::vector<std::string>>;

struct TagMatch {
  std::string term;  // representative source term of the pattern
  std::size_t start = 0;
  std::size_t end = 0;  // byte offsets
  std::vector<std::string> categories;
};

struct CategoryCount {
  std::string category;
  std::uint64_t count = 0;
};

struct TagResult {
  std::vector<TagMatch> matches;
  std::vector<CategoryCount> category_counts;  // descending count, ties by name
};

// Counts, per category, the distinct matched terms linked to it.
TagResult tag_abstract(const TermCategoryIndex& index,
                       const CompiledLexicon& lexicon, std::string_view text);

}  // namespace wikivoc::keyphrase
