#include "wikivoc/keyphrase.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <fstream>
#include <thread>

#include "json.hpp"

namespace wikivoc::keyphrase {

// ---------------------------------------------------------------------------
// Lemmatizer

namespace {

const std::unordered_map<std::string_view, std::string_view>& exception_table() {
  static const std::unordered_map<std::string_view, std::string_view> table = {
      // irregular noun plurals
      {"matrices", "matrix"},
      {"vertices", "vertex"},
      {"indices", "index"},
      {"analyses", "analysis"},
      {"hypotheses", "hypothesis"},
      {"theses", "thesis"},
      {"syntheses", "synthesis"},
      {"axes", "axis"},
      {"bases", "basis"},
      {"criteria", "criterion"},
      {"phenomena", "phenomenon"},
      {"automata", "automaton"},
      {"corpora", "corpus"},
      {"schemata", "schema"},
      {"taxa", "taxon"},
      {"maxima", "maximum"},
      {"minima", "minimum"},
      {"optima", "optimum"},
      {"spectra", "spectrum"},
      {"quanta", "quantum"},
      {"strata", "stratum"},
      {"curricula", "curriculum"},
      {"formulae", "formula"},
      {"children", "child"},
      {"women", "woman"},
      {"men", "man"},
      {"mice", "mouse"},
      {"feet", "foot"},
      {"teeth", "tooth"},
      {"geese", "goose"},
      {"movies", "movie"},
      // invariant forms the suffix rules would mangle
      {"data", "data"},
      {"metadata", "metadata"},
      {"media", "media"},
      {"series", "series"},
      {"species", "species"},
      {"news", "news"},
      {"bias", "bias"},
      {"gas", "gas"},
      {"atlas", "atlas"},
      {"alias", "alias"},
      {"canvas", "canvas"},
      {"lens", "lens"},
      {"chaos", "chaos"},
      {"thus", "thus"},
      {"its", "its"},
      {"this", "this"},
      // very common verb forms
      {"is", "be"},
      {"are", "be"},
      {"was", "be"},
      {"were", "be"},
      {"been", "be"},
      {"being", "be"},
      {"am", "be"},
      {"has", "have"},
      {"had", "have"},
      {"having", "have"},
      {"does", "do"},
      {"did", "do"},
      {"done", "do"},
      {"goes", "go"},
      {"went", "go"},
      {"gone", "go"},
      {"made", "make"},
      {"uses", "use"},
      {"used", "use"},
      {"using", "use"},
      {"found", "find"},
      {"shown", "show"},
      {"showed", "show"},
      {"seen", "see"},
      {"given", "give"},
      {"gave", "give"},
      {"taken", "take"},
      {"took", "take"},
      {"built", "build"},
      {"held", "hold"},
      {"kept", "keep"},
      {"left", "leave"},
      {"meant", "mean"},
      {"ran", "run"},
      {"wrote", "write"},
      {"written", "write"},
  };
  return table;
}

inline bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

inline bool has_vowel(std::string_view s) {
  for (char c : s)
    if (is_vowel(c)) return true;
  return false;
}

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Undouble a trailing doubled consonant, except ll/ss (call, pass).
std::string repair_doubling(std::string stem) {
  std::size_t n = stem.size();
  if (n >= 2 && stem[n - 1] == stem[n - 2] && !is_vowel(stem[n - 1]) &&
      stem[n - 1] != 'l' && stem[n - 1] != 's') {
    stem.pop_back();
  }
  return stem;
}

}  // namespace

std::string lemmatize(std::string_view token) {
  if (token.empty()) return std::string();
  auto& exceptions = exception_table();
  if (auto it = exceptions.find(token); it != exceptions.end())
    return std::string(it->second);

  std::string t(token);
  const std::size_t n = t.size();

  // Mass nouns in -ics (statistics, semantics) never inflect here.
  if (ends_with(t, "ics")) return t;

  if (ends_with(t, "ies") && n >= 5) return t.substr(0, n - 3) + "y";
  if (ends_with(t, "sses")) return t.substr(0, n - 2);
  if (ends_with(t, "xes") || ends_with(t, "ches") || ends_with(t, "shes") ||
      ends_with(t, "zes")) {
    return t.substr(0, n - 2);
  }
  if (t.back() == 's' && n >= 3 && !ends_with(t, "ss") && !ends_with(t, "us") &&
      !ends_with(t, "is")) {
    return t.substr(0, n - 1);
  }
  if (ends_with(t, "ing") && n >= 6) {
    std::string stem = t.substr(0, n - 3);
    if (has_vowel(stem)) return repair_doubling(std::move(stem));
  }
  if (ends_with(t, "ed") && n >= 5) {
    std::string stem = t.substr(0, n - 2);
    if (has_vowel(stem) && stem.back() != 'e')
      return repair_doubling(std::move(stem));
  }
  return t;
}

std::vector<std::string> lemmatize_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (auto& tok : tokenize_words(text)) out.push_back(lemmatize(tok));
  return out;
}

std::string lemmatize_phrase(std::string_view text) {
  std::string out;
  for (auto& lemma : lemmatize_tokens(text)) {
    if (!out.empty()) out.push_back(' ');
    out += lemma;
  }
  return out;
}

// ---------------------------------------------------------------------------
// CompiledLexicon

CompiledLexicon CompiledLexicon::compile(const std::vector<std::string>& terms) {
  if (terms.empty()) throw DataError("lexicon: empty term list");
  CompiledLexicon lex;
  lex.nodes_.emplace_back();  // root

  for (const std::string& term : terms) {
    std::vector<std::string> lemmas = lemmatize_tokens(term);
    if (lemmas.empty()) {
      ++lex.skipped_;
      continue;
    }
    std::string key;
    for (std::size_t i = 0; i < lemmas.size(); ++i) {
      if (i) key.push_back(' ');
      key += lemmas[i];
    }
    auto [pit, inserted] = lex.pattern_by_lemma_.emplace(
        key, static_cast<std::uint32_t>(lex.patterns_.size()));
    if (inserted) {
      PatternInfo info;
      info.lemma = key;
      info.length = static_cast<std::uint32_t>(lemmas.size());
      info.sources.push_back(term);
      lex.patterns_.push_back(std::move(info));
      // Insert into the trie.
      std::uint32_t node = 0;
      for (const std::string& lemma : lemmas) {
        auto [lit, fresh] = lex.lemma_token_ids_.emplace(
            lemma, static_cast<std::uint32_t>(lex.lemma_token_ids_.size()));
        std::uint32_t sym = lit->second;
        auto& next = lex.nodes_[node].next;
        auto nit = next.find(sym);
        if (nit == next.end()) {
          std::uint32_t fresh_node = static_cast<std::uint32_t>(lex.nodes_.size());
          next.emplace(sym, fresh_node);
          lex.nodes_.emplace_back();
          node = fresh_node;
        } else {
          node = nit->second;
        }
      }
      lex.nodes_[node].pattern_ids.push_back(pit->second);
    } else {
      auto& sources = lex.patterns_[pit->second].sources;
      if (std::find(sources.begin(), sources.end(), term) == sources.end())
        sources.push_back(term);
    }
  }
  if (lex.patterns_.empty())
    throw DataError("lexicon: every term lemmatized to an empty sequence");

  // Failure links, breadth-first.
  std::deque<std::uint32_t> queue;
  for (auto& [sym, child] : lex.nodes_[0].next) {
    lex.nodes_[child].fail = 0;
    queue.push_back(child);
  }
  while (!queue.empty()) {
    std::uint32_t u = queue.front();
    queue.pop_front();
    const Node& un = lex.nodes_[u];
    std::uint32_t output_link =
        lex.nodes_[un.fail].pattern_ids.empty() ? lex.nodes_[un.fail].output_link
                                                : un.fail;
    lex.nodes_[u].output_link = output_link;
    for (auto [sym, v] : lex.nodes_[u].next) {
      // Walk fail links to find the failure state for v.
      std::uint32_t f = lex.nodes_[u].fail;
      for (;;) {
        auto it = lex.nodes_[f].next.find(sym);
        if (it != lex.nodes_[f].next.end() && it->second != v) {
          lex.nodes_[v].fail = it->second;
          break;
        }
        if (f == 0) {
          auto rit = lex.nodes_[0].next.find(sym);
          lex.nodes_[v].fail =
              (rit != lex.nodes_[0].next.end() && rit->second != v) ? rit->second : 0;
          break;
        }
        f = lex.nodes_[f].fail;
      }
      queue.push_back(v);
    }
  }
  return lex;
}

const std::vector<std::string>& CompiledLexicon::pattern_sources(
    std::uint32_t pattern_id) const {
  return patterns_.at(pattern_id).sources;
}

const std::string& CompiledLexicon::pattern_lemma(std::uint32_t pattern_id) const {
  return patterns_.at(pattern_id).lemma;
}

bool CompiledLexicon::contains_lemma(const std::string& lemma_phrase) const {
  return pattern_by_lemma_.count(lemma_phrase) != 0;
}

ExtractResult CompiledLexicon::extract(std::string_view text) const {
  ExtractResult result;
  result.tokens = tokenize(text);

  // Map tokens to lemma symbols; unknown lemma means no transition exists.
  constexpr std::uint32_t kUnknown = 0xFFFFFFFFu;
  std::vector<std::uint32_t> syms(result.tokens.size(), kUnknown);
  for (std::size_t i = 0; i < result.tokens.size(); ++i) {
    auto it = lemma_token_ids_.find(lemmatize(result.tokens[i].text));
    if (it != lemma_token_ids_.end()) syms[i] = it->second;
  }

  std::unordered_map<std::uint32_t, std::vector<Occurrence>> hits;
  std::uint32_t state = 0;
  for (std::size_t i = 0; i < syms.size(); ++i) {
    std::uint32_t sym = syms[i];
    if (sym == kUnknown) {
      state = 0;
      continue;
    }
    for (;;) {
      auto it = nodes_[state].next.find(sym);
      if (it != nodes_[state].next.end()) {
        state = it->second;
        break;
      }
      if (state == 0) break;
      state = nodes_[state].fail;
    }
    // Collect every pattern ending at this position via the output chain.
    for (std::uint32_t v = state; v != 0; v = nodes_[v].output_link) {
      for (std::uint32_t pid : nodes_[v].pattern_ids) {
        std::size_t len = patterns_[pid].length;
        hits[pid].push_back(Occurrence{i + 1 - len, i + 1});
      }
    }
  }

  std::vector<std::uint32_t> ids;
  ids.reserve(hits.size());
  for (auto& [pid, occ] : hits) ids.push_back(pid);
  std::sort(ids.begin(), ids.end());
  for (std::uint32_t pid : ids) {
    MatchedPattern m;
    m.pattern_id = pid;
    m.lemma = patterns_[pid].lemma;
    m.sources = patterns_[pid].sources;
    m.occurrences = std::move(hits[pid]);
    std::sort(m.occurrences.begin(), m.occurrences.end(),
              [](const Occurrence& a, const Occurrence& b) {
                if (a.begin_token != b.begin_token) return a.begin_token < b.begin_token;
                return a.end_token < b.end_token;
              });
    result.matches.push_back(std::move(m));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Corpus

Corpus parse_corpus_jsonl(std::string_view text) {
  Corpus corpus;
  std::unordered_set<std::string> seen_ids;
  std::size_t start = 0;
  std::uint64_t line_no = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("corpus line " + std::to_string(line_no) + ": " + e.what());
    }
    Document doc;
    if (j.contains("id"))
      doc.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
    else
      doc.id = std::to_string(line_no);
    doc.abstract = j.value("abstract", std::string());
    if (j.contains("keyphrases") && j["keyphrases"].is_array()) {
      for (const auto& k : j["keyphrases"]) doc.keyphrases.push_back(k.get<std::string>());
    } else if (j.contains("keywords") && j["keywords"].is_string()) {
      // KP20k ships keywords as a ';'-separated string.
      std::string all = j["keywords"].get<std::string>();
      std::size_t p = 0;
      while (p <= all.size()) {
        std::size_t semi = all.find(';', p);
        if (semi == std::string::npos) semi = all.size();
        std::string phrase = all.substr(p, semi - p);
        std::size_t b = phrase.find_first_not_of(" \t");
        std::size_t e = phrase.find_last_not_of(" \t");
        if (b != std::string::npos) doc.keyphrases.push_back(phrase.substr(b, e - b + 1));
        p = semi + 1;
      }
    }
    if (!seen_ids.insert(doc.id).second)
      throw DataError("corpus: duplicate document id '" + doc.id + "'");
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

Corpus load_corpus_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_corpus_jsonl(text);
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

DocResult evaluate_document(const Document& doc, const CompiledLexicon& lexicon) {
  DocResult r;
  r.id = doc.id;
  ExtractResult ex = lexicon.extract(doc.abstract);
  r.extracted = ex.matches.size();
  std::unordered_set<std::string> gold;
  for (const std::string& phrase : doc.keyphrases)
    gold.insert(lemmatize_phrase(phrase));
  for (const MatchedPattern& m : ex.matches)
    if (gold.count(m.lemma)) ++r.matched;
  r.annotated = doc.keyphrases.size();
  r.precision = r.extracted == 0
                    ? 0.0
                    : static_cast<double>(r.matched) / static_cast<double>(r.extracted);
  return r;
}

}  // namespace

EvalReport evaluate(const Corpus& corpus, const CompiledLexicon& lexicon,
                    int threads) {
  if (corpus.documents.empty()) throw DataError("evaluate: empty corpus");
  EvalReport report;
  const std::size_t n = corpus.documents.size();
  report.per_document.resize(n);

  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i)
      report.per_document[i] = evaluate_document(corpus.documents[i], lexicon);
  } else {
    // Slot-indexed output keeps aggregation order-independent.
    std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::thread> pool;
    std::atomic<std::size_t> cursor{0};
    for (std::size_t t = 0; t < nthreads; ++t) {
      pool.emplace_back([&]() {
        for (;;) {
          std::size_t i = cursor.fetch_add(1);
          if (i >= n) return;
          report.per_document[i] = evaluate_document(corpus.documents[i], lexicon);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  std::uint64_t sum_matched = 0, sum_extracted = 0, sum_annotated = 0;
  for (const DocResult& d : report.per_document) {
    sum_matched += d.matched;
    sum_extracted += d.extracted;
    sum_annotated += d.annotated;
  }
  report.precision = sum_extracted == 0 ? 0.0
                                        : static_cast<double>(sum_matched) /
                                              static_cast<double>(sum_extracted);
  report.recall = sum_annotated == 0 ? 0.0
                                     : static_cast<double>(sum_matched) /
                                           static_cast<double>(sum_annotated);
  report.f1 = (report.precision + report.recall) == 0.0
                  ? 0.0
                  : 2.0 * report.precision * report.recall /
                        (report.precision + report.recall);

  // Welford; the tests cross-check against a two-pass oracle.
  double mean = 0.0, m2 = 0.0;
  std::size_t count = 0;
  for (const DocResult& d : report.per_document) {
    ++count;
    double delta = d.precision - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (d.precision - mean);
  }
  report.precision_stddev = std::sqrt(m2 / static_cast<double>(count));

  std::vector<double> sorted;
  sorted.reserve(n);
  for (const DocResult& d : report.per_document) sorted.push_back(d.precision);
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && sorted[j] == sorted[i]) ++j;
    report.ecdf.push_back(
        EcdfPoint{sorted[i], static_cast<double>(j) / static_cast<double>(n)});
    i = j;
  }
  return report;
}

ComparisonCounts compare_reports(const EvalReport& a, const EvalReport& b) {
  if (a.per_document.size() != b.per_document.size())
    throw DataError("compare_reports: document count mismatch");
  std::unordered_map<std::string, double> b_precision;
  for (const DocResult& d : b.per_document) b_precision.emplace(d.id, d.precision);
  ComparisonCounts c;
  for (const DocResult& d : a.per_document) {
    auto it = b_precision.find(d.id);
    if (it == b_precision.end())
      throw DataError("compare_reports: document id '" + d.id +
                      "' missing from baseline");
    if (d.precision > it->second)
      ++c.better;
    else if (d.precision < it->second)
      ++c.worse;
    else
      ++c.equal;
  }
  return c;
}

CoverageReport coverage(const Corpus& corpus,
                        const std::unordered_set<std::string>& vocab_lemmas) {
  CoverageReport r;
  std::unordered_map<std::string, std::uint64_t> gold_occurrences;
  for (const Document& doc : corpus.documents) {
    for (const std::string& phrase : doc.keyphrases) {
      ++gold_occurrences[lemmatize_phrase(phrase)];
      ++r.corpus_total;
    }
  }
  r.corpus_unique = gold_occurrences.size();
  for (const auto& [lemma, count] : gold_occurrences) {
    if (vocab_lemmas.count(lemma)) {
      ++r.unique_matched;
      r.total_matched += count;
    }
  }
  r.unique_pct = r.corpus_unique == 0 ? 0.0
                                      : 100.0 * static_cast<double>(r.unique_matched) /
                                            static_cast<double>(r.corpus_unique);
  r.total_pct = r.corpus_total == 0 ? 0.0
                                    : 100.0 * static_cast<double>(r.total_matched) /
                                          static_cast<double>(r.corpus_total);
  r.total_to_unique_ratio =
      r.unique_matched == 0 ? 0.0
                            : static_cast<double>(r.total_matched) /
                                  static_cast<double>(r.unique_matched);
  return r;
}

SampleEvalTable evaluate_category_sample(
    const std::map<std::string, bool>& sample_relevance,
    const std::map<std::string, std::unordered_set<std::string>>& variant_sets,
    const std::unordered_map<std::string, std::uint32_t>& levels) {
  SampleEvalTable table;
  // Gather sampled titles by level.
  std::map<std::uint32_t, std::vector<const std::string*>> by_level;
  for (const auto& [title, relevant] : sample_relevance) {
    auto it = levels.find(title);
    if (it == levels.end())
      throw DataError("sample title '" + title + "' has no level");
    by_level[it->second].push_back(&title);
  }
  for (const auto& [level, titles] : by_level) {
    std::uint64_t relevant_at_level = 0;
    for (const std::string* t : titles)
      if (sample_relevance.at(*t)) ++relevant_at_level;
    for (const auto& [name, vset] : variant_sets) {
      std::uint64_t in_variant = 0, relevant_in_variant = 0;
      for (const std::string* t : titles) {
        if (!vset.count(*t)) continue;
        ++in_variant;
        if (sample_relevance.at(*t)) ++relevant_in_variant;
      }
      SampleMetric m;
      if (in_variant > 0)
        m.precision = static_cast<double>(relevant_in_variant) /
                      static_cast<double>(in_variant);
      if (relevant_at_level > 0)
        m.recall = static_cast<double>(relevant_in_variant) /
                   static_cast<double>(relevant_at_level);
      table[level][name] = m;
    }
  }
  return table;
}

TagResult tag_abstract(const TermCategoryIndex& index,
                       const CompiledLexicon& lexicon, std::string_view text) {
  TagResult result;
  ExtractResult ex = lexicon.extract(text);
  std::map<std::string, std::unordered_set<std::string>> terms_per_category;
  for (const MatchedPattern& m : ex.matches) {
    // Categories credited by this pattern: union over its source terms.
    std::vector<std::string> cats;
    for (const std::string& source : m.sources) {
      auto it = index.find(source);
      if (it == index.end()) continue;
      for (const std::string& c : it->second) {
        if (std::find(cats.begin(), cats.end(), c) == cats.end()) cats.push_back(c);
        terms_per_category[c].insert(source);
      }
    }
    std::sort(cats.begin(), cats.end());
    for (const Occurrence& occ : m.occurrences) {
      TagMatch tm;
      tm.term = m.sources.front();
      tm.start = ex.tokens[occ.begin_token].begin;
      tm.end = ex.tokens[occ.end_token - 1].end;
      tm.categories = cats;
      result.matches.push_back(tm);
    }
  }
  std::sort(result.matches.begin(), result.matches.end(),
            [](const TagMatch& a, const TagMatch& b) {
              if (a.start != b.start) return a.start < b.start;
              if (a.end != b.end) return a.end < b.end;
              return a.term < b.term;
            });
  for (const auto& [cat, terms] : terms_per_category)
    result.category_counts.push_back(CategoryCount{cat, terms.size()});
  std::sort(result.category_counts.begin(), result.category_counts.end(),
            [](const CategoryCount& a, const CategoryCount& b) {
              if (a.count != b.count) return a.count > b.count;
              return a.category < b.category;
            });
  return result;
}

}  // namespace wikivoc::keyphrase
