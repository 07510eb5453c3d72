#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "wikivoc/common.hpp"
#include "wikivoc/keyphrase.hpp"

namespace {

using wikivoc::Rng;
using wikivoc::keyphrase::CompiledLexicon;

std::vector<std::string> synth_terms(std::size_t count, Rng& rng) {
  static const std::vector<std::string> vocab = {
      "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta",
      "iota",  "kappa", "lambda", "mu",  "nu",      "xi",   "omicron"};
  std::vector<std::string> terms;
  for (std::size_t i = 0; i < count; ++i) {
    std::string t;
    std::size_t len = 1 + rng.below(3);
    for (std::size_t j = 0; j < len; ++j) {
      if (j) t.push_back(' ');
      t += vocab[rng.below(vocab.size())];
    }
    t += " " + std::to_string(i % 997);
    terms.push_back(t);
  }
  return terms;
}

std::string synth_text(std::size_t tokens, Rng& rng) {
  static const std::vector<std::string> vocab = {
      "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta",
      "filler", "words", "between", "terms"};
  std::string text;
  for (std::size_t i = 0; i < tokens; ++i) {
    if (i) text.push_back(' ');
    text += vocab[rng.below(vocab.size())];
  }
  return text;
}

void BM_lexicon_compile(benchmark::State& state) {
  Rng rng(1);
  auto terms = synth_terms(static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) {
    auto lex = CompiledLexicon::compile(terms);
    benchmark::DoNotOptimize(lex.pattern_count());
  }
}
BENCHMARK(BM_lexicon_compile)->Arg(1000)->Arg(10000);

void BM_extract_abstract(benchmark::State& state) {
  Rng rng(2);
  auto terms = synth_terms(static_cast<std::size_t>(state.range(0)), rng);
  auto lex = CompiledLexicon::compile(terms);
  std::string text = synth_text(200, rng);
  for (auto _ : state) {
    auto result = lex.extract(text);
    benchmark::DoNotOptimize(result.matches.size());
  }
}
BENCHMARK(BM_extract_abstract)->Arg(1000)->Arg(10000);

}  // namespace
