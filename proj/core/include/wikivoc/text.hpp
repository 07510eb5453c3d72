#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace wikivoc {

// Canonical title form: lowercase (ASCII), underscores as spaces, runs of
// whitespace collapsed to one space, no surrounding whitespace. Idempotent.
// Titles are the equality basis for every cross-file join in the pipeline.
std::string normalize_title(std::string_view raw);

// True if normalize_title(raw) would be empty (invalid as a title).
bool normalizes_to_empty(std::string_view raw);

struct Token {
  std::string text;        // lowercased
  std::size_t begin = 0;   // byte offsets into the source text
  std::size_t end = 0;
};

// Splits on any non-alphanumeric byte, lowercases ASCII. "radio-frequency"
// tokenizes the same as "radio frequency".
std::vector<Token> tokenize(std::string_view text);

// Tokens only, no offsets.
std::vector<std::string> tokenize_words(std::string_view text);

// Whitespace-delimited token count (the basis of the unigram rule and the
// term-length statistics).
std::size_t count_tokens(std::string_view text);

}  // namespace wikivoc
