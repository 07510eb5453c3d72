#include "wikivoc/text.hpp"

namespace wikivoc {

namespace {

inline bool is_space_like(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v' || c == '_';
}

inline char lower_ascii(unsigned char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                : static_cast<char>(c);
}

inline bool is_alnum_ascii(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z');
}

}  // namespace

std::string normalize_title(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (unsigned char c : raw) {
    if (is_space_like(c)) {
      if (!out.empty()) pending_space = true;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(lower_ascii(c));
  }
  return out;
}

bool normalizes_to_empty(std::string_view raw) {
  for (unsigned char c : raw) {
    if (!is_space_like(c)) return false;
  }
  return true;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    // Non-ASCII bytes are part of tokens: multibyte UTF-8 words survive as
    // opaque units instead of splitting per byte.
    bool in_token = is_alnum_ascii(c) || c >= 0x80;
    if (!in_token) {
      ++i;
      continue;
    }
    std::size_t start = i;
    std::string tok;
    while (i < n) {
      unsigned char d = static_cast<unsigned char>(text[i]);
      if (!(is_alnum_ascii(d) || d >= 0x80)) break;
      tok.push_back(lower_ascii(d));
      ++i;
    }
    out.push_back(Token{std::move(tok), start, i});
  }
  return out;
}

std::vector<std::string> tokenize_words(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : tokenize(text)) out.push_back(std::move(t.text));
  return out;
}

std::size_t count_tokens(std::string_view text) {
  // Whitespace-delimited: "moment (mathematics)" counts as 2.
  std::size_t count = 0;
  bool in_token = false;
  for (unsigned char c : text) {
    bool tok = !is_space_like(c);
    if (tok && !in_token) ++count;
    in_token = tok;
  }
  return count;
}

}  // namespace wikivoc
