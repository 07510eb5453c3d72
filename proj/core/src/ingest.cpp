#include "wikivoc/ingest.hpp"

#include <zlib.h>

#include <cstring>

namespace wikivoc::ingest {

namespace {
constexpr std::size_t kBufSize = 1 << 16;
}

const char* table_name(Table t) {
  switch (t) {
    case Table::category: return "category";
    case Table::categorylinks: return "categorylinks";
    case Table::page: return "page";
  }
  return "?";
}

Table table_from_name(std::string_view name) {
  if (name == "category") return Table::category;
  if (name == "categorylinks") return Table::categorylinks;
  if (name == "page") return Table::page;
  throw ConfigError("unknown table name: " + std::string(name));
}

TableSchema default_schema(Table t) {
  switch (t) {
    case Table::category: return {t, 5};
    case Table::categorylinks: return {t, 7};
    case Table::page: return {t, 13};
  }
  return {t, 0};
}

// ---------------------------------------------------------------------------
// ByteSource

struct ByteSource::Impl {
  gzFile file = nullptr;
  std::string data;
  std::size_t data_pos = 0;

  ~Impl() {
    if (file) gzclose(file);
  }
};

ByteSource::ByteSource() : impl_(new Impl) {}
ByteSource::~ByteSource() = default;
ByteSource::ByteSource(ByteSource&&) noexcept = default;
ByteSource& ByteSource::operator=(ByteSource&&) noexcept = default;

ByteSource ByteSource::open_file(const std::string& path) {
  ByteSource s;
  s.impl_->file = gzopen(path.c_str(), "rb");
  if (!s.impl_->file) throw DataError("cannot open file: " + path);
  gzbuffer(s.impl_->file, kBufSize);
  return s;
}

ByteSource ByteSource::from_string(std::string data) {
  ByteSource s;
  s.impl_->data = std::move(data);
  return s;
}

std::size_t ByteSource::read(char* buf, std::size_t len) {
  if (impl_->file) {
    int n = gzread(impl_->file, buf, static_cast<unsigned>(len));
    if (n < 0) {
      int errnum = 0;
      const char* msg = gzerror(impl_->file, &errnum);
      throw DataError(std::string("read error: ") + (msg ? msg : "?"));
    }
    return static_cast<std::size_t>(n);
  }
  std::size_t avail = impl_->data.size() - impl_->data_pos;
  std::size_t n = avail < len ? avail : len;
  std::memcpy(buf, impl_->data.data() + impl_->data_pos, n);
  impl_->data_pos += n;
  return n;
}

// ---------------------------------------------------------------------------
// SqlDumpParser

SqlDumpParser::SqlDumpParser(ByteSource source, TableSchema schema)
    : source_(std::move(source)), schema_(schema), buf_(kBufSize) {}

int SqlDumpParser::get() {
  if (pos_ >= fill_) {
    if (eof_) return -1;
    fill_ = source_.read(buf_.data(), buf_.size());
    pos_ = 0;
    if (fill_ == 0) {
      eof_ = true;
      return -1;
    }
  }
  ++offset_;
  return static_cast<unsigned char>(buf_[pos_++]);
}

int SqlDumpParser::peek() {
  if (pos_ >= fill_) {
    if (eof_) return -1;
    fill_ = source_.read(buf_.data(), buf_.size());
    pos_ = 0;
    if (fill_ == 0) {
      eof_ = true;
      return -1;
    }
  }
  return static_cast<unsigned char>(buf_[pos_]);
}

namespace {
inline bool sql_space(int c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r';
}
inline int lower(int c) { return (c >= 'A' && c <= 'Z') ? c - 'A' + 'a' : c; }
}  // namespace

void SqlDumpParser::skip_spaces() {
  while (sql_space(peek())) get();
}

void SqlDumpParser::skip_ws_and_comments() {
  for (;;) {
    int c = peek();
    if (sql_space(c)) {
      get();
      continue;
    }
    if (c == '-') {  // possible `-- comment` to end of line
      get();
      if (peek() == '-') {
        while (peek() != '\n' && peek() != -1) get();
        continue;
      }
      throw ParseError("unexpected '-'", offset_);
    }
    if (c == '/') {  // /* ... */ (covers /*!40101 ... */ conditionals)
      get();
      if (peek() != '*') throw ParseError("unexpected '/'", offset_);
      get();
      int prev = 0;
      for (;;) {
        int d = get();
        if (d == -1) throw ParseError("unterminated comment", offset_);
        if (prev == '*' && d == '/') break;
        prev = d;
      }
      continue;
    }
    return;
  }
}

// Consume to the terminating ';' of a non-INSERT statement, honoring quoted
// regions so a ';' inside a string or identifier does not end it early.
void SqlDumpParser::skip_statement() {
  for (;;) {
    int c = get();
    if (c == -1) return;
    if (c == ';') return;
    if (c == '\'' || c == '"' || c == '`') {
      int quote = c;
      for (;;) {
        int d = get();
        if (d == -1) throw ParseError("unterminated quote in statement", offset_);
        if (d == '\\' && quote != '`') {
          get();
          continue;
        }
        if (d == quote) break;
      }
    }
  }
}

void SqlDumpParser::expect_keyword(const char* kw) {
  for (const char* p = kw; *p; ++p) {
    int c = get();
    if (lower(c) != lower(*p))
      throw ParseError(std::string("expected keyword '") + kw + "'", offset_);
  }
}

// Position the stream at the first tuple of the next INSERT statement.
bool SqlDumpParser::seek_insert() {
  for (;;) {
    skip_ws_and_comments();
    int c = peek();
    if (c == -1) return false;
    // Peek a keyword: INSERT starts statements we care about.
    if (lower(c) == 'i') {
      expect_keyword("insert");
      skip_ws_and_comments();
      expect_keyword("into");
      skip_ws_and_comments();
      // Table name, optionally backquoted.
      std::string name;
      if (peek() == '`') {
        get();
        for (;;) {
          int d = get();
          if (d == -1) throw ParseError("unterminated identifier", offset_);
          if (d == '`') break;
          name.push_back(static_cast<char>(lower(d)));
        }
      } else {
        while (!sql_space(peek()) && peek() != '(' && peek() != -1)
          name.push_back(static_cast<char>(lower(get())));
      }
      if (name != table_name(schema_.table))
        throw DataError("INSERT for table '" + name + "' but expected '" +
                        table_name(schema_.table) + "' (byte offset " +
                        std::to_string(offset_) + ")");
      skip_ws_and_comments();
      // Optional column list before VALUES.
      if (peek() == '(') {
        int depth = 0;
        for (;;) {
          int d = get();
          if (d == -1) throw ParseError("unterminated column list", offset_);
          if (d == '(') ++depth;
          if (d == ')' && --depth == 0) break;
        }
        skip_ws_and_comments();
      }
      expect_keyword("values");
      skip_ws_and_comments();
      return true;
    }
    skip_statement();
  }
}

std::string SqlDumpParser::parse_quoted(char quote) {
  std::string out;
  for (;;) {
    int c = get();
    if (c == -1) throw ParseError("unterminated string", offset_);
    if (c == '\\') {
      int d = get();
      if (d == -1) throw ParseError("dangling escape", offset_);
      switch (d) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case '0': out.push_back('\0'); break;
        case 'b': out.push_back('\b'); break;
        case 'Z': out.push_back('\x1a'); break;
        default: out.push_back(static_cast<char>(d)); break;  // \' \" \\ \% \_
      }
      continue;
    }
    if (c == quote) {
      if (peek() == quote) {  // '' doubling
        get();
        out.push_back(quote);
        continue;
      }
      return out;
    }
    out.push_back(static_cast<char>(c));
  }
}

void SqlDumpParser::parse_tuple(RawRecord& out) {
  out.table = schema_.table;
  out.columns.clear();
  if (get() != '(') throw ParseError("expected '('", offset_);
  for (;;) {
    skip_spaces();
    int c = peek();
    if (c == '\'' || c == '"') {
      get();
      out.columns.push_back(parse_quoted(static_cast<char>(c)));
    } else {
      // Bare token: number (possibly negative), NULL, etc.
      std::string tok;
      for (;;) {
        int d = peek();
        if (d == ',' || d == ')' || d == -1) break;
        if (sql_space(d)) break;
        tok.push_back(static_cast<char>(get()));
      }
      if (tok == "NULL")
        out.columns.push_back(std::string());
      else
        out.columns.push_back(std::move(tok));
    }
    skip_spaces();
    int d = get();
    if (d == ',') continue;
    if (d == ')') break;
    throw ParseError("unbalanced tuple: expected ',' or ')'", offset_);
  }
  if (out.columns.size() != schema_.column_count)
    throw DataError("column count mismatch for table " +
                    std::string(table_name(schema_.table)) + ": got " +
                    std::to_string(out.columns.size()) + ", expected " +
                    std::to_string(schema_.column_count) + " (byte offset " +
                    std::to_string(offset_) + ")");
}

bool SqlDumpParser::next(RawRecord& out) {
  if (!in_values_) {
    if (!seek_insert()) return false;
    in_values_ = true;
  }
  parse_tuple(out);
  skip_spaces();
  int c = get();
  if (c == ',') {
    // next tuple of the same statement
  } else if (c == ';') {
    in_values_ = false;
  } else if (c == -1) {
    in_values_ = false;  // tolerate missing final ';'
  } else {
    throw ParseError("expected ',' or ';' after tuple", offset_);
  }
  return true;
}

// ---------------------------------------------------------------------------
// TSV

const char* tsv_kind_name(TsvKind k) {
  switch (k) {
    case TsvKind::cat_edges: return "cat_edges";
    case TsvKind::cat_pages: return "cat_pages";
    case TsvKind::titles: return "titles";
    case TsvKind::redirects: return "redirects";
  }
  return "?";
}

std::size_t tsv_field_count(TsvKind k) {
  switch (k) {
    case TsvKind::cat_edges: return 2;   // child_title <TAB> parent_title
    case TsvKind::cat_pages: return 2;   // page_title <TAB> category_title
    case TsvKind::titles: return 3;      // id <TAB> title <TAB> namespace
    case TsvKind::redirects: return 2;   // alias_title <TAB> canonical_title
  }
  return 0;
}

Table tsv_record_table(TsvKind k) {
  switch (k) {
    case TsvKind::cat_edges: return Table::categorylinks;
    case TsvKind::cat_pages: return Table::categorylinks;
    case TsvKind::titles: return Table::page;
    case TsvKind::redirects: return Table::page;
  }
  return Table::page;
}

TsvReader::TsvReader(ByteSource source, TsvKind kind)
    : source_(std::move(source)), kind_(kind), buf_(kBufSize) {}

bool TsvReader::next_line(std::string& line) {
  line.clear();
  bool got_any = false;
  for (;;) {
    if (pos_ >= fill_) {
      if (eof_) return got_any;
      fill_ = source_.read(buf_.data(), buf_.size());
      pos_ = 0;
      if (fill_ == 0) {
        eof_ = true;
        return got_any || !line.empty();
      }
    }
    got_any = true;
    char c = buf_[pos_++];
    if (c == '\n') return true;
    line.push_back(c);
  }
}

bool TsvReader::next(RawRecord& out) {
  std::string line;
  while (next_line(line)) {
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    out.table = tsv_record_table(kind_);
    out.columns.clear();
    std::size_t start = 0;
    for (;;) {
      std::size_t tab = line.find('\t', start);
      if (tab == std::string::npos) {
        out.columns.push_back(line.substr(start));
        break;
      }
      out.columns.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    if (out.columns.size() != tsv_field_count(kind_))
      throw DataError(std::string(tsv_kind_name(kind_)) + " line " +
                      std::to_string(line_) + ": expected " +
                      std::to_string(tsv_field_count(kind_)) + " fields, got " +
                      std::to_string(out.columns.size()));
    return true;
  }
  return false;
}

std::string to_tsv_line(const RawRecord& rec) {
  std::string out;
  for (std::size_t i = 0; i < rec.columns.size(); ++i) {
    if (i) out.push_back('\t');
    out += rec.columns[i];
  }
  out.push_back('\n');
  return out;
}

}  // namespace wikivoc::ingest
