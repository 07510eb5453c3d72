#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wikivoc/common.hpp"
#include "wikivoc/text.hpp"

namespace wikivoc::ingest {

enum class Table { category, categorylinks, page };

const char* table_name(Table t);
Table table_from_name(std::string_view name);

struct TableSchema {
  Table table;
  std::size_t column_count;
};

// MediaWiki dump layouts this toolkit understands. `page` column counts vary
// across dump generations; pass an explicit count to override.
TableSchema default_schema(Table t);

struct RawRecord {
  Table table = Table::category;
  std::vector<std::string> columns;  // fully unescaped
};

// Byte source that transparently reads gzip or plain files (zlib gzopen
// handles both). Also constructible over an in-memory buffer for tests.
class ByteSource {
public:
  static ByteSource open_file(const std::string& path);
  static ByteSource from_string(std::string data);
  ~ByteSource();
  ByteSource(ByteSource&&) noexcept;
  ByteSource& operator=(ByteSource&&) noexcept;
  ByteSource(const ByteSource&) = delete;

  // Returns bytes read, 0 at EOF.
  std::size_t read(char* buf, std::size_t len);

private:
  ByteSource();
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Streaming pull-parser over `INSERT INTO <table> VALUES (...),(...);`
// statements. Single pass, bounded memory. Non-INSERT statements are
// skipped; escapes \' \" \\ \n \t \r \0 and '' doubling are decoded;
// SQL NULL becomes an empty column.
class SqlDumpParser {
public:
  SqlDumpParser(ByteSource source, TableSchema schema);

  // Fills `out` with the next value tuple; false at end of stream.
  // Throws ParseError (malformed tuple, with byte offset) or DataError
  // (column count / table name mismatch).
  bool next(RawRecord& out);

  std::uint64_t byte_offset() const { return offset_; }

private:
  int get();
  int peek();
  void expect_keyword(const char* kw);
  void skip_spaces();
  void skip_ws_and_comments();
  void skip_statement();
  bool seek_insert();
  void parse_tuple(RawRecord& out);
  std::string parse_quoted(char quote);

  ByteSource source_;
  TableSchema schema_;
  std::vector<char> buf_;
  std::size_t pos_ = 0;
  std::size_t fill_ = 0;
  std::uint64_t offset_ = 0;
  bool in_values_ = false;
  bool eof_ = false;
};

enum class TsvKind { cat_edges, cat_pages, titles, redirects };

const char* tsv_kind_name(TsvKind k);
std::size_t tsv_field_count(TsvKind k);
Table tsv_record_table(TsvKind k);

// Line-oriented TSV reader: `#` comments and blank lines skipped, CRLF
// tolerated. Wrong field count raises DataError with the line number.
class TsvReader {
public:
  TsvReader(ByteSource source, TsvKind kind);
  bool next(RawRecord& out);
  std::uint64_t line_number() const { return line_; }

private:
  bool next_line(std::string& line);
  ByteSource source_;
  TsvKind kind_;
  std::vector<char> buf_;
  std::size_t pos_ = 0;
  std::size_t fill_ = 0;
  std::uint64_t line_ = 0;
  bool eof_ = false;
};

// Serializes records in the bit-exact TSV formats. Values must already be
// tab-free (normalized titles are).
std::string to_tsv_line(const RawRecord& rec);

}  // namespace wikivoc::ingest
