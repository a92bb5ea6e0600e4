//
// Copyright 2026 The fairci Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include <fstream>
#include <iterator>
#include <sstream>

#include "fairci/error.hpp"
#include "fairci/ingest.hpp"

namespace fairci {
namespace {

bool IsBlank(char c) { return c == ' ' || c == '\t'; }

std::string Trimmed(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && IsBlank(s[b])) ++b;
  while (e > b && IsBlank(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

class RowSplitter {
 public:
  RowSplitter(std::string_view bytes, const ParseOptions& options)
      : bytes_(bytes), opt_(options) {}

  // Next non-blank row; false at end of input. line() is the 1-based line on
  // which the returned row started.
  bool Next(std::vector<std::string>& row) {
    while (pos_ < bytes_.size()) {
      line_ = next_line_;
      Split(row);
      const bool blank = row.size() == 1 && row[0].empty() && !last_quoted_;
      if (!blank) return true;
    }
    return false;
  }

  std::size_t line() const { return line_; }

 private:
  void EndField(std::vector<std::string>& row, std::string& field, bool quoted) {
    row.push_back(opt_.trim_whitespace && !quoted ? Trimmed(field)
                                                  : std::move(field));
    field.clear();
  }

  void Split(std::vector<std::string>& row) {
    row.clear();
    std::string field;
    bool in_quotes = false;
    bool quoted = false;
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_++];
      if (in_quotes) {
        if (c == '"') {
          if (pos_ < bytes_.size() && bytes_[pos_] == '"') {
            field.push_back('"');
            ++pos_;
          } else {
            in_quotes = false;
          }
        } else {
          if (c == '\n') ++next_line_;
          field.push_back(c);
        }
        continue;
      }
      if (c == '"' && !quoted &&
          (field.empty() ||
           (opt_.trim_whitespace && Trimmed(field).empty()))) {
        field.clear();
        in_quotes = quoted = true;
      } else if (c == opt_.delimiter) {
        EndField(row, field, quoted);
        quoted = false;
      } else if (c == '\n' || c == '\r') {
        if (c == '\r' && pos_ < bytes_.size() && bytes_[pos_] == '\n') ++pos_;
        ++next_line_;
        last_quoted_ = quoted;
        EndField(row, field, quoted);
        return;
      } else {
        field.push_back(c);
      }
    }
    if (in_quotes) {
      throw Error(ErrorCode::kRaggedRow,
                  "unterminated quoted field starting on line " +
                      std::to_string(line_));
    }
    last_quoted_ = quoted;
    EndField(row, field, quoted);
  }

  std::string_view bytes_;
  const ParseOptions& opt_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t next_line_ = 1;
  bool last_quoted_ = false;
};

}  // namespace

std::optional<std::size_t> RawTable::ColumnIndex(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  return std::nullopt;
}

RawTable ParseTable(std::string_view bytes, const ParseOptions& options,
                    std::string source) {
  RawTable table;
  table.source = std::move(source);
  table.checksum = Sha256Hex(bytes);

  RowSplitter splitter(bytes, options);
  std::vector<std::string> row;
  if (options.has_header) {
    if (!splitter.Next(row)) {
      throw Error(ErrorCode::kEmptyFile, table.source + " has no header row");
    }
    table.header = row;
  } else if (!options.column_names.empty()) {
    table.header = options.column_names;
  }
  while (splitter.Next(row)) {
    if (table.header.empty()) {
      for (std::size_t i = 1; i <= row.size(); ++i)
        table.header.push_back("V" + std::to_string(i));
    }
    ++table.raw_row_count;
    if (row.size() != table.header.size()) {
      if (options.ragged_rows == MissingPolicy::kError) {
        throw Error(ErrorCode::kRaggedRow,
                    table.source + " line " + std::to_string(splitter.line()) +
                        ": expected " + std::to_string(table.header.size()) +
                        " fields, found " + std::to_string(row.size()));
      }
      ++table.n_dropped;
      continue;
    }
    table.rows.push_back(row);
  }
  if (table.header.empty()) {
    throw Error(ErrorCode::kEmptyFile, table.source + " contains no rows");
  }
  return table;
}

RawTable ParseTable(std::istream& in, const ParseOptions& options,
                    std::string source) {
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) {
    throw Error(ErrorCode::kIoError, "failed reading " + source);
  }
  return ParseTable(buffer.view(), options, std::move(source));
}

RawTable ParseTableFile(const std::filesystem::path& path,
                        const ParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  }
  return ParseTable(in, options, path.string());
}

}  // namespace fairci
