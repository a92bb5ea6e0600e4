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

#ifndef FAIRCI_INGEST_HPP_
#define FAIRCI_INGEST_HPP_

// Delimited-text ingestion, schema mapping onto (prediction, label, group)
// records, and the dataset preset registry with its download cache.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fairci/metrics.hpp"

namespace fairci {

enum class MissingPolicy { kDrop, kError };

std::string_view MissingPolicyName(MissingPolicy policy);

struct ParseOptions {
  char delimiter = ',';
  bool has_header = true;
  // Strip spaces and tabs around unquoted fields.
  bool trim_whitespace = false;
  // Header to use when has_header is false. Empty means V1, V2, ...
  std::vector<std::string> column_names;
  // Rows whose field count differs from the header.
  MissingPolicy ragged_rows = MissingPolicy::kError;
};

struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::uint64_t raw_row_count = 0;  // non-blank data rows seen
  std::uint64_t n_dropped = 0;      // ragged rows dropped
  std::string source;
  std::string checksum;  // SHA-256 of the input bytes, lowercase hex

  std::optional<std::size_t> ColumnIndex(std::string_view name) const;
};

// RFC 4180 style: quoted fields may contain delimiters, doubled quotes and
// line breaks; CRLF and LF line endings; blank lines are skipped.
// Errors: kEmptyFile (no header and no rows), kRaggedRow (error policy).
RawTable ParseTable(std::string_view bytes, const ParseOptions& options,
                    std::string source = "<memory>");
RawTable ParseTable(std::istream& in, const ParseOptions& options,
                    std::string source = "<stream>");
// Error kIoError when the file cannot be read.
RawTable ParseTableFile(const std::filesystem::path& path,
                        const ParseOptions& options);

// Field-for-field image of the JSON schema document (see README for keys).
struct SchemaConfig {
  std::string prediction_column;
  std::optional<std::string> label_column;
  std::string group_column;
  std::set<std::string> positive_prediction_values;
  std::set<std::string> positive_label_values;
  std::set<std::string> protected_group_values;  // S = 0
  std::set<std::string> favored_group_values;    // S = 1
  // When given, prediction/label values outside positive + negative are
  // unmappable. When absent, every non-missing, non-positive value is 0.
  std::optional<std::set<std::string>> negative_prediction_values;
  std::optional<std::set<std::string>> negative_label_values;
  MissingPolicy missing_policy = MissingPolicy::kDrop;

  // Parsing of the source file.
  ParseOptions format;
  // Cell values treated as missing.
  std::set<std::string> missing_tokens{""};
  // Drop rows with a missing token in any column, not just the mapped ones.
  bool drop_incomplete_rows = false;

  // Error kSchemaError on overlapping group sets or empty positive sets.
  void Validate() const;
};

SchemaConfig ParseSchemaJson(std::string_view text);
SchemaConfig LoadSchemaFile(const std::filesystem::path& path);
std::string SchemaToJson(const SchemaConfig& schema);

struct AuditTable {
  std::vector<AuditRecord> records;
  std::uint64_t n_dropped = 0;
  std::uint64_t raw_row_count = 0;
  std::string source;
  std::optional<std::string> checksum;

  bool has_labels() const {
    return !records.empty() && records.front().label.has_value();
  }
  friend bool operator==(const AuditTable&, const AuditTable&) = default;
};

// Maps every row onto an AuditRecord, in input order. Rows whose group is in
// neither value set, or with missing/unmappable values, are dropped and
// counted under the drop policy and raise kUnmappableValue under the error
// policy. Errors: kMissingColumn, kUnmappableValue, kEmptyInput (no record
// survives).
AuditTable ApplySchema(const RawTable& raw, const SchemaConfig& schema);

struct MultiGroupTable {
  std::vector<GroupedRecord> records;
  std::uint64_t n_dropped = 0;
  std::uint64_t raw_row_count = 0;
  std::string source;
};

// Variant for multi-class protected attributes: the group value is kept
// verbatim and the group value sets are ignored.
MultiGroupTable ApplyMultiGroupSchema(const RawTable& raw,
                                      const SchemaConfig& schema);

// Canonical form: header "prediction,label,group" (label column omitted for
// label-free tables), one 0/1 row per record.
std::string ToCanonicalCsv(const AuditTable& table);
SchemaConfig CanonicalSchema(bool has_labels);

// Lowercase hex SHA-256.
std::string Sha256Hex(std::string_view bytes);
std::string Sha256File(const std::filesystem::path& path);

// Bytes of one stored or deflated member of a zip archive.
// Error kIoError when the archive is malformed or lacks the member.
std::string ExtractZipMember(std::string_view archive, std::string_view member);

struct RegistryEntry {
  std::string id;
  std::string description;
  // Tried in order until one yields bytes with the right digest.
  std::vector<std::string> urls;
  // Set when the URL serves a zip archive containing the table.
  std::optional<std::string> archive_member;
  std::optional<std::string> archive_digest;
  std::string filename;
  std::string digest;  // SHA-256 of the table file itself
  SchemaConfig schema;
};

class Registry {
 public:
  static Registry Parse(std::string_view json_text);
  static Registry Load(const std::filesystem::path& path);
  // The registry shipped with the sources, or $FAIRCI_REGISTRY when set.
  static Registry LoadDefault();

  // Error kUnknownPreset.
  const RegistryEntry& Find(std::string_view id) const;
  const std::vector<RegistryEntry>& entries() const { return entries_; }

 private:
  std::vector<RegistryEntry> entries_;
};

struct FetchOptions {
  std::filesystem::path cache_dir;
  bool offline = false;
};

// $FAIRCI_CACHE_DIR, else $XDG_CACHE_HOME/fairci, else ~/.cache/fairci.
std::filesystem::path DefaultCacheDir();

// Returns the cached, digest-verified table file, downloading it first when
// needed. Downloads go to a temporary file under an exclusive lock and are
// renamed into place only after verification.
// Errors: kDigestMismatch, kNetworkError (also when offline and not cached).
std::filesystem::path FetchPresetFile(const RegistryEntry& entry,
                                      const FetchOptions& options);

// FetchPresetFile followed by parsing with the preset schema. When
// expected_digest is given it overrides the registry digest.
AuditTable FetchDataset(const RegistryEntry& entry, const FetchOptions& options,
                        std::optional<std::string> expected_digest = {});

}  // namespace fairci

#endif  // FAIRCI_INGEST_HPP_
