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

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <sstream>

#include "fairci/error.hpp"
#include "fairci/ingest.hpp"
#include "json.hpp"
#include "schema_json.hpp"

namespace fairci {
namespace {

using nlohmann::json;

[[noreturn]] void SchemaFail(const std::string& message) {
  throw Error(ErrorCode::kSchemaError, message);
}

std::set<std::string> StringSet(const json& j, std::string_view key) {
  if (!j.is_array()) SchemaFail(std::string(key) + " must be an array of strings");
  std::set<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) SchemaFail(std::string(key) + " must contain strings");
    out.insert(v.get<std::string>());
  }
  return out;
}

std::string RequiredString(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) {
    SchemaFail(std::string("schema needs a string field '") + key + "'");
  }
  return j[key].get<std::string>();
}

MissingPolicy PolicyFrom(const json& j, std::string_view key) {
  if (!j.is_string()) SchemaFail(std::string(key) + " must be a string");
  const auto s = j.get<std::string>();
  if (s == "drop") return MissingPolicy::kDrop;
  if (s == "error") return MissingPolicy::kError;
  SchemaFail(std::string(key) + " must be \"drop\" or \"error\", got " + s);
}

ParseOptions FormatFrom(const json& j) {
  if (!j.is_object()) SchemaFail("format must be an object");
  ParseOptions opt;
  for (const auto& [key, value] : j.items()) {
    if (key == "delimiter") {
      if (!value.is_string() || value.get<std::string>().size() != 1) {
        SchemaFail("format.delimiter must be a one-character string");
      }
      opt.delimiter = value.get<std::string>()[0];
    } else if (key == "has_header") {
      if (!value.is_boolean()) SchemaFail("format.has_header must be boolean");
      opt.has_header = value.get<bool>();
    } else if (key == "trim_whitespace") {
      if (!value.is_boolean()) SchemaFail("format.trim_whitespace must be boolean");
      opt.trim_whitespace = value.get<bool>();
    } else if (key == "column_names") {
      if (!value.is_array()) SchemaFail("format.column_names must be an array");
      for (const auto& v : value) {
        if (!v.is_string()) SchemaFail("format.column_names must hold strings");
        opt.column_names.push_back(v.get<std::string>());
      }
    } else if (key == "ragged_rows") {
      opt.ragged_rows = PolicyFrom(value, "format.ragged_rows");
    } else {
      SchemaFail("unknown format field '" + key + "'");
    }
  }
  return opt;
}

SchemaConfig SchemaFromJson(const json& j) {
  if (!j.is_object()) SchemaFail("schema must be a JSON object");
  static const std::set<std::string> kKnown = {
      "prediction_column",          "label_column",
      "group_column",               "positive_prediction_values",
      "positive_label_values",      "protected_group_values",
      "favored_group_values",       "negative_prediction_values",
      "negative_label_values",      "missing_policy",
      "format",                     "missing_tokens",
      "drop_incomplete_rows"};
  for (const auto& [key, value] : j.items()) {
    if (!kKnown.contains(key)) SchemaFail("unknown schema field '" + key + "'");
  }
  SchemaConfig s;
  s.prediction_column = RequiredString(j, "prediction_column");
  s.group_column = RequiredString(j, "group_column");
  if (j.contains("label_column") && !j["label_column"].is_null()) {
    s.label_column = RequiredString(j, "label_column");
  }
  auto set_of = [&](const char* key) {
    return j.contains(key) ? StringSet(j[key], key) : std::set<std::string>{};
  };
  s.positive_prediction_values = set_of("positive_prediction_values");
  s.positive_label_values = set_of("positive_label_values");
  s.protected_group_values = set_of("protected_group_values");
  s.favored_group_values = set_of("favored_group_values");
  if (j.contains("negative_prediction_values")) {
    s.negative_prediction_values = set_of("negative_prediction_values");
  }
  if (j.contains("negative_label_values")) {
    s.negative_label_values = set_of("negative_label_values");
  }
  if (j.contains("missing_policy")) {
    s.missing_policy = PolicyFrom(j["missing_policy"], "missing_policy");
  }
  if (j.contains("format")) s.format = FormatFrom(j["format"]);
  if (j.contains("missing_tokens")) s.missing_tokens = set_of("missing_tokens");
  if (j.contains("drop_incomplete_rows")) {
    if (!j["drop_incomplete_rows"].is_boolean()) {
      SchemaFail("drop_incomplete_rows must be boolean");
    }
    s.drop_incomplete_rows = j["drop_incomplete_rows"].get<bool>();
  }
  s.Validate();
  return s;
}

json SchemaAsJson(const SchemaConfig& s) {
  json j;
  j["prediction_column"] = s.prediction_column;
  j["label_column"] = s.label_column ? json(*s.label_column) : json(nullptr);
  j["group_column"] = s.group_column;
  j["positive_prediction_values"] = s.positive_prediction_values;
  j["positive_label_values"] = s.positive_label_values;
  j["protected_group_values"] = s.protected_group_values;
  j["favored_group_values"] = s.favored_group_values;
  if (s.negative_prediction_values) {
    j["negative_prediction_values"] = *s.negative_prediction_values;
  }
  if (s.negative_label_values) j["negative_label_values"] = *s.negative_label_values;
  j["missing_policy"] = std::string(MissingPolicyName(s.missing_policy));
  j["format"] = {
      {"delimiter", std::string(1, s.format.delimiter)},
      {"has_header", s.format.has_header},
      {"trim_whitespace", s.format.trim_whitespace},
      {"column_names", s.format.column_names},
      {"ragged_rows", std::string(MissingPolicyName(s.format.ragged_rows))}};
  j["missing_tokens"] = s.missing_tokens;
  j["drop_incomplete_rows"] = s.drop_incomplete_rows;
  return j;
}

std::size_t RequireColumn(const RawTable& raw, const std::string& name) {
  const auto idx = raw.ColumnIndex(name);
  if (!idx) {
    throw Error(ErrorCode::kMissingColumn,
                "column '" + name + "' not found in " + raw.source);
  }
  return *idx;
}

enum class Mapped { kZero, kOne, kMissing, kUnmappable };

Mapped MapBinary(const std::string& value, const std::set<std::string>& positive,
                 const std::optional<std::set<std::string>>& negative,
                 const std::set<std::string>& missing) {
  if (missing.contains(value)) return Mapped::kMissing;
  if (positive.contains(value)) return Mapped::kOne;
  if (negative && !negative->contains(value)) return Mapped::kUnmappable;
  return Mapped::kZero;
}

bool HasMissing(const std::vector<std::string>& row,
                const std::set<std::string>& missing) {
  for (const auto& v : row)
    if (missing.contains(v)) return true;
  return false;
}

// Shared row filter: returns false when the row is to be dropped, throws
// under the error policy.
bool Accept(Mapped m, const SchemaConfig& schema, const std::string& column,
            const std::string& value, std::uint64_t row_number) {
  if (m != Mapped::kMissing && m != Mapped::kUnmappable) return true;
  if (schema.missing_policy == MissingPolicy::kDrop) return false;
  throw Error(ErrorCode::kUnmappableValue,
              "row " + std::to_string(row_number) + ", column '" + column +
                  "': " +
                  (m == Mapped::kMissing ? "missing value"
                                         : "value '" + value +
                                               "' is in no declared set"));
}

}  // namespace

std::string_view MissingPolicyName(MissingPolicy policy) {
  return policy == MissingPolicy::kDrop ? "drop" : "error";
}

void SchemaConfig::Validate() const {
  if (prediction_column.empty() || group_column.empty()) {
    SchemaFail("prediction_column and group_column must be named");
  }
  if (positive_prediction_values.empty()) {
    SchemaFail("positive_prediction_values must not be empty");
  }
  if (label_column && positive_label_values.empty()) {
    SchemaFail("positive_label_values must not be empty when labels are read");
  }
  for (const auto& v : protected_group_values) {
    if (favored_group_values.contains(v)) {
      SchemaFail("group value '" + v + "' is both protected and favored");
    }
  }
}

SchemaConfig ParseSchemaJson(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    SchemaFail(std::string("schema is not valid JSON: ") + e.what());
  }
  return SchemaFromJson(j);
}

SchemaConfig LoadSchemaFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseSchemaJson(buffer.view());
}

std::string SchemaToJson(const SchemaConfig& schema) {
  return SchemaAsJson(schema).dump(2);
}

SchemaConfig SchemaFromJsonValue(const nlohmann::json& j) {
  return SchemaFromJson(j);
}

AuditTable ApplySchema(const RawTable& raw, const SchemaConfig& schema) {
  schema.Validate();
  if (schema.protected_group_values.empty() ||
      schema.favored_group_values.empty()) {
    SchemaFail("binary audits need protected and favored group values");
  }
  const std::size_t pred_col = RequireColumn(raw, schema.prediction_column);
  const std::size_t group_col = RequireColumn(raw, schema.group_column);
  std::optional<std::size_t> label_col;
  if (schema.label_column) label_col = RequireColumn(raw, *schema.label_column);

  AuditTable table;
  table.source = raw.source;
  table.checksum = raw.checksum;
  table.raw_row_count = raw.raw_row_count;
  table.n_dropped = raw.n_dropped;
  std::uint64_t row_number = 0;
  for (const auto& row : raw.rows) {
    ++row_number;
    if (schema.drop_incomplete_rows && HasMissing(row, schema.missing_tokens)) {
      ++table.n_dropped;
      continue;
    }
    const auto pred =
        MapBinary(row[pred_col], schema.positive_prediction_values,
                  schema.negative_prediction_values, schema.missing_tokens);
    bool keep = Accept(pred, schema, schema.prediction_column, row[pred_col],
                       row_number);
    std::optional<std::uint8_t> label;
    if (keep && label_col) {
      const auto lab =
          MapBinary(row[*label_col], schema.positive_label_values,
                    schema.negative_label_values, schema.missing_tokens);
      keep = Accept(lab, schema, *schema.label_column, row[*label_col],
                    row_number);
      label = static_cast<std::uint8_t>(lab == Mapped::kOne);
    }
    std::uint8_t group = 0;
    if (keep) {
      const std::string& g = row[group_col];
      Mapped gm = Mapped::kUnmappable;
      if (schema.missing_tokens.contains(g)) {
        gm = Mapped::kMissing;
      } else if (schema.protected_group_values.contains(g)) {
        gm = Mapped::kZero;
      } else if (schema.favored_group_values.contains(g)) {
        gm = Mapped::kOne;
      }
      keep = Accept(gm, schema, schema.group_column, g, row_number);
      group = static_cast<std::uint8_t>(gm == Mapped::kOne);
    }
    if (!keep) {
      ++table.n_dropped;
      continue;
    }
    table.records.push_back(
        {static_cast<std::uint8_t>(pred == Mapped::kOne), label, group});
  }
  if (table.records.empty()) {
    throw Error(ErrorCode::kEmptyInput,
                "no usable records in " + raw.source + " (" +
                    std::to_string(table.n_dropped) + " dropped)");
  }
  return table;
}

MultiGroupTable ApplyMultiGroupSchema(const RawTable& raw,
                                      const SchemaConfig& schema) {
  const std::size_t pred_col = RequireColumn(raw, schema.prediction_column);
  const std::size_t group_col = RequireColumn(raw, schema.group_column);
  std::optional<std::size_t> label_col;
  if (schema.label_column) label_col = RequireColumn(raw, *schema.label_column);

  MultiGroupTable table;
  table.source = raw.source;
  table.raw_row_count = raw.raw_row_count;
  table.n_dropped = raw.n_dropped;
  std::uint64_t row_number = 0;
  for (const auto& row : raw.rows) {
    ++row_number;
    if (schema.drop_incomplete_rows && HasMissing(row, schema.missing_tokens)) {
      ++table.n_dropped;
      continue;
    }
    const auto pred =
        MapBinary(row[pred_col], schema.positive_prediction_values,
                  schema.negative_prediction_values, schema.missing_tokens);
    bool keep = Accept(pred, schema, schema.prediction_column, row[pred_col],
                       row_number);
    std::optional<std::uint8_t> label;
    if (keep && label_col) {
      const auto lab =
          MapBinary(row[*label_col], schema.positive_label_values,
                    schema.negative_label_values, schema.missing_tokens);
      keep = Accept(lab, schema, *schema.label_column, row[*label_col],
                    row_number);
      label = static_cast<std::uint8_t>(lab == Mapped::kOne);
    }
    if (keep) {
      const bool missing = schema.missing_tokens.contains(row[group_col]);
      keep = Accept(missing ? Mapped::kMissing : Mapped::kZero, schema,
                    schema.group_column, row[group_col], row_number);
    }
    if (!keep) {
      ++table.n_dropped;
      continue;
    }
    table.records.push_back({static_cast<std::uint8_t>(pred == Mapped::kOne),
                             label, row[group_col]});
  }
  if (table.records.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no usable records in " + raw.source);
  }
  return table;
}

std::string ToCanonicalCsv(const AuditTable& table) {
  const bool labels = table.has_labels();
  std::string out = labels ? "prediction,label,group\n" : "prediction,group\n";
  out.reserve(out.size() + table.records.size() * 6);
  for (const auto& r : table.records) {
    out.push_back(r.prediction ? '1' : '0');
    out.push_back(',');
    if (labels) {
      out.push_back(r.label.value_or(0) ? '1' : '0');
      out.push_back(',');
    }
    out.push_back(r.group ? '1' : '0');
    out.push_back('\n');
  }
  return out;
}

SchemaConfig CanonicalSchema(bool has_labels) {
  SchemaConfig s;
  s.prediction_column = "prediction";
  if (has_labels) s.label_column = "label";
  s.group_column = "group";
  s.positive_prediction_values = {"1"};
  s.negative_prediction_values = std::set<std::string>{"0"};
  if (has_labels) {
    s.positive_label_values = {"1"};
    s.negative_label_values = std::set<std::string>{"0"};
  }
  s.protected_group_values = {"0"};
  s.favored_group_values = {"1"};
  s.missing_policy = MissingPolicy::kError;
  return s;
}

std::string Sha256Hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(),
                 nullptr) != 1) {
    throw Error(ErrorCode::kIoError, "SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 15]);
  }
  return out;
}

std::string Sha256File(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return Sha256Hex(buffer.view());
}

}  // namespace fairci
