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

#include <curl/curl.h>
#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>
#include <zlib.h>

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>

#include "fairci/error.hpp"
#include "fairci/ingest.hpp"
#include "json.hpp"
#include "schema_json.hpp"

#ifndef FAIRCI_DEFAULT_REGISTRY
#define FAIRCI_DEFAULT_REGISTRY "registry.json"
#endif

namespace fairci {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

[[noreturn]] void ZipFail(const std::string& message) {
  throw Error(ErrorCode::kIoError, "zip: " + message);
}

std::uint32_t Le16(std::string_view b, std::size_t at) {
  if (at + 2 > b.size()) ZipFail("truncated archive");
  return static_cast<std::uint8_t>(b[at]) |
         static_cast<std::uint32_t>(static_cast<std::uint8_t>(b[at + 1])) << 8;
}

std::uint32_t Le32(std::string_view b, std::size_t at) {
  return Le16(b, at) | Le16(b, at + 2) << 16;
}

std::string Inflate(std::string_view compressed, std::size_t expected_size) {
  std::string out(expected_size, '\0');
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) ZipFail("inflateInit2 failed");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(compressed.data()));
  zs.avail_in = static_cast<uInt>(compressed.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  const auto produced = zs.total_out;
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || produced != expected_size) {
    ZipFail("corrupt deflate stream");
  }
  return out;
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

// Writes bytes next to `target` and renames into place.
void AtomicWrite(const fs::path& target, std::string_view bytes) {
  const fs::path tmp = target.string() + ".part." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(ErrorCode::kIoError,
                "cannot move download into " + target.string() + ": " +
                    ec.message());
  }
}

class FileLock {
 public:
  explicit FileLock(const fs::path& path)
      : fd_(::open(path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644)) {
    if (fd_ < 0 || ::flock(fd_, LOCK_EX) != 0) {
      if (fd_ >= 0) ::close(fd_);
      throw Error(ErrorCode::kIoError, "cannot lock " + path.string());
    }
  }
  ~FileLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_;
};

std::size_t AppendToString(char* data, std::size_t size, std::size_t n,
                           void* user) {
  static_cast<std::string*>(user)->append(data, size * n);
  return size * n;
}

std::string Download(const std::string& url) {
  static std::once_flag init;
  std::call_once(init, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
  CURL* curl = curl_easy_init();
  if (!curl) throw Error(ErrorCode::kNetworkError, "curl_easy_init failed");
  std::string body;
  char errbuf[CURL_ERROR_SIZE] = {};
  curl_easy_setopt(curl, CURLOPT_URL, url.c_str());
  curl_easy_setopt(curl, CURLOPT_FOLLOWLOCATION, 1L);
  curl_easy_setopt(curl, CURLOPT_FAILONERROR, 1L);
  curl_easy_setopt(curl, CURLOPT_CONNECTTIMEOUT, 20L);
  curl_easy_setopt(curl, CURLOPT_LOW_SPEED_LIMIT, 1024L);
  curl_easy_setopt(curl, CURLOPT_LOW_SPEED_TIME, 60L);
  curl_easy_setopt(curl, CURLOPT_ERRORBUFFER, errbuf);
  curl_easy_setopt(curl, CURLOPT_WRITEFUNCTION, AppendToString);
  curl_easy_setopt(curl, CURLOPT_WRITEDATA, &body);
  const CURLcode rc = curl_easy_perform(curl);
  curl_easy_cleanup(curl);
  if (rc != CURLE_OK) {
    throw Error(ErrorCode::kNetworkError,
                url + ": " + (errbuf[0] ? errbuf : curl_easy_strerror(rc)));
  }
  return body;
}

bool CachedWithDigest(const fs::path& path, const std::string& digest) {
  std::error_code ec;
  return fs::is_regular_file(path, ec) && Sha256File(path) == digest;
}

std::string OptString(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw Error(ErrorCode::kSchemaError,
                std::string("registry entry needs string field '") + key + "'");
  }
  return j[key].get<std::string>();
}

RegistryEntry EntryFromJson(const json& j) {
  static const std::set<std::string> kKnown = {
      "id",     "description", "urls",   "archive_member",
      "archive_digest", "filename", "digest", "schema"};
  if (!j.is_object()) {
    throw Error(ErrorCode::kSchemaError, "registry entries must be objects");
  }
  for (const auto& [key, value] : j.items()) {
    if (!kKnown.contains(key)) {
      throw Error(ErrorCode::kSchemaError,
                  "unknown registry field '" + key + "'");
    }
  }
  RegistryEntry e;
  e.id = OptString(j, "id");
  if (j.contains("description")) e.description = OptString(j, "description");
  if (!j.contains("urls") || !j["urls"].is_array() || j["urls"].empty()) {
    throw Error(ErrorCode::kSchemaError,
                "registry entry '" + e.id + "' needs a non-empty urls array");
  }
  for (const auto& u : j["urls"]) {
    if (!u.is_string()) {
      throw Error(ErrorCode::kSchemaError, "urls must hold strings");
    }
    e.urls.push_back(u.get<std::string>());
  }
  if (j.contains("archive_member")) e.archive_member = OptString(j, "archive_member");
  if (j.contains("archive_digest")) e.archive_digest = OptString(j, "archive_digest");
  e.filename = OptString(j, "filename");
  if (e.filename.find('/') != std::string::npos || e.filename == "..") {
    throw Error(ErrorCode::kSchemaError, "filename must be a plain name");
  }
  e.digest = OptString(j, "digest");
  if (!j.contains("schema")) {
    throw Error(ErrorCode::kSchemaError,
                "registry entry '" + e.id + "' has no schema");
  }
  e.schema = SchemaFromJsonValue(j["schema"]);
  return e;
}

// Bytes of the table file from the first URL that yields them. Digest
// mismatches win over network errors when reporting the last failure.
std::string DownloadTable(const RegistryEntry& entry, const fs::path& cache_dir,
                          const std::string& digest) {
  std::optional<Error> failure;
  for (const auto& url : entry.urls) {
    try {
      std::string bytes;
      if (entry.archive_member) {
        const fs::path archive_path =
            cache_dir / "archives" /
            (entry.archive_digest.value_or(entry.id) + ".zip");
        if (entry.archive_digest &&
            CachedWithDigest(archive_path, *entry.archive_digest)) {
          bytes = ReadFile(archive_path);
        } else {
          bytes = Download(url);
          if (entry.archive_digest && Sha256Hex(bytes) != *entry.archive_digest) {
            throw Error(ErrorCode::kDigestMismatch,
                        url + ": archive digest " + Sha256Hex(bytes) +
                            " != expected " + *entry.archive_digest);
          }
          fs::create_directories(archive_path.parent_path());
          AtomicWrite(archive_path, bytes);
        }
        bytes = ExtractZipMember(bytes, *entry.archive_member);
      } else {
        bytes = Download(url);
      }
      const std::string got = Sha256Hex(bytes);
      if (got != digest) {
        throw Error(ErrorCode::kDigestMismatch,
                    url + ": digest " + got + " != expected " + digest);
      }
      return bytes;
    } catch (const Error& e) {
      if (!failure || failure->code() != ErrorCode::kDigestMismatch) {
        failure = e;
      }
    }
  }
  throw *failure;
}

}  // namespace

std::string ExtractZipMember(std::string_view archive, std::string_view member) {
  constexpr std::uint32_t kEndOfDirectory = 0x06054b50;
  constexpr std::uint32_t kDirectoryEntry = 0x02014b50;
  constexpr std::uint32_t kLocalHeader = 0x04034b50;
  if (archive.size() < 22) ZipFail("archive too short");
  // The end record sits in the last 22 + 65535 bytes (trailing comment).
  std::size_t eocd = std::string_view::npos;
  const std::size_t lowest = archive.size() > 22 + 65535 ? archive.size() - 22 - 65535 : 0;
  for (std::size_t at = archive.size() - 22 + 1; at-- > lowest;) {
    if (Le32(archive, at) == kEndOfDirectory) {
      eocd = at;
      break;
    }
  }
  if (eocd == std::string_view::npos) ZipFail("no end of central directory");
  const std::uint32_t entries = Le16(archive, eocd + 10);
  std::size_t at = Le32(archive, eocd + 16);
  for (std::uint32_t i = 0; i < entries; ++i) {
    if (Le32(archive, at) != kDirectoryEntry) ZipFail("bad directory entry");
    const std::uint32_t method = Le16(archive, at + 10);
    const std::uint32_t compressed = Le32(archive, at + 20);
    const std::uint32_t size = Le32(archive, at + 24);
    const std::uint32_t name_len = Le16(archive, at + 28);
    const std::uint32_t extra_len = Le16(archive, at + 30);
    const std::uint32_t comment_len = Le16(archive, at + 32);
    const std::uint32_t local = Le32(archive, at + 42);
    if (at + 46 + name_len > archive.size()) ZipFail("truncated directory");
    const std::string_view name = archive.substr(at + 46, name_len);
    at += 46 + name_len + extra_len + comment_len;
    if (name != member) continue;
    if (compressed == 0xFFFFFFFFu || size == 0xFFFFFFFFu) {
      ZipFail("zip64 members are not supported");
    }
    if (Le32(archive, local) != kLocalHeader) ZipFail("bad local header");
    const std::size_t data =
        local + 30 + Le16(archive, local + 26) + Le16(archive, local + 28);
    if (data + compressed > archive.size()) ZipFail("truncated member data");
    const std::string_view payload = archive.substr(data, compressed);
    if (method == 0) return std::string(payload);
    if (method == 8) return Inflate(payload, size);
    ZipFail("unsupported compression method " + std::to_string(method));
  }
  ZipFail("member '" + std::string(member) + "' not found");
}

Registry Registry::Parse(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSchemaError,
                std::string("registry is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("presets") || !j["presets"].is_array()) {
    throw Error(ErrorCode::kSchemaError,
                "registry must be an object with a 'presets' array");
  }
  Registry registry;
  for (const auto& entry : j["presets"]) {
    registry.entries_.push_back(EntryFromJson(entry));
  }
  return registry;
}

Registry Registry::Load(const std::filesystem::path& path) {
  return Parse(ReadFile(path));
}

Registry Registry::LoadDefault() {
  if (const char* env = std::getenv("FAIRCI_REGISTRY"); env && *env) {
    return Load(env);
  }
  return Load(FAIRCI_DEFAULT_REGISTRY);
}

const RegistryEntry& Registry::Find(std::string_view id) const {
  for (const auto& e : entries_)
    if (e.id == id) return e;
  std::string known;
  for (const auto& e : entries_) known += (known.empty() ? "" : ", ") + e.id;
  throw Error(ErrorCode::kUnknownPreset,
              "no preset '" + std::string(id) + "' (known: " + known + ")");
}

std::filesystem::path DefaultCacheDir() {
  if (const char* env = std::getenv("FAIRCI_CACHE_DIR"); env && *env) return env;
  if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg) {
    return fs::path(xdg) / "fairci";
  }
  if (const char* home = std::getenv("HOME"); home && *home) {
    return fs::path(home) / ".cache" / "fairci";
  }
  return fs::temp_directory_path() / "fairci-cache";
}

namespace {

fs::path FetchWithDigest(const RegistryEntry& entry, const FetchOptions& options,
                         const std::string& digest) {
  const fs::path cache_dir =
      options.cache_dir.empty() ? DefaultCacheDir() : options.cache_dir;
  const fs::path dir = cache_dir / entry.id;
  const fs::path target = dir / entry.filename;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIoError,
                "cannot create cache directory " + dir.string());
  }
  FileLock lock(dir / (entry.filename + ".lock"));
  if (fs::is_regular_file(target, ec)) {
    const std::string got = Sha256File(target);
    if (got == digest) return target;
    if (options.offline) {
      throw Error(ErrorCode::kDigestMismatch,
                  target.string() + ": cached digest " + got +
                      " != expected " + digest);
    }
  } else if (options.offline) {
    throw Error(ErrorCode::kNetworkError,
                "offline and preset '" + entry.id + "' is not cached at " +
                    target.string());
  }
  AtomicWrite(target, DownloadTable(entry, cache_dir, digest));
  return target;
}

}  // namespace

std::filesystem::path FetchPresetFile(const RegistryEntry& entry,
                                      const FetchOptions& options) {
  return FetchWithDigest(entry, options, entry.digest);
}

AuditTable FetchDataset(const RegistryEntry& entry, const FetchOptions& options,
                        std::optional<std::string> expected_digest) {
  const fs::path path =
      FetchWithDigest(entry, options, expected_digest.value_or(entry.digest));
  AuditTable table =
      ApplySchema(ParseTableFile(path, entry.schema.format), entry.schema);
  table.source = "preset:" + entry.id;
  return table;
}

}  // namespace fairci
