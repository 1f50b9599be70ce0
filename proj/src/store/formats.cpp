// Copyright 2026 The LayoutSpace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "layoutspace/store/formats.hpp"

#include "layoutspace/core/binary_io.hpp"
#include "layoutspace/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <unordered_map>
#include <unordered_set>

namespace layoutspace::store {

using nlohmann::json;

namespace {

constexpr char kJsonlFormat[] = "layoutspace-jsonl";
constexpr std::uint32_t kPackedVersion = 1;

std::string row_prefix(std::size_t row) { return "row " + std::to_string(row) + ": "; }

void put_annotations(json& j, const EmbeddingRecord& r) {
  if (r.layout_label) j["label"] = *r.layout_label;
  if (r.split) j["split"] = std::string(to_string(*r.split));
  if (!r.metadata.empty()) j["meta"] = r.metadata;
}

void read_annotations(const json& j, EmbeddingRecord& r, std::size_t row) {
  if (const auto it = j.find("label"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw Error(Errc::ParseError, row_prefix(row) + "label must be a string", row);
    r.layout_label = it->get<std::string>();
  }
  if (const auto it = j.find("split"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw Error(Errc::ParseError, row_prefix(row) + "split must be a string", row);
    try {
      r.split = parse_split_tag(it->get<std::string>());
    } catch (const Error& e) {
      throw Error(Errc::ParseError, row_prefix(row) + e.what(), row);
    }
  }
  if (const auto it = j.find("meta"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) throw Error(Errc::ParseError, row_prefix(row) + "meta must be an object", row);
    for (const auto& [k, v] : it->items()) {
      if (!v.is_string()) throw Error(Errc::ParseError, row_prefix(row) + "meta values must be strings", row);
      r.metadata[k] = v.get<std::string>();
    }
  }
}

std::string read_id(const json& j, std::size_t row) {
  const auto it = j.find("id");
  if (it == j.end() || !it->is_string()) throw Error(Errc::ParseError, row_prefix(row) + "missing string field 'id'", row);
  return it->get<std::string>();
}

}  // namespace

std::string_view to_string(Format format) { return format == Format::Jsonl ? "jsonl" : "packed"; }

Format parse_format(std::string_view text) {
  if (text == "jsonl") return Format::Jsonl;
  if (text == "packed") return Format::Packed;
  throw Error(Errc::InvalidArgument, "unknown format '" + std::string(text) + "' (expected jsonl or packed)");
}

Format format_for_path(const std::string& path) {
  const std::string ext = std::filesystem::path(path).extension().string();
  return (ext == ".idem" || ext == ".packed") ? Format::Packed : Format::Jsonl;
}

void validate_records(const std::vector<EmbeddingRecord>& records, std::size_t dim, std::size_t first_row) {
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::size_t row = first_row + i;
    const auto& r = records[i];
    if (r.sample_id.empty()) throw Error(Errc::ParseError, row_prefix(row) + "empty sample id", row);
    if (r.vector.size() != dim) {
      throw Error(Errc::DimensionMismatch,
                  row_prefix(row) + "expected dimension " + std::to_string(dim) + ", got " + std::to_string(r.vector.size()),
                  row);
    }
    for (float v : r.vector) {
      if (!std::isfinite(v)) throw Error(Errc::ParseError, row_prefix(row) + "non-finite vector component", row);
    }
    if (!seen.insert(r.sample_id).second) {
      throw Error(Errc::DuplicateId, row_prefix(row) + "duplicate sample id '" + r.sample_id + "'", row);
    }
  }
}

std::vector<EmbeddingRecord> sorted_by_id(std::vector<EmbeddingRecord> records) {
  std::sort(records.begin(), records.end(),
            [](const EmbeddingRecord& a, const EmbeddingRecord& b) { return a.sample_id < b.sample_id; });
  return records;
}

// ---- jsonl ----

std::string encode_jsonl(const std::vector<EmbeddingRecord>& records, std::size_t dim) {
  std::string out = json{{"format", kJsonlFormat}, {"version", 1}, {"dim", dim}}.dump();
  out += '\n';
  for (const auto& r : sorted_by_id(records)) {
    json j;
    j["id"] = r.sample_id;
    json vec = json::array();
    for (float v : r.vector) vec.push_back(static_cast<double>(v));
    j["vec"] = std::move(vec);
    put_annotations(j, r);
    out += j.dump();
    out += '\n';
  }
  return out;
}

ImportedRecords decode_jsonl(const std::string& text) {
  ImportedRecords out;
  std::size_t row = 0;
  std::size_t pos = 0;
  bool have_header = false;
  std::unordered_set<std::string> seen;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(Errc::ParseError, row_prefix(row) + "invalid JSON (" + e.what() + ")", row);
    }
    if (!j.is_object()) throw Error(Errc::ParseError, row_prefix(row) + "expected a JSON object", row);
    if (!have_header) {
      if (!j.contains("format") || j["format"] != kJsonlFormat) {
        throw Error(Errc::MissingHeader, row_prefix(row) + "first line must be the layoutspace-jsonl header", row);
      }
      if (!j.contains("version") || j["version"] != 1) {
        throw Error(Errc::ParseError, row_prefix(row) + "unsupported jsonl version", row);
      }
      if (!j.contains("dim") || !j["dim"].is_number_unsigned() || j["dim"].get<std::size_t>() == 0) {
        throw Error(Errc::ParseError, row_prefix(row) + "header needs a positive integer 'dim'", row);
      }
      out.dim = j["dim"].get<std::size_t>();
      have_header = true;
      continue;
    }
    EmbeddingRecord r;
    r.sample_id = read_id(j, row);
    if (r.sample_id.empty()) throw Error(Errc::ParseError, row_prefix(row) + "empty sample id", row);
    const auto vec = j.find("vec");
    if (vec == j.end() || !vec->is_array()) throw Error(Errc::ParseError, row_prefix(row) + "missing array field 'vec'", row);
    r.vector.reserve(vec->size());
    for (const auto& v : *vec) {
      if (!v.is_number()) throw Error(Errc::ParseError, row_prefix(row) + "vector components must be numbers", row);
      const double d = v.get<double>();
      const float f = static_cast<float>(d);
      if (!std::isfinite(d) || !std::isfinite(f)) {
        throw Error(Errc::ParseError, row_prefix(row) + "non-finite vector component", row);
      }
      r.vector.push_back(f);
    }
    if (r.vector.size() != out.dim) {
      throw Error(Errc::DimensionMismatch,
                  row_prefix(row) + "expected dimension " + std::to_string(out.dim) + ", got " +
                      std::to_string(r.vector.size()),
                  row);
    }
    read_annotations(j, r, row);
    if (!seen.insert(r.sample_id).second) {
      throw Error(Errc::DuplicateId, row_prefix(row) + "duplicate sample id '" + r.sample_id + "'", row);
    }
    out.records.push_back(std::move(r));
  }
  if (!have_header) throw Error(Errc::MissingHeader, "jsonl input has no header line");
  return out;
}

// ---- packed ----

std::string encode_packed(const std::vector<EmbeddingRecord>& records, std::size_t dim) {
  if (dim > std::numeric_limits<std::uint32_t>::max()) throw Error(Errc::InvalidArgument, "dimension too large");
  const auto sorted = sorted_by_id(records);
  std::string out = "IDEM";
  binio::put_le<std::uint32_t>(out, kPackedVersion);
  binio::put_le<std::uint64_t>(out, sorted.size());
  binio::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dim));
  for (const auto& r : sorted) {
    if (r.sample_id.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw Error(Errc::InvalidArgument, "sample id longer than 65535 bytes");
    }
    binio::put_le<std::uint16_t>(out, static_cast<std::uint16_t>(r.sample_id.size()));
    out += r.sample_id;
  }
  out.reserve(out.size() + sorted.size() * dim * 4);
  for (const auto& r : sorted) {
    if (r.vector.size() != dim) throw Error(Errc::DimensionMismatch, "record '" + r.sample_id + "' has the wrong dimension");
    for (float v : r.vector) binio::put_f32(out, v);
  }
  return out;
}

ImportedRecords decode_packed(const std::string& bytes) {
  binio::Reader in(bytes);
  auto need = [&](std::size_t n, const std::string& what) {
    if (!in.has(n)) throw Error(Errc::ParseError, "packed file truncated in " + what);
  };
  need(4, "magic");
  if (std::string(reinterpret_cast<const char*>(in.take(4)), 4) != "IDEM") {
    throw Error(Errc::MissingHeader, "packed file does not start with IDEM");
  }
  need(16, "header");
  const auto version = binio::get_le<std::uint32_t>(in.take(4));
  if (version != kPackedVersion) throw Error(Errc::ParseError, "unsupported packed version " + std::to_string(version));
  const auto count = binio::get_le<std::uint64_t>(in.take(8));
  const auto dim = binio::get_le<std::uint32_t>(in.take(4));
  if (dim == 0) throw Error(Errc::ParseError, "packed dimension must be positive");
  // Every record needs at least 2 id bytes plus its vector.
  if (count > in.remaining() / (2 + 4 * static_cast<std::uint64_t>(dim))) {
    throw Error(Errc::ParseError, "packed record count exceeds file size");
  }
  ImportedRecords out;
  out.dim = dim;
  out.records.resize(static_cast<std::size_t>(count));
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t row = i + 1;
    if (!in.has(2)) throw Error(Errc::ParseError, row_prefix(row) + "id table truncated", row);
    const auto len = binio::get_le<std::uint16_t>(in.take(2));
    if (!in.has(len)) throw Error(Errc::ParseError, row_prefix(row) + "id table truncated", row);
    std::string id(reinterpret_cast<const char*>(in.take(len)), len);
    if (id.empty()) throw Error(Errc::ParseError, row_prefix(row) + "empty sample id", row);
    if (!seen.insert(id).second) throw Error(Errc::DuplicateId, row_prefix(row) + "duplicate sample id '" + id + "'", row);
    out.records[i].sample_id = std::move(id);
  }
  if (in.remaining() != count * dim * 4) {
    throw Error(Errc::ParseError, "packed vector block has " + std::to_string(in.remaining()) + " bytes, expected " +
                                      std::to_string(count * dim * 4));
  }
  for (std::size_t i = 0; i < count; ++i) {
    auto& v = out.records[i].vector;
    v.resize(dim);
    const unsigned char* p = in.take(4 * static_cast<std::size_t>(dim));
    for (std::size_t j = 0; j < dim; ++j) {
      v[j] = binio::get_f32(p + 4 * j);
      if (!std::isfinite(v[j])) throw Error(Errc::ParseError, row_prefix(i + 1) + "non-finite vector component", i + 1);
    }
  }
  return out;
}

std::string encode_sidecar(const std::vector<EmbeddingRecord>& records) {
  std::string out;
  for (const auto& r : sorted_by_id(records)) {
    if (!r.layout_label && !r.split && r.metadata.empty()) continue;
    json j;
    j["id"] = r.sample_id;
    put_annotations(j, r);
    out += j.dump();
    out += '\n';
  }
  return out;
}

void apply_sidecar(ImportedRecords& imported, const std::string& text) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < imported.records.size(); ++i) index.emplace(imported.records[i].sample_id, i);
  std::size_t row = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(Errc::ParseError, "sidecar " + row_prefix(row) + "invalid JSON (" + e.what() + ")", row);
    }
    if (!j.is_object()) throw Error(Errc::ParseError, "sidecar " + row_prefix(row) + "expected a JSON object", row);
    const std::string id = read_id(j, row);
    const auto it = index.find(id);
    if (it == index.end()) throw Error(Errc::ParseError, "sidecar " + row_prefix(row) + "unknown sample id '" + id + "'", row);
    read_annotations(j, imported.records[it->second], row);
  }
}

std::string sidecar_path(const std::string& packed_path) { return packed_path + ".meta.jsonl"; }

ImportedRecords import_embeddings(const std::string& path, Format format) {
  const std::string bytes = binio::read_file(path);
  if (format == Format::Jsonl) return decode_jsonl(bytes);
  ImportedRecords out = decode_packed(bytes);
  const std::string side = sidecar_path(path);
  if (std::filesystem::exists(side)) apply_sidecar(out, binio::read_file(side));
  return out;
}

void export_embeddings(const std::vector<EmbeddingRecord>& records, std::size_t dim, const std::string& path,
                       Format format) {
  if (records.empty()) throw Error(Errc::EmptySet, "cannot export an empty dataset");
  if (format == Format::Jsonl) {
    binio::write_file(path, encode_jsonl(records, dim));
    return;
  }
  const std::string packed = encode_packed(records, dim);
  const std::string side = encode_sidecar(records);
  binio::write_file(path, packed);
  if (!side.empty()) {
    binio::write_file(sidecar_path(path), side);
  } else if (std::filesystem::exists(sidecar_path(path))) {
    std::filesystem::remove(sidecar_path(path));
  }
}

}  // namespace layoutspace::store
