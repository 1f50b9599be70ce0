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

#pragma once

#include "layoutspace/core/types.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace layoutspace::store {

enum class Format { Jsonl, Packed };

std::string_view to_string(Format format);
Format parse_format(std::string_view text);
/// ".idem" / ".packed" -> Packed, anything else -> Jsonl.
Format format_for_path(const std::string& path);

struct ImportedRecords {
  std::size_t dim = 0;
  std::vector<EmbeddingRecord> records;  // file order
};

// JSON lines: a header {"format":"layoutspace-jsonl","version":1,"dim":D}
// then one {"id", "vec", "label"?, "split"?, "meta"?} object per line.

std::string encode_jsonl(const std::vector<EmbeddingRecord>& records, std::size_t dim);
/// All-or-nothing. Errors carry the 1-based line number.
ImportedRecords decode_jsonl(const std::string& text);

// Packed: "IDEM", u32 version, u64 count, u32 dim, id table of
// {u16 length, UTF-8 bytes}, then count x dim little-endian float32 rows.
// Labels, splits and metadata travel in a JSON-lines sidecar.

std::string encode_packed(const std::vector<EmbeddingRecord>& records, std::size_t dim);
ImportedRecords decode_packed(const std::string& bytes);
/// Sidecar lines {"id", "label"?, "split"?, "meta"?} for records that carry any.
std::string encode_sidecar(const std::vector<EmbeddingRecord>& records);
void apply_sidecar(ImportedRecords& imported, const std::string& text);
std::string sidecar_path(const std::string& packed_path);

/// Records sorted by sample id (the export order of both formats).
std::vector<EmbeddingRecord> sorted_by_id(std::vector<EmbeddingRecord> records);

/// Reads a file in either format (plus its sidecar when packed).
ImportedRecords import_embeddings(const std::string& path, Format format);
/// Writes sorted records; packed output also writes the sidecar.
void export_embeddings(const std::vector<EmbeddingRecord>& records, std::size_t dim, const std::string& path,
                       Format format);

/// Checks record invariants (dimension, finite components, unique non-empty
/// ids). `first_row` offsets reported row numbers.
void validate_records(const std::vector<EmbeddingRecord>& records, std::size_t dim, std::size_t first_row = 1);

}  // namespace layoutspace::store
