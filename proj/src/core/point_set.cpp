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

#include "layoutspace/core/point_set.hpp"

#include "layoutspace/core/rng.hpp"
#include "layoutspace/core/vector_ops.hpp"

namespace layoutspace {

std::uint64_t PointSet::fingerprint() const {
  // FNV-1a over the ids, mixed with the version.
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& id : ids) {
    for (unsigned char c : id) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xFF;
    h *= 1099511628211ULL;
  }
  return splitmix64(h ^ splitmix64(snapshot_version));
}

PointSet PointSet::from_records(std::span<const EmbeddingRecord> records, std::uint64_t snapshot_version) {
  PointSet set;
  set.ids.reserve(records.size());
  for (const auto& r : records) set.ids.push_back(r.sample_id);
  set.points = to_matrix(records);
  set.snapshot_version = snapshot_version;
  return set;
}

}  // namespace layoutspace
