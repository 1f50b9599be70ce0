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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace layoutspace {

/// Vectors of one dataset snapshot in row order, with their ids. Analytics
/// results remember the fingerprint so they can detect a changed input.
struct PointSet {
  std::vector<std::string> ids;
  Matrix points;
  std::uint64_t snapshot_version = 0;

  std::size_t size() const { return ids.size(); }
  /// Hash of the id sequence and the snapshot version.
  std::uint64_t fingerprint() const;

  static PointSet from_records(std::span<const EmbeddingRecord> records, std::uint64_t snapshot_version = 0);
};

}  // namespace layoutspace
