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

#include "layoutspace/core/point_set.hpp"
#include "layoutspace/core/types.hpp"

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace layoutspace::store {

struct Dataset {
  std::string dataset_id;
  std::size_t dim = 0;
  std::vector<EmbeddingRecord> records;  // sorted by sample id
  std::uint64_t snapshot_version = 1;
  std::string provenance;
};

/// Immutable view of one dataset version. Reading through a handle whose
/// dataset has since been deleted throws StaleSnapshot.
class Snapshot {
 public:
  Snapshot(std::shared_ptr<const Dataset> data, std::shared_ptr<const std::atomic<bool>> alive)
      : data_(std::move(data)), alive_(std::move(alive)) {}

  const Dataset& data() const;
  const std::string& dataset_id() const { return data_->dataset_id; }
  std::uint64_t version() const { return data_->snapshot_version; }
  PointSet points() const;

 private:
  std::shared_ptr<const Dataset> data_;
  std::shared_ptr<const std::atomic<bool>> alive_;
};

/// Named datasets with single-writer mutation and snapshot readers. With a
/// directory, every version is persisted as packed file + sidecar + info.
class DatasetStore {
 public:
  DatasetStore() = default;
  explicit DatasetStore(std::filesystem::path directory);

  /// Conflict if the id exists. Records are validated and sorted.
  Snapshot create(const std::string& dataset_id, std::vector<EmbeddingRecord> records, std::size_t dim,
                  std::string provenance);
  Snapshot snapshot(const std::string& dataset_id) const;
  bool contains(const std::string& dataset_id) const;
  std::vector<std::string> list() const;
  /// Applies `edit` to a copy of the records; the result becomes version + 1.
  Snapshot mutate(const std::string& dataset_id, const std::function<void(std::vector<EmbeddingRecord>&)>& edit);
  void remove(const std::string& dataset_id);

  static void check_id(const std::string& dataset_id);

 private:
  struct Entry {
    std::shared_ptr<const Dataset> data;
    std::shared_ptr<std::atomic<bool>> alive;
  };

  void persist(const Dataset& d) const;

  std::optional<std::filesystem::path> dir_;
  mutable std::mutex mutex_;
  std::map<std::string, Entry> entries_;
};

}  // namespace layoutspace::store
