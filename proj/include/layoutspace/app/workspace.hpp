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

#include "layoutspace/cluster/model.hpp"
#include "layoutspace/cluster/tsne.hpp"
#include "layoutspace/discovery/discovery.hpp"
#include "layoutspace/store/dataset.hpp"

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace layoutspace::app {

/// Space a cluster model was fit in: the stored vectors or a saved t-SNE
/// projection of them.
enum class ClusterSpace { Embedding, Tsne };

std::string_view to_string(ClusterSpace space);
ClusterSpace parse_cluster_space(std::string_view text);

struct StoredModel {
  cluster::ClusterModel model;
  ClusterSpace space = ClusterSpace::Embedding;
  std::optional<std::string> projection;  // set when space is Tsne
};

nlohmann::json to_json(const StoredModel& stored);
StoredModel stored_model_from_json(const nlohmann::json& j);

struct StoredProjection {
  cluster::ProjectionResult result;
  std::uint64_t snapshot_version = 0;
};

/// A dataset given either as a store id or as an embeddings file.
struct DatasetHandle {
  store::Snapshot snapshot;
  bool stored = false;

  const store::Dataset& data() const { return snapshot.data(); }
  const std::string& id() const { return snapshot.dataset_id(); }
};

/// On-disk state under one data directory:
///
///   datasets/<id>.idem (+ sidecar, info)
///   models/<id>/v<N>.json
///   projections/<id>/<name>.json
///   triage/<id>/audit.jsonl, queue.json
///   checkpoints/<id>/<name>.lsck
class Workspace {
 public:
  explicit Workspace(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  store::DatasetStore& datasets() { return datasets_; }
  const store::DatasetStore& datasets() const { return datasets_; }

  /// Store id when one exists, else an embeddings file (format by extension).
  DatasetHandle open_dataset(const std::string& ref) const;
  /// Deletes the dataset and every artifact derived from it.
  void remove_dataset(const std::string& dataset_id);

  std::vector<std::uint64_t> model_versions(const std::string& dataset_id) const;
  /// Assigns the next free version (parent kept) and writes the model.
  StoredModel save_model(const std::string& dataset_id, StoredModel stored);
  /// Latest version when `version` is empty. Not yet bound to points.
  StoredModel load_model(const std::string& dataset_id, std::optional<std::uint64_t> version) const;

  void save_projection(const std::string& dataset_id, const std::string& name, const StoredProjection& p);
  StoredProjection load_projection(const std::string& dataset_id, const std::string& name) const;
  std::vector<std::string> projection_names(const std::string& dataset_id) const;

  /// Book over triage/<id>/audit.jsonl with the saved queue loaded.
  discovery::TriageBook open_triage(const std::string& dataset_id) const;
  void save_queue(const std::string& dataset_id, const std::vector<discovery::TriageItem>& items);

  std::filesystem::path checkpoint_path(const std::string& dataset_id, const std::string& name) const;

 private:
  std::filesystem::path dir(const std::string& kind, const std::string& dataset_id) const;

  std::filesystem::path root_;
  store::DatasetStore datasets_;
  mutable std::mutex mutex_;
};

/// Points of the space a stored model lives in, pinned to the snapshot.
PointSet model_points(const Workspace& ws, const DatasetHandle& ds, const StoredModel& stored);

/// Loads and binds a model (StaleModel when the dataset changed since the fit).
StoredModel bind_model(const Workspace& ws, const DatasetHandle& ds, std::optional<std::uint64_t> version,
                       PointSet* points_out = nullptr);

}  // namespace layoutspace::app
