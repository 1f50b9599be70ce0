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
#include "layoutspace/core/point_set.hpp"
#include "layoutspace/core/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace layoutspace::discovery {

// ---- z-score anomalies ----

struct AnomalyScore {
  std::string sample_id;
  double z = 0.0;
  int cluster_id = 0;
  double centroid_distance = 0.0;
};

struct AnomalyReport {
  std::uint64_t snapshot_version = 0;
  std::uint64_t model_version = 0;
  std::vector<AnomalyScore> scores;  // descending z, ties by sample id
};

/// One score per non-noise sample. Throws StaleModel when `set` is not the
/// snapshot the model was fit on.
AnomalyReport zscore_anomalies(const cluster::ClusterModel& model, const PointSet& set);

// ---- similarity graph ----

struct GraphParams {
  std::size_t k_neighbors = 20;
  double min_similarity = -1.0;
};

struct Edge {
  std::uint32_t to = 0;
  double weight = 0.0;
};

struct SimilarityGraph {
  std::vector<std::string> ids;
  Matrix unit;  // L2-normalized rows
  std::vector<std::vector<Edge>> adjacency;  // per node, weight desc then index
  GraphParams params;
  std::uint64_t snapshot_version = 0;
  std::unordered_map<std::string, std::uint32_t> index;

  std::size_t edge_count() const;  // undirected
  std::uint32_t node(const std::string& id) const;  // UnknownSeed if absent
};

/// Exact cosine k-NN, symmetrized by union, edges below min_similarity
/// dropped. Progress returning false cancels.
SimilarityGraph build_similarity_graph(const PointSet& set, const GraphParams& params,
                                       const std::function<bool(double)>& progress = {});

// ---- seed expansion ----

struct ExpansionParams {
  double threshold = 0.9;
  std::size_t max_hops = 3;
};

struct Candidate {
  std::string sample_id;
  double score = 0.0;  // max cosine similarity to any seed
  std::size_t hops = 0;
};

struct ExpansionResult {
  std::vector<std::string> seed_ids;  // sorted, unique
  std::vector<Candidate> candidates;  // score desc, hops asc, id asc
  ExpansionParams params;
  std::uint64_t snapshot_version = 0;
};

/// Breadth-first expansion over edges with weight >= threshold, at most
/// max_hops from the nearest seed. Seeds are never candidates.
ExpansionResult expand_from_seeds(const SimilarityGraph& graph, std::span<const std::string> seeds,
                                  const ExpansionParams& params);

// ---- anomalous clusters ----

struct DetectParams {
  std::size_t min_size = 10;
  double distance_quantile = 0.95;
};

struct FlaggedCluster {
  int cluster_id = 0;
  std::size_t size = 0;
  double min_distance_to_known_layout = 0.0;
  std::string nearest_layout;
};

struct DetectionReport {
  std::uint64_t snapshot_version = 0;
  std::uint64_t model_version = 0;
  double distance_threshold = 0.0;
  std::vector<FlaggedCluster> flagged;  // distance desc, then cluster id
};

/// Mean of the metric-prepared vectors of each labelled layout.
std::map<std::string, RowVector> layout_centroids(std::span<const EmbeddingRecord> records, DistanceMetric metric);

/// Flags clusters with size >= min_size whose centroid is farther from every
/// known layout centroid than the q-quantile of inter-layout centroid
/// distances. With a single known layout the threshold is 0.
DetectionReport detect_anomalous_clusters(const cluster::ClusterModel& model,
                                          const std::map<std::string, RowVector>& layouts,
                                          const DetectParams& params);

// ---- triage ----

enum class ItemKind { Sample, Cluster };
enum class Provenance { ZScore, AnomalousCluster, SeedExpansion };
enum class ReviewState { Pending, ConfirmedFraud, ConfirmedGenuine, Skipped };

std::string_view to_string(ItemKind kind);
std::string_view to_string(Provenance provenance);
std::string_view to_string(ReviewState state);
ReviewState parse_review_state(std::string_view text);

struct TriageItem {
  std::string item_id;  // "sample:<id>" or "cluster:<model version>:<cluster id>"
  ItemKind kind = ItemKind::Sample;
  std::string target_id;
  double priority = 0.0;
  Provenance provenance = Provenance::ZScore;
  ReviewState review_state = ReviewState::Pending;
  std::optional<std::string> reviewer;
  std::optional<std::string> timestamp;
  std::vector<std::string> representatives;  // cluster items: medoid then top-2 z
  std::vector<std::string> members;          // cluster items: member sample ids
};

struct QueueWeights {
  double zscore = 1.0;
  double anomalous_cluster = 1.0;
  double seed_expansion = 1.0;
  /// Samples with z below this never enter the queue.
  double min_z = 2.0;
};

struct TriageInputs {
  std::uint64_t snapshot_version = 0;
  std::optional<AnomalyReport> anomalies;
  std::optional<DetectionReport> clusters;
  const cluster::ClusterModel* model = nullptr;  // required with clusters
  const PointSet* set = nullptr;                 // required with clusters
  std::optional<ExpansionResult> expansion;
};

/// Medoid followed by the two highest-z members of a cluster.
std::vector<std::string> cluster_representatives(const cluster::ClusterModel& model, const PointSet& set,
                                                 int cluster_id);

/// Priority = provenance weight x normalized score: z / max z, distance /
/// max flagged distance, expansion similarity as is. Members of cluster items
/// are removed from the sample items; a sample surfaced twice keeps its
/// highest-priority item. Ordered by priority desc then item id.
std::vector<TriageItem> assemble_triage_queue(const TriageInputs& inputs, const QueueWeights& weights);

/// Review state for a queue. Verdicts are stored per sample in an
/// append-only JSON-lines audit log; replaying the log restores the state.
class TriageBook {
 public:
  TriageBook() = default;
  /// Opens (and replays) the audit log at `path`, creating it on first write.
  explicit TriageBook(std::string audit_path);

  /// Replaces the queue; items already decided in the log keep their state.
  void set_queue(std::vector<TriageItem> items);
  std::vector<TriageItem> queue() const;

  /// pending -> verdict for the item and every still-pending sample it covers.
  TriageItem record_verdict(const std::string& item_id, ReviewState verdict, const std::string& reviewer,
                            const std::string& timestamp);

  /// Samples confirmed as fraud, sorted.
  std::vector<std::string> seeds() const;
  std::map<std::string, ReviewState> sample_states() const;
  const std::vector<nlohmann::json>& audit() const { return audit_; }

  /// Sample states obtained by replaying audit entries.
  static std::map<std::string, ReviewState> replay(std::span<const nlohmann::json> entries);

 private:
  void refresh(TriageItem& item) const;

  std::optional<std::string> path_;
  std::vector<TriageItem> items_;
  std::map<std::string, std::size_t> by_id_;
  std::map<std::string, ReviewState> samples_;
  std::map<std::string, nlohmann::json> decided_items_;
  std::vector<nlohmann::json> audit_;
};

nlohmann::json to_json(const AnomalyScore& s);
nlohmann::json to_json(const ExpansionResult& r);
nlohmann::json to_json(const FlaggedCluster& f);
nlohmann::json to_json(const DetectionReport& r);
/// `with_members` adds the full member list of cluster items.
nlohmann::json to_json(const TriageItem& item, bool with_members = false);
TriageItem triage_item_from_json(const nlohmann::json& j);

}  // namespace layoutspace::discovery
