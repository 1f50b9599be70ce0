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

#include "layoutspace/app/operations.hpp"

#include "layoutspace/core/error.hpp"
#include "layoutspace/core/vector_ops.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <unordered_map>

namespace layoutspace::app {

using nlohmann::json;

LabelSource parse_label_source(std::string_view text) {
  if (text == "layout") return LabelSource::Layout;
  if (text == "cluster") return LabelSource::Cluster;
  throw Error(Errc::InvalidArgument, "labels must be 'layout' or 'cluster', got '" + std::string(text) + "'");
}

MetricsRow metrics_row(const std::string& name, std::span<const EmbeddingRecord> records, DistanceMetric metric,
                       const learn::MetricModel* embedder) {
  const auto kept = labelled_records(records);
  std::vector<std::string> labels;
  labels.reserve(kept.size());
  for (const auto& r : kept) labels.push_back(*r.layout_label);
  std::vector<std::string> names;
  const auto codes = cluster::encode_labels(labels, &names);
  Matrix points = to_matrix(kept);
  if (embedder) points = embedder->embed(points);
  MetricsRow row;
  row.name = name;
  row.samples = kept.size();
  row.classes = names.size();
  row.metrics = cluster::labeled_metrics(points, codes, metric);
  return row;
}

std::vector<EmbeddingRecord> labelled_records(std::span<const EmbeddingRecord> records) {
  std::vector<EmbeddingRecord> out;
  for (const auto& r : records) {
    if (r.layout_label) out.push_back(r);
  }
  if (out.empty()) throw Error(Errc::InvalidLabel, "no record carries a layout label");
  return out;
}

std::vector<EmbeddingRecord> label_by_cluster(std::span<const EmbeddingRecord> records,
                                              const cluster::ClusterModel& model) {
  std::unordered_map<std::string, int> assigned;
  for (std::size_t i = 0; i < model.sample_ids.size(); ++i) assigned[model.sample_ids[i]] = model.assignment[i];
  std::vector<EmbeddingRecord> out;
  for (const auto& r : records) {
    const auto it = assigned.find(r.sample_id);
    if (it == assigned.end() || it->second == cluster::kNoise) continue;
    EmbeddingRecord copy = r;
    copy.layout_label = "cluster-" + std::to_string(it->second);
    out.push_back(std::move(copy));
  }
  return out;
}

std::vector<EmbeddingRecord> filter_split(std::span<const EmbeddingRecord> records, std::optional<SplitTag> split) {
  std::vector<EmbeddingRecord> out;
  for (const auto& r : records) {
    if (!split || r.split == split) out.push_back(r);
  }
  return out;
}

json to_json(const MetricsRow& row) {
  json j = {{"name", row.name},
            {"samples", row.samples},
            {"classes", row.classes},
            {"intra_class", row.metrics.intra_class_mean},
            {"inter_class", row.metrics.inter_class_mean},
            {"silhouette", row.metrics.silhouette_mean},
            {"dbi", row.metrics.dbi}};
  if (row.weights) {
    j["weights"] = {{"arcface", row.weights->arcface}, {"supcon", row.weights->supcon}, {"center", row.weights->center}};
  }
  return j;
}

std::string metrics_table(std::span<const MetricsRow> rows) {
  std::size_t width = 5;
  for (const auto& r : rows) width = std::max(width, r.name.size());
  auto pad = [](const std::string& s, std::size_t w) { return s + std::string(w > s.size() ? w - s.size() : 0, ' '); };
  auto weight = [](const std::optional<learn::LossWeights>& w, double learn::LossWeights::*field) {
    if (!w) return std::string("-");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", (*w).*field);
    return std::string(buf);
  };
  std::string out = pad("Model", width) + "  " + pad("ArcFace", 8) + pad("SupCon", 8) + pad("Center", 8) +
                    pad("Intra-class", 13) + pad("Inter-class", 13) + pad("Silhouette", 12) + "DBI\n";
  for (const auto& r : rows) {
    char nums[96];
    std::snprintf(nums, sizeof nums, "%-13.3f%-13.3f%-12.3f%.3f", r.metrics.intra_class_mean,
                  r.metrics.inter_class_mean, r.metrics.silhouette_mean, r.metrics.dbi);
    out += pad(r.name, width) + "  " + pad(weight(r.weights, &learn::LossWeights::arcface), 8) +
           pad(weight(r.weights, &learn::LossWeights::supcon), 8) +
           pad(weight(r.weights, &learn::LossWeights::center), 8) + nums + "\n";
  }
  return out;
}

std::vector<AblationConfig> ablation_configs(double center_weight) {
  return {{"arcface", {1.0, 0.0, 0.0}},
          {"supcon", {0.0, 1.0, 0.0}},
          {"arcface+supcon", {1.0, 1.0, 0.0}},
          {"arcface+supcon+center", {1.0, 1.0, center_weight}}};
}

AblationResult run_ablation(std::span<const EmbeddingRecord> records, const learn::TrainerConfig& base,
                            std::span<const AblationConfig> configs, DistanceMetric metric,
                            const Progress& progress) {
  auto held = filter_split(records, SplitTag::Test);
  if (held.empty()) held = filter_split(records, SplitTag::Val);
  if (held.empty()) throw Error(Errc::EmptySplit, "ablation needs a test or val split to score");
  const auto train = filter_split(records, SplitTag::Train);
  if (train.empty()) throw Error(Errc::EmptySplit, "ablation needs a train split");

  std::vector<std::string> labels;
  for (const auto& r : train) {
    if (!r.layout_label) throw Error(Errc::InvalidLabel, "sample '" + r.sample_id + "' has no layout label");
    labels.push_back(*r.layout_label);
  }
  std::vector<std::string> names;
  cluster::encode_labels(labels, &names);

  AblationResult out;
  out.rows.push_back(metrics_row("input", held, metric));
  const auto untrained =
      learn::init_metric_model(static_cast<Eigen::Index>(records.front().vector.size()), names.size(), base);
  out.rows.push_back(metrics_row("untrained", held, metric, &untrained));
  const double n = static_cast<double>(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    learn::TrainerConfig cfg = base;
    cfg.weights = configs[i].weights;
    Progress sub;
    if (progress) sub = [&, i](double f) { return progress((static_cast<double>(i) + f) / n); };
    auto result = learn::train_metric_head(records, cfg, sub);
    MetricsRow row = metrics_row(configs[i].name, held, metric, &result.model);
    row.weights = cfg.weights;
    out.rows.push_back(std::move(row));
    out.runs.push_back(std::move(result));
  }
  return out;
}

json to_json(const learn::TrainResult& r) {
  json history = json::array();
  for (const auto& e : r.history) {
    history.push_back({{"epoch", e.epoch},
                       {"stage", std::string(learn::to_string(e.stage))},
                       {"arcface", e.arcface},
                       {"supcon", e.supcon},
                       {"center", e.center},
                       {"total", e.total},
                       {"val_silhouette", e.val_silhouette},
                       {"val_dbi", e.val_dbi}});
  }
  return {{"history", history},
          {"best_epoch", r.best_epoch},
          {"initial_val_silhouette", r.initial_val_silhouette},
          {"initial_val_dbi", r.initial_val_dbi},
          {"best_val_silhouette", r.best_val_silhouette},
          {"best_val_dbi", r.best_val_dbi},
          {"classes", r.model.class_names}};
}

ClusterOutcome fit_clusters(const PointSet& points, const ClusterRequest& request, const Defaults& defaults,
                            const Progress& progress) {
  cluster::KMeansParams params;
  params.rng_seed = request.rng_seed;
  params.metric = request.space == ClusterSpace::Tsne ? DistanceMetric::Euclidean : defaults.metric;
  params.max_iter = defaults.kmeans_max_iter;
  params.tol = defaults.kmeans_tol;
  params.n_init = defaults.kmeans_n_init;

  ClusterOutcome out;
  Progress fit_progress = progress;
  if (request.k) {
    params.k = *request.k;
  } else {
    Progress sweep;
    if (progress) {
      sweep = [&](double f) { return progress(0.5 * f); };
      fit_progress = [&](double f) { return progress(0.5 + 0.5 * f); };
    }
    out.selection = cluster::select_k(points, request.k_min, request.k_max, request.rng_seed, params.metric,
                                      defaults.select_k_sample, sweep);
    params.k = out.selection->k;
  }
  out.stored.model = cluster::kmeans(points, params, fit_progress);
  out.stored.space = request.space;
  if (request.space == ClusterSpace::Tsne) out.stored.projection = request.projection;
  return out;
}

PointSet request_points(const Workspace& ws, const DatasetHandle& ds, const ClusterRequest& request) {
  if (request.space == ClusterSpace::Embedding) return ds.snapshot.points();
  if (!request.projection) throw Error(Errc::InvalidArgument, "t-SNE space clustering needs a projection name");
  if (!ds.stored) throw Error(Errc::InvalidArgument, "t-SNE space clustering needs an imported dataset");
  StoredModel probe;
  probe.space = request.space;
  probe.projection = request.projection;
  return model_points(ws, ds, probe);
}

json to_json(const cluster::SelectKResult& r) {
  json sweep = json::array();
  for (const auto& [k, s] : r.silhouettes) sweep.push_back({{"k", k}, {"silhouette", s}});
  return {{"k", r.k}, {"sweep", sweep}};
}

std::map<std::string, RowVector> layout_centroids_in(const PointSet& points, std::span<const EmbeddingRecord> records,
                                                     DistanceMetric metric) {
  std::unordered_map<std::string, std::size_t> row;
  for (std::size_t i = 0; i < points.ids.size(); ++i) row[points.ids[i]] = i;
  std::map<std::string, std::vector<std::size_t>> groups;
  for (const auto& r : records) {
    if (!r.layout_label) continue;
    const auto it = row.find(r.sample_id);
    if (it != row.end()) groups[*r.layout_label].push_back(it->second);
  }
  std::map<std::string, RowVector> out;
  if (groups.empty()) return out;
  const Matrix prepared = prepare_points(points.points, metric);
  for (const auto& [label, rows] : groups) out[label] = mean_of_rows(prepared, rows);
  return out;
}

std::vector<std::string> known_seeds(const discovery::SimilarityGraph& graph, std::span<const std::string> seeds) {
  std::vector<std::string> out;
  for (const auto& s : seeds) {
    if (graph.index.count(s)) out.push_back(s);
  }
  return out;
}

QueueOutcome build_queue(const Workspace& ws, const DatasetHandle& ds, std::optional<std::uint64_t> model_version,
                         const std::vector<std::string>& confirmed_seeds, const Defaults& defaults) {
  PointSet points;
  const StoredModel stored = bind_model(ws, ds, model_version, &points);
  QueueOutcome out;
  out.anomalies = discovery::zscore_anomalies(stored.model, points);
  const auto layouts = layout_centroids_in(points, ds.data().records, stored.model.metric);
  if (!layouts.empty()) out.detection = discovery::detect_anomalous_clusters(stored.model, layouts, defaults.detect);
  if (!confirmed_seeds.empty()) {
    const auto graph = discovery::build_similarity_graph(ds.snapshot.points(), defaults.graph);
    const auto seeds = known_seeds(graph, confirmed_seeds);
    if (!seeds.empty()) out.expansion = discovery::expand_from_seeds(graph, seeds, defaults.expand);
  }
  discovery::TriageInputs inputs;
  inputs.snapshot_version = ds.snapshot.version();
  inputs.anomalies = out.anomalies;
  inputs.clusters = out.detection;
  inputs.model = &stored.model;
  inputs.set = &points;
  inputs.expansion = out.expansion;
  out.items = discovery::assemble_triage_queue(inputs, defaults.queue);
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string dump_sorted(const json& j, int indent) { return j.dump(indent); }

}  // namespace layoutspace::app
