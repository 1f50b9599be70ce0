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

#include "layoutspace/discovery/discovery.hpp"

#include "layoutspace/core/error.hpp"
#include "layoutspace/core/vector_ops.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace layoutspace::discovery {

using cluster::ClusterModel;
using cluster::kNoise;
using nlohmann::json;

// ---- z-score anomalies ----

AnomalyReport zscore_anomalies(const ClusterModel& model, const PointSet& set) {
  cluster::check_fresh(model, set);
  if (model.centroid_distance.size() != model.assignment.size()) {
    throw Error(Errc::StaleModel, "cluster model is not bound to its point set");
  }
  AnomalyReport report;
  report.snapshot_version = set.snapshot_version;
  report.model_version = model.version;
  for (std::size_t i = 0; i < model.assignment.size(); ++i) {
    if (model.assignment[i] == kNoise) continue;
    report.scores.push_back({model.sample_ids[i], model.zscore(i), model.assignment[i], model.centroid_distance[i]});
  }
  std::sort(report.scores.begin(), report.scores.end(), [](const AnomalyScore& a, const AnomalyScore& b) {
    if (a.z != b.z) return a.z > b.z;
    return a.sample_id < b.sample_id;
  });
  return report;
}

// ---- similarity graph ----

std::size_t SimilarityGraph::edge_count() const {
  std::size_t total = 0;
  for (const auto& adj : adjacency) total += adj.size();
  return total / 2;
}

std::uint32_t SimilarityGraph::node(const std::string& id) const {
  const auto it = index.find(id);
  if (it == index.end()) throw Error(Errc::UnknownSeed, "unknown sample '" + id + "'");
  return it->second;
}

namespace {

double unit_dot(const Matrix& unit, std::uint32_t a, std::uint32_t b) {
  const std::uint32_t lo = std::min(a, b);
  const std::uint32_t hi = std::max(a, b);
  double s = 0.0;
  for (Eigen::Index d = 0; d < unit.cols(); ++d) s += unit(lo, d) * unit(hi, d);
  return std::clamp(s, -1.0, 1.0);
}

bool edge_order(const Edge& a, const Edge& b) {
  if (a.weight != b.weight) return a.weight > b.weight;
  return a.to < b.to;
}

}  // namespace

SimilarityGraph build_similarity_graph(const PointSet& set, const GraphParams& params,
                                       const std::function<bool(double)>& progress) {
  const std::size_t n = set.size();
  if (n < 2) throw Error(Errc::InvalidArgument, "similarity graph needs at least 2 samples");
  if (params.k_neighbors < 1) throw Error(Errc::InvalidArgument, "k_neighbors must be positive");
  SimilarityGraph g;
  g.ids = set.ids;
  g.params = params;
  g.snapshot_version = set.snapshot_version;
  g.unit = prepare_points(set.points, DistanceMetric::Cosine);
  for (std::size_t i = 0; i < n; ++i) g.index.emplace(g.ids[i], static_cast<std::uint32_t>(i));
  const std::size_t k = std::min(params.k_neighbors, n - 1);

  std::vector<std::set<std::uint32_t>> neighbours(n);
  constexpr Eigen::Index kBlock = 256;
  std::vector<std::pair<double, std::uint32_t>> row;
  for (Eigen::Index start = 0; start < static_cast<Eigen::Index>(n); start += kBlock) {
    const Eigen::Index rows = std::min<Eigen::Index>(kBlock, static_cast<Eigen::Index>(n) - start);
    const Matrix sims = g.unit.middleRows(start, rows) * g.unit.transpose();
    for (Eigen::Index r = 0; r < rows; ++r) {
      const auto i = static_cast<std::uint32_t>(start + r);
      row.clear();
      for (std::uint32_t j = 0; j < n; ++j) {
        if (j != i) row.emplace_back(sims(r, j), j);
      }
      std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k), row.end(),
                        [](const auto& a, const auto& b) {
                          if (a.first != b.first) return a.first > b.first;
                          return a.second < b.second;
                        });
      for (std::size_t m = 0; m < k; ++m) {
        neighbours[i].insert(row[m].second);
        neighbours[row[m].second].insert(i);
      }
    }
    if (progress && !progress(static_cast<double>(start + rows) / static_cast<double>(n))) {
      throw Error(Errc::Canceled, "graph build canceled");
    }
  }
  g.adjacency.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j : neighbours[i]) {
      const double w = unit_dot(g.unit, i, j);
      if (w >= params.min_similarity) g.adjacency[i].push_back({j, w});
    }
    std::sort(g.adjacency[i].begin(), g.adjacency[i].end(), edge_order);
  }
  return g;
}

// ---- seed expansion ----

ExpansionResult expand_from_seeds(const SimilarityGraph& graph, std::span<const std::string> seeds,
                                  const ExpansionParams& params) {
  if (seeds.empty()) throw Error(Errc::InvalidArgument, "at least one seed is required");
  if (params.max_hops < 1) throw Error(Errc::InvalidArgument, "max_hops must be at least 1");
  if (!std::isfinite(params.threshold)) throw Error(Errc::InvalidArgument, "threshold must be finite");
  ExpansionResult result;
  result.params = params;
  result.snapshot_version = graph.snapshot_version;

  std::vector<std::uint32_t> seed_nodes;
  for (const auto& s : seeds) seed_nodes.push_back(graph.node(s));
  std::sort(seed_nodes.begin(), seed_nodes.end());
  seed_nodes.erase(std::unique(seed_nodes.begin(), seed_nodes.end()), seed_nodes.end());
  for (auto s : seed_nodes) result.seed_ids.push_back(graph.ids[s]);
  std::sort(result.seed_ids.begin(), result.seed_ids.end());

  constexpr std::size_t kUnseen = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> hops(graph.ids.size(), kUnseen);
  std::deque<std::uint32_t> frontier;
  for (auto s : seed_nodes) {
    hops[s] = 0;
    frontier.push_back(s);
  }
  std::vector<std::uint32_t> reached;
  while (!frontier.empty()) {
    const std::uint32_t u = frontier.front();
    frontier.pop_front();
    if (hops[u] >= params.max_hops) continue;
    for (const Edge& e : graph.adjacency[u]) {
      if (e.weight < params.threshold || hops[e.to] != kUnseen) continue;
      hops[e.to] = hops[u] + 1;
      reached.push_back(e.to);
      frontier.push_back(e.to);
    }
  }
  for (std::uint32_t c : reached) {
    double best = -1.0;
    for (auto s : seed_nodes) best = std::max(best, unit_dot(graph.unit, c, s));
    result.candidates.push_back({graph.ids[c], best, hops[c]});
  }
  std::sort(result.candidates.begin(), result.candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.hops != b.hops) return a.hops < b.hops;
    return a.sample_id < b.sample_id;
  });
  return result;
}

// ---- anomalous clusters ----

std::map<std::string, RowVector> layout_centroids(std::span<const EmbeddingRecord> records, DistanceMetric metric) {
  std::map<std::string, std::pair<RowVector, std::size_t>> sums;
  for (const auto& r : records) {
    if (!r.layout_label) continue;
    RowVector v(static_cast<Eigen::Index>(r.vector.size()));
    for (std::size_t j = 0; j < r.vector.size(); ++j) v(static_cast<Eigen::Index>(j)) = r.vector[j];
    if (metric == DistanceMetric::Cosine) {
      const double norm = v.norm();
      if (norm < 1e-30) throw Error(Errc::ZeroVector, "record '" + r.sample_id + "' has a zero vector");
      v /= norm;
    }
    auto [it, inserted] = sums.try_emplace(*r.layout_label, RowVector::Zero(v.size()), 0);
    if (it->second.first.size() != v.size()) throw Error(Errc::DimensionMismatch, "mixed record dimensions");
    it->second.first += v;
    ++it->second.second;
  }
  std::map<std::string, RowVector> out;
  for (auto& [label, acc] : sums) out.emplace(label, acc.first / static_cast<double>(acc.second));
  return out;
}

DetectionReport detect_anomalous_clusters(const ClusterModel& model, const std::map<std::string, RowVector>& layouts,
                                          const DetectParams& params) {
  if (layouts.empty()) throw Error(Errc::NoKnownLayouts, "no known layout centroids");
  if (!(params.distance_quantile >= 0.0 && params.distance_quantile <= 1.0)) {
    throw Error(Errc::InvalidArgument, "distance quantile must lie in [0, 1]");
  }
  std::vector<std::string> names;
  std::vector<RowVector> refs;
  for (const auto& [name, c] : layouts) {
    if (model.centroids.cols() > 0 && c.size() != model.centroids.cols()) {
      throw Error(Errc::DimensionMismatch, "layout centroid '" + name + "' has the wrong dimension");
    }
    names.push_back(name);
    refs.push_back(reference_point(c, model.metric));
  }
  std::vector<double> inter;
  for (std::size_t a = 0; a < refs.size(); ++a) {
    for (std::size_t b = a + 1; b < refs.size(); ++b) inter.push_back(prepared_distance(refs[a], refs[b], model.metric));
  }
  DetectionReport report;
  report.snapshot_version = model.snapshot_version;
  report.model_version = model.version;
  report.distance_threshold = inter.empty() ? 0.0 : cluster::percentile(inter, 100.0 * params.distance_quantile);

  for (std::size_t r = 0; r < model.cluster_ids.size(); ++r) {
    if (model.stats[r].size < params.min_size) continue;
    const RowVector c = reference_point(model.centroids.row(static_cast<Eigen::Index>(r)), model.metric);
    double best = std::numeric_limits<double>::infinity();
    std::size_t nearest = 0;
    for (std::size_t l = 0; l < refs.size(); ++l) {
      const double d = prepared_distance(c, refs[l], model.metric);
      if (d < best) {
        best = d;
        nearest = l;
      }
    }
    if (best > report.distance_threshold) {
      report.flagged.push_back({model.cluster_ids[r], model.stats[r].size, best, names[nearest]});
    }
  }
  std::sort(report.flagged.begin(), report.flagged.end(), [](const FlaggedCluster& a, const FlaggedCluster& b) {
    if (a.min_distance_to_known_layout != b.min_distance_to_known_layout) {
      return a.min_distance_to_known_layout > b.min_distance_to_known_layout;
    }
    return a.cluster_id < b.cluster_id;
  });
  return report;
}

// ---- triage ----

std::string_view to_string(ItemKind kind) { return kind == ItemKind::Sample ? "sample" : "cluster"; }

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::ZScore: return "z_score";
    case Provenance::AnomalousCluster: return "anomalous_cluster";
    case Provenance::SeedExpansion: return "seed_expansion";
  }
  return "z_score";
}

std::string_view to_string(ReviewState s) {
  switch (s) {
    case ReviewState::Pending: return "pending";
    case ReviewState::ConfirmedFraud: return "confirmed_fraud";
    case ReviewState::ConfirmedGenuine: return "confirmed_genuine";
    case ReviewState::Skipped: return "skipped";
  }
  return "pending";
}

ReviewState parse_review_state(std::string_view text) {
  if (text == "pending") return ReviewState::Pending;
  if (text == "confirmed_fraud") return ReviewState::ConfirmedFraud;
  if (text == "confirmed_genuine") return ReviewState::ConfirmedGenuine;
  if (text == "skipped") return ReviewState::Skipped;
  throw Error(Errc::InvalidArgument, "unknown review state '" + std::string(text) + "'");
}

std::vector<std::string> cluster_representatives(const ClusterModel& model, const PointSet& set, int cluster_id) {
  cluster::check_fresh(model, set);
  const auto members = model.members(cluster_id);
  if (members.empty()) throw Error(Errc::UnknownCluster, "cluster " + std::to_string(cluster_id) + " has no members");
  const Matrix prepared = prepare_points(set.points, model.metric);
  std::size_t medoid = members.front();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a : members) {
    double total = 0.0;
    for (std::size_t b : members) {
      if (a != b) {
        total += prepared_distance(prepared.row(static_cast<Eigen::Index>(a)), prepared.row(static_cast<Eigen::Index>(b)),
                                   model.metric);
      }
    }
    if (total < best) {
      best = total;
      medoid = a;
    }
  }
  std::vector<std::size_t> by_z = members;
  std::sort(by_z.begin(), by_z.end(), [&](std::size_t a, std::size_t b) {
    const double za = model.zscore(a);
    const double zb = model.zscore(b);
    if (za != zb) return za > zb;
    return model.sample_ids[a] < model.sample_ids[b];
  });
  std::vector<std::string> reps{model.sample_ids[medoid]};
  for (std::size_t i : by_z) {
    if (reps.size() == 3) break;
    if (i != medoid) reps.push_back(model.sample_ids[i]);
  }
  return reps;
}

std::vector<TriageItem> assemble_triage_queue(const TriageInputs& in, const QueueWeights& weights) {
  auto check = [&](std::uint64_t v, const char* what) {
    if (v != in.snapshot_version) {
      throw Error(Errc::SnapshotMismatch, std::string(what) + " computed on snapshot " + std::to_string(v) +
                                              ", queue is for snapshot " + std::to_string(in.snapshot_version));
    }
  };
  if (in.anomalies) check(in.anomalies->snapshot_version, "anomaly scores");
  if (in.expansion) check(in.expansion->snapshot_version, "expansion");
  if (in.clusters) {
    check(in.clusters->snapshot_version, "cluster detection");
    if (!in.model || !in.set) throw Error(Errc::InvalidArgument, "cluster items need the model and point set");
    check(in.model->snapshot_version, "cluster model");
    check(in.set->snapshot_version, "point set");
    if (in.model->version != in.clusters->model_version) {
      throw Error(Errc::SnapshotMismatch, "detection report refers to a different model version");
    }
  }

  std::vector<TriageItem> out;
  std::set<std::string> clustered;
  if (in.clusters && !in.clusters->flagged.empty()) {
    double max_d = 0.0;
    for (const auto& f : in.clusters->flagged) max_d = std::max(max_d, f.min_distance_to_known_layout);
    for (const auto& f : in.clusters->flagged) {
      TriageItem item;
      item.kind = ItemKind::Cluster;
      item.target_id = std::to_string(f.cluster_id);
      item.item_id = "cluster:" + std::to_string(in.model->version) + ":" + item.target_id;
      item.provenance = Provenance::AnomalousCluster;
      item.priority = weights.anomalous_cluster * (max_d > 0.0 ? f.min_distance_to_known_layout / max_d : 0.0);
      for (std::size_t i : in.model->members(f.cluster_id)) item.members.push_back(in.model->sample_ids[i]);
      std::sort(item.members.begin(), item.members.end());
      clustered.insert(item.members.begin(), item.members.end());
      item.representatives = cluster_representatives(*in.model, *in.set, f.cluster_id);
      out.push_back(std::move(item));
    }
  }

  std::map<std::string, TriageItem> samples;
  auto offer = [&](const std::string& id, double priority, Provenance p) {
    if (clustered.count(id)) return;
    auto it = samples.find(id);
    if (it != samples.end()) {
      const bool better = priority > it->second.priority ||
                          (priority == it->second.priority && static_cast<int>(p) < static_cast<int>(it->second.provenance));
      if (!better) return;
    }
    TriageItem item;
    item.kind = ItemKind::Sample;
    item.target_id = id;
    item.item_id = "sample:" + id;
    item.priority = priority;
    item.provenance = p;
    samples[id] = std::move(item);
  };
  if (in.anomalies && !in.anomalies->scores.empty()) {
    const double max_z = std::max(0.0, in.anomalies->scores.front().z);
    for (const auto& s : in.anomalies->scores) {
      if (s.z < weights.min_z) continue;
      offer(s.sample_id, weights.zscore * (max_z > 0.0 ? std::max(0.0, s.z) / max_z : 0.0), Provenance::ZScore);
    }
  }
  if (in.expansion) {
    for (const auto& c : in.expansion->candidates) offer(c.sample_id, weights.seed_expansion * c.score, Provenance::SeedExpansion);
  }
  for (auto& [id, item] : samples) out.push_back(std::move(item));
  std::sort(out.begin(), out.end(), [](const TriageItem& a, const TriageItem& b) {
    if (a.priority != b.priority) return a.priority > b.priority;
    return a.item_id < b.item_id;
  });
  return out;
}

// ---- verdict book ----

TriageBook::TriageBook(std::string audit_path) : path_(std::move(audit_path)) {
  std::ifstream in(*path_);
  if (!in) return;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    json entry;
    try {
      entry = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(Errc::ParseError, "audit log line " + std::to_string(row) + ": " + e.what(), row);
    }
    audit_.push_back(entry);
  }
  samples_ = replay(audit_);
  for (const auto& e : audit_) decided_items_[e.at("item_id").get<std::string>()] = e;
}

std::map<std::string, ReviewState> TriageBook::replay(std::span<const json> entries) {
  std::map<std::string, ReviewState> states;
  std::uint64_t last = 0;
  for (const auto& e : entries) {
    const auto seq = e.at("seq").get<std::uint64_t>();
    if (seq <= last) throw Error(Errc::ParseError, "audit sequence numbers must increase");
    last = seq;
    if (!e.contains("sample_id")) continue;
    states[e.at("sample_id").get<std::string>()] = parse_review_state(e.at("verdict").get<std::string>());
  }
  return states;
}

void TriageBook::refresh(TriageItem& item) const {
  const auto it = decided_items_.find(item.item_id);
  if (it != decided_items_.end()) {
    item.review_state = parse_review_state(it->second.at("verdict").get<std::string>());
    item.reviewer = it->second.at("reviewer").get<std::string>();
    item.timestamp = it->second.at("timestamp").get<std::string>();
    return;
  }
  if (item.kind == ItemKind::Sample) {
    const auto s = samples_.find(item.target_id);
    if (s != samples_.end()) item.review_state = s->second;
    return;
  }
  std::optional<ReviewState> shared;
  for (const auto& m : item.members) {
    const auto s = samples_.find(m);
    if (s == samples_.end() || (shared && *shared != s->second)) return;
    shared = s->second;
  }
  if (shared) item.review_state = *shared;
}

void TriageBook::set_queue(std::vector<TriageItem> items) {
  items_ = std::move(items);
  by_id_.clear();
  for (std::size_t i = 0; i < items_.size(); ++i) {
    refresh(items_[i]);
    by_id_[items_[i].item_id] = i;
  }
}

std::vector<TriageItem> TriageBook::queue() const { return items_; }

TriageItem TriageBook::record_verdict(const std::string& item_id, ReviewState verdict, const std::string& reviewer,
                                      const std::string& timestamp) {
  if (verdict == ReviewState::Pending) throw Error(Errc::InvalidArgument, "verdict must not be 'pending'");
  if (reviewer.empty()) throw Error(Errc::InvalidArgument, "reviewer is required");
  const auto it = by_id_.find(item_id);
  if (it == by_id_.end()) throw Error(Errc::UnknownItem, "unknown triage item '" + item_id + "'");
  TriageItem& item = items_[it->second];
  if (item.review_state != ReviewState::Pending) {
    throw Error(Errc::AlreadyReviewed, "item '" + item_id + "' is already " + std::string(to_string(item.review_state)));
  }
  std::vector<std::string> targets =
      item.kind == ItemKind::Cluster ? item.members : std::vector<std::string>{item.target_id};
  std::vector<json> entries;
  std::uint64_t seq = audit_.empty() ? 0 : audit_.back().at("seq").get<std::uint64_t>();
  for (const auto& sample : targets) {
    if (samples_.count(sample)) continue;
    entries.push_back({{"seq", ++seq},
                       {"item_id", item_id},
                       {"sample_id", sample},
                       {"verdict", std::string(to_string(verdict))},
                       {"reviewer", reviewer},
                       {"timestamp", timestamp}});
  }
  if (entries.empty()) {
    // Every covered sample was decided elsewhere; record the item itself.
    entries.push_back({{"seq", ++seq},
                       {"item_id", item_id},
                       {"verdict", std::string(to_string(verdict))},
                       {"reviewer", reviewer},
                       {"timestamp", timestamp}});
  }
  if (path_) {
    std::ofstream out(*path_, std::ios::app | std::ios::binary);
    if (!out) throw Error(Errc::IoError, "cannot append to audit log '" + *path_ + "'");
    for (const auto& e : entries) out << e.dump() << '\n';
    out.flush();
    if (!out) throw Error(Errc::IoError, "write to audit log '" + *path_ + "' failed");
  }
  for (auto& e : entries) {
    if (e.contains("sample_id")) samples_[e["sample_id"].get<std::string>()] = verdict;
    audit_.push_back(e);
  }
  decided_items_[item_id] = entries.front();
  for (auto& other : items_) refresh(other);
  return item;
}

std::vector<std::string> TriageBook::seeds() const {
  std::vector<std::string> out;
  for (const auto& [id, state] : samples_) {
    if (state == ReviewState::ConfirmedFraud) out.push_back(id);
  }
  return out;
}

std::map<std::string, ReviewState> TriageBook::sample_states() const { return samples_; }

// ---- serialization ----

json to_json(const AnomalyScore& s) {
  return {{"sample_id", s.sample_id}, {"z", s.z}, {"cluster_id", s.cluster_id}, {"centroid_distance", s.centroid_distance}};
}

json to_json(const ExpansionResult& r) {
  json cands = json::array();
  for (const auto& c : r.candidates) cands.push_back({{"sample_id", c.sample_id}, {"score", c.score}, {"hops", c.hops}});
  return {{"seed_ids", r.seed_ids},
          {"candidates", cands},
          {"params", {{"threshold", r.params.threshold}, {"max_hops", r.params.max_hops}}},
          {"snapshot_version", r.snapshot_version}};
}

json to_json(const FlaggedCluster& f) {
  return {{"cluster_id", f.cluster_id},
          {"size", f.size},
          {"min_distance_to_known_layout", f.min_distance_to_known_layout},
          {"nearest_layout", f.nearest_layout}};
}

json to_json(const DetectionReport& r) {
  json flagged = json::array();
  for (const auto& f : r.flagged) flagged.push_back(to_json(f));
  return {{"snapshot_version", r.snapshot_version},
          {"model_version", r.model_version},
          {"distance_threshold", r.distance_threshold},
          {"flagged", flagged}};
}

json to_json(const TriageItem& item, bool with_members) {
  json j = {{"item_id", item.item_id},
            {"kind", std::string(to_string(item.kind))},
            {"target_id", item.target_id},
            {"priority", item.priority},
            {"provenance", std::string(to_string(item.provenance))},
            {"review_state", std::string(to_string(item.review_state))},
            {"reviewer", item.reviewer ? json(*item.reviewer) : json(nullptr)},
            {"timestamp", item.timestamp ? json(*item.timestamp) : json(nullptr)}};
  if (item.kind == ItemKind::Cluster) {
    j["representatives"] = item.representatives;
    j["member_count"] = item.members.size();
    if (with_members) j["members"] = item.members;
  }
  return j;
}

TriageItem triage_item_from_json(const json& j) {
  TriageItem item;
  try {
    item.item_id = j.at("item_id").get<std::string>();
    item.kind = j.at("kind").get<std::string>() == "cluster" ? ItemKind::Cluster : ItemKind::Sample;
    item.target_id = j.at("target_id").get<std::string>();
    item.priority = j.at("priority").get<double>();
    const std::string prov = j.at("provenance").get<std::string>();
    item.provenance = prov == "anomalous_cluster" ? Provenance::AnomalousCluster
                      : prov == "seed_expansion"  ? Provenance::SeedExpansion
                                                  : Provenance::ZScore;
    item.review_state = parse_review_state(j.value("review_state", std::string("pending")));
    if (j.contains("reviewer") && !j["reviewer"].is_null()) item.reviewer = j["reviewer"].get<std::string>();
    if (j.contains("timestamp") && !j["timestamp"].is_null()) item.timestamp = j["timestamp"].get<std::string>();
    item.representatives = j.value("representatives", std::vector<std::string>{});
    item.members = j.value("members", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("triage item: ") + e.what());
  }
  return item;
}

}  // namespace layoutspace::discovery
