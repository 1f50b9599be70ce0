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

#include "layoutspace/cluster/model.hpp"

#include "layoutspace/cluster/metrics.hpp"
#include "layoutspace/core/error.hpp"
#include "layoutspace/core/rng.hpp"
#include "layoutspace/core/vector_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace layoutspace::cluster {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Silhouette of the listed rows against every non-noise sample.
double mean_silhouette_of_rows(const Matrix& prepared, const std::vector<int>& labels,
                               const std::vector<std::size_t>& rows, DistanceMetric metric) {
  std::map<int, int> index;
  for (int y : labels) {
    if (y != kNoise) index.emplace(y, 0);
  }
  if (index.size() < 2) return 0.0;
  int next = 0;
  for (auto& [label, id] : index) id = next++;
  std::vector<int> sizes(index.size(), 0);
  for (int y : labels) {
    if (y != kNoise) ++sizes[static_cast<std::size_t>(index.at(y))];
  }
  double total = 0.0;
  std::vector<double> sums(index.size());
  for (std::size_t i : rows) {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (j == i || labels[j] == kNoise) continue;
      sums[static_cast<std::size_t>(index.at(labels[j]))] +=
          prepared_distance(prepared.row(static_cast<Eigen::Index>(i)), prepared.row(static_cast<Eigen::Index>(j)), metric);
    }
    const auto own = static_cast<std::size_t>(index.at(labels[i]));
    if (sizes[own] < 2) continue;
    const double a = sums[own] / (sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < sizes.size(); ++c) {
      if (c != own) b = std::min(b, sums[c] / sizes[c]);
    }
    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return rows.empty() ? 0.0 : total / static_cast<double>(rows.size());
}

// Greedy k-means++: each step draws 2 + ln(k) cost-weighted candidates and
// keeps the one that lowers the total cost most.
std::vector<std::size_t> pick_plusplus(const Matrix& prepared, std::size_t k, DistanceMetric metric, Rng& rng) {
  const std::size_t n = static_cast<std::size_t>(prepared.rows());
  const std::size_t trials = 2 + static_cast<std::size_t>(std::log(static_cast<double>(k)));
  std::vector<std::size_t> chosen;
  chosen.push_back(static_cast<std::size_t>(rng.index(n)));
  std::vector<double> best(n);
  double total = 0.0;
  {
    const RowVector c = prepared.row(static_cast<Eigen::Index>(chosen.back()));
    for (std::size_t i = 0; i < n; ++i) {
      best[i] = kmeans_cost(prepared.row(static_cast<Eigen::Index>(i)), c, metric);
      total += best[i];
    }
  }
  std::vector<double> trial(n);
  std::vector<double> winner(n);
  while (chosen.size() < k) {
    if (!(total > 0.0)) {
      // All remaining points coincide with a chosen seed; take the first unused row.
      std::size_t pick = n;
      for (std::size_t i = 0; i < n && pick == n; ++i) {
        if (std::find(chosen.begin(), chosen.end(), i) == chosen.end()) pick = i;
      }
      chosen.push_back(pick);
      continue;
    }
    std::size_t pick = n;
    double pick_total = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < trials; ++t) {
      double target = rng.uniform() * total;
      std::size_t cand = n;
      for (std::size_t i = 0; i < n; ++i) {
        target -= best[i];
        if (target < 0.0 && best[i] > 0.0) {
          cand = i;
          break;
        }
      }
      if (cand == n) {
        for (std::size_t i = n; i-- > 0;) {
          if (best[i] > 0.0) {
            cand = i;
            break;
          }
        }
      }
      const RowVector c = prepared.row(static_cast<Eigen::Index>(cand));
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        trial[i] = std::min(best[i], kmeans_cost(prepared.row(static_cast<Eigen::Index>(i)), c, metric));
        sum += trial[i];
      }
      if (sum < pick_total) {
        pick_total = sum;
        pick = cand;
        winner.swap(trial);
      }
    }
    chosen.push_back(pick);
    best.swap(winner);
    total = pick_total;
  }
  return chosen;
}

}  // namespace

std::size_t ClusterModel::row_of(int cluster_id) const {
  const auto it = std::lower_bound(cluster_ids.begin(), cluster_ids.end(), cluster_id);
  if (it == cluster_ids.end() || *it != cluster_id) {
    throw Error(Errc::UnknownCluster, "unknown cluster " + std::to_string(cluster_id));
  }
  return static_cast<std::size_t>(it - cluster_ids.begin());
}

bool ClusterModel::has_cluster(int cluster_id) const {
  return std::binary_search(cluster_ids.begin(), cluster_ids.end(), cluster_id);
}

std::vector<std::size_t> ClusterModel::members(int cluster_id) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] == cluster_id) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> ClusterModel::noise() const { return members(kNoise); }

double ClusterModel::zscore(std::size_t sample) const {
  if (assignment[sample] == kNoise) return kNaN;
  const auto& s = stats[row_of(assignment[sample])];
  if (!(s.sigma > 0.0)) return 0.0;
  return (centroid_distance[sample] - s.mu) / s.sigma;
}

double kmeans_cost(const RowRef& point, const RowRef& reference, DistanceMetric metric) {
  if (metric == DistanceMetric::Cosine) return prepared_distance(point, reference, metric);
  return (point - reference).squaredNorm();
}

void recompute(ClusterModel& model, const Matrix& prepared) {
  std::vector<int> ids;
  for (int a : model.assignment) {
    if (a != kNoise) ids.push_back(a);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  model.cluster_ids = ids;

  const Eigen::Index dim = prepared.cols();
  model.centroids = Matrix::Zero(static_cast<Eigen::Index>(ids.size()), dim);
  model.stats.assign(ids.size(), ClusterStats{});
  std::vector<std::size_t> counts(ids.size(), 0);
  for (std::size_t i = 0; i < model.assignment.size(); ++i) {
    if (model.assignment[i] == kNoise) continue;
    const std::size_t r = model.row_of(model.assignment[i]);
    model.centroids.row(static_cast<Eigen::Index>(r)) += prepared.row(static_cast<Eigen::Index>(i));
    ++counts[r];
  }
  std::vector<RowVector> refs;
  for (std::size_t r = 0; r < ids.size(); ++r) {
    model.centroids.row(static_cast<Eigen::Index>(r)) /= static_cast<double>(counts[r]);
    refs.push_back(reference_point(model.centroids.row(static_cast<Eigen::Index>(r)), model.metric));
    model.stats[r].id = ids[r];
    model.stats[r].size = counts[r];
  }

  model.centroid_distance.assign(model.assignment.size(), kNaN);
  std::vector<double> sum(ids.size(), 0.0);
  std::vector<double> sum_sq(ids.size(), 0.0);
  model.inertia = 0.0;
  for (std::size_t i = 0; i < model.assignment.size(); ++i) {
    if (model.assignment[i] == kNoise) continue;
    const std::size_t r = model.row_of(model.assignment[i]);
    const auto row = prepared.row(static_cast<Eigen::Index>(i));
    const double d = prepared_distance(row, refs[r], model.metric);
    model.centroid_distance[i] = d;
    model.inertia += kmeans_cost(row, refs[r], model.metric);
    sum[r] += d;
  }
  for (std::size_t r = 0; r < ids.size(); ++r) model.stats[r].mu = sum[r] / static_cast<double>(counts[r]);
  for (std::size_t i = 0; i < model.assignment.size(); ++i) {
    if (model.assignment[i] == kNoise) continue;
    const std::size_t r = model.row_of(model.assignment[i]);
    const double dev = model.centroid_distance[i] - model.stats[r].mu;
    sum_sq[r] += dev * dev;
  }
  for (std::size_t r = 0; r < ids.size(); ++r) {
    model.stats[r].sigma = std::sqrt(sum_sq[r] / static_cast<double>(counts[r]));
  }
}

void check_fresh(const ClusterModel& model, const PointSet& set) {
  if (model.fingerprint != set.fingerprint() || model.assignment.size() != set.size()) {
    throw Error(Errc::StaleModel, "cluster model was fit on a different snapshot");
  }
}

void bind(ClusterModel& model, const PointSet& set) {
  check_fresh(model, set);
  recompute(model, prepare_points(set.points, model.metric));
}

namespace {

ClusterModel lloyd(const PointSet& set, const Matrix& prepared, const KMeansParams& params, std::size_t run,
                   const std::function<bool(std::size_t)>& tick) {
  const std::size_t n = set.size();
  Rng rng(derive_seed(params.rng_seed, 21 + run));
  const std::size_t k = params.k;

  Matrix centers(static_cast<Eigen::Index>(k), prepared.cols());
  {
    const auto seeds = pick_plusplus(prepared, k, params.metric, rng);
    for (std::size_t c = 0; c < k; ++c) centers.row(static_cast<Eigen::Index>(c)) = prepared.row(static_cast<Eigen::Index>(seeds[c]));
  }

  ClusterModel model;
  model.metric = params.metric;
  model.rng_seed = params.rng_seed;
  model.snapshot_version = set.snapshot_version;
  model.fingerprint = set.fingerprint();
  model.sample_ids = set.ids;
  model.assignment.assign(n, 0);

  std::vector<double> cost(n, 0.0);
  auto assign = [&]() {
    std::vector<RowVector> refs;
    for (std::size_t c = 0; c < k; ++c) {
      const auto row = centers.row(static_cast<Eigen::Index>(c));
      refs.push_back(params.metric == DistanceMetric::Cosine && row.norm() < 1e-30 ? RowVector(row)
                                                                                  : reference_point(row, params.metric));
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto x = prepared.row(static_cast<Eigen::Index>(i));
      std::size_t best = 0;
      double best_cost = kmeans_cost(x, refs[0], params.metric);
      for (std::size_t c = 1; c < k; ++c) {
        const double v = kmeans_cost(x, refs[c], params.metric);
        if (v < best_cost) {
          best_cost = v;
          best = c;
        }
      }
      model.assignment[i] = static_cast<int>(best);
      cost[i] = best_cost;
    }
    // Reseed empty clusters with the point farthest from its centroid.
    std::vector<std::size_t> sizes(k, 0);
    for (int a : model.assignment) ++sizes[static_cast<std::size_t>(a)];
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] > 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[static_cast<std::size_t>(model.assignment[i])] < 2) continue;
        if (far == n || cost[i] > cost[far]) far = i;
      }
      if (far == n) break;
      --sizes[static_cast<std::size_t>(model.assignment[far])];
      model.assignment[far] = static_cast<int>(c);
      ++sizes[c];
      centers.row(static_cast<Eigen::Index>(c)) = prepared.row(static_cast<Eigen::Index>(far));
      cost[far] = 0.0;
    }
    double total = 0.0;
    for (double v : cost) total += v;
    model.inertia_trace.push_back(total);
  };
  auto update = [&]() {
    Matrix next = Matrix::Zero(static_cast<Eigen::Index>(k), prepared.cols());
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      next.row(model.assignment[i]) += prepared.row(static_cast<Eigen::Index>(i));
      ++sizes[static_cast<std::size_t>(model.assignment[i])];
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] == 0) {
        next.row(static_cast<Eigen::Index>(c)) = centers.row(static_cast<Eigen::Index>(c));
        continue;
      }
      next.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(sizes[c]);
      shift = std::max(shift, (next.row(static_cast<Eigen::Index>(c)) - centers.row(static_cast<Eigen::Index>(c))).norm());
    }
    centers = std::move(next);
    return shift;
  };

  for (std::size_t iter = 0; iter < params.max_iter; ++iter) {
    assign();
    const double shift = update();
    model.iterations = iter + 1;
    if (tick && !tick(iter + 1)) throw Error(Errc::Canceled, "k-means canceled");
    if (shift < params.tol) break;
  }
  assign();
  recompute(model, prepared);
  return model;
}

}  // namespace

ClusterModel kmeans(const PointSet& set, const KMeansParams& params, const std::function<bool(double)>& progress) {
  const std::size_t n = set.size();
  if (params.k < 1) throw Error(Errc::InvalidArgument, "k must be positive");
  if (params.k > n) {
    throw Error(Errc::KTooLarge, "k = " + std::to_string(params.k) + " exceeds " + std::to_string(n) + " points");
  }
  const std::size_t runs = std::max<std::size_t>(1, params.n_init);
  const Matrix prepared = prepare_points(set.points, params.metric);
  std::optional<ClusterModel> best;
  for (std::size_t run = 0; run < runs; ++run) {
    auto tick = [&](std::size_t iter) {
      if (!progress) return true;
      const double within = static_cast<double>(iter) / static_cast<double>(std::max<std::size_t>(1, params.max_iter));
      return progress((static_cast<double>(run) + within) / static_cast<double>(runs));
    };
    ClusterModel m = lloyd(set, prepared, params, run, tick);
    if (!best || m.inertia < best->inertia) best = std::move(m);
  }
  return std::move(*best);
}

SelectKResult select_k(const PointSet& set, std::size_t k_lo, std::size_t k_hi, std::uint64_t rng_seed,
                       DistanceMetric metric, std::size_t sample_size, const std::function<bool(double)>& progress) {
  const std::size_t n = set.size();
  if (k_lo < 2 || k_hi < k_lo || k_hi + 1 > n) {
    throw Error(Errc::KTooLarge, "k range must lie within [2, N-1]");
  }
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  if (sample_size > 0 && sample_size < n) {
    Rng rng(derive_seed(rng_seed, 31));
    rng.shuffle(rows);
    rows.resize(sample_size);
    std::sort(rows.begin(), rows.end());
  }
  Matrix sub(static_cast<Eigen::Index>(rows.size()), set.points.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) sub.row(static_cast<Eigen::Index>(i)) = set.points.row(static_cast<Eigen::Index>(rows[i]));

  SelectKResult out;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = k_lo; k <= k_hi; ++k) {
    KMeansParams p;
    p.k = k;
    p.rng_seed = rng_seed;
    p.metric = metric;
    const ClusterModel m = kmeans(set, p);
    std::vector<int> labels;
    for (std::size_t r : rows) labels.push_back(m.assignment[r]);
    double score = 0.0;
    int distinct = 0;
    compact_labels(labels, &distinct);
    if (distinct >= 2) score = mean(silhouette_samples(sub, labels, metric));
    out.silhouettes.emplace_back(k, score);
    if (score > best) {
      best = score;
      out.k = k;
    }
    if (progress && !progress(static_cast<double>(k - k_lo + 1) / static_cast<double>(k_hi - k_lo + 1))) {
      throw Error(Errc::Canceled, "k selection canceled");
    }
  }
  return out;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw Error(Errc::EmptySet, "percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = p / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

json to_json(const RefineOp& op) {
  switch (op.kind) {
    case RefineOp::Kind::Split: return {{"op", "split"}, {"cluster", op.cluster}};
    case RefineOp::Kind::Merge: return {{"op", "merge"}, {"cluster", op.cluster}, {"other", op.other}};
    case RefineOp::Kind::RemoveOutliers: {
      json j{{"op", "remove_outliers"}, {"z_max", op.value}};
      if (op.cluster >= 0) j["cluster"] = op.cluster;
      return j;
    }
    case RefineOp::Kind::Trim: {
      json j{{"op", "trim"}, {"percentile", op.value}};
      if (op.cluster >= 0) j["cluster"] = op.cluster;
      return j;
    }
  }
  return {};
}

RefineOp refine_op_from_json(const json& j) {
  const std::string name = j.at("op").get<std::string>();
  if (name == "split") return RefineOp::split(j.at("cluster").get<int>());
  if (name == "merge") return RefineOp::merge(j.at("cluster").get<int>(), j.at("other").get<int>());
  if (name == "remove_outliers") return RefineOp::remove_outliers(j.at("z_max").get<double>(), j.value("cluster", -1));
  if (name == "trim") return RefineOp::trim(j.at("percentile").get<double>(), j.value("cluster", -1));
  throw Error(Errc::InvalidArgument, "unknown refinement op '" + name + "'");
}

ClusterModel refine_clusters(const ClusterModel& model, const PointSet& set, std::span<const RefineOp> ops) {
  check_fresh(model, set);
  const Matrix prepared = prepare_points(set.points, model.metric);
  ClusterModel out = model;
  out.parent_version = model.version;
  out.version = model.version + 1;
  out.inertia_trace.clear();

  for (std::size_t op_index = 0; op_index < ops.size(); ++op_index) {
    const RefineOp& op = ops[op_index];
    json entry = to_json(op);
    entry["model_version"] = out.version;
    switch (op.kind) {
      case RefineOp::Kind::Split: {
        const auto members = out.members(op.cluster);
        if (members.empty()) throw Error(Errc::UnknownCluster, "unknown cluster " + std::to_string(op.cluster));
        if (members.size() < 2) {
          entry["applied"] = false;
          entry["reason"] = "cluster has fewer than two members";
          break;
        }
        PointSet sub;
        sub.points.resize(static_cast<Eigen::Index>(members.size()), set.points.cols());
        for (std::size_t i = 0; i < members.size(); ++i) {
          sub.ids.push_back(set.ids[members[i]]);
          sub.points.row(static_cast<Eigen::Index>(i)) = set.points.row(static_cast<Eigen::Index>(members[i]));
        }
        KMeansParams p;
        p.k = 2;
        p.metric = out.metric;
        p.rng_seed = derive_seed(out.rng_seed, out.version * 1000 + op_index);
        const ClusterModel halves = kmeans(sub, p);

        const int new_id = out.cluster_ids.empty() ? 0 : out.cluster_ids.back() + 1;
        std::vector<int> candidate = out.assignment;
        for (std::size_t i = 0; i < members.size(); ++i) {
          if (halves.assignment[i] == 1) candidate[members[i]] = new_id;
        }
        const double before = mean_silhouette_of_rows(prepared, out.assignment, members, out.metric);
        const double after = mean_silhouette_of_rows(prepared, candidate, members, out.metric);
        entry["silhouette_before"] = before;
        entry["silhouette_after"] = after;
        if (after > before) {
          out.assignment = std::move(candidate);
          entry["applied"] = true;
          entry["new_cluster"] = new_id;
        } else {
          entry["applied"] = false;
          entry["reason"] = "split does not improve silhouette";
        }
        break;
      }
      case RefineOp::Kind::Merge: {
        if (op.cluster == op.other) throw Error(Errc::InvalidArgument, "cannot merge a cluster with itself");
        out.row_of(op.cluster);
        out.row_of(op.other);
        std::size_t moved = 0;
        for (int& a : out.assignment) {
          if (a == op.other) {
            a = op.cluster;
            ++moved;
          }
        }
        entry["applied"] = true;
        entry["moved"] = moved;
        break;
      }
      case RefineOp::Kind::RemoveOutliers:
      case RefineOp::Kind::Trim: {
        if (op.cluster >= 0) out.row_of(op.cluster);
        if (op.kind == RefineOp::Kind::Trim && !(op.value >= 0.0 && op.value <= 100.0)) {
          throw Error(Errc::InvalidPercentile, "percentile must lie in [0, 100]");
        }
        std::vector<std::size_t> removed;
        for (int id : out.cluster_ids) {
          if (op.cluster >= 0 && id != op.cluster) continue;
          const auto members = out.members(id);
          if (op.kind == RefineOp::Kind::RemoveOutliers) {
            for (std::size_t m : members) {
              if (out.zscore(m) > op.value) removed.push_back(m);
            }
          } else {
            std::vector<double> d;
            for (std::size_t m : members) d.push_back(out.centroid_distance[m]);
            const double cut = percentile(d, op.value);
            for (std::size_t m : members) {
              if (out.centroid_distance[m] > cut) removed.push_back(m);
            }
          }
        }
        for (std::size_t m : removed) out.assignment[m] = kNoise;
        entry["applied"] = true;
        entry["moved_to_noise"] = removed.size();
        break;
      }
    }
    recompute(out, prepared);
    entry["k"] = out.k();
    out.log.push_back(std::move(entry));
  }
  return out;
}

json model_summary(const ClusterModel& model) {
  json clusters = json::array();
  for (const auto& s : model.stats) {
    clusters.push_back({{"id", s.id}, {"size", s.size}, {"mu", s.mu}, {"sigma", s.sigma}});
  }
  return {{"version", model.version},
          {"parent_version", model.parent_version},
          {"snapshot_version", model.snapshot_version},
          {"metric", std::string(to_string(model.metric))},
          {"k", model.k()},
          {"inertia", model.inertia},
          {"noise", model.noise().size()},
          {"clusters", clusters},
          {"log", model.log}};
}

json to_json(const ClusterModel& model) {
  json j = model_summary(model);
  j["fingerprint"] = model.fingerprint;
  j["rng_seed"] = model.rng_seed;
  j["iterations"] = model.iterations;
  j["inertia_trace"] = model.inertia_trace;
  j["sample_ids"] = model.sample_ids;
  j["assignment"] = model.assignment;
  j["cluster_ids"] = model.cluster_ids;
  json centroids = json::array();
  for (Eigen::Index r = 0; r < model.centroids.rows(); ++r) {
    centroids.push_back(std::vector<double>(model.centroids.row(r).begin(), model.centroids.row(r).end()));
  }
  j["centroids"] = centroids;
  return j;
}

ClusterModel cluster_model_from_json(const json& j) {
  ClusterModel m;
  m.version = j.at("version").get<std::uint64_t>();
  m.parent_version = j.value("parent_version", std::uint64_t{0});
  m.snapshot_version = j.at("snapshot_version").get<std::uint64_t>();
  m.fingerprint = j.at("fingerprint").get<std::uint64_t>();
  m.metric = parse_metric(j.at("metric").get<std::string>());
  m.rng_seed = j.value("rng_seed", std::uint64_t{0});
  m.iterations = j.value("iterations", std::size_t{0});
  m.inertia_trace = j.value("inertia_trace", std::vector<double>{});
  m.sample_ids = j.at("sample_ids").get<std::vector<std::string>>();
  m.assignment = j.at("assignment").get<std::vector<int>>();
  m.log = j.value("log", std::vector<json>{});
  const auto rows = j.at("centroids").get<std::vector<std::vector<double>>>();
  // Everything else is derived; rebuild it from the stored centroids' space.
  m.cluster_ids = j.at("cluster_ids").get<std::vector<int>>();
  if (!rows.empty()) {
    m.centroids.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < rows[r].size(); ++c) m.centroids(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  for (const auto& s : j.at("clusters")) {
    m.stats.push_back({s.at("id").get<int>(), s.at("size").get<std::size_t>(), s.at("mu").get<double>(),
                       s.at("sigma").get<double>()});
  }
  m.inertia = j.at("inertia").get<double>();
  return m;
}

}  // namespace layoutspace::cluster
