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

#include <doctest.h>

#include "layoutspace/cluster/export.hpp"
#include "layoutspace/cluster/metrics.hpp"
#include "layoutspace/cluster/model.hpp"
#include "layoutspace/cluster/tsne.hpp"
#include "layoutspace/core/error.hpp"
#include "layoutspace/core/vector_ops.hpp"
#include "layoutspace/oracle/oracles.hpp"

#include "helpers.hpp"

#include <json.hpp>

#include <cmath>
#include <map>
#include <sstream>

using namespace layoutspace;
using namespace layoutspace::cluster;

namespace {

double purity(const std::vector<int>& assignment, const std::vector<int>& truth) {
  std::map<int, std::map<int, int>> table;
  for (std::size_t i = 0; i < truth.size(); ++i) ++table[assignment[i]][truth[i]];
  int agree = 0;
  for (const auto& [_, row] : table) {
    int best = 0;
    for (const auto& [__, n] : row) best = std::max(best, n);
    agree += best;
  }
  return static_cast<double>(agree) / static_cast<double>(truth.size());
}

Matrix random_orthogonal(Eigen::Index d, Rng& rng) {
  const Matrix a = testing::random_matrix(d, d, rng);
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ();
}

void check_centroids_are_means(const ClusterModel& m, const PointSet& set) {
  const Matrix prepared = prepare_points(set.points, m.metric);
  for (std::size_t r = 0; r < m.cluster_ids.size(); ++r) {
    const auto members = m.members(m.cluster_ids[r]);
    const RowVector mean = mean_of_rows(prepared, members);
    CHECK((mean - m.centroids.row(static_cast<Eigen::Index>(r))).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

KMeansParams kparams(std::size_t k, std::uint64_t seed, DistanceMetric metric = DistanceMetric::Euclidean) {
  KMeansParams p;
  p.k = k;
  p.rng_seed = seed;
  p.metric = metric;
  return p;
}

}  // namespace

TEST_CASE("silhouette and DBI fixtures") {
  const std::vector<int> labels{0, 0, 1, 1};
  const auto m = labeled_metrics(oracle::two_pair_fixture(), labels, DistanceMetric::Euclidean);
  const double b = (10.0 + std::sqrt(101.0)) / 2.0;
  CHECK(m.per_sample_silhouette[0] == doctest::Approx((b - 1.0) / b).epsilon(1e-12));
  CHECK(std::abs(m.silhouette_mean - 0.900) <= 1e-3);
  const auto d = labeled_metrics(oracle::two_blob_fixture(), labels, DistanceMetric::Euclidean);
  CHECK(std::abs(d.dbi - 0.2) <= 1e-9);

  Matrix same(4, 2);
  same << 0, 0, 0, 1, 0, 0, 0, 1;
  CHECK_ERRC(labeled_metrics(same, labels, DistanceMetric::Euclidean), Errc::DegenerateCentroids);
  const auto s = silhouette_samples(same, labels, DistanceMetric::Euclidean);
  CHECK(mean(s) <= 0.0);

  const std::vector<int> single{0, 0, 0, 0};
  CHECK_ERRC(labeled_metrics(same, single, DistanceMetric::Euclidean), Errc::TooFewClasses);
  const std::vector<int> short_labels{0, 1};
  CHECK_ERRC(labeled_metrics(same, short_labels, DistanceMetric::Euclidean), Errc::ShapeMismatch);
}

TEST_CASE("labeled metrics agree with the brute-force oracle") {
  const auto r = oracle::check_labeled_metrics(123, 20, 60);
  CHECK(r.sets == 20);
  CHECK(r.worst <= 1e-9);
}

TEST_CASE("labeled metrics ranges and singleton convention") {
  Rng rng(4);
  for (int t = 0; t < 30; ++t) {
    const Matrix pts = testing::random_matrix(25, 3, rng);
    std::vector<int> labels;
    for (int i = 0; i < 25; ++i) labels.push_back(static_cast<int>(rng.index(4)));
    labels[0] = 99;  // singleton
    const auto m = labeled_metrics(pts, labels, DistanceMetric::Cosine);
    CHECK(m.per_sample_silhouette[0] == 0.0);
    for (double s : m.per_sample_silhouette) {
      CHECK(s >= -1.0);
      CHECK(s <= 1.0);
    }
    CHECK(m.dbi >= 0.0);
  }
}

TEST_CASE("silhouette is invariant under euclidean isometries") {
  Rng rng(5);
  for (int t = 0; t < 40; ++t) {
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(rng.index(6));
    const Matrix pts = testing::random_matrix(30, d, rng);
    std::vector<int> labels;
    for (int i = 0; i < 30; ++i) labels.push_back(static_cast<int>(rng.index(3)));
    const Matrix q = random_orthogonal(d, rng);
    RowVector shift(d);
    for (Eigen::Index j = 0; j < d; ++j) shift(j) = 10 * rng.normal();
    const Matrix moved = (pts * q).rowwise() + shift;
    const auto a = labeled_metrics(pts, labels, DistanceMetric::Euclidean);
    const auto b = labeled_metrics(moved, labels, DistanceMetric::Euclidean);
    CHECK(std::abs(a.silhouette_mean - b.silhouette_mean) <= 1e-9);
    CHECK(std::abs(a.dbi - b.dbi) <= 1e-9);
  }
}

TEST_CASE("k-means basics") {
  Rng rng(6);
  Matrix distinct = testing::random_matrix(6, 3, rng);
  const auto own = kmeans(testing::point_set(distinct), kparams(6, 1));
  CHECK(own.inertia == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(own.k() == 6);
  CHECK_ERRC(kmeans(testing::point_set(distinct), kparams(7, 1)), Errc::KTooLarge);
  CHECK_ERRC(kmeans(testing::point_set(distinct), kparams(0, 1)), Errc::InvalidArgument);

  Matrix centers(2, 4);
  centers << 0, 0, 0, 0, 10, 10, 10, 10;
  std::vector<int> truth;
  const Matrix blobs = testing::gaussian_blobs(centers, 50, 1.0, rng, &truth);
  const auto set = testing::point_set(blobs);
  const auto m = kmeans(set, kparams(2, 3));
  CHECK(purity(m.assignment, truth) == 1.0);
  const auto again = kmeans(set, kparams(2, 3));
  CHECK(again.assignment == m.assignment);
  CHECK(nlohmann::json(to_json(again)).dump() == nlohmann::json(to_json(m)).dump());
  check_centroids_are_means(m, set);
  for (std::size_t i = 1; i < m.inertia_trace.size(); ++i) CHECK(m.inertia_trace[i] <= m.inertia_trace[i - 1]);

  const auto cos = kmeans(set, kparams(3, 3, DistanceMetric::Cosine));
  check_centroids_are_means(cos, set);
  for (const auto& s : cos.stats) CHECK(s.sigma >= 0.0);
}

TEST_CASE("k-means cancellation") {
  Rng rng(7);
  const auto set = testing::point_set(testing::random_matrix(200, 3, rng));
  CHECK_ERRC(kmeans(set, kparams(5, 1), [](double) { return false; }), Errc::Canceled);
}

TEST_CASE("select_k") {
  Rng rng(8);
  Matrix centers(3, 2);
  centers << 0, 0, 20, 0, 0, 20;
  const auto set = testing::point_set(testing::gaussian_blobs(centers, 30, 1.0, rng, nullptr));
  const auto r = select_k(set, 2, 6, 1, DistanceMetric::Euclidean);
  CHECK(r.k == 3);
  CHECK(r.silhouettes.size() == 5);
  CHECK(select_k(set, 4, 4, 1, DistanceMetric::Euclidean).k == 4);

  Matrix one(1, 2);
  one << 0, 0;
  const auto blob = testing::point_set(testing::gaussian_blobs(one, 60, 1.0, rng, nullptr));
  const auto single = select_k(blob, 2, 4, 1, DistanceMetric::Euclidean);
  double best = -1;
  for (const auto& [k, s] : single.silhouettes) best = std::max(best, s);
  double separated = -1;
  for (const auto& [k, s] : r.silhouettes) separated = std::max(separated, s);
  CHECK(best <= separated);
  CHECK_ERRC(select_k(set, 1, 3, 1), Errc::KTooLarge);
}

TEST_CASE("t-SNE") {
  Rng rng(9);
  Matrix centers = Matrix::Zero(3, 10);
  centers(0, 0) = 30;
  centers(1, 1) = 30;
  centers(2, 2) = 30;
  std::vector<int> truth;
  Matrix pts = testing::gaussian_blobs(centers, 40, 1.0, rng, &truth);
  pts.row(1) = pts.row(0);
  const auto set = testing::point_set(pts);
  TsneParams p;
  p.iterations = 500;
  p.perplexity = 15;
  p.rng_seed = 4;
  p.metric = DistanceMetric::Euclidean;
  const auto a = tsne_project(set, p);
  const auto b = tsne_project(set, p);
  CHECK(a.coordinates == b.coordinates);
  CHECK(a.coordinates.allFinite());
  CHECK(a.kl_divergence >= 0.0);
  const double dup = (a.coordinates.row(0) - a.coordinates.row(1)).norm();
  int closer = 0;
  for (Eigen::Index i = 2; i < a.coordinates.rows(); ++i) closer += (a.coordinates.row(0) - a.coordinates.row(i)).norm() < dup;
  CHECK(closer <= 3);

  const auto flat = kmeans(testing::point_set(a.coordinates), kparams(3, 1));
  CHECK(purity(flat.assignment, truth) >= 0.95);

  const auto back = projection_from_json(to_json(a));
  CHECK(back.coordinates == a.coordinates);
  CHECK(back.sample_ids == a.sample_ids);

  p.perplexity = 41;
  CHECK_ERRC(tsne_project(set, p), Errc::PerplexityTooLarge);
}

TEST_CASE("t-SNE Barnes-Hut path") {
  Rng rng(10);
  Matrix centers = Matrix::Zero(2, 5);
  centers(1, 0) = 20;
  std::vector<int> truth;
  const auto set = testing::point_set(testing::gaussian_blobs(centers, 60, 1.0, rng, &truth));
  TsneParams p;
  p.iterations = 1000;
  p.perplexity = 10;
  p.exact_max_points = 50;
  p.metric = DistanceMetric::Euclidean;
  const auto r = tsne_project(set, p);
  CHECK(r.barnes_hut);
  CHECK(r.coordinates.allFinite());
  const auto flat = kmeans(testing::point_set(r.coordinates), kparams(2, 1));
  CHECK(purity(flat.assignment, truth) >= 0.95);
}

TEST_CASE("refinement") {
  Rng rng(11);
  Matrix centers(3, 2);
  centers << 0, 0, 30, 0, 34, 0;
  std::vector<int> truth;
  const auto set = testing::point_set(testing::gaussian_blobs(centers, 30, 0.5, rng, &truth));
  const auto base = kmeans(set, kparams(2, 2));
  CHECK(base.version == 1);

  SUBCASE("trim 100 removes nothing") {
    const RefineOp ops[] = {RefineOp::trim(100)};
    const auto r = refine_clusters(base, set, ops);
    CHECK(r.noise().empty());
    CHECK(r.assignment == base.assignment);
    CHECK(r.version == 2);
    CHECK(r.parent_version == 1);
    CHECK(r.log.size() == base.log.size() + 1);
  }

  SUBCASE("split recovers planted sub-blobs") {
    Matrix pair(2, 2);
    pair << 0, 0, 6, 0;
    std::vector<int> halves;
    const auto joined = testing::point_set(testing::gaussian_blobs(pair, 25, 0.5, rng, &halves));
    const auto one = kmeans(joined, kparams(1, 2));
    const RefineOp ops[] = {RefineOp::split(0)};
    const auto r = refine_clusters(one, joined, ops);
    CHECK(r.k() == 2);
    CHECK(r.cluster_ids == std::vector<int>{0, 1});
    CHECK(purity(r.assignment, halves) == 1.0);
    CHECK(r.log.back().at("applied") == true);
    check_centroids_are_means(r, joined);
  }

  SUBCASE("split that lowers silhouette is declined") {
    const int joint = base.assignment[40];
    const RefineOp ops[] = {RefineOp::split(joint)};
    const auto r = refine_clusters(base, set, ops);
    CHECK(r.assignment == base.assignment);
    CHECK(r.log.back().at("applied") == false);
    CHECK(r.version == 2);
  }

  SUBCASE("merge yields the weighted mean of old centroids") {
    const auto three = kmeans(set, kparams(3, 2));
    const int a = three.cluster_ids[0], b = three.cluster_ids[1];
    const double na = static_cast<double>(three.stats[0].size), nb = static_cast<double>(three.stats[1].size);
    const RowVector expected = (na * three.centroids.row(0) + nb * three.centroids.row(1)) / (na + nb);
    const RefineOp ops[] = {RefineOp::merge(a, b)};
    const auto r = refine_clusters(three, set, ops);
    CHECK(r.k() == 2);
    CHECK((r.centroids.row(static_cast<Eigen::Index>(r.row_of(a))) - expected).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK_FALSE(r.has_cluster(b));
  }

  SUBCASE("samples are conserved and centroids stay means") {
    const RefineOp ops[] = {RefineOp::remove_outliers(1.0), RefineOp::trim(80, base.cluster_ids[0]),
                            RefineOp::split(base.cluster_ids[1])};
    const auto r = refine_clusters(base, set, ops);
    std::size_t assigned = 0;
    for (int c : r.cluster_ids) assigned += r.members(c).size();
    CHECK(assigned + r.noise().size() == set.size());
    CHECK_FALSE(r.noise().empty());
    check_centroids_are_means(r, set);
    for (std::size_t i : r.noise()) CHECK(std::isnan(r.centroid_distance[i]));
  }

  SUBCASE("errors") {
    const RefineOp bad_pct[] = {RefineOp::trim(101)};
    CHECK_ERRC(refine_clusters(base, set, bad_pct), Errc::InvalidPercentile);
    const RefineOp unknown[] = {RefineOp::split(42)};
    CHECK_ERRC(refine_clusters(base, set, unknown), Errc::UnknownCluster);
    const RefineOp self[] = {RefineOp::merge(0, 0)};
    CHECK_ERRC(refine_clusters(base, set, self), Errc::InvalidArgument);
    auto other = set;
    other.snapshot_version = 9;
    const RefineOp ok[] = {RefineOp::trim(50)};
    CHECK_ERRC(refine_clusters(base, other, ok), Errc::StaleModel);
  }
}

TEST_CASE("refine ops serialize") {
  for (const auto& op : {RefineOp::split(3), RefineOp::merge(1, 2), RefineOp::remove_outliers(2.5, 4),
                         RefineOp::trim(90)}) {
    const auto back = refine_op_from_json(to_json(op));
    CHECK(back.kind == op.kind);
    CHECK(back.cluster == op.cluster);
    CHECK(back.other == op.other);
    CHECK(back.value == op.value);
  }
  CHECK_ERRC(refine_op_from_json(nlohmann::json{{"op", "explode"}}), Errc::InvalidArgument);
}

TEST_CASE("z-score convention and model round trip") {
  Matrix pts(5, 2);
  pts << 0, 0, 1, 0, 2, 0, 10, 10, 10, 10;
  const auto set = testing::point_set(pts);
  const auto m = kmeans(set, kparams(2, 1));
  const int pair = m.assignment[3];
  for (std::size_t i : m.members(pair)) CHECK(m.zscore(i) == 0.0);
  const int line = m.assignment[0];
  CHECK(m.zscore(1) == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-9));
  CHECK(m.assignment[1] == line);

  auto back = cluster_model_from_json(to_json(m));
  bind(back, set);
  CHECK(back.assignment == m.assignment);
  CHECK(back.centroids == m.centroids);
  CHECK(nlohmann::json(to_json(back)).dump() == nlohmann::json(to_json(m)).dump());
  auto other = set;
  other.ids[0] = "renamed";
  CHECK_ERRC(bind(back, other), Errc::StaleModel);
}

TEST_CASE("percentile") {
  CHECK(percentile({1, 2, 3, 4}, 0) == 1);
  CHECK(percentile({1, 2, 3, 4}, 100) == 4);
  CHECK(percentile({1, 2, 3, 4}, 50) == doctest::Approx(2.5));
  CHECK_ERRC(percentile({}, 50), Errc::EmptySet);
}

TEST_CASE("export rows") {
  Rng rng(12);
  const auto set = testing::point_set(testing::random_matrix(40, 3, rng));
  const auto m = kmeans(set, kparams(3, 1));
  TsneParams p;
  p.iterations = 100;
  p.perplexity = 5;
  const auto proj = tsne_project(set, p);
  std::istringstream lines(export_rows_jsonl(&m, &proj));
  std::size_t n = 0;
  for (std::string line; std::getline(lines, line); ++n) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.at("sample_id") == set.ids[n]);
    CHECK(j.at("cluster_id") == m.assignment[n]);
    CHECK(j.at("x").get<double>() == proj.coordinates(static_cast<Eigen::Index>(n), 0));
    CHECK(j.at("z").get<double>() == doctest::Approx(m.zscore(n)));
  }
  CHECK(n == 40);
  std::istringstream only(export_rows_jsonl(&m, nullptr));
  std::string first;
  std::getline(only, first);
  CHECK(nlohmann::json::parse(first).at("x").is_null());
}
