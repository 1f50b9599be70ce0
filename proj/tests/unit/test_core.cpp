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

#include "layoutspace/core/binary_io.hpp"
#include "layoutspace/core/config.hpp"
#include "layoutspace/core/error.hpp"
#include "layoutspace/core/point_set.hpp"
#include "layoutspace/core/rng.hpp"
#include "layoutspace/core/vector_ops.hpp"

#include "helpers.hpp"

#include <algorithm>
#include <cmath>

using namespace layoutspace;
using layoutspace::testing::TempDir;

TEST_CASE("l2_normalize") {
  const std::vector<double> a{3, 4};
  const auto n = l2_normalize(a);
  CHECK(n[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(n[1] == doctest::Approx(0.8).epsilon(1e-15));
  const std::vector<double> b{0, 7, 0};
  CHECK(l2_normalize(b) == std::vector<double>{0, 1, 0});
  const std::vector<double> z{0, 0};
  CHECK_ERRC(l2_normalize(z), Errc::ZeroVector);
}

TEST_CASE("cosine_similarity") {
  CHECK(cosine_similarity(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 0.0);
  CHECK(cosine_similarity(std::vector<double>{1, 1}, std::vector<double>{1, 0}) ==
        doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> v(1 + rng.index(20));
    for (auto& x : v) x = rng.normal() * std::exp(3 * rng.normal());
    if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0; })) continue;
    CHECK(cosine_similarity(v, v) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(cosine_similarity(v, l2_normalize(v)) - 1.0) <= 1e-9);
    std::vector<double> w(v.size());
    for (auto& x : w) x = rng.normal();
    const double c = cosine_similarity(v, w);
    CHECK(c >= -1.0);
    CHECK(c <= 1.0);
  }
}

TEST_CASE("pairwise_distances") {
  const auto one = testing::records_from(Matrix::Constant(1, 3, 2.0));
  CHECK(pairwise_distances(one, DistanceMetric::Euclidean).isZero());
  Matrix same(2, 2);
  same << 1, 2, 1, 2;
  CHECK(pairwise_distances(testing::records_from(same), DistanceMetric::Cosine).isZero());
  Matrix tri(2, 2);
  tri << 0, 0, 3, 4;
  const Matrix d = pairwise_distances(testing::records_from(tri), DistanceMetric::Euclidean);
  CHECK(d(0, 1) == 5.0);
  CHECK(d(1, 0) == 5.0);

  Rng rng(11);
  const Matrix pts = testing::random_matrix(30, 5, rng);
  const Matrix e = pairwise_distances(testing::records_from(pts), DistanceMetric::Euclidean);
  for (int i = 0; i < 30; ++i) {
    CHECK(e(i, i) == 0.0);
    for (int j = 0; j < 30; ++j) {
      CHECK(e(i, j) == e(j, i));
      for (int k = 0; k < 30; ++k) CHECK(e(i, k) <= e(i, j) + e(j, k) + 1e-12);
    }
  }
}

TEST_CASE("centroid") {
  CHECK(centroid({{1.5, -2}}) == std::vector<double>{1.5, -2});
  CHECK(centroid({{0, 0}, {2, 0}}) == std::vector<double>{1, 0});
  CHECK(centroid({{1, 1}, {3, 3}, {5, 5}}) == std::vector<double>{3, 3});
  CHECK_ERRC(centroid({}), Errc::EmptySet);
  CHECK_ERRC(centroid({{1, 2}, {1}}), Errc::DimensionMismatch);

  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    std::vector<std::vector<double>> s(2 + rng.index(8), std::vector<double>(3));
    for (auto& v : s) {
      for (auto& x : v) x = rng.normal();
    }
    const auto c = centroid(s);
    auto perm = s;
    rng.shuffle(perm);
    const auto cp = centroid(perm);
    const std::vector<double> shift{rng.normal(), rng.normal(), rng.normal()};
    auto moved = s;
    for (auto& v : moved) {
      for (int d = 0; d < 3; ++d) v[d] += shift[d];
    }
    const auto cm = centroid(moved);
    for (int d = 0; d < 3; ++d) {
      CHECK(cp[d] == doctest::Approx(c[d]).epsilon(1e-12));
      CHECK(cm[d] == doctest::Approx(c[d] + shift[d]).epsilon(1e-12));
    }
  }
}

TEST_CASE("to_matrix rejects mixed dimensions") {
  std::vector<EmbeddingRecord> r(2);
  r[0].sample_id = "a";
  r[0].vector = {1, 2};
  r[1].sample_id = "b";
  r[1].vector = {1};
  CHECK_ERRC(to_matrix(r), Errc::DimensionMismatch);
}

TEST_CASE("prepared distances agree with the plain definitions") {
  Rng rng(8);
  const Matrix pts = testing::random_matrix(10, 4, rng);
  for (auto metric : {DistanceMetric::Cosine, DistanceMetric::Euclidean}) {
    const Matrix p = prepare_points(pts, metric);
    for (int i = 0; i < 10; ++i) {
      for (int j = 0; j < 10; ++j) {
        std::vector<double> a(pts.row(i).data(), pts.row(i).data() + 4);
        std::vector<double> b(pts.row(j).data(), pts.row(j).data() + 4);
        CHECK(prepared_distance(p.row(i), p.row(j), metric) == doctest::Approx(distance(a, b, metric)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("error categories") {
  CHECK(errc_category(Errc::InvalidArgument) == ErrorCategory::Validation);
  CHECK(errc_category(Errc::UnknownModel) == ErrorCategory::Validation);
  CHECK(errc_category(Errc::DegenerateCentroids) == ErrorCategory::Computation);
  CHECK(errc_category(Errc::Canceled) == ErrorCategory::Computation);
  CHECK(errc_category(Errc::IoError) == ErrorCategory::Io);
  CHECK(errc_name(Errc::UnknownProjection) == "UnknownProjection");
  CHECK(errc_name(Errc::AlreadyReviewed) == "AlreadyReviewed");
}

TEST_CASE("rng streams are reproducible") {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.normal();
    CHECK(x == b.normal());
    differs = differs || x != c.normal();
    const auto k = a.index(7);
    CHECK(k == b.index(7));
    CHECK(k < 7);
    c.index(7);
  }
  CHECK(differs);
  CHECK(counter_uniform(1, 2, 3, 4) == counter_uniform(1, 2, 3, 4));
  CHECK(counter_uniform(1, 2, 3, 4) != counter_uniform(1, 2, 3, 5));
  double lo = 1, hi = 0;
  for (int i = 0; i < 1000; ++i) {
    const double u = counter_uniform(9, static_cast<std::uint64_t>(i), 0, 0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
}

TEST_CASE("little-endian helpers") {
  std::string buf;
  binio::put_le<std::uint32_t>(buf, 0x01020304u);
  CHECK(buf == std::string("\x04\x03\x02\x01", 4));
  binio::put_f32(buf, -1.5f);
  binio::put_f64(buf, 0.1);
  const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
  CHECK(binio::get_le<std::uint32_t>(p) == 0x01020304u);
  CHECK(binio::get_f32(p + 4) == -1.5f);
  CHECK(binio::get_f64(p + 8) == 0.1);
}

TEST_CASE("atomic file writes") {
  TempDir dir("core");
  const auto path = dir.str("x.bin");
  binio::write_file_atomic(path, "first");
  binio::write_file_atomic(path, "second");
  CHECK(binio::read_file(path) == "second");
  CHECK_ERRC(binio::read_file(dir.str("missing")), Errc::IoError);
}

TEST_CASE("config parsing") {
  const auto c = Config::parse(R"(# top
answer = 42
[graph]
k_neighbors = 7   # trailing
name = "a # b"
[train]
flag = true
)");
  CHECK(c.get_int("answer", 0) == 42);
  CHECK(c.get_size("graph.k_neighbors", 0) == 7);
  CHECK(c.get_string("graph.name", "") == "a # b");
  CHECK(c.get_bool("train.flag", false));
  CHECK(c.get_double("missing", 2.5) == 2.5);
  CHECK_ERRC(Config::parse("[broken\n"), Errc::ConfigError);
  CHECK_ERRC(Config::parse("novalue\n"), Errc::ConfigError);
  CHECK_ERRC(c.get_int("graph.name", 0), Errc::ConfigError);
  auto d = c;
  d.merge(Config::parse("answer = 1\n"));
  CHECK(d.get_int("answer", 0) == 1);
}

TEST_CASE("point set fingerprint tracks ids and version") {
  Rng rng(1);
  const auto a = testing::point_set(testing::random_matrix(5, 2, rng), 1);
  auto b = a;
  CHECK(a.fingerprint() == b.fingerprint());
  b.snapshot_version = 2;
  CHECK(a.fingerprint() != b.fingerprint());
  auto c = a;
  c.ids[0] = "other";
  CHECK(a.fingerprint() != c.fingerprint());
}
