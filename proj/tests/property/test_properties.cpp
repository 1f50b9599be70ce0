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

#include "layoutspace/cluster/model.hpp"
#include "layoutspace/discovery/discovery.hpp"

#include "helpers.hpp"

#include <algorithm>
#include <set>

using namespace layoutspace;
using namespace layoutspace::discovery;

namespace {

constexpr int kCases = 1000;

std::set<std::string> reached(const ExpansionResult& r) {
  std::set<std::string> out(r.seed_ids.begin(), r.seed_ids.end());
  for (const auto& c : r.candidates) out.insert(c.sample_id);
  return out;
}

bool subset(const std::set<std::string>& a, const std::set<std::string>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

struct RandomGraph {
  PointSet set;
  SimilarityGraph graph;
};

RandomGraph random_graph(Rng& rng) {
  const auto n = static_cast<Eigen::Index>(2 + rng.index(60));
  const auto d = static_cast<Eigen::Index>(2 + rng.index(6));
  Matrix pts = testing::random_matrix(n, d, rng);
  // Occasional duplicate rows exercise similarity ties.
  if (n > 3 && rng.uniform() < 0.3) pts.row(1) = pts.row(0);
  RandomGraph g{testing::point_set(pts), {}};
  GraphParams p;
  p.k_neighbors = 1 + rng.index(8);
  p.min_similarity = rng.uniform(-1.0, 0.5);
  g.graph = build_similarity_graph(g.set, p);
  return g;
}

}  // namespace

TEST_CASE("raising the threshold never adds candidates") {
  Rng rng(101);
  for (int t = 0; t < kCases; ++t) {
    const auto g = random_graph(rng);
    const std::vector<std::string> seeds{g.set.ids[rng.index(g.set.size())]};
    ExpansionParams lo;
    lo.threshold = rng.uniform(-1.0, 1.0);
    lo.max_hops = 1 + rng.index(5);
    ExpansionParams hi = lo;
    hi.threshold = lo.threshold + rng.uniform(0.0, 0.5);
    const auto a = reached(expand_from_seeds(g.graph, seeds, lo));
    const auto b = reached(expand_from_seeds(g.graph, seeds, hi));
    REQUIRE_MESSAGE(subset(b, a), "case ", t);
  }
}

TEST_CASE("adding seeds never loses reached samples") {
  Rng rng(202);
  for (int t = 0; t < kCases; ++t) {
    const auto g = random_graph(rng);
    std::vector<std::string> seeds{g.set.ids[rng.index(g.set.size())]};
    std::vector<std::string> more = seeds;
    const std::size_t extra = 1 + rng.index(4);
    for (std::size_t i = 0; i < extra; ++i) more.push_back(g.set.ids[rng.index(g.set.size())]);
    ExpansionParams p;
    p.threshold = rng.uniform(-1.0, 1.0);
    p.max_hops = 1 + rng.index(5);
    const auto a = reached(expand_from_seeds(g.graph, seeds, p));
    const auto b = reached(expand_from_seeds(g.graph, more, p));
    REQUIRE_MESSAGE(subset(a, b), "case ", t);
  }
}

TEST_CASE("more hops never lose candidates") {
  Rng rng(303);
  for (int t = 0; t < kCases; ++t) {
    const auto g = random_graph(rng);
    const std::vector<std::string> seeds{g.set.ids[rng.index(g.set.size())]};
    ExpansionParams p;
    p.threshold = rng.uniform(-1.0, 1.0);
    p.max_hops = 1 + rng.index(4);
    ExpansionParams q = p;
    q.max_hops += 1 + rng.index(3);
    REQUIRE(subset(reached(expand_from_seeds(g.graph, seeds, p)), reached(expand_from_seeds(g.graph, seeds, q))));
  }
}

TEST_CASE("k-means inertia never increases across iterations") {
  Rng rng(404);
  for (int t = 0; t < kCases; ++t) {
    const auto n = static_cast<Eigen::Index>(3 + rng.index(60));
    const auto d = static_cast<Eigen::Index>(1 + rng.index(6));
    Matrix pts = testing::random_matrix(n, d, rng);
    if (rng.uniform() < 0.2) pts.row(0) = pts.row(n - 1);
    cluster::KMeansParams p;
    p.k = 1 + rng.index(std::min<std::uint64_t>(8, static_cast<std::uint64_t>(n)));
    p.rng_seed = rng.next_u64();
    p.metric = rng.uniform() < 0.5 ? DistanceMetric::Cosine : DistanceMetric::Euclidean;
    p.n_init = 1 + rng.index(3);
    const auto m = cluster::kmeans(testing::point_set(pts), p);
    REQUIRE(!m.inertia_trace.empty());
    for (std::size_t i = 1; i < m.inertia_trace.size(); ++i) {
      REQUIRE_MESSAGE(m.inertia_trace[i] <= m.inertia_trace[i - 1], "case ", t, " step ", i);
    }
    CHECK(m.inertia == doctest::Approx(m.inertia_trace.back()).epsilon(1e-12));
  }
}

TEST_CASE("refinement conserves samples") {
  Rng rng(505);
  for (int t = 0; t < kCases; ++t) {
    const auto n = static_cast<Eigen::Index>(6 + rng.index(40));
    const auto set = testing::point_set(testing::random_matrix(n, 3, rng));
    cluster::KMeansParams p;
    p.k = 2 + rng.index(4);
    p.n_init = 1;
    p.rng_seed = static_cast<std::uint64_t>(t);
    const auto m = cluster::kmeans(set, p);
    std::vector<cluster::RefineOp> ops;
    const int id = m.cluster_ids[rng.index(m.k())];
    switch (rng.index(4)) {
      case 0: ops.push_back(cluster::RefineOp::split(id)); break;
      case 1: ops.push_back(cluster::RefineOp::merge(m.cluster_ids[0], m.cluster_ids.back())); break;
      case 2: ops.push_back(cluster::RefineOp::remove_outliers(rng.uniform(0.0, 3.0))); break;
      default: ops.push_back(cluster::RefineOp::trim(rng.uniform(0.0, 100.0), id)); break;
    }
    const auto r = cluster::refine_clusters(m, set, ops);
    std::size_t total = r.noise().size();
    for (int c : r.cluster_ids) {
      const auto members = r.members(c);
      REQUIRE_FALSE(members.empty());
      total += members.size();
    }
    REQUIRE(total == set.size());
    REQUIRE(r.log.size() == m.log.size() + 1);
  }
}
