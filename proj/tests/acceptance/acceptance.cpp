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

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Every check reports its measured values and wall time.

#include "layoutspace/cluster/metrics.hpp"
#include "layoutspace/cluster/model.hpp"
#include "layoutspace/cluster/tsne.hpp"
#include "layoutspace/discovery/discovery.hpp"
#include "layoutspace/learn/checkpoint.hpp"
#include "layoutspace/learn/classifier.hpp"
#include "layoutspace/learn/trainer.hpp"
#include "layoutspace/oracle/oracles.hpp"
#include "layoutspace/store/formats.hpp"
#include "layoutspace/store/synth.hpp"

#include "helpers.hpp"

#include <CLI11.hpp>

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>

using namespace layoutspace;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

// ---- shared fixtures ----

Matrix test_features(const std::vector<EmbeddingRecord>& records, std::vector<int>& labels) {
  std::vector<const EmbeddingRecord*> rows;
  for (const auto& r : records) {
    if (r.split == SplitTag::Test && r.layout_label) rows.push_back(&r);
  }
  Matrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front()->vector.size()));
  std::vector<std::string> names;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i]->vector.size(); ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i]->vector[j];
    }
    names.push_back(*rows[i]->layout_label);
  }
  labels = cluster::encode_labels(names);
  return x;
}

double heldout_silhouette(const learn::MetricModel& model, const Matrix& x, const std::vector<int>& labels) {
  return cluster::labeled_metrics(model.embed(x), labels, DistanceMetric::Cosine).silhouette_mean;
}

std::vector<std::size_t> indices_where(const store::SyntheticDataset& d, const std::function<bool(const store::GroundTruth&)>& pred) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < d.ground_truth.size(); ++i) {
    if (pred(d.ground_truth[i])) out.push_back(i);
  }
  return out;
}

// ---- criteria ----

Outcome gradients() {
  const auto g = oracle::check_loss_gradients(20260101, 100, 1e-5);
  const double worst = std::max({g.worst[0], g.worst[1], g.worst[2], g.worst[3]});
  return {g.batches == 100 && worst <= 1e-4,
          format("%zu batches, max rel err arcface %.2e supcon %.2e center %.2e composite %.2e", g.batches, g.worst[0],
                 g.worst[1], g.worst[2], g.worst[3])};
}

Outcome metrics_oracle() {
  const auto m = oracle::check_labeled_metrics(4242, 50, 200);
  return {m.sets == 50 && m.worst <= 1e-9, format("%zu sets (N<=200), max |diff| %.2e", m.sets, m.worst)};
}

Outcome fixtures() {
  const std::vector<int> labels{0, 0, 1, 1};
  const double sil =
      cluster::labeled_metrics(oracle::two_pair_fixture(), labels, DistanceMetric::Euclidean).silhouette_mean;
  const double dbi = cluster::labeled_metrics(oracle::two_blob_fixture(), labels, DistanceMetric::Euclidean).dbi;
  return {std::abs(sil - 0.900) <= 1e-3 && std::abs(dbi - 0.2) <= 1e-9,
          format("silhouette %.6f, DBI %.12f", sil, dbi)};
}

Outcome ablation() {
  int wins = 0;
  double min_gain = 1e9;
  std::string per_seed;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    store::SyntheticSpec spec;
    spec.n_layouts = 10;
    spec.samples_min = spec.samples_max = 160;
    spec.dim = 64;
    spec.intra_class_spread = 0.15;
    spec.inter_class_separation = 1.0;
    spec.val_fraction = 0.2;
    spec.test_fraction = 0.2;
    spec.rng_seed = 1000 + seed;
    const auto data = store::synthesize(spec);
    std::vector<int> labels;
    const Matrix x = test_features(data.records, labels);

    learn::TrainerConfig full;
    full.weights = {1.0, 1.0, 0.003};
    full.embedding_dim = 64;
    full.hidden_width = 128;
    full.backbone_rank = 32;
    full.epochs = 20;
    full.rng_seed = seed;
    learn::TrainerConfig arc = full;
    arc.weights = {1.0, 0.0, 0.0};

    const double s0 = heldout_silhouette(learn::init_metric_model(64, 10, full), x, labels);
    const double sf = heldout_silhouette(learn::train_metric_head(data.records, full).model, x, labels);
    const double sa = heldout_silhouette(learn::train_metric_head(data.records, arc).model, x, labels);
    wins += sf >= sa;
    min_gain = std::min(min_gain, sf - s0);
    per_seed += format(" %.3f/%.3f", sf, sa);
  }
  return {wins >= 8 && min_gain >= 0.15,
          format("combined >= arcface in %d/10 seeds, min gain over epoch 0 %.3f; combined/arcface:", wins, min_gain) +
              per_seed};
}

Outcome classifier() {
  store::SyntheticSpec spec;
  spec.n_layouts = 19;
  spec.samples_min = 80;
  spec.samples_max = 120;
  spec.dim = 128;
  spec.intra_class_spread = 0.05;
  spec.inter_class_separation = 0.5;
  spec.rng_seed = 19;
  const auto data = store::synthesize(spec);
  learn::ClassifierConfig cfg;
  cfg.test_fraction = 0.2;
  cfg.rng_seed = 3;
  const auto r = learn::train_layout_classifier(data.records, cfg);
  return {r.accuracy >= 0.99 && r.classifier.class_names.size() == 19,
          format("accuracy %.4f on %zu held-out (%zu train), %zu classes", r.accuracy, r.test_count, r.train_count,
                 r.classifier.class_names.size())};
}

Outcome campaign() {
  store::SyntheticSpec spec;
  spec.n_layouts = 19;
  spec.samples_min = spec.samples_max = 1038;
  spec.dim = 128;
  spec.intra_class_spread = 0.02;
  spec.inter_class_separation = 1.0;
  spec.fraud_families = {{100, 2.0, 0.01}, {92, 2.0, 0.01}, {84, 2.0, 0.01}};
  spec.outlier_count = 2;
  spec.rng_seed = 7;
  const auto data = store::synthesize(spec);
  const auto set = PointSet::from_records(data.records, 1);

  const auto selection = cluster::select_k(set, 18, 26, 7, DistanceMetric::Cosine, 2000);
  cluster::KMeansParams kp;
  kp.k = selection.k;
  kp.rng_seed = 7;
  const auto model = cluster::kmeans(set, kp);
  const cluster::RefineOp ops[] = {cluster::RefineOp::remove_outliers(3.0)};
  const auto refined = cluster::refine_clusters(model, set, ops);
  const auto report = discovery::detect_anomalous_clusters(
      refined, discovery::layout_centroids(data.records, DistanceMetric::Cosine), discovery::DetectParams{});

  std::set<std::size_t> families_hit;
  bool pure = true;
  std::size_t recovered = 0;
  for (const auto& f : report.flagged) {
    std::set<std::size_t> fams;
    for (std::size_t i : refined.members(f.cluster_id)) {
      const auto& g = data.ground_truth[i];
      if (g.family) {
        fams.insert(*g.family);
        ++recovered;
      } else {
        pure = false;
      }
    }
    if (fams.size() == 1) families_hit.insert(*fams.begin());
  }
  const std::size_t total = indices_where(data, [](const auto& g) { return g.family.has_value(); }).size();
  const double recall = static_cast<double>(recovered) / static_cast<double>(total);
  return {data.records.size() == 20000 && total == 276 && report.flagged.size() == 3 && families_hit.size() == 3 &&
              recall >= 0.9,
          format("N=%zu, k=%zu, flagged %zu clusters covering %zu families (pure %s), member recall %.3f of %zu",
                 data.records.size(), selection.k, report.flagged.size(), families_hit.size(), pure ? "yes" : "no",
                 recall, total)};
}

Outcome seed_expansion() {
  store::SyntheticSpec spec;
  spec.n_layouts = 10;
  spec.samples_min = spec.samples_max = 500;
  spec.dim = 128;
  spec.intra_class_spread = 0.02;
  spec.inter_class_separation = 1.0;
  spec.fraud_families = {{50, 2.0, 0.01}};
  spec.rng_seed = 11;
  const auto data = store::synthesize(spec);
  const auto set = PointSet::from_records(data.records, 1);
  const auto family = indices_where(data, [](const auto& g) { return g.family.has_value(); });
  std::set<std::string> members;
  for (std::size_t i : family) members.insert(set.ids[i]);

  const auto graph = discovery::build_similarity_graph(set, discovery::GraphParams{});
  const std::vector<std::string> seeds{set.ids[family.front()]};
  const auto r = discovery::expand_from_seeds(graph, seeds, discovery::ExpansionParams{});
  std::size_t hit = 0;
  for (const auto& c : r.candidates) hit += members.count(c.sample_id);
  const double recovery = static_cast<double>(hit) / 49.0;
  const double contamination = r.candidates.empty() ? 0.0
                                                    : static_cast<double>(r.candidates.size() - hit) /
                                                          static_cast<double>(r.candidates.size());
  return {recovery >= 0.8 && contamination <= 0.05,
          format("background %zu, recovered %zu/49 (%.3f), %zu candidates, contamination %.3f",
                 data.records.size() - 50, hit, recovery, r.candidates.size(), contamination)};
}

Outcome zscore_triage() {
  store::SyntheticSpec spec;
  spec.n_layouts = 10;
  spec.samples_min = spec.samples_max = 498;
  spec.dim = 128;
  spec.intra_class_spread = 0.02;
  spec.inter_class_separation = 1.0;
  spec.outlier_count = 20;
  spec.outlier_magnitude = 5.0;
  spec.rng_seed = 13;
  const auto data = store::synthesize(spec);
  const auto set = PointSet::from_records(data.records, 1);
  cluster::KMeansParams kp;
  kp.k = 10;
  kp.rng_seed = 13;
  const auto model = cluster::kmeans(set, kp);
  const auto report = discovery::zscore_anomalies(model, set);
  std::set<std::string> top;
  for (std::size_t i = 0; i < 25 && i < report.scores.size(); ++i) top.insert(report.scores[i].sample_id);
  std::size_t in_top = 0;
  const auto outliers = indices_where(data, [](const auto& g) { return g.outlier; });
  for (std::size_t i : outliers) in_top += top.count(set.ids[i]);
  return {data.records.size() == 5000 && outliers.size() == 20 && in_top == 20,
          format("N=%zu, %zu/%zu injected outliers in the top 25", data.records.size(), in_top, outliers.size())};
}

Outcome determinism() {
  store::SyntheticSpec spec;
  spec.n_layouts = 5;
  spec.samples_min = spec.samples_max = 60;
  spec.dim = 32;
  spec.intra_class_spread = 0.1;
  spec.fraud_families = {{20, 2.0, 0.01}};
  spec.outlier_count = 3;
  spec.val_fraction = 0.2;
  spec.test_fraction = 0.2;
  spec.rng_seed = 21;
  std::vector<std::string> failed;

  const auto a = store::synthesize(spec);
  const auto b = store::synthesize(spec);
  if (store::encode_jsonl(a.records, a.dim) != store::encode_jsonl(b.records, b.dim) ||
      store::encode_packed(a.records, a.dim) != store::encode_packed(b.records, b.dim) ||
      store::ground_truth_jsonl(a) != store::ground_truth_jsonl(b)) {
    failed.push_back("synth");
  }

  const auto set = PointSet::from_records(a.records, 1);
  cluster::KMeansParams kp;
  kp.k = 6;
  kp.rng_seed = 5;
  if (cluster::to_json(cluster::kmeans(set, kp)).dump() != cluster::to_json(cluster::kmeans(set, kp)).dump()) {
    failed.push_back("kmeans");
  }

  cluster::TsneParams tp;
  tp.perplexity = 20;
  tp.iterations = 400;
  tp.rng_seed = 5;
  if (cluster::to_json(cluster::tsne_project(set, tp)).dump() != cluster::to_json(cluster::tsne_project(set, tp)).dump()) {
    failed.push_back("tsne");
  }
  tp.exact_max_points = 10;
  if (cluster::to_json(cluster::tsne_project(set, tp)).dump() != cluster::to_json(cluster::tsne_project(set, tp)).dump()) {
    failed.push_back("tsne-barnes-hut");
  }

  learn::TrainerConfig cfg;
  cfg.embedding_dim = 32;
  cfg.hidden_width = 64;
  cfg.backbone_rank = 16;
  cfg.epochs = 5;
  cfg.rng_seed = 5;
  const auto t1 = learn::train_metric_head(a.records, cfg);
  const auto t2 = learn::train_metric_head(a.records, cfg);
  if (learn::encode_checkpoint(learn::to_archive(t1.model, cfg)) != learn::encode_checkpoint(learn::to_archive(t2.model, cfg))) {
    failed.push_back("train");
  }
  learn::ClassifierConfig cc;
  cc.rng_seed = 5;
  cc.epochs = 5;
  std::vector<EmbeddingRecord> labeled;
  for (const auto& r : a.records) {
    if (r.layout_label) labeled.push_back(r);
  }
  const auto c1 = learn::train_layout_classifier(labeled, cc);
  const auto c2 = learn::train_layout_classifier(labeled, cc);
  if (learn::encode_checkpoint(learn::to_archive(c1.classifier, cc)) !=
      learn::encode_checkpoint(learn::to_archive(c2.classifier, cc))) {
    failed.push_back("classifier");
  }
  std::string which;
  for (const auto& f : failed) which += " " + f;
  return {failed.empty(), failed.empty() ? "synth, kmeans, tsne (exact and Barnes-Hut), train and classifier outputs "
                                           "byte-identical across two runs"
                                         : "differing:" + which};
}

Outcome monotonicity() {
  constexpr int kCases = 1000;
  Rng rng(777);
  int threshold_bad = 0, seed_bad = 0, inertia_bad = 0;
  auto reached = [](const discovery::ExpansionResult& r) {
    std::set<std::string> out(r.seed_ids.begin(), r.seed_ids.end());
    for (const auto& c : r.candidates) out.insert(c.sample_id);
    return out;
  };
  auto subset = [](const std::set<std::string>& a, const std::set<std::string>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
  };
  for (int t = 0; t < kCases; ++t) {
    const auto n = static_cast<Eigen::Index>(2 + rng.index(60));
    const auto set = testing::point_set(testing::random_matrix(n, 2 + static_cast<Eigen::Index>(rng.index(6)), rng));
    discovery::GraphParams gp;
    gp.k_neighbors = 1 + rng.index(8);
    gp.min_similarity = rng.uniform(-1.0, 0.5);
    const auto g = discovery::build_similarity_graph(set, gp);
    discovery::ExpansionParams lo;
    lo.threshold = rng.uniform(-1.0, 1.0);
    lo.max_hops = 1 + rng.index(5);
    discovery::ExpansionParams hi = lo;
    hi.threshold += rng.uniform(0.0, 0.5);
    std::vector<std::string> seeds{set.ids[rng.index(set.size())]};
    if (!subset(reached(discovery::expand_from_seeds(g, seeds, hi)), reached(discovery::expand_from_seeds(g, seeds, lo)))) {
      ++threshold_bad;
    }
    auto more = seeds;
    for (std::size_t i = 0, e = 1 + rng.index(4); i < e; ++i) more.push_back(set.ids[rng.index(set.size())]);
    if (!subset(reached(discovery::expand_from_seeds(g, seeds, lo)), reached(discovery::expand_from_seeds(g, more, lo)))) {
      ++seed_bad;
    }
  }
  for (int t = 0; t < kCases; ++t) {
    const auto n = static_cast<Eigen::Index>(3 + rng.index(60));
    const auto set = testing::point_set(testing::random_matrix(n, 1 + static_cast<Eigen::Index>(rng.index(6)), rng));
    cluster::KMeansParams kp;
    kp.k = 1 + rng.index(std::min<std::uint64_t>(8, static_cast<std::uint64_t>(n)));
    kp.rng_seed = rng.next_u64();
    kp.metric = rng.uniform() < 0.5 ? DistanceMetric::Cosine : DistanceMetric::Euclidean;
    const auto m = cluster::kmeans(set, kp);
    for (std::size_t i = 1; i < m.inertia_trace.size(); ++i) {
      if (m.inertia_trace[i] > m.inertia_trace[i - 1]) {
        ++inertia_bad;
        break;
      }
    }
  }
  return {threshold_bad == 0 && seed_bad == 0 && inertia_bad == 0,
          format("%d cases each; violations: threshold %d, seed %d, inertia %d", kCases, threshold_bad, seed_bad,
                 inertia_bad)};
}

Outcome round_trips() {
  Rng rng(31337);
  int bad = 0;
  auto same = [](const std::vector<EmbeddingRecord>& x, const std::vector<EmbeddingRecord>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i].sample_id != y[i].sample_id || x[i].layout_label != y[i].layout_label || x[i].split != y[i].split ||
          x[i].metadata != y[i].metadata || x[i].vector.size() != y[i].vector.size()) {
        return false;
      }
      for (std::size_t d = 0; d < x[i].vector.size(); ++d) {
        if (std::bit_cast<std::uint32_t>(x[i].vector[d]) != std::bit_cast<std::uint32_t>(y[i].vector[d])) return false;
      }
    }
    return true;
  };
  for (int t = 0; t < 100; ++t) {
    const std::size_t dim = 1 + rng.index(64);
    const std::size_t n = 1 + rng.index(200);
    std::vector<EmbeddingRecord> records;
    for (std::size_t i = 0; i < n; ++i) {
      EmbeddingRecord r;
      r.sample_id = "doc-" + std::to_string(t) + "-" + std::to_string(i);
      for (std::size_t d = 0; d < dim; ++d) {
        float f;
        do {
          f = std::bit_cast<float>(static_cast<std::uint32_t>(rng.next_u64()));
        } while (!std::isfinite(f));
        r.vector.push_back(f);
      }
      if (rng.uniform() < 0.7) r.layout_label = "layout-" + std::to_string(rng.index(19));
      if (rng.uniform() < 0.7) r.split = static_cast<SplitTag>(rng.index(3));
      if (rng.uniform() < 0.2) r.metadata["issuer"] = "x" + std::to_string(rng.index(100));
      records.push_back(std::move(r));
    }
    records = store::sorted_by_id(std::move(records));
    auto packed = store::decode_packed(store::encode_packed(records, dim));
    store::apply_sidecar(packed, store::encode_sidecar(records));
    if (!same(records, store::decode_jsonl(store::encode_jsonl(records, dim)).records) || !same(records, packed.records)) {
      ++bad;
    }
  }
  return {bad == 0, format("100 random datasets, %d mismatches", bad)};
}

struct Criterion {
  const char* name;
  double limit_seconds;
  Outcome (*run)();
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance gate"};
  std::vector<std::string> only;
  app.add_option("--only", only, "Run only the named criteria");
  CLI11_PARSE(app, argc, argv);

  const Criterion criteria[] = {
      {"gradient-check", 30, gradients},     {"metrics-brute-force", 10, metrics_oracle},
      {"metric-fixtures", 1, fixtures},      {"ablation-direction", 300, ablation},
      {"layout-classifier", 60, classifier}, {"campaign-discovery", 300, campaign},
      {"seed-expansion", 30, seed_expansion}, {"zscore-triage", 10, zscore_triage},
      {"determinism", 600, determinism},     {"monotonicity", 600, monotonicity},
      {"format-round-trip", 600, round_trips},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.name) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && secs <= c.limit_seconds;
    failures += !pass;
    std::printf("%s %-20s %s [%.2fs, limit %.0fs]\n", pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs,
                c.limit_seconds);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
