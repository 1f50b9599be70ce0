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

#include "layoutspace/app/defaults.hpp"

#include "layoutspace/core/error.hpp"

#include <cstdlib>
#include <set>

namespace layoutspace::app {

Defaults Defaults::from_config(const Config& c) {
  static const std::set<std::string> known = {
      "graph.k_neighbors", "graph.min_similarity", "expand.threshold", "expand.max_hops", "detect.min_size",
      "detect.distance_quantile", "queue.weight_zscore", "queue.weight_cluster", "queue.weight_expansion",
      "queue.min_z", "cluster.metric", "cluster.max_iter", "cluster.tol", "cluster.n_init", "cluster.select_k_sample",
      "tsne.perplexity", "tsne.iterations", "tsne.exaggeration", "tsne.exaggeration_iters", "tsne.theta",
      "tsne.learning_rate", "train.arcface", "train.supcon", "train.center", "train.scale", "train.margin",
      "train.temperature", "train.epochs", "train.batch_size", "train.learning_rate", "service.host", "service.port",
      "service.token"};
  for (const auto& [key, _] : c.values()) {
    if (!known.count(key)) throw Error(Errc::ConfigError, "unknown config key '" + key + "'");
  }
  Defaults d;
  d.graph.k_neighbors = c.get_size("graph.k_neighbors", d.graph.k_neighbors);
  d.graph.min_similarity = c.get_double("graph.min_similarity", d.graph.min_similarity);
  d.expand.threshold = c.get_double("expand.threshold", d.expand.threshold);
  d.expand.max_hops = c.get_size("expand.max_hops", d.expand.max_hops);
  d.detect.min_size = c.get_size("detect.min_size", d.detect.min_size);
  d.detect.distance_quantile = c.get_double("detect.distance_quantile", d.detect.distance_quantile);
  d.queue.zscore = c.get_double("queue.weight_zscore", d.queue.zscore);
  d.queue.anomalous_cluster = c.get_double("queue.weight_cluster", d.queue.anomalous_cluster);
  d.queue.seed_expansion = c.get_double("queue.weight_expansion", d.queue.seed_expansion);
  d.queue.min_z = c.get_double("queue.min_z", d.queue.min_z);

  try {
    d.metric = parse_metric(c.get_string("cluster.metric", std::string(to_string(d.metric))));
  } catch (const Error& e) {
    throw Error(Errc::ConfigError, e.what());
  }
  d.kmeans_max_iter = c.get_size("cluster.max_iter", d.kmeans_max_iter);
  d.kmeans_tol = c.get_double("cluster.tol", d.kmeans_tol);
  d.kmeans_n_init = c.get_size("cluster.n_init", d.kmeans_n_init);
  d.select_k_sample = c.get_size("cluster.select_k_sample", d.select_k_sample);

  d.tsne.perplexity = c.get_double("tsne.perplexity", d.tsne.perplexity);
  d.tsne.iterations = c.get_size("tsne.iterations", d.tsne.iterations);
  d.tsne.exaggeration = c.get_double("tsne.exaggeration", d.tsne.exaggeration);
  d.tsne.exaggeration_iters = c.get_size("tsne.exaggeration_iters", d.tsne.exaggeration_iters);
  d.tsne.theta = c.get_double("tsne.theta", d.tsne.theta);
  d.tsne.learning_rate = c.get_double("tsne.learning_rate", d.tsne.learning_rate);
  d.tsne.metric = d.metric;

  d.train.weights.arcface = c.get_double("train.arcface", d.train.weights.arcface);
  d.train.weights.supcon = c.get_double("train.supcon", d.train.weights.supcon);
  d.train.weights.center = c.get_double("train.center", d.train.weights.center);
  d.train.scale = c.get_double("train.scale", d.train.scale);
  d.train.margin = c.get_double("train.margin", d.train.margin);
  d.train.temperature = c.get_double("train.temperature", d.train.temperature);
  d.train.epochs = c.get_size("train.epochs", d.train.epochs);
  d.train.batch_size = c.get_size("train.batch_size", d.train.batch_size);
  d.train.learning_rate = c.get_double("train.learning_rate", d.train.learning_rate);

  d.host = c.get_string("service.host", d.host);
  d.port = static_cast<int>(c.get_int("service.port", d.port));
  d.token = c.get_string("service.token", d.token);
  if (d.port < 0 || d.port > 65535) throw Error(Errc::ConfigError, "service.port out of range");
  return d;
}

Config load_config(const std::optional<std::string>& path) {
  Config c;
  if (path) {
    c.merge(Config::load(*path));
  } else if (const char* env = std::getenv("LAYOUTSPACE_CONFIG"); env && *env) {
    c.merge(Config::load(env));
  }
  return c;
}

std::string resolve_data_dir(const std::optional<std::string>& explicit_dir) {
  if (explicit_dir && !explicit_dir->empty()) return *explicit_dir;
  if (const char* env = std::getenv("LAYOUTSPACE_DATA_DIR"); env && *env) return env;
  return "layoutspace-data";
}

}  // namespace layoutspace::app
