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

#include "layoutspace/core/types.hpp"
#include "layoutspace/learn/network.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace layoutspace::learn {

/// D -> 256 -> C relu MLP with dropout and a softmax output.
struct LayoutClassifier {
  Dense hidden;
  Dense output;
  double dropout = 0.2;
  std::vector<std::string> class_names;

  Eigen::Index in_dim() const { return hidden.in_dim(); }
};

struct ClassifierConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 64;
  double learning_rate = 0.05;
  double momentum = 0.9;
  double dropout = 0.2;
  double test_fraction = 0.2;
  std::size_t min_class_size = 5;
  Eigen::Index hidden_width = 256;
  std::uint64_t rng_seed = 0;
};

struct ClassifierResult {
  LayoutClassifier classifier;
  double accuracy = 0.0;  // on the held-out fraction
  std::size_t train_count = 0;
  std::size_t test_count = 0;
  std::vector<std::string> excluded_classes;
  std::vector<std::string> test_ids;
};

/// Per-class stratified split seeded by rng_seed; classes with fewer than
/// min_class_size samples are excluded.
ClassifierResult train_layout_classifier(std::span<const EmbeddingRecord> dataset, const ClassifierConfig& config);

struct Classification {
  std::string label;
  std::size_t index = 0;
  std::vector<double> probabilities;
};

/// Argmax of the softmax; ties go to the lowest class index.
Classification classify_layout(std::span<const double> embedding, const LayoutClassifier& clf);

/// Row-wise softmax probabilities (inference mode).
Matrix classifier_probabilities(const Matrix& embeddings, const LayoutClassifier& clf);

}  // namespace layoutspace::learn
