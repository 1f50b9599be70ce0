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

#include "layoutspace/learn/classifier.hpp"

#include "layoutspace/core/error.hpp"
#include "layoutspace/core/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace layoutspace::learn {
namespace {

Matrix softmax_rows(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double mx = logits.row(i).maxCoeff();
    RowVector e = (logits.row(i).array() - mx).exp().matrix();
    p.row(i) = e / e.sum();
  }
  return p;
}

}  // namespace

Matrix classifier_probabilities(const Matrix& embeddings, const LayoutClassifier& clf) {
  if (embeddings.cols() != clf.in_dim()) {
    throw Error(Errc::ShapeMismatch, "embedding width " + std::to_string(embeddings.cols()) +
                                         " does not match classifier input " + std::to_string(clf.in_dim()));
  }
  return softmax_rows(clf.output.forward(relu(clf.hidden.forward(embeddings))));
}

Classification classify_layout(std::span<const double> embedding, const LayoutClassifier& clf) {
  Matrix x(1, static_cast<Eigen::Index>(embedding.size()));
  for (std::size_t j = 0; j < embedding.size(); ++j) x(0, static_cast<Eigen::Index>(j)) = embedding[j];
  const Matrix p = classifier_probabilities(x, clf);
  Classification out;
  out.probabilities.assign(p.data(), p.data() + p.size());
  for (std::size_t c = 1; c < out.probabilities.size(); ++c) {
    if (out.probabilities[c] > out.probabilities[out.index]) out.index = c;
  }
  if (out.index < clf.class_names.size()) out.label = clf.class_names[out.index];
  return out;
}

ClassifierResult train_layout_classifier(std::span<const EmbeddingRecord> dataset, const ClassifierConfig& config) {
  if (!(config.test_fraction > 0.0 && config.test_fraction < 1.0)) {
    throw Error(Errc::InvalidArgument, "test fraction must lie in (0, 1)");
  }
  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (!dataset[i].layout_label) {
      throw Error(Errc::InvalidLabel, "record '" + dataset[i].sample_id + "' has no layout label");
    }
    by_class[*dataset[i].layout_label].push_back(i);
  }

  ClassifierResult result;
  std::vector<std::string> names;
  for (const auto& [name, rows] : by_class) {
    if (rows.size() < config.min_class_size) {
      result.excluded_classes.push_back(name);
    } else {
      names.push_back(name);
    }
  }
  if (names.size() < 2) throw Error(Errc::TooFewClasses, "fewer than two classes with enough samples");

  const std::size_t dim = dataset.front().vector.size();
  Rng split_rng(derive_seed(config.rng_seed, 11));
  std::vector<std::size_t> train_rows;
  std::vector<int> train_labels;
  std::vector<std::size_t> test_rows;
  std::vector<int> test_labels;
  for (std::size_t c = 0; c < names.size(); ++c) {
    std::vector<std::size_t> rows = by_class[names[c]];
    split_rng.shuffle(rows);
    std::size_t n_test = static_cast<std::size_t>(std::llround(config.test_fraction * static_cast<double>(rows.size())));
    n_test = std::clamp<std::size_t>(n_test, 1, rows.size() - 1);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (dataset[rows[k]].vector.size() != dim) throw Error(Errc::DimensionMismatch, "mixed record dimensions");
      if (k < n_test) {
        test_rows.push_back(rows[k]);
        test_labels.push_back(static_cast<int>(c));
      } else {
        train_rows.push_back(rows[k]);
        train_labels.push_back(static_cast<int>(c));
      }
    }
  }

  auto stack = [&](const std::vector<std::size_t>& rows) {
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < dim; ++j) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = dataset[rows[i]].vector[j];
      }
    }
    return m;
  };
  const Matrix train_x = stack(train_rows);
  const Matrix test_x = stack(test_rows);

  Rng init_rng(derive_seed(config.rng_seed, 12));
  LayoutClassifier clf;
  clf.hidden = Dense::init(static_cast<Eigen::Index>(dim), config.hidden_width, init_rng);
  clf.output = Dense::init(config.hidden_width, static_cast<Eigen::Index>(names.size()), init_rng);
  clf.dropout = config.dropout;
  clf.class_names = names;

  const std::uint64_t dropout_seed = derive_seed(config.rng_seed, 13);
  Eigen::MatrixXd v_hw = Eigen::MatrixXd::Zero(clf.hidden.weight.rows(), clf.hidden.weight.cols());
  Eigen::RowVectorXd v_hb = Eigen::RowVectorXd::Zero(clf.hidden.bias.cols());
  Eigen::MatrixXd v_ow = Eigen::MatrixXd::Zero(clf.output.weight.rows(), clf.output.weight.cols());
  Eigen::RowVectorXd v_ob = Eigen::RowVectorXd::Zero(clf.output.bias.cols());
  std::vector<std::size_t> order(train_rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::uint64_t step = 0;
  const double lr = config.learning_rate;
  const double mom = config.momentum;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    Rng epoch_rng(derive_seed(config.rng_seed, 100 + epoch));
    epoch_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const Eigen::Index b = static_cast<Eigen::Index>(end - start);
      Matrix x(b, train_x.cols());
      Matrix target = Matrix::Zero(b, static_cast<Eigen::Index>(names.size()));
      for (std::size_t k = start; k < end; ++k) {
        x.row(static_cast<Eigen::Index>(k - start)) = train_x.row(static_cast<Eigen::Index>(order[k]));
        target(static_cast<Eigen::Index>(k - start), train_labels[order[k]]) = 1.0;
      }
      const Matrix pre = clf.hidden.forward(x);
      const Matrix act = relu(pre);
      const Matrix mask = dropout_mask(act.rows(), act.cols(), clf.dropout, dropout_seed, step);
      const Matrix dropped = act.cwiseProduct(mask);
      const Matrix p = softmax_rows(clf.output.forward(dropped));

      const Matrix g_logits = (p - target) / static_cast<double>(b);
      DenseGrad g_out;
      DenseGrad g_hidden;
      Matrix g_act = dense_backward(clf.output, dropped, g_logits, g_out).cwiseProduct(mask);
      g_act = (pre.array() > 0.0).select(g_act, 0.0);
      dense_backward(clf.hidden, x, g_act, g_hidden);

      v_hw = mom * v_hw + g_hidden.weight;
      v_hb = mom * v_hb + g_hidden.bias;
      v_ow = mom * v_ow + g_out.weight;
      v_ob = mom * v_ob + g_out.bias;
      clf.hidden.weight -= lr * v_hw;
      clf.hidden.bias -= lr * v_hb;
      clf.output.weight -= lr * v_ow;
      clf.output.bias -= lr * v_ob;
      ++step;
    }
  }

  const Matrix p = classifier_probabilities(test_x, clf);
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < p.cols(); ++c) {
      if (p(i, c) > p(i, best)) best = c;
    }
    if (best == test_labels[static_cast<std::size_t>(i)]) ++correct;
  }
  result.classifier = std::move(clf);
  result.accuracy = static_cast<double>(correct) / static_cast<double>(test_rows.size());
  result.train_count = train_rows.size();
  result.test_count = test_rows.size();
  for (std::size_t r : test_rows) result.test_ids.push_back(dataset[r].sample_id);
  return result;
}

}  // namespace layoutspace::learn
