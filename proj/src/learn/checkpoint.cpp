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

#include "layoutspace/learn/checkpoint.hpp"

#include "layoutspace/core/binary_io.hpp"
#include "layoutspace/core/error.hpp"

#include <cstring>

namespace layoutspace::learn {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'L', 'S', 'C', 'K'};

Matrix row_matrix(const RowVector& v) { return Matrix(v); }

RowVector as_row(const Matrix& m) {
  if (m.rows() != 1) throw Error(Errc::ParseError, "expected a 1-row tensor");
  return m.row(0);
}

const Matrix& tensor(const TensorArchive& a, const std::string& name) {
  const auto it = a.tensors.find(name);
  if (it == a.tensors.end()) throw Error(Errc::ParseError, "checkpoint lacks tensor '" + name + "'");
  return it->second;
}

void put_dense(TensorArchive& a, const std::string& prefix, const Dense& d) {
  a.tensors[prefix + ".weight"] = d.weight;
  a.tensors[prefix + ".bias"] = row_matrix(d.bias);
}

Dense get_dense(const TensorArchive& a, const std::string& prefix) {
  return Dense{tensor(a, prefix + ".weight"), as_row(tensor(a, prefix + ".bias"))};
}

}  // namespace

std::string encode_checkpoint(const TensorArchive& archive) {
  json header;
  header["format"] = "LSCK";
  header["version"] = kCheckpointVersion;
  header["config"] = archive.config;
  header["tensors"] = json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, m] : archive.tensors) {
    header["tensors"].push_back({{"name", name},
                                 {"dtype", "float64"},
                                 {"shape", {m.rows(), m.cols()}},
                                 {"offset", offset}});
    offset += static_cast<std::uint64_t>(m.size()) * 8;
  }
  const std::string header_text = header.dump();

  std::string out(kMagic, 4);
  binio::put_le<std::uint32_t>(out, kCheckpointVersion);
  binio::put_le<std::uint64_t>(out, header_text.size());
  out += header_text;
  for (const auto& [name, m] : archive.tensors) {
    for (Eigen::Index i = 0; i < m.size(); ++i) binio::put_f64(out, m.data()[i]);
  }
  return out;
}

TensorArchive decode_checkpoint(const std::string& bytes) {
  binio::Reader in(bytes);
  if (!in.has(16) || std::memcmp(in.take(4), kMagic, 4) != 0) {
    throw Error(Errc::ParseError, "not a checkpoint (bad magic)");
  }
  const auto version = binio::get_le<std::uint32_t>(in.take(4));
  if (version != kCheckpointVersion) {
    throw Error(Errc::ParseError, "unsupported checkpoint version " + std::to_string(version));
  }
  const auto header_len = binio::get_le<std::uint64_t>(in.take(8));
  if (!in.has(header_len)) throw Error(Errc::ParseError, "truncated checkpoint header");
  const auto* hp = in.take(header_len);
  json header;
  try {
    header = json::parse(std::string(reinterpret_cast<const char*>(hp), header_len));
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("bad checkpoint header: ") + e.what());
  }
  const std::size_t payload = in.position();

  TensorArchive out;
  out.config = header.value("config", json::object());
  for (const auto& t : header.at("tensors")) {
    if (t.at("dtype") != "float64") throw Error(Errc::ParseError, "unsupported tensor dtype");
    const auto rows = t.at("shape").at(0).get<Eigen::Index>();
    const auto cols = t.at("shape").at(1).get<Eigen::Index>();
    const auto offset = t.at("offset").get<std::uint64_t>();
    const std::uint64_t size = static_cast<std::uint64_t>(rows * cols) * 8;
    if (payload + offset + size > bytes.size()) throw Error(Errc::ParseError, "truncated checkpoint payload");
    Matrix m(rows, cols);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + payload + offset;
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = binio::get_f64(p + 8 * i);
    out.tensors.emplace(t.at("name").get<std::string>(), std::move(m));
  }
  return out;
}

void write_checkpoint(const std::string& path, const TensorArchive& archive) {
  binio::write_file(path, encode_checkpoint(archive));
}

TensorArchive read_checkpoint(const std::string& path) { return decode_checkpoint(binio::read_file(path)); }

json to_json(const TrainerConfig& c) {
  return json{{"weights", {{"arcface", c.weights.arcface}, {"supcon", c.weights.supcon}, {"center", c.weights.center}}},
              {"scale", c.scale},
              {"margin", c.margin},
              {"temperature", c.temperature},
              {"center_learning_rate", c.center_learning_rate},
              {"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"learning_rate", c.learning_rate},
              {"momentum", c.momentum},
              {"stages",
               {{"warmup_epochs", c.stages.warmup_epochs},
                {"partial_epochs", c.stages.partial_epochs},
                {"partial_blocks", c.stages.partial_blocks},
                {"backbone_learning_rate", c.stages.backbone_learning_rate},
                {"full_lr_fraction", c.stages.full_lr_fraction}}},
              {"hidden_width", c.hidden_width},
              {"embedding_dim", c.embedding_dim},
              {"dropout", c.dropout},
              {"backbone_depth", c.backbone_depth},
              {"backbone_rank", c.backbone_rank},
              {"rng_seed", c.rng_seed}};
}

TrainerConfig trainer_config_from_json(const json& j) {
  TrainerConfig c;
  if (j.contains("weights")) {
    const auto& w = j.at("weights");
    c.weights.arcface = w.value("arcface", c.weights.arcface);
    c.weights.supcon = w.value("supcon", c.weights.supcon);
    c.weights.center = w.value("center", c.weights.center);
  }
  c.scale = j.value("scale", c.scale);
  c.margin = j.value("margin", c.margin);
  c.temperature = j.value("temperature", c.temperature);
  c.center_learning_rate = j.value("center_learning_rate", c.center_learning_rate);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.momentum = j.value("momentum", c.momentum);
  if (j.contains("stages")) {
    const auto& s = j.at("stages");
    c.stages.warmup_epochs = s.value("warmup_epochs", c.stages.warmup_epochs);
    c.stages.partial_epochs = s.value("partial_epochs", c.stages.partial_epochs);
    c.stages.partial_blocks = s.value("partial_blocks", c.stages.partial_blocks);
    c.stages.backbone_learning_rate = s.value("backbone_learning_rate", c.stages.backbone_learning_rate);
    c.stages.full_lr_fraction = s.value("full_lr_fraction", c.stages.full_lr_fraction);
  }
  c.hidden_width = j.value("hidden_width", c.hidden_width);
  c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
  c.dropout = j.value("dropout", c.dropout);
  c.backbone_depth = j.value("backbone_depth", c.backbone_depth);
  c.backbone_rank = j.value("backbone_rank", c.backbone_rank);
  c.rng_seed = j.value("rng_seed", c.rng_seed);
  return c;
}

TensorArchive to_archive(const MetricModel& model, const TrainerConfig& config) {
  TensorArchive a;
  a.config = {{"kind", "metric_model"}, {"trainer", to_json(config)}, {"class_names", model.class_names},
              {"dropout", model.projection.dropout}, {"bn_momentum", model.projection.norm.momentum},
              {"bn_eps", model.projection.norm.eps}, {"backbone_depth", model.backbone.blocks.size()}};
  for (std::size_t b = 0; b < model.backbone.blocks.size(); ++b) {
    put_dense(a, "backbone." + std::to_string(b) + ".down", model.backbone.blocks[b].down);
    put_dense(a, "backbone." + std::to_string(b) + ".up", model.backbone.blocks[b].up);
  }
  put_dense(a, "projection.hidden", model.projection.hidden);
  put_dense(a, "projection.output", model.projection.output);
  a.tensors["projection.norm.gamma"] = row_matrix(model.projection.norm.gamma);
  a.tensors["projection.norm.beta"] = row_matrix(model.projection.norm.beta);
  a.tensors["projection.norm.running_mean"] = row_matrix(model.projection.norm.running_mean);
  a.tensors["projection.norm.running_var"] = row_matrix(model.projection.norm.running_var);
  a.tensors["arcface.weights"] = model.arcface.weights;
  a.tensors["centers"] = model.centers.centers;
  a.config["arcface_scale"] = model.arcface.scale;
  a.config["arcface_margin"] = model.arcface.margin;
  a.config["center_learning_rate"] = model.centers.learning_rate;
  return a;
}

MetricModel metric_model_from_archive(const TensorArchive& a) {
  if (a.config.value("kind", "") != "metric_model") throw Error(Errc::ParseError, "checkpoint is not a metric model");
  MetricModel m;
  const auto depth = a.config.at("backbone_depth").get<std::size_t>();
  for (std::size_t b = 0; b < depth; ++b) {
    m.backbone.blocks.push_back(ResidualBlock{get_dense(a, "backbone." + std::to_string(b) + ".down"),
                                              get_dense(a, "backbone." + std::to_string(b) + ".up")});
  }
  m.projection.hidden = get_dense(a, "projection.hidden");
  m.projection.output = get_dense(a, "projection.output");
  m.projection.norm.gamma = as_row(tensor(a, "projection.norm.gamma"));
  m.projection.norm.beta = as_row(tensor(a, "projection.norm.beta"));
  m.projection.norm.running_mean = as_row(tensor(a, "projection.norm.running_mean"));
  m.projection.norm.running_var = as_row(tensor(a, "projection.norm.running_var"));
  m.projection.norm.momentum = a.config.at("bn_momentum").get<double>();
  m.projection.norm.eps = a.config.at("bn_eps").get<double>();
  m.projection.dropout = a.config.at("dropout").get<double>();
  m.arcface.weights = tensor(a, "arcface.weights");
  m.arcface.scale = a.config.at("arcface_scale").get<double>();
  m.arcface.margin = a.config.at("arcface_margin").get<double>();
  m.centers.centers = tensor(a, "centers");
  m.centers.learning_rate = a.config.at("center_learning_rate").get<double>();
  m.class_names = a.config.at("class_names").get<std::vector<std::string>>();
  return m;
}

TensorArchive to_archive(const LayoutClassifier& clf, const ClassifierConfig& config) {
  TensorArchive a;
  a.config = {{"kind", "layout_classifier"},
              {"class_names", clf.class_names},
              {"dropout", clf.dropout},
              {"epochs", config.epochs},
              {"batch_size", config.batch_size},
              {"learning_rate", config.learning_rate},
              {"momentum", config.momentum},
              {"test_fraction", config.test_fraction},
              {"min_class_size", config.min_class_size},
              {"hidden_width", config.hidden_width},
              {"rng_seed", config.rng_seed}};
  put_dense(a, "classifier.hidden", clf.hidden);
  put_dense(a, "classifier.output", clf.output);
  return a;
}

LayoutClassifier classifier_from_archive(const TensorArchive& a) {
  if (a.config.value("kind", "") != "layout_classifier") {
    throw Error(Errc::ParseError, "checkpoint is not a layout classifier");
  }
  LayoutClassifier clf;
  clf.hidden = get_dense(a, "classifier.hidden");
  clf.output = get_dense(a, "classifier.output");
  clf.dropout = a.config.at("dropout").get<double>();
  clf.class_names = a.config.at("class_names").get<std::vector<std::string>>();
  return clf;
}

}  // namespace layoutspace::learn
