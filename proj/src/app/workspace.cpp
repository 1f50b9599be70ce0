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

#include "layoutspace/app/workspace.hpp"

#include "layoutspace/core/binary_io.hpp"
#include "layoutspace/core/error.hpp"
#include "layoutspace/store/formats.hpp"

#include <algorithm>
#include <charconv>

namespace layoutspace::app {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(ClusterSpace space) { return space == ClusterSpace::Tsne ? "tsne" : "embedding"; }

ClusterSpace parse_cluster_space(std::string_view text) {
  if (text == "embedding") return ClusterSpace::Embedding;
  if (text == "tsne") return ClusterSpace::Tsne;
  throw Error(Errc::InvalidArgument, "cluster space must be 'embedding' or 'tsne', got '" + std::string(text) + "'");
}

json to_json(const StoredModel& s) {
  return {{"space", std::string(to_string(s.space))},
          {"projection", s.projection ? json(*s.projection) : json(nullptr)},
          {"model", cluster::to_json(s.model)}};
}

StoredModel stored_model_from_json(const json& j) {
  StoredModel s;
  try {
    s.space = parse_cluster_space(j.at("space").get<std::string>());
    if (!j.at("projection").is_null()) s.projection = j["projection"].get<std::string>();
    s.model = cluster::cluster_model_from_json(j.at("model"));
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("stored model: ") + e.what());
  }
  return s;
}

namespace {

json read_json(const fs::path& path) {
  const std::string text = binio::read_file(path.string());
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, "corrupt file '" + path.string() + "': " + e.what());
  }
}

void ensure_dir(const fs::path& d) {
  std::error_code ec;
  fs::create_directories(d, ec);
  if (ec) throw Error(Errc::IoError, "cannot create '" + d.string() + "': " + ec.message());
}

}  // namespace

Workspace::Workspace(fs::path root) : root_(std::move(root)), datasets_(root_ / "datasets") {}

fs::path Workspace::dir(const std::string& kind, const std::string& dataset_id) const {
  store::DatasetStore::check_id(dataset_id);
  return root_ / kind / dataset_id;
}

DatasetHandle Workspace::open_dataset(const std::string& ref) const {
  if (datasets_.contains(ref)) return {datasets_.snapshot(ref), true};
  std::error_code ec;
  if (!fs::is_regular_file(ref, ec)) {
    throw Error(Errc::UnknownDataset, "no dataset or embeddings file named '" + ref + "'");
  }
  auto imported = store::import_embeddings(ref, store::format_for_path(ref));
  auto d = std::make_shared<store::Dataset>();
  d->dataset_id = fs::path(ref).stem().string();
  d->dim = imported.dim;
  d->records = store::sorted_by_id(std::move(imported.records));
  d->provenance = "file:" + ref;
  return {store::Snapshot(std::move(d), std::make_shared<std::atomic<bool>>(true)), false};
}

void Workspace::remove_dataset(const std::string& dataset_id) {
  datasets_.remove(dataset_id);
  for (const char* kind : {"models", "projections", "triage", "checkpoints"}) {
    std::error_code ec;
    fs::remove_all(dir(kind, dataset_id), ec);
  }
}

std::vector<std::uint64_t> Workspace::model_versions(const std::string& dataset_id) const {
  std::vector<std::uint64_t> out;
  const fs::path d = dir("models", dataset_id);
  std::error_code ec;
  if (!fs::is_directory(d, ec)) return out;
  for (const auto& entry : fs::directory_iterator(d)) {
    const std::string name = entry.path().filename().string();
    if (name.size() < 7 || name.front() != 'v' || !name.ends_with(".json")) continue;
    std::uint64_t v = 0;
    const char* first = name.data() + 1;
    const char* last = name.data() + name.size() - 5;
    if (std::from_chars(first, last, v).ptr == last) out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

StoredModel Workspace::save_model(const std::string& dataset_id, StoredModel stored) {
  std::lock_guard lock(mutex_);
  const auto versions = model_versions(dataset_id);
  const std::uint64_t v = versions.empty() ? 1 : versions.back() + 1;
  stored.model.version = v;
  for (auto& entry : stored.model.log) {
    if (entry.contains("model_version")) entry["model_version"] = v;
  }
  const fs::path d = dir("models", dataset_id);
  ensure_dir(d);
  binio::write_file_atomic((d / ("v" + std::to_string(v) + ".json")).string(), to_json(stored).dump() + "\n");
  return stored;
}

StoredModel Workspace::load_model(const std::string& dataset_id, std::optional<std::uint64_t> version) const {
  const auto versions = model_versions(dataset_id);
  if (versions.empty()) throw Error(Errc::UnknownModel, "dataset '" + dataset_id + "' has no cluster models");
  const std::uint64_t v = version.value_or(versions.back());
  if (!std::binary_search(versions.begin(), versions.end(), v)) {
    throw Error(Errc::UnknownModel, "dataset '" + dataset_id + "' has no model version " + std::to_string(v));
  }
  return stored_model_from_json(read_json(dir("models", dataset_id) / ("v" + std::to_string(v) + ".json")));
}

void Workspace::save_projection(const std::string& dataset_id, const std::string& name, const StoredProjection& p) {
  store::DatasetStore::check_id(name);
  const fs::path d = dir("projections", dataset_id);
  ensure_dir(d);
  const json j = {{"snapshot_version", p.snapshot_version}, {"projection", cluster::to_json(p.result)}};
  binio::write_file_atomic((d / (name + ".json")).string(), j.dump() + "\n");
}

StoredProjection Workspace::load_projection(const std::string& dataset_id, const std::string& name) const {
  store::DatasetStore::check_id(name);
  const fs::path path = dir("projections", dataset_id) / (name + ".json");
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw Error(Errc::UnknownProjection, "dataset '" + dataset_id + "' has no projection '" + name + "'");
  }
  const json j = read_json(path);
  try {
    return {cluster::projection_from_json(j.at("projection")), j.at("snapshot_version").get<std::uint64_t>()};
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, "corrupt projection '" + path.string() + "': " + e.what());
  }
}

std::vector<std::string> Workspace::projection_names(const std::string& dataset_id) const {
  std::vector<std::string> out;
  const fs::path d = dir("projections", dataset_id);
  std::error_code ec;
  if (!fs::is_directory(d, ec)) return out;
  for (const auto& entry : fs::directory_iterator(d)) {
    if (entry.path().extension() == ".json") out.push_back(entry.path().stem().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

discovery::TriageBook Workspace::open_triage(const std::string& dataset_id) const {
  const fs::path d = dir("triage", dataset_id);
  ensure_dir(d);
  discovery::TriageBook book((d / "audit.jsonl").string());
  std::error_code ec;
  if (fs::is_regular_file(d / "queue.json", ec)) {
    std::vector<discovery::TriageItem> items;
    const json saved = read_json(d / "queue.json");
    for (const auto& j : saved.at("items")) items.push_back(discovery::triage_item_from_json(j));
    book.set_queue(std::move(items));
  }
  return book;
}

void Workspace::save_queue(const std::string& dataset_id, const std::vector<discovery::TriageItem>& items) {
  const fs::path d = dir("triage", dataset_id);
  ensure_dir(d);
  json arr = json::array();
  for (const auto& item : items) arr.push_back(discovery::to_json(item, true));
  binio::write_file_atomic((d / "queue.json").string(), json{{"items", arr}}.dump() + "\n");
}

fs::path Workspace::checkpoint_path(const std::string& dataset_id, const std::string& name) const {
  store::DatasetStore::check_id(name);
  const fs::path d = dir("checkpoints", dataset_id);
  ensure_dir(d);
  return d / (name + ".lsck");
}

PointSet model_points(const Workspace& ws, const DatasetHandle& ds, const StoredModel& stored) {
  if (stored.space == ClusterSpace::Embedding) return ds.snapshot.points();
  if (!stored.projection) throw Error(Errc::InvalidArgument, "t-SNE space model without a projection name");
  const auto p = ws.load_projection(ds.id(), *stored.projection);
  if (p.snapshot_version != ds.snapshot.version()) {
    throw Error(Errc::StaleModel, "projection '" + *stored.projection + "' was computed on snapshot " +
                                      std::to_string(p.snapshot_version) + ", dataset is at " +
                                      std::to_string(ds.snapshot.version()));
  }
  PointSet set;
  set.ids = p.result.sample_ids;
  set.points = p.result.coordinates;
  set.snapshot_version = p.snapshot_version;
  return set;
}

StoredModel bind_model(const Workspace& ws, const DatasetHandle& ds, std::optional<std::uint64_t> version,
                       PointSet* points_out) {
  if (!ds.stored) throw Error(Errc::InvalidArgument, "cluster models need an imported dataset, not a file");
  StoredModel stored = ws.load_model(ds.id(), version);
  PointSet set = model_points(ws, ds, stored);
  cluster::bind(stored.model, set);
  if (points_out) *points_out = std::move(set);
  return stored;
}

}  // namespace layoutspace::app
