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

#include "layoutspace/store/dataset.hpp"

#include "layoutspace/core/binary_io.hpp"
#include "layoutspace/core/error.hpp"
#include "layoutspace/store/formats.hpp"

#include <json.hpp>

namespace layoutspace::store {

namespace fs = std::filesystem;
using nlohmann::json;

const Dataset& Snapshot::data() const {
  if (!alive_->load()) {
    throw Error(Errc::StaleSnapshot, "dataset '" + data_->dataset_id + "' was deleted after this snapshot was taken");
  }
  return *data_;
}

PointSet Snapshot::points() const { return PointSet::from_records(data().records, version()); }

void DatasetStore::check_id(const std::string& id) {
  if (id.empty() || id.size() > 128) throw Error(Errc::InvalidArgument, "dataset id must have 1 to 128 characters");
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                    c == '-' || c == '.';
    if (!ok) throw Error(Errc::InvalidArgument, "dataset id may only contain letters, digits, '_', '-' and '.'");
  }
  if (id.front() == '.') throw Error(Errc::InvalidArgument, "dataset id must not start with '.'");
}

DatasetStore::DatasetStore(fs::path directory) : dir_(std::move(directory)) {
  std::error_code ec;
  fs::create_directories(*dir_, ec);
  if (ec) throw Error(Errc::IoError, "cannot create data directory '" + dir_->string() + "': " + ec.message());
  std::vector<fs::path> infos;
  for (const auto& entry : fs::directory_iterator(*dir_)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > 10 && name.ends_with(".info.json")) infos.push_back(entry.path());
  }
  std::sort(infos.begin(), infos.end());
  for (const auto& info_path : infos) {
    json info;
    try {
      info = json::parse(binio::read_file(info_path.string()));
    } catch (const json::exception& e) {
      throw Error(Errc::ParseError, "corrupt dataset info '" + info_path.string() + "': " + e.what());
    }
    auto d = std::make_shared<Dataset>();
    d->dataset_id = info.at("dataset_id").get<std::string>();
    d->dim = info.at("dim").get<std::size_t>();
    d->snapshot_version = info.at("snapshot_version").get<std::uint64_t>();
    d->provenance = info.value("provenance", "");
    const std::string packed = (*dir_ / (d->dataset_id + ".idem")).string();
    auto imported = import_embeddings(packed, Format::Packed);
    if (imported.dim != d->dim) throw Error(Errc::DimensionMismatch, "dataset '" + d->dataset_id + "' dimension mismatch");
    d->records = sorted_by_id(std::move(imported.records));
    const std::string id = d->dataset_id;
    entries_[id] = {std::move(d), std::make_shared<std::atomic<bool>>(true)};
  }
}

void DatasetStore::persist(const Dataset& d) const {
  if (!dir_) return;
  const fs::path base = *dir_ / d.dataset_id;
  const std::string packed = base.string() + ".idem";
  binio::write_file_atomic(packed, encode_packed(d.records, d.dim));
  binio::write_file_atomic(sidecar_path(packed), encode_sidecar(d.records));
  const json info = {{"dataset_id", d.dataset_id},
                     {"dim", d.dim},
                     {"snapshot_version", d.snapshot_version},
                     {"provenance", d.provenance}};
  binio::write_file_atomic(base.string() + ".info.json", info.dump(2) + "\n");
}

Snapshot DatasetStore::create(const std::string& id, std::vector<EmbeddingRecord> records, std::size_t dim,
                              std::string provenance) {
  check_id(id);
  if (dim == 0) throw Error(Errc::InvalidArgument, "dimension must be positive");
  validate_records(records, dim);
  auto d = std::make_shared<Dataset>();
  d->dataset_id = id;
  d->dim = dim;
  d->records = sorted_by_id(std::move(records));
  d->provenance = std::move(provenance);
  std::lock_guard lock(mutex_);
  if (entries_.count(id)) throw Error(Errc::Conflict, "dataset '" + id + "' already exists");
  persist(*d);
  Entry e{d, std::make_shared<std::atomic<bool>>(true)};
  entries_[id] = e;
  return Snapshot(e.data, e.alive);
}

Snapshot DatasetStore::snapshot(const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = entries_.find(id);
  if (it == entries_.end()) throw Error(Errc::UnknownDataset, "unknown dataset '" + id + "'");
  return Snapshot(it->second.data, it->second.alive);
}

bool DatasetStore::contains(const std::string& id) const {
  std::lock_guard lock(mutex_);
  return entries_.count(id) > 0;
}

std::vector<std::string> DatasetStore::list() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, e] : entries_) out.push_back(id);
  return out;
}

Snapshot DatasetStore::mutate(const std::string& id, const std::function<void(std::vector<EmbeddingRecord>&)>& edit) {
  std::lock_guard lock(mutex_);
  const auto it = entries_.find(id);
  if (it == entries_.end()) throw Error(Errc::UnknownDataset, "unknown dataset '" + id + "'");
  auto d = std::make_shared<Dataset>(*it->second.data);
  edit(d->records);
  validate_records(d->records, d->dim);
  d->records = sorted_by_id(std::move(d->records));
  ++d->snapshot_version;
  persist(*d);
  it->second.data = d;
  return Snapshot(it->second.data, it->second.alive);
}

void DatasetStore::remove(const std::string& id) {
  std::lock_guard lock(mutex_);
  const auto it = entries_.find(id);
  if (it == entries_.end()) throw Error(Errc::UnknownDataset, "unknown dataset '" + id + "'");
  it->second.alive->store(false);
  entries_.erase(it);
  if (dir_) {
    const fs::path base = *dir_ / id;
    std::error_code ec;
    fs::remove(base.string() + ".idem", ec);
    fs::remove(base.string() + ".idem.meta.jsonl", ec);
    fs::remove(base.string() + ".info.json", ec);
  }
}

}  // namespace layoutspace::store
