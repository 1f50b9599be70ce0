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

#include "layoutspace/service/service.hpp"

#include "layoutspace/app/operations.hpp"
#include "layoutspace/cluster/export.hpp"
#include "layoutspace/core/error.hpp"
#include "layoutspace/learn/checkpoint.hpp"
#include "layoutspace/store/formats.hpp"

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

namespace layoutspace::service {

using nlohmann::json;

namespace {

int http_status(Errc code) {
  switch (code) {
    case Errc::UnknownDataset:
    case Errc::UnknownItem:
    case Errc::UnknownJob:
    case Errc::UnknownModel:
    case Errc::UnknownProjection:
    case Errc::UnknownCluster:
      return 404;
    case Errc::Conflict:
    case Errc::DuplicateId:
    case Errc::AlreadyReviewed:
    case Errc::StaleModel:
    case Errc::StaleSnapshot:
    case Errc::SnapshotMismatch:
      return 409;
    case Errc::Unauthorized:
      return 401;
    default:
      break;
  }
  switch (errc_category(code)) {
    case ErrorCategory::Validation: return 400;
    case ErrorCategory::Computation: return 422;
    case ErrorCategory::Io: return 500;
  }
  return 500;
}

json envelope(std::string_view code, const std::string& message, json detail = json::object()) {
  return {{"code", code}, {"message", message}, {"detail", std::move(detail)}};
}

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(app::dump_sorted(body), "application/json");
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    json j = json::parse(req.body);
    if (!j.is_object()) throw Error(Errc::InvalidArgument, "request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw Error(Errc::ParseError, std::string("request body: ") + e.what());
  }
}

template <class T>
T param(const json& body, const char* key, T fallback) {
  if (!body.contains(key) || body[key].is_null()) return fallback;
  try {
    return body[key].get<T>();
  } catch (const json::exception&) {
    throw Error(Errc::InvalidArgument, std::string("field '") + key + "' has the wrong type");
  }
}

std::size_t query_size(const httplib::Request& req, const char* key, std::size_t fallback) {
  if (!req.has_param(key)) return fallback;
  const std::string v = req.get_param_value(key);
  try {
    std::size_t used = 0;
    const long long n = std::stoll(v, &used);
    if (used != v.size() || n < 0) throw std::invalid_argument(v);
    return static_cast<std::size_t>(n);
  } catch (const std::logic_error&) {
    throw Error(Errc::InvalidArgument, std::string("query parameter '") + key + "' must be a non-negative integer");
  }
}

std::optional<std::uint64_t> query_version(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  return query_size(req, key, 0);
}

enum class JobState { Queued, Running, Done, Failed, Canceled };

std::string_view to_string(JobState s) {
  switch (s) {
    case JobState::Queued: return "queued";
    case JobState::Running: return "running";
    case JobState::Done: return "done";
    case JobState::Failed: return "failed";
    case JobState::Canceled: return "canceled";
  }
  return "failed";
}

struct Job {
  std::string id;
  std::string dataset;
  std::string kind;
  json params;
  JobState state = JobState::Queued;
  std::atomic<double> progress{0.0};
  std::atomic<bool> cancel{false};
  json result;
  json result_ref;
  json error;
  std::thread worker;
};

struct Book {
  std::mutex mutex;
  discovery::TriageBook book;
};

struct CachedGraph {
  std::uint64_t snapshot_version = 0;
  discovery::GraphParams params;
  std::shared_ptr<const discovery::SimilarityGraph> graph;
};

bool is_active(JobState s) { return s == JobState::Queued || s == JobState::Running; }

}  // namespace

struct TriageService::Impl {
  app::Workspace& ws;
  app::Defaults defaults;
  httplib::Server server;
  std::thread listener;

  std::mutex mutex;  // guards every map below and Job state fields
  std::map<std::string, std::shared_ptr<Job>> jobs;
  std::uint64_t next_job = 1;
  std::map<std::string, std::shared_ptr<std::mutex>> write_locks;
  std::map<std::string, std::shared_ptr<Book>> books;
  std::map<std::string, CachedGraph> graphs;
  std::map<std::string, std::pair<int, json>> replies;  // idempotency cache

  std::mutex stop_mutex;
  std::condition_variable stopped_cv;
  bool stopped = false;

  Impl(app::Workspace& w, app::Defaults d) : ws(w), defaults(std::move(d)) { routes(); }

  std::shared_ptr<std::mutex> write_lock(const std::string& ds) {
    std::lock_guard lock(mutex);
    auto& m = write_locks[ds];
    if (!m) m = std::make_shared<std::mutex>();
    return m;
  }

  app::DatasetHandle stored_dataset(const std::string& id) {
    if (!ws.datasets().contains(id)) throw Error(Errc::UnknownDataset, "unknown dataset '" + id + "'");
    return ws.open_dataset(id);
  }

  std::shared_ptr<Book> book(const std::string& ds) {
    std::lock_guard lock(mutex);
    auto& b = books[ds];
    if (!b) {
      b = std::make_shared<Book>();
      b->book = ws.open_triage(ds);
    }
    return b;
  }

  std::shared_ptr<const discovery::SimilarityGraph> graph(const app::DatasetHandle& ds,
                                                          const discovery::GraphParams& params) {
    {
      std::lock_guard lock(mutex);
      const auto it = graphs.find(ds.id());
      if (it != graphs.end() && it->second.snapshot_version == ds.snapshot.version() &&
          it->second.params.k_neighbors == params.k_neighbors &&
          it->second.params.min_similarity == params.min_similarity) {
        return it->second.graph;
      }
    }
    auto g = std::make_shared<const discovery::SimilarityGraph>(
        discovery::build_similarity_graph(ds.snapshot.points(), params));
    std::lock_guard lock(mutex);
    graphs[ds.id()] = {ds.snapshot.version(), params, g};
    return g;
  }

  // ---- request plumbing ----

  using Handler = std::function<json(const httplib::Request&, const json& body, int& status)>;

  /// Wraps a handler with body parsing, the error envelope and, for
  /// mutating routes, replay of earlier replies keyed by request_id.
  httplib::Server::Handler wrap(Handler h, bool mutating) {
    return [this, h = std::move(h), mutating](const httplib::Request& req, httplib::Response& res) {
      try {
        const json body = parse_body(req);
        std::string key;
        if (mutating) {
          std::string rid = param<std::string>(body, "request_id", "");
          if (rid.empty() && req.has_header("Idempotency-Key")) rid = req.get_header_value("Idempotency-Key");
          if (!rid.empty()) {
            key = req.method + " " + req.path + " " + rid;
            std::lock_guard lock(mutex);
            if (const auto it = replies.find(key); it != replies.end()) {
              send(res, it->second.first, it->second.second);
              return;
            }
          }
        }
        int status = 200;
        json out = h(req, body, status);
        if (!key.empty()) {
          std::lock_guard lock(mutex);
          replies.emplace(key, std::make_pair(status, out));
        }
        send(res, status, out);
      } catch (const Error& e) {
        json detail = json::object();
        if (e.row()) detail["row"] = *e.row();
        send(res, http_status(e.code()), envelope(errc_name(e.code()), e.what(), detail));
      } catch (const json::exception& e) {
        send(res, 400, envelope("InvalidArgument", e.what()));
      } catch (const std::exception& e) {
        send(res, 500, envelope("InternalError", e.what()));
      }
    };
  }

  void routes() {
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof yes);
    });
    server.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
      if (defaults.token.empty() || req.path == "/health") return httplib::Server::HandlerResponse::Unhandled;
      if (req.get_header_value("Authorization") == "Bearer " + defaults.token) {
        return httplib::Server::HandlerResponse::Unhandled;
      }
      send(res, 401, envelope("Unauthorized", "missing or wrong bearer token"));
      return httplib::Server::HandlerResponse::Handled;
    });
    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (res.status == 404 && res.body.empty()) {
        send(res, 404, envelope("NotFound", "no route for " + req.method + " " + req.path));
      }
    });

    server.Get("/health", wrap([](auto&, auto&, int&) { return json{{"status", "ok"}}; }, false));

    server.Get("/datasets", wrap([this](auto&, auto&, int&) {
                 json arr = json::array();
                 for (const auto& id : ws.datasets().list()) arr.push_back(dataset_info(stored_dataset(id), false));
                 return json{{"datasets", arr}};
               }, false));
    server.Post("/datasets", wrap([this](auto&, const json& b, int& s) { return import_dataset(b, s); }, true));
    server.Get(R"(/datasets/([^/]+))", wrap([this](const httplib::Request& req, auto&, int&) {
                 return dataset_info(stored_dataset(req.matches[1]), true);
               }, false));

    server.Post(R"(/datasets/([^/]+)/jobs)", wrap([this](const httplib::Request& req, const json& b, int& s) {
                  return submit_job(req.matches[1], b, s);
                }, true));
    server.Get(R"(/jobs/([^/]+))", wrap([this](const httplib::Request& req, auto&, int&) {
                 return job_json(find_job(req.matches[1]));
               }, false));
    server.Delete(R"(/jobs/([^/]+))", wrap([this](const httplib::Request& req, auto&, int&) {
                    auto job = find_job(req.matches[1]);
                    job->cancel = true;
                    std::lock_guard lock(mutex);
                    if (job->state == JobState::Queued) job->state = JobState::Canceled;
                    return job_json_locked(*job);
                  }, true));

    server.Get(R"(/datasets/([^/]+)/clusters)", wrap([this](const httplib::Request& req, auto&, int&) {
                 const auto ds = stored_dataset(req.matches[1]);
                 const auto stored = app::bind_model(ws, ds, query_version(req, "model"));
                 json out = cluster::model_summary(stored.model);
                 out["space"] = std::string(app::to_string(stored.space));
                 if (stored.projection) out["projection"] = *stored.projection;
                 out["versions"] = ws.model_versions(ds.id());
                 return out;
               }, false));
    server.Get(R"(/datasets/([^/]+)/clusters/(-?\d+)/members)",
               wrap([this](const httplib::Request& req, auto&, int&) { return members(req); }, false));

    server.Post(R"(/datasets/([^/]+)/refine)", wrap([this](const httplib::Request& req, const json& b, int&) {
                  return refine(req.matches[1], b);
                }, true));
    server.Get(R"(/datasets/([^/]+)/projection)",
               wrap([this](const httplib::Request& req, auto&, int&) { return projection(req); }, false));
    server.Get(R"(/datasets/([^/]+)/anomalies)", wrap([this](const httplib::Request& req, auto&, int&) {
                 const auto ds = stored_dataset(req.matches[1]);
                 PointSet points;
                 const auto stored = app::bind_model(ws, ds, query_version(req, "model"), &points);
                 const auto report = discovery::zscore_anomalies(stored.model, points);
                 const std::size_t top = query_size(req, "top", 20);
                 json arr = json::array();
                 for (std::size_t i = 0; i < report.scores.size() && i < top; ++i) {
                   arr.push_back(discovery::to_json(report.scores[i]));
                 }
                 return json{{"snapshot_version", report.snapshot_version},
                             {"model_version", report.model_version},
                             {"total", report.scores.size()},
                             {"scores", arr}};
               }, false));
    server.Post(R"(/datasets/([^/]+)/expand)", wrap([this](const httplib::Request& req, const json& b, int&) {
                  return expand(req.matches[1], b);
                }, true));
    server.Get(R"(/datasets/([^/]+)/queue)",
               wrap([this](const httplib::Request& req, auto&, int&) { return queue(req); }, false));
    server.Post("/verdicts", wrap([this](auto&, const json& b, int&) { return verdict(b); }, true));
  }

  // ---- datasets ----

  json dataset_info(const app::DatasetHandle& ds, bool detailed) {
    const auto& d = ds.data();
    std::size_t labelled = 0;
    for (const auto& r : d.records) labelled += r.layout_label.has_value();
    json out = {{"dataset_id", d.dataset_id},
                {"count", d.records.size()},
                {"dim", d.dim},
                {"snapshot_version", d.snapshot_version},
                {"provenance", d.provenance},
                {"labelled", labelled}};
    if (detailed) {
      out["model_versions"] = ws.model_versions(d.dataset_id);
      out["projections"] = ws.projection_names(d.dataset_id);
    }
    return out;
  }

  json import_dataset(const json& b, int& status) {
    const std::string id = param<std::string>(b, "dataset_id", "");
    if (id.empty()) throw Error(Errc::InvalidArgument, "dataset_id is required");
    store::ImportedRecords imported;
    if (b.contains("content")) {
      imported = store::decode_jsonl(param<std::string>(b, "content", ""));
    } else if (b.contains("path")) {
      const auto path = param<std::string>(b, "path", "");
      const auto fmt = b.contains("format") ? store::parse_format(param<std::string>(b, "format", ""))
                                            : store::format_for_path(path);
      imported = store::import_embeddings(path, fmt);
    } else {
      throw Error(Errc::InvalidArgument, "give either 'content' (jsonl text) or 'path'");
    }
    auto lock = write_lock(id);
    std::lock_guard guard(*lock);
    const auto snap = ws.datasets().create(id, std::move(imported.records), imported.dim, "service-import");
    status = 201;
    return dataset_info(app::DatasetHandle{snap, true}, false);
  }

  // ---- jobs ----

  std::shared_ptr<Job> find_job(const std::string& id) {
    std::lock_guard lock(mutex);
    const auto it = jobs.find(id);
    if (it == jobs.end()) throw Error(Errc::UnknownJob, "unknown job '" + id + "'");
    return it->second;
  }

  json job_json_locked(const Job& job) const {
    json out = {{"job_id", job.id},           {"dataset_id", job.dataset}, {"kind", job.kind},
                {"state", to_string(job.state)}, {"progress", job.progress.load()}, {"params", job.params}};
    if (!job.result.is_null()) out["result"] = job.result;
    if (!job.result_ref.is_null()) out["result_ref"] = job.result_ref;
    if (!job.error.is_null()) out["error"] = job.error;
    return out;
  }

  json job_json(const std::shared_ptr<Job>& job) {
    std::lock_guard lock(mutex);
    return job_json_locked(*job);
  }

  json submit_job(const std::string& ds_id, const json& b, int& status) {
    const std::string kind = param<std::string>(b, "kind", "");
    if (kind != "kmeans" && kind != "tsne" && kind != "train" && kind != "metrics") {
      throw Error(Errc::InvalidArgument, "job kind must be kmeans, tsne, train or metrics");
    }
    stored_dataset(ds_id);
    json params = b.value("params", json::object());
    if (!params.is_object()) throw Error(Errc::InvalidArgument, "params must be an object");

    auto job = std::make_shared<Job>();
    {
      std::lock_guard lock(mutex);
      for (const auto& [_, other] : jobs) {
        if (other->dataset == ds_id && other->kind == kind && is_active(other->state)) {
          throw Error(Errc::Conflict, "job " + other->id + " of kind " + kind + " is still active on this dataset");
        }
      }
      job->id = "job-" + std::to_string(next_job++);
      job->dataset = ds_id;
      job->kind = kind;
      job->params = params;
      jobs[job->id] = job;
    }
    job->worker = std::thread([this, job] { run_job(job); });
    status = 202;
    return job_json(job);
  }

  void run_job(const std::shared_ptr<Job>& job) {
    {
      std::lock_guard lock(mutex);
      if (job->state != JobState::Queued) return;
      job->state = JobState::Running;
    }
    const app::Progress progress = [job](double f) {
      job->progress = f;
      return !job->cancel.load();
    };
    json result, ref;
    try {
      const auto ds = stored_dataset(job->dataset);
      if (job->kind == "kmeans") {
        run_kmeans(*job, ds, progress, result, ref);
      } else if (job->kind == "tsne") {
        run_tsne(*job, ds, progress, result, ref);
      } else if (job->kind == "train") {
        run_train(*job, ds, progress, result, ref);
      } else {
        run_metrics(*job, ds, result);
      }
      std::lock_guard lock(mutex);
      if (job->cancel) {
        job->state = JobState::Canceled;
      } else {
        job->state = JobState::Done;
        job->progress = 1.0;
        job->result = std::move(result);
        job->result_ref = std::move(ref);
      }
    } catch (const Error& e) {
      std::lock_guard lock(mutex);
      if (e.code() == Errc::Canceled || job->cancel) {
        job->state = JobState::Canceled;
      } else {
        job->state = JobState::Failed;
        job->error = envelope(errc_name(e.code()), e.what());
      }
    } catch (const std::exception& e) {
      std::lock_guard lock(mutex);
      job->state = JobState::Failed;
      job->error = envelope("InternalError", e.what());
    }
  }

  /// Persists only when the job has not been canceled, under the dataset lock.
  template <class F>
  void commit(const Job& job, F&& save) {
    auto lock = write_lock(job.dataset);
    std::lock_guard guard(*lock);
    if (job.cancel) throw Error(Errc::Canceled, "job canceled");
    save();
  }

  void run_kmeans(const Job& job, const app::DatasetHandle& ds, const app::Progress& progress, json& result,
                  json& ref) {
    const json& p = job.params;
    app::ClusterRequest req;
    if (p.contains("k")) req.k = param<std::size_t>(p, "k", 0);
    req.k_min = param<std::size_t>(p, "k_min", req.k_min);
    req.k_max = param<std::size_t>(p, "k_max", req.k_max);
    req.space = app::parse_cluster_space(param<std::string>(p, "space", "embedding"));
    if (p.contains("projection")) req.projection = param<std::string>(p, "projection", "");
    req.rng_seed = param<std::uint64_t>(p, "seed", 0);
    auto outcome = app::fit_clusters(app::request_points(ws, ds, req), req, defaults, progress);
    json summary = cluster::model_summary(outcome.stored.model);
    for (const char* k : {"version", "parent_version", "log"}) summary.erase(k);
    if (outcome.selection) summary["selection"] = app::to_json(*outcome.selection);
    result = summary;
    commit(job, [&] { outcome.stored = ws.save_model(ds.id(), std::move(outcome.stored)); });
    ref = {{"model_version", outcome.stored.model.version}};
  }

  void run_tsne(const Job& job, const app::DatasetHandle& ds, const app::Progress& progress, json& result,
                json& ref) {
    const json& p = job.params;
    cluster::TsneParams params = defaults.tsne;
    params.perplexity = param<double>(p, "perplexity", params.perplexity);
    params.iterations = param<std::size_t>(p, "iterations", params.iterations);
    params.theta = param<double>(p, "theta", params.theta);
    params.learning_rate = param<double>(p, "learning_rate", params.learning_rate);
    params.rng_seed = param<std::uint64_t>(p, "seed", 0);
    const auto proj = cluster::tsne_project(ds.snapshot.points(), params, progress);
    result = {{"n", proj.sample_ids.size()}, {"kl_divergence", proj.kl_divergence}, {"barnes_hut", proj.barnes_hut}};
    const std::string name = param<std::string>(p, "name", job.id);
    commit(job, [&] { ws.save_projection(ds.id(), name, {proj, ds.snapshot.version()}); });
    ref = {{"projection", name}};
  }

  void run_train(const Job& job, const app::DatasetHandle& ds, const app::Progress& progress, json& result,
                 json& ref) {
    const json& p = job.params;
    learn::TrainerConfig cfg = defaults.train;
    cfg.weights.arcface = param<double>(p, "arcface", cfg.weights.arcface);
    cfg.weights.supcon = param<double>(p, "supcon", cfg.weights.supcon);
    cfg.weights.center = param<double>(p, "center", cfg.weights.center);
    cfg.epochs = param<std::size_t>(p, "epochs", cfg.epochs);
    cfg.batch_size = param<std::size_t>(p, "batch_size", cfg.batch_size);
    cfg.learning_rate = param<double>(p, "learning_rate", cfg.learning_rate);
    cfg.embedding_dim = param<Eigen::Index>(p, "embedding_dim", cfg.embedding_dim);
    cfg.hidden_width = param<Eigen::Index>(p, "hidden", cfg.hidden_width);
    cfg.backbone_rank = param<Eigen::Index>(p, "rank", cfg.backbone_rank);
    cfg.rng_seed = param<std::uint64_t>(p, "seed", 0);
    const auto trained = learn::train_metric_head(ds.data().records, cfg, progress);
    result = app::to_json(trained);
    const std::string name = param<std::string>(p, "name", job.id);
    const auto path = ws.checkpoint_path(ds.id(), name);
    commit(job, [&] { learn::write_checkpoint(path.string(), learn::to_archive(trained.model, cfg)); });
    ref = {{"checkpoint", name}};
  }

  void run_metrics(const Job& job, const app::DatasetHandle& ds, json& result) {
    const json& p = job.params;
    const DistanceMetric metric =
        p.contains("metric") ? parse_metric(param<std::string>(p, "metric", "")) : defaults.metric;
    std::optional<SplitTag> split;
    if (p.contains("split")) split = parse_split_tag(param<std::string>(p, "split", ""));
    auto records = app::filter_split(ds.data().records, split);
    std::string base = "input";
    if (app::parse_label_source(param<std::string>(p, "labels", "layout")) == app::LabelSource::Cluster) {
      std::optional<std::uint64_t> version;
      if (p.contains("model")) version = param<std::uint64_t>(p, "model", 0);
      const auto stored = app::bind_model(ws, ds, version);
      records = app::label_by_cluster(records, stored.model);
      base = "model-v" + std::to_string(stored.model.version);
    }
    json rows = json::array({app::to_json(app::metrics_row(base, records, metric))});
    for (const auto& name : param<std::vector<std::string>>(p, "checkpoints", {})) {
      const auto archive = learn::read_checkpoint(ws.checkpoint_path(ds.id(), name).string());
      const auto model = learn::metric_model_from_archive(archive);
      auto row = app::metrics_row(name, records, metric, &model);
      row.weights = learn::trainer_config_from_json(archive.config.at("trainer")).weights;
      rows.push_back(app::to_json(row));
    }
    result = {{"rows", rows}};
  }

  // ---- queries ----

  json members(const httplib::Request& req) {
    const auto ds = stored_dataset(req.matches[1]);
    const int cid = std::stoi(req.matches[2]);
    const auto stored = app::bind_model(ws, ds, query_version(req, "model"));
    const auto& m = stored.model;
    if (cid != cluster::kNoise && !m.has_cluster(cid)) {
      throw Error(Errc::UnknownCluster, "model v" + std::to_string(m.version) + " has no cluster " + std::to_string(cid));
    }
    auto idx = m.members(cid);
    const std::string sort = req.has_param("sort") ? req.get_param_value("sort") : "z";
    if (sort == "z") {
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const double za = m.zscore(a), zb = m.zscore(b);
        return za != zb ? za > zb : m.sample_ids[a] < m.sample_ids[b];
      });
    } else if (sort == "id") {
      std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return m.sample_ids[a] < m.sample_ids[b]; });
    } else {
      throw Error(Errc::InvalidArgument, "sort must be z or id");
    }
    const std::size_t offset = query_size(req, "offset", 0);
    const std::size_t limit = query_size(req, "limit", 100);
    json arr = json::array();
    for (std::size_t i = offset; i < idx.size() && i < offset + limit; ++i) {
      const std::size_t s = idx[i];
      arr.push_back({{"sample_id", m.sample_ids[s]}, {"z", m.zscore(s)}, {"centroid_distance", m.centroid_distance[s]}});
    }
    return {{"cluster_id", cid}, {"model_version", m.version}, {"total", idx.size()}, {"offset", offset},
            {"members", arr}};
  }

  json refine(const std::string& ds_id, const json& b) {
    const auto ds = stored_dataset(ds_id);
    if (!b.contains("ops") || !b["ops"].is_array() || b["ops"].empty()) {
      throw Error(Errc::InvalidArgument, "ops must be a non-empty array");
    }
    std::vector<cluster::RefineOp> ops;
    for (const auto& j : b["ops"]) ops.push_back(cluster::refine_op_from_json(j));
    std::optional<std::uint64_t> version;
    if (b.contains("model")) version = param<std::uint64_t>(b, "model", 0);
    auto lock = write_lock(ds_id);
    std::lock_guard guard(*lock);
    PointSet points;
    app::StoredModel next = app::bind_model(ws, ds, version, &points);
    next.model = cluster::refine_clusters(next.model, points, ops);
    next = ws.save_model(ds_id, std::move(next));
    return cluster::model_summary(next.model);
  }

  json projection(const httplib::Request& req) {
    const auto ds = stored_dataset(req.matches[1]);
    std::string name;
    if (req.has_param("job")) {
      const auto job = find_job(req.get_param_value("job"));
      std::lock_guard lock(mutex);
      if (job->kind != "tsne") throw Error(Errc::InvalidArgument, job->id + " is not a tsne job");
      if (job->state != JobState::Done) {
        throw Error(Errc::Conflict, job->id + " is " + std::string(to_string(job->state)));
      }
      name = job->result_ref.at("projection").get<std::string>();
    } else if (req.has_param("name")) {
      name = req.get_param_value("name");
    } else {
      throw Error(Errc::InvalidArgument, "give ?job= or ?name=");
    }
    const auto p = ws.load_projection(ds.id(), name);
    std::optional<app::StoredModel> stored;
    if (req.has_param("model") || !ws.model_versions(ds.id()).empty()) {
      stored = app::bind_model(ws, ds, query_version(req, "model"));
    }
    json rows = json::array();
    std::istringstream lines(cluster::export_rows_jsonl(stored ? &stored->model : nullptr, &p.result));
    for (std::string line; std::getline(lines, line);) {
      if (!line.empty()) rows.push_back(json::parse(line));
    }
    json out = {{"projection", name}, {"snapshot_version", p.snapshot_version},
                {"kl_divergence", p.result.kl_divergence}, {"rows", rows}};
    if (stored) out["model_version"] = stored->model.version;
    return out;
  }

  json expand(const std::string& ds_id, const json& b) {
    const auto ds = stored_dataset(ds_id);
    discovery::GraphParams gp = defaults.graph;
    gp.k_neighbors = param<std::size_t>(b, "k", gp.k_neighbors);
    gp.min_similarity = param<double>(b, "min_similarity", gp.min_similarity);
    discovery::ExpansionParams params = defaults.expand;
    params.threshold = param<double>(b, "threshold", params.threshold);
    params.max_hops = param<std::size_t>(b, "max_hops", params.max_hops);
    auto seeds = param<std::vector<std::string>>(b, "seeds", {});
    if (param<bool>(b, "confirmed", false)) {
      auto bk = book(ds_id);
      std::lock_guard lock(bk->mutex);
      for (const auto& s : bk->book.seeds()) seeds.push_back(s);
    }
    return discovery::to_json(discovery::expand_from_seeds(*graph(ds, gp), seeds, params));
  }

  json queue(const httplib::Request& req) {
    const auto ds = stored_dataset(req.matches[1]);
    auto bk = book(ds.id());
    const bool refresh = req.has_param("refresh") && req.get_param_value("refresh") != "0";
    auto lock = write_lock(ds.id());
    std::lock_guard guard(*lock);
    std::lock_guard book_guard(bk->mutex);
    if (refresh || req.has_param("model") || bk->book.queue().empty()) {
      const auto outcome = app::build_queue(ws, ds, query_version(req, "model"), bk->book.seeds(), defaults);
      ws.save_queue(ds.id(), outcome.items);
      bk->book.set_queue(outcome.items);
    }
    const auto items = bk->book.queue();
    const std::size_t offset = query_size(req, "offset", 0);
    const std::size_t limit = query_size(req, "limit", 50);
    json arr = json::array();
    for (std::size_t i = offset; i < items.size() && i < offset + limit; ++i) {
      arr.push_back(discovery::to_json(items[i], true));
    }
    return {{"total", items.size()}, {"offset", offset}, {"items", arr}};
  }

  json verdict(const json& b) {
    const auto item_id = param<std::string>(b, "item_id", "");
    const auto reviewer = param<std::string>(b, "reviewer", "");
    const auto verdict = param<std::string>(b, "verdict", "");
    if (item_id.empty()) throw Error(Errc::InvalidArgument, "item_id is required");
    if (reviewer.empty()) throw Error(Errc::InvalidArgument, "reviewer is required");
    const auto state = discovery::parse_review_state(verdict);
    std::string ds_id = param<std::string>(b, "dataset_id", param<std::string>(b, "dataset", ""));
    if (ds_id.empty()) {
      for (const auto& id : ws.datasets().list()) {
        auto bk = book(id);
        std::lock_guard lock(bk->mutex);
        for (const auto& item : bk->book.queue()) {
          if (item.item_id == item_id) ds_id = id;
        }
        if (!ds_id.empty()) break;
      }
      if (ds_id.empty()) throw Error(Errc::UnknownItem, "no queue contains item '" + item_id + "'");
    }
    stored_dataset(ds_id);
    auto bk = book(ds_id);
    std::lock_guard lock(bk->mutex);
    const auto item = bk->book.record_verdict(item_id, state, reviewer,
                                              param<std::string>(b, "timestamp", app::utc_timestamp()));
    json out = discovery::to_json(item);
    out["dataset_id"] = ds_id;
    return out;
  }
};

TriageService::TriageService(app::Workspace& workspace, app::Defaults defaults)
    : impl_(std::make_unique<Impl>(workspace, std::move(defaults))) {}

TriageService::~TriageService() {
  stop();
  std::vector<std::shared_ptr<Job>> jobs;
  {
    std::lock_guard lock(impl_->mutex);
    for (auto& [_, job] : impl_->jobs) {
      job->cancel = true;
      jobs.push_back(job);
    }
  }
  for (auto& job : jobs) {
    if (job->worker.joinable()) job->worker.join();
  }
}

int TriageService::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw Error(Errc::BindError, "cannot bind " + host + ":" + std::to_string(port));
  impl_->listener = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void TriageService::wait() {
  std::unique_lock lock(impl_->stop_mutex);
  impl_->stopped_cv.wait(lock, [this] { return impl_->stopped; });
}

void TriageService::stop() {
  impl_->server.stop();
  if (impl_->listener.joinable() && impl_->listener.get_id() != std::this_thread::get_id()) impl_->listener.join();
  {
    std::lock_guard lock(impl_->stop_mutex);
    impl_->stopped = true;
  }
  impl_->stopped_cv.notify_all();
}

}  // namespace layoutspace::service
