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
#include "layoutspace/app/operations.hpp"
#include "layoutspace/app/selftest.hpp"
#include "layoutspace/app/workspace.hpp"
#include "layoutspace/cluster/export.hpp"
#include "layoutspace/cluster/tsne.hpp"
#include "layoutspace/core/binary_io.hpp"
#include "layoutspace/core/error.hpp"
#include "layoutspace/core/vector_ops.hpp"
#include "layoutspace/learn/checkpoint.hpp"
#include "layoutspace/learn/classifier.hpp"
#include "layoutspace/service/service.hpp"
#include "layoutspace/store/formats.hpp"
#include "layoutspace/store/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <csignal>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace layoutspace;

namespace {

struct Globals {
  std::string data_dir;
  std::string config_path;
  std::vector<std::string> overrides;
  bool json_output = false;
};

/// What a subcommand hands back: a JSON payload plus optional text for humans.
struct Output {
  Output(json p, std::string t = {}, int code = 0) : payload(std::move(p)), text(std::move(t)), exit_code(code) {}

  json payload;
  std::string text;
  int exit_code;
};

struct Context {
  Globals g;
  app::Defaults defaults;
  std::unique_ptr<app::Workspace> ws;

  app::Workspace& workspace() {
    if (!ws) ws = std::make_unique<app::Workspace>(app::resolve_data_dir(
                     g.data_dir.empty() ? std::nullopt : std::optional<std::string>(g.data_dir)));
    return *ws;
  }
};

int exit_code_for(Errc code) {
  switch (errc_category(code)) {
    case ErrorCategory::Validation: return 2;
    case ErrorCategory::Computation: return 3;
    case ErrorCategory::Io: return 4;
  }
  return 4;
}

void print_envelope(std::string_view code, const std::string& message, const json& detail) {
  std::cerr << json{{"code", code}, {"message", message}, {"detail", detail}}.dump() << "\n";
}

store::Format format_of(const std::string& flag, const std::string& path) {
  return flag.empty() ? store::format_for_path(path) : store::parse_format(flag);
}

std::optional<std::uint64_t> opt_version(std::int64_t v) {
  if (v < 0) return std::nullopt;
  return static_cast<std::uint64_t>(v);
}

void write_text(const std::string& path, const std::string& text) { binio::write_file_atomic(path, text); }

std::string human(const json& j) {
  std::string out;
  for (const auto& [key, value] : j.items()) {
    if (value.is_array()) {
      out += key + ": " + std::to_string(value.size()) + " entries\n";
      std::size_t shown = 0;
      for (const auto& v : value) {
        if (++shown > 20) {
          out += "  ...\n";
          break;
        }
        out += "  " + v.dump() + "\n";
      }
    } else if (value.is_string()) {
      out += key + ": " + value.get<std::string>() + "\n";
    } else {
      out += key + ": " + value.dump() + "\n";
    }
  }
  return out;
}

learn::MetricModel load_metric_model(const std::string& path, learn::TrainerConfig* config = nullptr) {
  const auto archive = learn::read_checkpoint(path);
  if (config) *config = learn::trainer_config_from_json(archive.config.at("trainer"));
  return learn::metric_model_from_archive(archive);
}

cluster::RefineOp parse_op(const std::string& text) {
  auto fail = [&] {
    throw Error(Errc::InvalidArgument, "cannot parse refinement op '" + text +
                                           "' (expected split:ID, merge:A,B, remove-outliers:Z[@ID] or trim:P[@ID])");
  };
  const auto colon = text.find(':');
  if (colon == std::string::npos) fail();
  const std::string verb = text.substr(0, colon);
  std::string arg = text.substr(colon + 1);
  int scope = -1;
  if (const auto at = arg.find('@'); at != std::string::npos) {
    try {
      scope = std::stoi(arg.substr(at + 1));
    } catch (const std::exception&) {
      fail();
    }
    arg = arg.substr(0, at);
  }
  try {
    if (verb == "split") return cluster::RefineOp::split(std::stoi(arg));
    if (verb == "merge") {
      const auto comma = arg.find(',');
      if (comma == std::string::npos) fail();
      return cluster::RefineOp::merge(std::stoi(arg.substr(0, comma)), std::stoi(arg.substr(comma + 1)));
    }
    if (verb == "remove-outliers") return cluster::RefineOp::remove_outliers(std::stod(arg), scope);
    if (verb == "trim") return cluster::RefineOp::trim(std::stod(arg), scope);
  } catch (const std::logic_error&) {
    fail();
  }
  fail();
  return {};
}

volatile std::sig_atomic_t g_stop = 0;

void on_signal(int) { g_stop = 1; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"layoutspace: embedding-space analytics for document layout fraud discovery"};
  cli.require_subcommand(1);
  Context ctx;
  cli.add_option("--data-dir", ctx.g.data_dir, "Data directory (default $LAYOUTSPACE_DATA_DIR or ./layoutspace-data)");
  cli.add_option("--config", ctx.g.config_path, "Config file overriding the built-in defaults");
  cli.add_option("--set", ctx.g.overrides, "Override one config key, e.g. --set expand.threshold=0.8");
  cli.add_flag("--json", ctx.g.json_output, "Machine-readable output with sorted keys");

  std::function<Output()> action;

  // ---- import ----
  struct {
    std::string file, id, format;
  } imp;
  auto* c_import = cli.add_subcommand("import", "Import an embeddings file into the data directory");
  c_import->add_option("file", imp.file, "jsonl or packed (.idem) file")->required();
  c_import->add_option("--id", imp.id, "Dataset id (default: file stem)");
  c_import->add_option("--format", imp.format, "jsonl or packed (default: by extension)");
  c_import->callback([&] {
    action = [&] {
      auto imported = store::import_embeddings(imp.file, format_of(imp.format, imp.file));
      const std::string id = imp.id.empty() ? fs::path(imp.file).stem().string() : imp.id;
      const std::size_t count = imported.records.size();
      const auto snap = ctx.workspace().datasets().create(id, std::move(imported.records), imported.dim,
                                                          "import:" + fs::path(imp.file).filename().string());
      return Output{{{"dataset_id", id}, {"dim", snap.data().dim}, {"count", count}, {"snapshot_version", snap.version()}}};
    };
  });

  // ---- export ----
  struct {
    std::string dataset, out, format;
  } exp;
  auto* c_export = cli.add_subcommand("export", "Write a dataset as jsonl or packed");
  c_export->add_option("--dataset", exp.dataset, "Dataset id or file")->required();
  c_export->add_option("--out", exp.out, "Output path")->required();
  c_export->add_option("--format", exp.format, "jsonl or packed (default: by extension)");
  c_export->callback([&] {
    action = [&] {
      const auto ds = ctx.workspace().open_dataset(exp.dataset);
      const auto fmt = format_of(exp.format, exp.out);
      store::export_embeddings(ds.data().records, ds.data().dim, exp.out, fmt);
      return Output{{{"path", exp.out}, {"count", ds.data().records.size()}, {"format", std::string(to_string(fmt))}}};
    };
  });

  // ---- synth ----
  struct {
    std::string spec, out, truth, format, import_as;
    std::optional<std::uint64_t> seed;
  } syn;
  auto* c_synth = cli.add_subcommand("synth", "Generate a synthetic dataset with ground truth");
  c_synth->add_option("--spec", syn.spec, "JSON spec file")->required();
  c_synth->add_option("--seed", syn.seed, "Overrides the spec's rng_seed");
  c_synth->add_option("--out", syn.out, "Dataset output path")->required();
  c_synth->add_option("--truth", syn.truth, "Ground truth path (default: <out>.truth.jsonl)");
  c_synth->add_option("--format", syn.format, "jsonl or packed (default: by extension)");
  c_synth->add_option("--import-as", syn.import_as, "Also import into the data directory under this id");
  c_synth->callback([&] {
    action = [&] {
      json spec_json;
      try {
        spec_json = json::parse(binio::read_file(syn.spec));
      } catch (const json::exception& e) {
        throw Error(Errc::ParseError, "spec '" + syn.spec + "': " + e.what());
      }
      const auto spec = store::synthetic_spec_from_json(spec_json, syn.seed);
      auto data = store::synthesize(spec);
      const std::string truth = syn.truth.empty() ? syn.out + ".truth.jsonl" : syn.truth;
      store::export_embeddings(data.records, data.dim, syn.out, format_of(syn.format, syn.out));
      write_text(truth, store::ground_truth_jsonl(data));
      std::size_t families = 0, outliers = 0;
      for (const auto& t : data.ground_truth) {
        families += t.family.has_value();
        outliers += t.outlier;
      }
      json out = {{"path", syn.out}, {"truth", truth}, {"count", data.records.size()}, {"dim", data.dim},
                  {"family_members", families}, {"outliers", outliers}, {"rng_seed", spec.rng_seed}};
      if (!syn.import_as.empty()) {
        ctx.workspace().datasets().create(syn.import_as, std::move(data.records), data.dim,
                                          "synth:seed=" + std::to_string(spec.rng_seed));
        out["dataset_id"] = syn.import_as;
      }
      return Output{out};
    };
  });

  // ---- train ----
  struct {
    std::string dataset, out, task = "metric", history;
    std::optional<double> arcface, supcon, center, lr;
    std::optional<std::size_t> epochs, batch, embedding_dim, hidden, rank;
    std::uint64_t seed = 0;
    bool ablate = false;
  } tr;
  auto* c_train = cli.add_subcommand("train", "Train the metric-learning head or the layout classifier");
  c_train->add_option("--dataset", tr.dataset, "Dataset id or file with layout labels and splits")->required();
  c_train->add_option("--out", tr.out, "Checkpoint path");
  c_train->add_option("--task", tr.task, "metric or classifier")->check(CLI::IsMember({"metric", "classifier"}));
  c_train->add_option("--arcface", tr.arcface, "ArcFace weight");
  c_train->add_option("--supcon", tr.supcon, "SupCon weight");
  c_train->add_option("--center", tr.center, "Center loss weight");
  c_train->add_option("--epochs", tr.epochs, "Epochs");
  c_train->add_option("--batch-size", tr.batch, "Batch size");
  c_train->add_option("--learning-rate", tr.lr, "Learning rate");
  c_train->add_option("--embedding-dim", tr.embedding_dim, "Output embedding width");
  c_train->add_option("--hidden", tr.hidden, "Hidden width");
  c_train->add_option("--rank", tr.rank, "Backbone low-rank width");
  c_train->add_option("--seed", tr.seed, "Random seed");
  c_train->add_option("--history", tr.history, "Write the per-epoch history JSON here");
  c_train->add_flag("--ablate", tr.ablate, "Train the four loss configurations and print the metrics table");
  c_train->callback([&] {
    action = [&]() -> Output {
      const auto ds = ctx.workspace().open_dataset(tr.dataset);
      const auto& records = ds.data().records;
      if (tr.task == "classifier") {
        if (tr.out.empty()) throw Error(Errc::InvalidArgument, "--out is required");
        learn::ClassifierConfig cfg;
        cfg.rng_seed = tr.seed;
        if (tr.epochs) cfg.epochs = *tr.epochs;
        if (tr.batch) cfg.batch_size = *tr.batch;
        if (tr.lr) cfg.learning_rate = *tr.lr;
        if (tr.hidden) cfg.hidden_width = static_cast<Eigen::Index>(*tr.hidden);
        const auto result = learn::train_layout_classifier(app::labelled_records(records), cfg);
        learn::write_checkpoint(tr.out, learn::to_archive(result.classifier, cfg));
        return Output{{{"checkpoint", tr.out}, {"accuracy", result.accuracy}, {"train_count", result.train_count},
                       {"test_count", result.test_count}, {"excluded_classes", result.excluded_classes}}};
      }
      learn::TrainerConfig cfg = ctx.defaults.train;
      cfg.rng_seed = tr.seed;
      if (tr.arcface) cfg.weights.arcface = *tr.arcface;
      if (tr.supcon) cfg.weights.supcon = *tr.supcon;
      if (tr.center) cfg.weights.center = *tr.center;
      if (tr.epochs) cfg.epochs = *tr.epochs;
      if (tr.batch) cfg.batch_size = *tr.batch;
      if (tr.lr) cfg.learning_rate = *tr.lr;
      if (tr.embedding_dim) cfg.embedding_dim = static_cast<Eigen::Index>(*tr.embedding_dim);
      if (tr.hidden) cfg.hidden_width = static_cast<Eigen::Index>(*tr.hidden);
      if (tr.rank) cfg.backbone_rank = static_cast<Eigen::Index>(*tr.rank);
      if (tr.ablate) {
        const auto configs = app::ablation_configs(ctx.defaults.train.weights.center);
        const auto result = app::run_ablation(records, cfg, configs, ctx.defaults.metric);
        json rows = json::array();
        for (const auto& r : result.rows) rows.push_back(app::to_json(r));
        if (!tr.out.empty()) {
          learn::TrainerConfig best = cfg;
          best.weights = configs.back().weights;
          learn::write_checkpoint(tr.out, learn::to_archive(result.runs.back().model, best));
        }
        return Output{{{"rows", rows}}, app::metrics_table(result.rows)};
      }
      if (tr.out.empty()) throw Error(Errc::InvalidArgument, "--out is required");
      const auto result = learn::train_metric_head(records, cfg);
      learn::write_checkpoint(tr.out, learn::to_archive(result.model, cfg));
      json summary = app::to_json(result);
      if (!tr.history.empty()) write_text(tr.history, app::dump_sorted(summary, 2) + "\n");
      summary.erase("history");
      summary["checkpoint"] = tr.out;
      summary["epochs"] = result.history.size();
      return Output{summary};
    };
  });

  // ---- classify ----
  struct {
    std::string checkpoint, dataset, embedder, out;
  } cl;
  auto* c_classify = cli.add_subcommand("classify", "Predict layouts with a trained classifier");
  c_classify->add_option("--checkpoint", cl.checkpoint, "Classifier checkpoint")->required();
  c_classify->add_option("--dataset", cl.dataset, "Dataset id or file")->required();
  c_classify->add_option("--embedder", cl.embedder, "Metric-model checkpoint applied to the vectors first");
  c_classify->add_option("--out", cl.out, "Per-sample predictions (jsonl)");
  c_classify->callback([&] {
    action = [&] {
      const auto ds = ctx.workspace().open_dataset(cl.dataset);
      const auto clf = learn::classifier_from_archive(learn::read_checkpoint(cl.checkpoint));
      Matrix x = to_matrix(ds.data().records);
      if (!cl.embedder.empty()) x = load_metric_model(cl.embedder).embed(x);
      const Matrix probs = learn::classifier_probabilities(x, clf);
      std::string lines;
      std::size_t labelled = 0, correct = 0;
      for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        const auto& r = ds.data().records[static_cast<std::size_t>(i)];
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < probs.cols(); ++j) {
          if (probs(i, j) > probs(i, best)) best = j;
        }
        const std::string& label = clf.class_names[static_cast<std::size_t>(best)];
        json row = {{"sample_id", r.sample_id}, {"label", label}, {"probability", probs(i, best)}};
        if (r.layout_label) {
          ++labelled;
          correct += *r.layout_label == label;
          row["true_label"] = *r.layout_label;
        }
        lines += row.dump() + "\n";
      }
      if (!cl.out.empty()) write_text(cl.out, lines);
      json out = {{"count", probs.rows()}, {"labelled", labelled}};
      if (labelled) out["accuracy"] = static_cast<double>(correct) / static_cast<double>(labelled);
      if (!cl.out.empty()) out["path"] = cl.out;
      return Output{out};
    };
  });

  // ---- metrics ----
  struct {
    std::string dataset, labels = "layout", split, metric;
    std::vector<std::string> checkpoints;
    std::int64_t model = -1;
  } me;
  auto* c_metrics = cli.add_subcommand("metrics", "Intra-class, inter-class, silhouette and DBI table");
  c_metrics->add_option("--dataset", me.dataset, "Dataset id or file")->required();
  c_metrics->add_option("--labels", me.labels, "layout or cluster")->check(CLI::IsMember({"layout", "cluster"}));
  c_metrics->add_option("--model", me.model, "Cluster model version for --labels cluster (default latest)");
  c_metrics->add_option("--checkpoint", me.checkpoints, "Metric-model checkpoint; one table row each");
  c_metrics->add_option("--split", me.split, "Only records with this split tag");
  c_metrics->add_option("--metric", me.metric, "cosine or euclidean");
  c_metrics->callback([&] {
    action = [&] {
      auto& ws = ctx.workspace();
      const auto ds = ws.open_dataset(me.dataset);
      const DistanceMetric metric = me.metric.empty() ? ctx.defaults.metric : parse_metric(me.metric);
      auto records = app::filter_split(ds.data().records,
                                       me.split.empty() ? std::nullopt : std::optional(parse_split_tag(me.split)));
      std::string base = "input";
      if (app::parse_label_source(me.labels) == app::LabelSource::Cluster) {
        const auto stored = app::bind_model(ws, ds, opt_version(me.model));
        records = app::label_by_cluster(records, stored.model);
        base = "model-v" + std::to_string(stored.model.version);
      }
      std::vector<app::MetricsRow> rows{app::metrics_row(base, records, metric)};
      for (const auto& path : me.checkpoints) {
        learn::TrainerConfig cfg;
        const auto model = load_metric_model(path, &cfg);
        auto row = app::metrics_row(fs::path(path).stem().string(), records, metric, &model);
        row.weights = cfg.weights;
        rows.push_back(std::move(row));
      }
      json arr = json::array();
      for (const auto& r : rows) arr.push_back(app::to_json(r));
      return Output{{{"rows", arr}}, app::metrics_table(rows)};
    };
  });

  // ---- cluster ----
  struct {
    std::string dataset, space = "embedding", projection, out;
    std::optional<std::size_t> k;
    std::size_t k_min = 2, k_max = 10;
    std::uint64_t seed = 0;
  } cu;
  auto* c_cluster = cli.add_subcommand("cluster", "Fit k-means (fixed k or silhouette-selected)");
  c_cluster->add_option("--dataset", cu.dataset, "Dataset id or file")->required();
  c_cluster->add_option("--k", cu.k, "Number of clusters (default: select by silhouette)");
  c_cluster->add_option("--k-min", cu.k_min, "Lower end of the select-k range");
  c_cluster->add_option("--k-max", cu.k_max, "Upper end of the select-k range");
  c_cluster->add_option("--space", cu.space, "embedding or tsne")->check(CLI::IsMember({"embedding", "tsne"}));
  c_cluster->add_option("--projection", cu.projection, "Saved projection name for --space tsne");
  c_cluster->add_option("--seed", cu.seed, "Random seed");
  c_cluster->add_option("--out", cu.out, "Also write the full model JSON here");
  c_cluster->callback([&] {
    action = [&] {
      auto& ws = ctx.workspace();
      const auto ds = ws.open_dataset(cu.dataset);
      app::ClusterRequest req;
      req.k = cu.k;
      req.k_min = cu.k_min;
      req.k_max = cu.k_max;
      req.space = app::parse_cluster_space(cu.space);
      if (!cu.projection.empty()) req.projection = cu.projection;
      req.rng_seed = cu.seed;
      auto outcome = app::fit_clusters(app::request_points(ws, ds, req), req, ctx.defaults);
      if (ds.stored) outcome.stored = ws.save_model(ds.id(), std::move(outcome.stored));
      if (!cu.out.empty()) write_text(cu.out, app::to_json(outcome.stored).dump() + "\n");
      json out = cluster::model_summary(outcome.stored.model);
      out["space"] = std::string(app::to_string(outcome.stored.space));
      out["saved"] = ds.stored;
      if (outcome.selection) out["selection"] = app::to_json(*outcome.selection);
      return Output{out};
    };
  });

  // ---- select-k ----
  struct {
    std::string dataset;
    std::size_t k_min = 2, k_max = 10;
    std::optional<std::size_t> sample;
    std::uint64_t seed = 0;
  } sk;
  auto* c_selectk = cli.add_subcommand("select-k", "Silhouette sweep over a k range");
  c_selectk->add_option("--dataset", sk.dataset, "Dataset id or file")->required();
  c_selectk->add_option("--k-min", sk.k_min, "Smallest k");
  c_selectk->add_option("--k-max", sk.k_max, "Largest k");
  c_selectk->add_option("--sample", sk.sample, "Silhouette subsample size (0 = all points)");
  c_selectk->add_option("--seed", sk.seed, "Random seed");
  c_selectk->callback([&] {
    action = [&] {
      const auto ds = ctx.workspace().open_dataset(sk.dataset);
      const auto r = cluster::select_k(ds.snapshot.points(), sk.k_min, sk.k_max, sk.seed, ctx.defaults.metric,
                                       sk.sample.value_or(ctx.defaults.select_k_sample));
      std::string text = "k    silhouette\n";
      for (const auto& [k, s] : r.silhouettes) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%-4zu %.4f%s\n", k, s, k == r.k ? "  <- selected" : "");
        text += buf;
      }
      return Output{app::to_json(r), text};
    };
  });

  // ---- tsne ----
  struct {
    std::string dataset, name, out;
    std::optional<double> perplexity, theta, lr;
    std::optional<std::size_t> iterations;
    std::uint64_t seed = 0;
    std::int64_t model = -1;
  } ts;
  auto* c_tsne = cli.add_subcommand("tsne", "2-D t-SNE projection");
  c_tsne->add_option("--dataset", ts.dataset, "Dataset id or file")->required();
  c_tsne->add_option("--perplexity", ts.perplexity, "Perplexity");
  c_tsne->add_option("--iterations", ts.iterations, "Iterations");
  c_tsne->add_option("--theta", ts.theta, "Barnes-Hut accuracy");
  c_tsne->add_option("--learning-rate", ts.lr, "Learning rate");
  c_tsne->add_option("--seed", ts.seed, "Random seed");
  c_tsne->add_option("--name", ts.name, "Save under this projection name (imported datasets)");
  c_tsne->add_option("--out", ts.out, "Plot rows {sample_id, cluster_id, x, y, centroid_distance, z} (jsonl)");
  c_tsne->add_option("--model", ts.model, "Cluster model version to fill cluster columns");
  c_tsne->callback([&] {
    action = [&] {
      auto& ws = ctx.workspace();
      const auto ds = ws.open_dataset(ts.dataset);
      cluster::TsneParams params = ctx.defaults.tsne;
      params.rng_seed = ts.seed;
      if (ts.perplexity) params.perplexity = *ts.perplexity;
      if (ts.iterations) params.iterations = *ts.iterations;
      if (ts.theta) params.theta = *ts.theta;
      if (ts.lr) params.learning_rate = *ts.lr;
      const auto p = cluster::tsne_project(ds.snapshot.points(), params);
      json out = {{"n", p.sample_ids.size()}, {"kl_divergence", p.kl_divergence}, {"barnes_hut", p.barnes_hut}};
      if (!ts.name.empty()) {
        if (!ds.stored) throw Error(Errc::InvalidArgument, "--name needs an imported dataset");
        ws.save_projection(ds.id(), ts.name, {p, ds.snapshot.version()});
        out["name"] = ts.name;
      }
      if (!ts.out.empty()) {
        std::optional<app::StoredModel> stored;
        if (ts.model >= 0) stored = app::bind_model(ws, ds, opt_version(ts.model));
        write_text(ts.out, cluster::export_rows_jsonl(stored ? &stored->model : nullptr, &p));
        out["path"] = ts.out;
      }
      return Output{out};
    };
  });

  // ---- refine ----
  struct {
    std::string dataset, ops_file;
    std::vector<std::string> ops;
    std::int64_t model = -1;
  } rf;
  auto* c_refine = cli.add_subcommand("refine", "Split, merge, remove outliers or trim; saves a new model version");
  c_refine->add_option("--dataset", rf.dataset, "Imported dataset id")->required();
  c_refine->add_option("--model", rf.model, "Model version (default latest)");
  c_refine->add_option("--op", rf.ops, "split:ID, merge:A,B, remove-outliers:Z[@ID], trim:P[@ID]");
  c_refine->add_option("--ops", rf.ops_file, "JSON array of ops");
  c_refine->callback([&] {
    action = [&] {
      auto& ws = ctx.workspace();
      const auto ds = ws.open_dataset(rf.dataset);
      std::vector<cluster::RefineOp> ops;
      if (!rf.ops_file.empty()) {
        try {
          for (const auto& j : json::parse(binio::read_file(rf.ops_file))) ops.push_back(cluster::refine_op_from_json(j));
        } catch (const json::exception& e) {
          throw Error(Errc::ParseError, "ops file: " + std::string(e.what()));
        }
      }
      for (const auto& s : rf.ops) ops.push_back(parse_op(s));
      if (ops.empty()) throw Error(Errc::InvalidArgument, "no refinement ops given");
      PointSet points;
      const auto stored = app::bind_model(ws, ds, opt_version(rf.model), &points);
      app::StoredModel next = stored;
      next.model = cluster::refine_clusters(stored.model, points, ops);
      next = ws.save_model(ds.id(), std::move(next));
      return Output{cluster::model_summary(next.model)};
    };
  });

  // ---- anomalies ----
  struct {
    std::string dataset, out;
    std::int64_t model = -1;
    std::size_t top = 20;
  } an;
  auto* c_anom = cli.add_subcommand("anomalies", "Rank samples by centroid-distance z-score");
  c_anom->add_option("--dataset", an.dataset, "Imported dataset id")->required();
  c_anom->add_option("--model", an.model, "Model version (default latest)");
  c_anom->add_option("--top", an.top, "Rows to print");
  c_anom->add_option("--out", an.out, "Write every score as jsonl");
  c_anom->callback([&] {
    action = [&] {
      auto& ws = ctx.workspace();
      const auto ds = ws.open_dataset(an.dataset);
      PointSet points;
      const auto stored = app::bind_model(ws, ds, opt_version(an.model), &points);
      const auto report = discovery::zscore_anomalies(stored.model, points);
      json top = json::array();
      std::string lines;
      for (std::size_t i = 0; i < report.scores.size(); ++i) {
        const json row = discovery::to_json(report.scores[i]);
        if (i < an.top) top.push_back(row);
        if (!an.out.empty()) lines += row.dump() + "\n";
      }
      if (!an.out.empty()) write_text(an.out, lines);
      return Output{{{"snapshot_version", report.snapshot_version},
                     {"model_version", report.model_version},
                     {"total", report.scores.size()},
                     {"scores", top}}};
    };
  });

  // ---- graph ----
  struct {
    std::string dataset, out;
    std::optional<std::size_t> k;
    std::optional<double> min_similarity;
  } gr;
  auto* c_graph = cli.add_subcommand("graph", "Build the cosine k-NN similarity graph");
  c_graph->add_option("--dataset", gr.dataset, "Dataset id or file")->required();
  c_graph->add_option("--k", gr.k, "Neighbors per node");
  c_graph->add_option("--min-similarity", gr.min_similarity, "Drop edges below this similarity");
  c_graph->add_option("--out", gr.out, "Edge list {source, target, weight} (jsonl)");
  c_graph->callback([&] {
    action = [&] {
      const auto ds = ctx.workspace().open_dataset(gr.dataset);
      discovery::GraphParams params = ctx.defaults.graph;
      if (gr.k) params.k_neighbors = *gr.k;
      if (gr.min_similarity) params.min_similarity = *gr.min_similarity;
      const auto g = discovery::build_similarity_graph(ds.snapshot.points(), params);
      std::size_t isolated = 0;
      std::string lines;
      for (std::size_t i = 0; i < g.adjacency.size(); ++i) {
        isolated += g.adjacency[i].empty();
        if (gr.out.empty()) continue;
        for (const auto& e : g.adjacency[i]) {
          if (e.to > i) lines += json{{"source", g.ids[i]}, {"target", g.ids[e.to]}, {"weight", e.weight}}.dump() + "\n";
        }
      }
      json out = {{"nodes", g.ids.size()},
                  {"edges", g.edge_count()},
                  {"isolated", isolated},
                  {"k_neighbors", params.k_neighbors},
                  {"min_similarity", params.min_similarity}};
      if (!gr.out.empty()) {
        write_text(gr.out, lines);
        out["path"] = gr.out;
      }
      return Output{out};
    };
  });

  // ---- expand ----
  struct {
    std::string dataset;
    std::vector<std::string> seeds;
    std::optional<double> threshold, min_similarity;
    std::optional<std::size_t> hops, k;
    bool confirmed = false;
  } ex;
  auto* c_expand = cli.add_subcommand("expand", "Seed expansion over the similarity graph");
  c_expand->add_option("--dataset", ex.dataset, "Dataset id or file")->required();
  c_expand->add_option("--seeds", ex.seeds, "Seed sample ids (comma separated or repeated)")->delimiter(',');
  c_expand->add_option("--threshold", ex.threshold, "Minimum edge similarity to cross");
  c_expand->add_option("--max-hops", ex.hops, "Maximum hops from a seed");
  c_expand->add_option("--k", ex.k, "Graph neighbors per node");
  c_expand->add_option("--min-similarity", ex.min_similarity, "Graph edge floor");
  c_expand->add_flag("--confirmed", ex.confirmed, "Add every sample confirmed as fraud in the triage log");
  c_expand->callback([&] {
    action = [&] {
      auto& ws = ctx.workspace();
      const auto ds = ws.open_dataset(ex.dataset);
      std::vector<std::string> seeds = ex.seeds;
      if (ex.confirmed) {
        if (!ds.stored) throw Error(Errc::InvalidArgument, "--confirmed needs an imported dataset");
        for (const auto& s : ws.open_triage(ds.id()).seeds()) seeds.push_back(s);
      }
      discovery::GraphParams gp = ctx.defaults.graph;
      if (ex.k) gp.k_neighbors = *ex.k;
      if (ex.min_similarity) gp.min_similarity = *ex.min_similarity;
      discovery::ExpansionParams params = ctx.defaults.expand;
      if (ex.threshold) params.threshold = *ex.threshold;
      if (ex.hops) params.max_hops = *ex.hops;
      const auto g = discovery::build_similarity_graph(ds.snapshot.points(), gp);
      return Output{discovery::to_json(discovery::expand_from_seeds(g, seeds, params))};
    };
  });

  // ---- queue ----
  struct {
    std::string dataset;
    std::int64_t model = -1;
    std::size_t limit = 50, offset = 0;
  } qu;
  auto* c_queue = cli.add_subcommand("queue", "Assemble and save the triage queue");
  c_queue->add_option("--dataset", qu.dataset, "Imported dataset id")->required();
  c_queue->add_option("--model", qu.model, "Model version (default latest)");
  c_queue->add_option("--limit", qu.limit, "Items to print");
  c_queue->add_option("--offset", qu.offset, "Items to skip");
  c_queue->callback([&] {
    action = [&] {
      auto& ws = ctx.workspace();
      const auto ds = ws.open_dataset(qu.dataset);
      if (!ds.stored) throw Error(Errc::InvalidArgument, "the triage queue needs an imported dataset");
      auto book = ws.open_triage(ds.id());
      const auto outcome = app::build_queue(ws, ds, opt_version(qu.model), book.seeds(), ctx.defaults);
      ws.save_queue(ds.id(), outcome.items);
      book.set_queue(outcome.items);
      const auto items = book.queue();
      json page = json::array();
      for (std::size_t i = qu.offset; i < items.size() && i < qu.offset + qu.limit; ++i) {
        page.push_back(discovery::to_json(items[i]));
      }
      json out = {{"total", items.size()}, {"offset", qu.offset}, {"items", page}};
      if (outcome.detection) out["flagged_clusters"] = outcome.detection->flagged.size();
      if (outcome.expansion) out["expansion_candidates"] = outcome.expansion->candidates.size();
      return Output{out};
    };
  });

  // ---- verdict ----
  struct {
    std::string dataset, item, verdict, reviewer, timestamp;
  } vd;
  auto* c_verdict = cli.add_subcommand("verdict", "Record a review verdict on a queue item");
  c_verdict->add_option("--dataset", vd.dataset, "Imported dataset id")->required();
  c_verdict->add_option("--item", vd.item, "Item id from the queue")->required();
  c_verdict->add_option("--verdict", vd.verdict, "confirmed_fraud, confirmed_genuine or skipped")->required();
  c_verdict->add_option("--reviewer", vd.reviewer, "Reviewer name")->required();
  c_verdict->add_option("--timestamp", vd.timestamp, "ISO-8601 UTC time (default now)");
  c_verdict->callback([&] {
    action = [&] {
      auto& ws = ctx.workspace();
      if (!ws.datasets().contains(vd.dataset)) throw Error(Errc::UnknownDataset, "unknown dataset '" + vd.dataset + "'");
      auto book = ws.open_triage(vd.dataset);
      const auto item = book.record_verdict(vd.item, discovery::parse_review_state(vd.verdict), vd.reviewer,
                                            vd.timestamp.empty() ? app::utc_timestamp() : vd.timestamp);
      return Output{discovery::to_json(item)};
    };
  });

  // ---- serve ----
  struct {
    std::optional<std::string> host, token;
    std::optional<int> port;
  } sv;
  auto* c_serve = cli.add_subcommand("serve", "Run the HTTP triage service");
  c_serve->add_option("--host", sv.host, "Bind address");
  c_serve->add_option("--port", sv.port, "Port (0 picks a free one)");
  c_serve->add_option("--token", sv.token, "Bearer token required on every request");
  c_serve->callback([&] {
    action = [&] {
      app::Defaults d = ctx.defaults;
      if (sv.host) d.host = *sv.host;
      if (sv.port) d.port = *sv.port;
      if (sv.token) d.token = *sv.token;
      service::TriageService svc(ctx.workspace(), d);
      const int port = svc.start(d.host, d.port);
      std::cerr << json{{"event", "listening"}, {"host", d.host}, {"port", port}}.dump() << std::endl;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(200));
      svc.stop();
      return Output{{{"stopped", true}}};
    };
  });

  // ---- selftest ----
  auto* c_selftest = cli.add_subcommand("selftest", "Compare the library against its reference oracles");
  c_selftest->callback([&] {
    action = [&] {
      const auto checks = app::run_selftest();
      json arr = json::array();
      std::string text;
      bool ok = true;
      for (const auto& c : checks) {
        ok = ok && c.passed;
        arr.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
        text += std::string(c.passed ? "PASS " : "FAIL ") + c.name + "  " + c.detail + "\n";
      }
      return Output{{{"checks", arr}, {"passed", ok}}, text, ok ? 0 : 3};
    };
  });

  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    print_envelope("InvalidArgument", e.what(), json::object());
    return 2;
  }

  try {
    Config config = app::load_config(ctx.g.config_path.empty() ? std::nullopt
                                                               : std::optional<std::string>(ctx.g.config_path));
    for (const auto& kv : ctx.g.overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Error(Errc::ConfigError, "--set expects key=value, got '" + kv + "'");
      config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    ctx.defaults = app::Defaults::from_config(config);
    const Output out = action();
    if (ctx.g.json_output || out.text.empty()) {
      std::cout << (ctx.g.json_output ? app::dump_sorted(out.payload, 2) + "\n" : human(out.payload));
    } else {
      std::cout << out.text;
    }
    return out.exit_code;
  } catch (const Error& e) {
    json detail = json::object();
    if (e.row()) detail["row"] = *e.row();
    print_envelope(errc_name(e.code()), e.what(), detail);
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    print_envelope("ParseError", e.what(), json::object());
    return 2;
  } catch (const std::bad_alloc&) {
    print_envelope("ResourceExhausted", "out of memory", json::object());
    return 3;
  } catch (const std::exception& e) {
    print_envelope("InternalError", e.what(), json::object());
    return 3;
  }
}
