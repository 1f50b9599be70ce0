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

#include "layoutspace/app/operations.hpp"
#include "layoutspace/app/workspace.hpp"
#include "layoutspace/cluster/metrics.hpp"
#include "layoutspace/core/binary_io.hpp"
#include "layoutspace/discovery/discovery.hpp"
#include "layoutspace/oracle/oracles.hpp"
#include "layoutspace/store/formats.hpp"

#include "helpers.hpp"

#include <json.hpp>

#include <cstdlib>
#include <sys/wait.h>

using namespace layoutspace;
using nlohmann::json;

namespace {

const std::string kSource = LAYOUTSPACE_SOURCE_DIR;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

class Cli {
 public:
  Cli() : dir_("cli") {}
  const testing::TempDir& dir() const { return dir_; }
  std::string data() const { return dir_.str("data"); }

  Run operator()(const std::vector<std::string>& args, const std::string& env = "") const {
    std::string cmd = env + " " + quote(LAYOUTSPACE_CLI);
    if (env.empty()) cmd += " --data-dir " + quote(data());
    for (const auto& a : args) cmd += " " + quote(a);
    cmd += " >" + quote(dir_.str("stdout")) + " 2>" + quote(dir_.str("stderr"));
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = binio::read_file(dir_.str("stdout"));
    r.err = binio::read_file(dir_.str("stderr"));
    return r;
  }

 private:
  testing::TempDir dir_;
};

void check_sorted_keys(const nlohmann::ordered_json& j) {
  if (j.is_object()) {
    std::string previous;
    bool first = true;
    for (const auto& [key, value] : j.items()) {
      if (!first) CHECK(previous < key);
      previous = key;
      first = false;
      check_sorted_keys(value);
    }
  } else if (j.is_array()) {
    for (const auto& v : j) check_sorted_keys(v);
  }
}

}  // namespace

TEST_CASE("synth is reproducible") {
  Cli cli;
  const std::string spec = kSource + "/fixtures/paperlike.json";
  REQUIRE(cli({"synth", "--spec", spec, "--seed", "7", "--out", cli.dir().str("a.jsonl")}).code == 0);
  REQUIRE(cli({"synth", "--spec", spec, "--seed", "7", "--out", cli.dir().str("b.jsonl")}).code == 0);
  CHECK(binio::read_file(cli.dir().str("a.jsonl")) == binio::read_file(cli.dir().str("b.jsonl")));
  CHECK(binio::read_file(cli.dir().str("a.jsonl.truth.jsonl")) == binio::read_file(cli.dir().str("b.jsonl.truth.jsonl")));
  REQUIRE(cli({"synth", "--spec", spec, "--seed", "8", "--out", cli.dir().str("c.jsonl")}).code == 0);
  CHECK(binio::read_file(cli.dir().str("a.jsonl")) != binio::read_file(cli.dir().str("c.jsonl")));
}

TEST_CASE("metrics on the labelled fixtures match the golden files and the oracle") {
  Cli cli;
  for (const std::string name : {"two_pair", "two_blob"}) {
    REQUIRE(cli({"import", kSource + "/fixtures/" + name + ".jsonl"}).code == 0);
    const auto r = cli({"--json", "metrics", "--dataset", name, "--labels", "layout", "--metric", "euclidean"});
    REQUIRE(r.code == 0);
    CHECK(r.out == binio::read_file(kSource + "/tests/golden/metrics_" + name + ".json"));
    const auto row = json::parse(r.out).at("rows").at(0);
    const Matrix pts = name == "two_pair" ? oracle::two_pair_fixture() : oracle::two_blob_fixture();
    const std::vector<int> labels{0, 0, 1, 1};
    const auto lib = cluster::labeled_metrics(pts, labels, DistanceMetric::Euclidean);
    CHECK(row.at("silhouette").get<double>() == lib.silhouette_mean);
    CHECK(row.at("dbi").get<double>() == lib.dbi);
    if (name == "two_pair") CHECK(std::abs(row.at("silhouette").get<double>() - 0.900) <= 1e-3);
    if (name == "two_blob") CHECK(std::abs(row.at("dbi").get<double>() - 0.2) <= 1e-9);
  }
  const auto table = cli({"metrics", "--dataset", "two_pair", "--metric", "euclidean"});
  CHECK(table.code == 0);
  CHECK(table.out.find("Intra-class  Inter-class  Silhouette  DBI") != std::string::npos);
}

TEST_CASE("expansion above similarity 1 is empty") {
  Cli cli;
  REQUIRE(cli({"synth", "--spec", kSource + "/fixtures/small_synth.json", "--out", cli.dir().str("s.jsonl"),
               "--import-as", "s"})
              .code == 0);
  const auto r = cli({"--json", "expand", "--dataset", "s", "--seeds", "s001", "--threshold", "1.01"});
  CHECK(r.code == 0);
  CHECK(r.out == binio::read_file(kSource + "/tests/golden/expand_empty.json"));
  const auto via_config = cli({"--json", "--set", "expand.threshold=1.01", "expand", "--dataset", "s", "--seeds", "s001"});
  CHECK(via_config.out == r.out);
  binio::write_file_atomic(cli.dir().str("c.conf"), "[expand]\nthreshold = 1.01\n");
  CHECK(cli({"--json", "--config", cli.dir().str("c.conf"), "expand", "--dataset", "s", "--seeds", "s001"}).out == r.out);
}

TEST_CASE("CLI results equal library results") {
  Cli cli;
  REQUIRE(cli({"synth", "--spec", kSource + "/fixtures/small_synth.json", "--out", cli.dir().str("s.jsonl"),
               "--import-as", "s"})
              .code == 0);
  REQUIRE(cli({"cluster", "--dataset", "s", "--k", "4", "--seed", "3"}).code == 0);

  const auto records = store::import_embeddings(cli.dir().str("s.jsonl"), store::Format::Jsonl);
  const auto sorted = store::sorted_by_id(records.records);
  const auto points = PointSet::from_records(sorted, 1);
  app::ClusterRequest req;
  req.k = 4;
  req.rng_seed = 3;
  const auto fit = app::fit_clusters(points, req, app::Defaults{});

  app::Workspace ws(cli.data());
  const auto saved = ws.load_model("s", std::nullopt);
  CHECK(saved.model.assignment == fit.stored.model.assignment);
  CHECK(saved.model.centroids == fit.stored.model.centroids);
  CHECK(saved.model.inertia == fit.stored.model.inertia);

  const auto anomalies = cli({"--json", "anomalies", "--dataset", "s", "--top", "1000"});
  REQUIRE(anomalies.code == 0);
  const auto report = discovery::zscore_anomalies(fit.stored.model, points);
  const auto scores = json::parse(anomalies.out).at("scores");
  REQUIRE(scores.size() == report.scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    CHECK(scores[i].at("sample_id") == report.scores[i].sample_id);
    CHECK(scores[i].at("z").get<double>() == report.scores[i].z);
  }

  const auto expand = cli({"--json", "expand", "--dataset", "s", "--seeds", "s001", "--threshold", "0.95"});
  REQUIRE(expand.code == 0);
  const auto graph = discovery::build_similarity_graph(points, discovery::GraphParams{});
  discovery::ExpansionParams ep;
  ep.threshold = 0.95;
  const std::vector<std::string> seeds{"s001"};
  CHECK(json::parse(expand.out) == json::parse(app::dump_sorted(discovery::to_json(discovery::expand_from_seeds(graph, seeds, ep)))));

  REQUIRE(cli({"export", "--dataset", "s", "--out", cli.dir().str("round.jsonl")}).code == 0);
  CHECK(binio::read_file(cli.dir().str("round.jsonl")) == store::encode_jsonl(sorted, records.dim));
}

TEST_CASE("exit codes and error envelopes") {
  Cli cli;
  const auto unknown = cli({"metrics", "--dataset", "missing"});
  CHECK(unknown.code == 2);
  CHECK(json::parse(unknown.err).at("code") == "UnknownDataset");

  const auto io = cli({"import", cli.dir().str("absent.jsonl")});
  CHECK(io.code == 4);
  CHECK(json::parse(io.err).at("code") == "IoError");

  binio::write_file_atomic(cli.dir().str("same.jsonl"),
                           "{\"format\":\"layoutspace-jsonl\",\"version\":1,\"dim\":2}\n"
                           "{\"id\":\"a\",\"vec\":[0,0],\"label\":\"A\"}\n{\"id\":\"b\",\"vec\":[0,2],\"label\":\"A\"}\n"
                           "{\"id\":\"c\",\"vec\":[0,0],\"label\":\"B\"}\n{\"id\":\"d\",\"vec\":[0,2],\"label\":\"B\"}\n");
  const auto degenerate = cli({"metrics", "--dataset", cli.dir().str("same.jsonl"), "--metric", "euclidean"});
  CHECK(degenerate.code == 3);
  CHECK(json::parse(degenerate.err).at("code") == "DegenerateCentroids");

  binio::write_file_atomic(cli.dir().str("bad.jsonl"),
                           "{\"format\":\"layoutspace-jsonl\",\"version\":1,\"dim\":1}\n{\"id\":\"a\",\"vec\":[1]}\n"
                           "{\"id\":\"b\",\"vec\":[NaN]}\n");
  const auto parse = cli({"import", cli.dir().str("bad.jsonl")});
  CHECK(parse.code == 2);
  CHECK(json::parse(parse.err).at("detail").at("row") == 3);

  CHECK(cli({"no-such-command"}).code == 2);
  CHECK(cli({"cluster"}).code == 2);
  const auto typo = cli({"--set", "expand.treshold=0.5", "metrics", "--dataset", "missing"});
  CHECK(typo.code == 2);
  CHECK(json::parse(typo.err).at("code") == "ConfigError");
}

TEST_CASE("json output has sorted keys") {
  Cli cli;
  REQUIRE(cli({"synth", "--spec", kSource + "/fixtures/small_synth.json", "--out", cli.dir().str("s.jsonl"),
               "--import-as", "s"})
              .code == 0);
  const std::vector<std::vector<std::string>> commands{
      {"--json", "cluster", "--dataset", "s", "--k", "4"},
      {"--json", "anomalies", "--dataset", "s"},
      {"--json", "queue", "--dataset", "s"},
      {"--json", "select-k", "--dataset", "s", "--k-min", "2", "--k-max", "5"},
      {"--json", "graph", "--dataset", "s"},
      {"--json", "metrics", "--dataset", "s"},
  };
  for (const auto& c : commands) {
    const auto r = cli(c);
    REQUIRE_MESSAGE(r.code == 0, c[1], ": ", r.err);
    check_sorted_keys(nlohmann::ordered_json::parse(r.out));
  }
}

TEST_CASE("data directory from the environment") {
  Cli cli;
  const std::string env = "LAYOUTSPACE_DATA_DIR=" + quote(cli.data());
  REQUIRE(cli({"import", kSource + "/fixtures/two_pair.jsonl"}, env).code == 0);
  CHECK(cli({"metrics", "--dataset", "two_pair", "--metric", "euclidean"}).code == 0);
}

TEST_CASE("verdicts through the CLI") {
  Cli cli;
  REQUIRE(cli({"synth", "--spec", kSource + "/fixtures/small_synth.json", "--out", cli.dir().str("s.jsonl"),
               "--import-as", "s"})
              .code == 0);
  REQUIRE(cli({"cluster", "--dataset", "s", "--k", "4"}).code == 0);
  const auto q = cli({"--json", "queue", "--dataset", "s"});
  REQUIRE(q.code == 0);
  const auto items = json::parse(q.out).at("items");
  REQUIRE_FALSE(items.empty());
  const std::string item = items[0].at("item_id");
  const std::vector<std::string> verdict{"--json", "verdict", "--dataset", "s", "--item", item, "--verdict",
                                         "confirmed_fraud", "--reviewer", "ana", "--timestamp", "2026-01-01T00:00:00Z"};
  const auto first = cli(verdict);
  CHECK(first.code == 0);
  const auto second = cli(verdict);
  CHECK(second.code == 2);
  CHECK(json::parse(second.err).at("code") == "AlreadyReviewed");
  const auto expand = cli({"--json", "expand", "--dataset", "s", "--confirmed"});
  CHECK(expand.code == 0);
  CHECK_FALSE(json::parse(expand.out).at("seed_ids").empty());
}
