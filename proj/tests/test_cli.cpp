// Copyright 2026 The rfood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "rfood/binary_io.hpp"
#include "rfood/cli.hpp"
#include "rfood/features.hpp"
#include "rfood/scoring.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = RFOOD_FIXTURE_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "rfood");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  const int code = rfood::run_cli(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  return {code, out.str(), err.str()};
}

bool single_error_line(const std::string& err) {
  return err.rfind("error: ", 0) == 0 && err.find('\n') == err.size() - 1;
}

}  // namespace

TEST_CASE("help and version") {
  const auto h = cli({"--help"});
  CHECK(h.code == 0);
  CHECK(h.out.find("calibrate") != std::string::npos);
  CHECK(cli({"score", "--help"}).code == 0);
  const auto v = cli({"--version"});
  CHECK(v.code == 0);
  CHECK(v.out.find("DCAL v1") != std::string::npos);
  CHECK(v.out.find("DFTF v1") != std::string::npos);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(cli({}).code == 2);
  const auto u = cli({"train"});
  CHECK(u.code == 2);
  CHECK(single_error_line(u.err));
  CHECK(cli({"score", "--frobnicate", "1"}).code == 2);
}

TEST_CASE("validation failures exit with 1 and name the flag") {
  const auto s = cli({"score", "--features", "x.dftf", "--out", "r.jsonl"});
  CHECK(s.code == 1);
  CHECK(single_error_line(s.err));
  CHECK(s.err.find("--artifact") != std::string::npos);

  testutil::TempDir dir;
  const auto c = cli({"calibrate", "--features", (dir / "f.json").string(), "--out",
                      (dir / "a.dcal").string(), "--alpha", "1.5"});
  CHECK(c.code == 1);
  CHECK(single_error_line(c.err));
  CHECK(c.err.find("alpha") != std::string::npos);

  rfood::write_file_atomic(dir / "bad.json", R"({"selection": {"alfa": 0.1}})");
  const auto e = cli({"eval", "--config", (dir / "bad.json").string(), "--out", (dir / "m.json").string()});
  CHECK(e.code == 1);
  CHECK(e.err.find("alfa") != std::string::npos);
  CHECK(!fs::exists(dir / "m.json"));

  const auto t = cli({"tfi", "--out", (dir / "x.png").string()});
  CHECK(t.code == 1);
  CHECK(t.err.find("--input") != std::string::npos);
  CHECK(cli({"calibrate", "--alpha", "abc"}).code == 1);
  CHECK(cli({"sweep", "--out", (dir / "s.csv").string()}).err.find("--kind") != std::string::npos);
}

TEST_CASE("end-to-end smoke run matches the golden fixture") {
  testutil::TempDir dir;
  const std::string cfg = (kFixtures / "smoke_config.json").string();
  const auto data = dir / "data";
  REQUIRE(cli({"synth", "--config", cfg, "--out", data.string()}).code == 0);
  const auto manifest = (data / "manifest.json").string();
  REQUIRE(fs::exists(manifest));

  const auto tfi = cli({"tfi", "--input", (data / "records/id_c0_00000.diq").string(), "--out",
                        (dir / "one.png").string(), "--fft-size", "128", "--hop", "64",
                        "--window", "rect", "--scale", "logdb"});
  CHECK(tfi.code == 0);
  CHECK(fs::exists(dir / "one.png"));
  CHECK(cli({"tfi", "--dataset", manifest, "--out", (dir / "images").string()}).code == 0);
  CHECK(fs::exists(dir / "images/records/ood_fast_narrow_hop_00005.png"));
  CHECK(cli({"extract", "--input", (dir / "one.png").string(), "--out",
             (dir / "one.dftf").string(), "--config", cfg}).code == 0);
  CHECK(rfood::read_features(dir / "one.dftf").channels() == 16);

  const auto feats = dir / "features";
  REQUIRE(cli({"extract", "--dataset", manifest, "--config", cfg, "--out", feats.string()}).code == 0);
  const auto fjson = (feats / "features.json").string();
  const auto artifact = (dir / "model.dcal").string();
  REQUIRE(cli({"calibrate", "--config", cfg, "--features", fjson, "--out", artifact}).code == 0);
  const auto report = (dir / "report.jsonl").string();
  REQUIRE(cli({"score", "--artifact", artifact, "--features", fjson, "--out", report}).code == 0);
  const auto metrics = (dir / "metrics.json").string();
  REQUIRE(cli({"eval", "--config", cfg, "--features", fjson, "--out", metrics}).code == 0);

  // One JSON object per feature file with the report fields.
  std::istringstream lines(rfood::read_file(report));
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.contains("s_energy"));
    CHECK(j.contains("g_norm"));
    CHECK(j.contains("s_fused"));
    CHECK(j.contains("predicted_class"));
    CHECK((j["decision"] == "ID" || j["decision"] == "OOD"));
    ++n;
  }
  CHECK(n == 4 * 20 + 2 * 6);

  // Records on disk, regenerated records and cached features agree.
  const auto m_dataset = (dir / "metrics_dataset.json").string();
  const auto m_synth = (dir / "metrics_synth.json").string();
  REQUIRE(cli({"eval", "--config", cfg, "--dataset", manifest, "--out", m_dataset}).code == 0);
  REQUIRE(cli({"eval", "--config", cfg, "--out", m_synth}).code == 0);
  const auto mj = nlohmann::json::parse(rfood::read_file(metrics));
  CHECK(mj["metrics"] == nlohmann::json::parse(rfood::read_file(m_dataset))["metrics"]);
  CHECK(mj["metrics"] == nlohmann::json::parse(rfood::read_file(m_synth))["metrics"]);
  CHECK(mj["seeds"]["data"] == 5);

  // Golden outputs, produced once and frozen.
  CHECK(rfood::read_file(report) == rfood::read_file(kFixtures / "smoke_report.jsonl"));
  CHECK(rfood::read_file(m_synth) == rfood::read_file(kFixtures / "smoke_metrics.json"));

  // A second run is byte-identical.
  const auto artifact2 = (dir / "model2.dcal").string();
  REQUIRE(cli({"calibrate", "--config", cfg, "--features", fjson, "--out", artifact2}).code == 0);
  CHECK(rfood::read_file(artifact) == rfood::read_file(artifact2));

  // Flag overrides reach the artifact.
  const auto artifact3 = (dir / "model3.dcal").string();
  REQUIRE(cli({"calibrate", "--config", cfg, "--features", fjson, "--out", artifact3, "--alpha",
               "0.5", "--beta", "0.7", "--lambda", "0.4", "--sim-mode", "scalar_literal",
               "--grad-mode", "energy_grad", "--retention", "0.9", "--variant", "spatial_only"})
              .code == 0);
  const auto a3 = rfood::read_artifact(artifact3);
  CHECK(a3.selection.alpha == 0.5);
  CHECK(a3.selection.beta == 0.7);
  CHECK(a3.fusion.lambda == 0.4);
  CHECK(a3.selection.sim_mode == rfood::SimMode::ScalarLiteral);
  CHECK(a3.fusion.grad_mode == rfood::GradMode::EnergyGrad);
  CHECK(a3.retention == 0.9);
  CHECK(a3.variant == rfood::SelectionVariant::SpatialOnly);

  // Dimension mismatch between artifact and features fails cleanly.
  const auto bad = cli({"score", "--artifact", artifact, "--features", (dir / "one.dftf").string(),
                        "--out", (dir / "bad.jsonl").string()});
  CHECK(bad.code == 0);  // same 16x7x7 shape
  rfood::FeatureTensor wrong{rfood::Tensor3(3, 7, 7), -1};
  rfood::write_features(wrong, dir / "wrong.dftf");
  const auto mismatch = cli({"score", "--artifact", artifact, "--features",
                             (dir / "wrong.dftf").string(), "--out", (dir / "w.jsonl").string()});
  CHECK(mismatch.code == 1);
  CHECK(single_error_line(mismatch.err));
}

TEST_CASE("sweep writes a CSV") {
  testutil::TempDir dir;
  const auto out = (dir / "lambda.csv").string();
  const std::string cfg = (kFixtures / "smoke_config.json").string();
  REQUIRE(cli({"sweep", "--config", cfg, "--kind", "lambda", "--grid", "0,0.2,1", "--out", out}).code == 0);
  const auto csv = rfood::read_file(out);
  CHECK(csv.find("point,accuracy,recall,f1,auroc,wem,closed_set_accuracy\n") != std::string::npos);
  CHECK(csv.find("\n0.200000,") != std::string::npos);
  const auto out2 = (dir / "lambda2.csv").string();
  REQUIRE(cli({"sweep", "--config", cfg, "--kind", "lambda", "--grid", "0,0.2,1", "--out", out2}).code == 0);
  CHECK(rfood::read_file(out2) == csv);
  CHECK(cli({"sweep", "--config", cfg, "--kind", "lambda", "--grid", "", "--out", out}).code == 1);
}

TEST_CASE("default desk config end to end matches the golden metrics") {
  testutil::TempDir dir;
  const auto p = [&](const char* name) { return (dir / name).string(); };
  rfood::write_file_atomic(dir / "config.json", "{}");
  const std::string cfg = p("config.json");
  REQUIRE(cli({"synth", "--config", cfg, "--out", p("data")}).code == 0);
  REQUIRE(cli({"tfi", "--dataset", p("data/manifest.json"), "--out", p("images")}).code == 0);
  REQUIRE(cli({"extract", "--dataset", p("data/manifest.json"), "--config", cfg, "--out",
               p("features")}).code == 0);
  REQUIRE(cli({"calibrate", "--config", cfg, "--features", p("features/features.json"), "--out",
               p("model.dcal")}).code == 0);
  REQUIRE(cli({"eval", "--config", cfg, "--features", p("features/features.json"), "--out",
               p("metrics.json")}).code == 0);
  const auto metrics = rfood::read_file(dir / "metrics.json");
  const auto j = nlohmann::json::parse(metrics);
  for (const char* key : {"accuracy", "recall", "f1", "auroc", "wem", "closed_set_accuracy", "gamma"})
    CHECK(j["metrics"].contains(key));
  CHECK(metrics == rfood::read_file(kFixtures / "default_metrics.json"));
}
