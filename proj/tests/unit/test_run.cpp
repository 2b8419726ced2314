// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <chrono>

#include "expect_error.hpp"
#include "fixtures.hpp"
#include "stancegen/run/run.hpp"
#include "stancegen/util/jsonl.hpp"

using namespace stancegen;
using nlohmann::json;
using testing_support::data_path;

namespace {

run::RunConfig fixture_config(const std::filesystem::path& out) {
  auto cfg = run::load_run_config(data_path("e2e/config.json"));
  cfg.output = out;
  return cfg;
}

json fixture_json() { return util::read_json(data_path("e2e/config.json")); }

}  // namespace

TEST(Run, FixtureReproducesCommittedManifest) {
  testing_support::TempDir dir;
  const auto t0 = std::chrono::steady_clock::now();
  const auto m = run::run_end_to_end(fixture_config(dir / "out"));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LT(secs, 60.0);
  const auto golden = util::read_json(data_path("e2e/golden_manifest.json"));
  const auto want = golden.at("artifacts").get<std::map<std::string, std::string>>();
  EXPECT_TRUE(run::compare_artifacts(want, m.artifacts()).empty());
  for (const auto& d : run::compare_artifacts(want, m.artifacts())) ADD_FAILURE() << d;
  EXPECT_EQ(json(m.inputs), golden.at("inputs"));
  EXPECT_TRUE(std::filesystem::exists(dir / "out/manifest.json"));
}

TEST(Run, FixtureStageSummaries) {
  testing_support::TempDir dir;
  const auto m = run::run_end_to_end(fixture_config(dir / "out"));
  std::map<std::string, json> s;
  for (const auto& st : m.stages) s[st.name] = st.summary;
  EXPECT_EQ(s.at("corpus")["samples"], 50);
  EXPECT_EQ(s.at("annotation")["unresolved"], 0);
  EXPECT_EQ(s.at("annotation")["human"], 10);
  const auto agreement = util::read_json(dir / "out/annotation/agreement.json");
  EXPECT_NEAR(agreement["kappa"]["stance"].get<double>(), 0.4, 1e-12);
  const auto report = util::read_json(dir / "out/eval/report.json");
  EXPECT_FALSE(report.dump().empty());
  EXPECT_TRUE(std::filesystem::exists(dir / "out/eval/report_by_target.txt"));
  const auto items = util::read_jsonl(dir / "out/eval/items.jsonl");
  for (const auto& it : items) EXPECT_FALSE(std::filesystem::path(it["image_path"].get<std::string>()).is_absolute());
}

TEST(Run, RerunAndReplayAreIdentical) {
  testing_support::TempDir dir;
  const auto a = run::run_end_to_end(fixture_config(dir / "a"));
  const auto b = run::run_end_to_end(fixture_config(dir / "a"));
  EXPECT_TRUE(run::compare_artifacts(a.artifacts(), b.artifacts()).empty());
  const auto manifest = run::manifest_from_json(util::read_json(dir / "a/manifest.json"));
  const auto r = run::replay(manifest, dir / "b");
  EXPECT_TRUE(r.identical);
  for (const auto& d : r.mismatches) ADD_FAILURE() << d;
}

TEST(Run, ReplayDetectsTamperedArtifacts) {
  testing_support::TempDir dir;
  auto m = run::run_end_to_end(fixture_config(dir / "a"));
  m.stages[0].artifacts.begin()->second = std::string(64, '0');
  const auto r = run::replay(m, dir / "b");
  EXPECT_FALSE(r.identical);
  EXPECT_EQ(r.mismatches.size(), 1u);
}

TEST(Run, ConfigValidation) {
  const auto base = data_path("e2e");
  auto j = fixture_json();
  j["paths"]["posts"] = "missing.jsonl";
  EXPECT_STG_ERROR(run::parse_run_config(j, base), ErrorCode::config_error);

  j = fixture_json();
  j["seeds"].erase("sdmg");
  EXPECT_STG_ERROR(run::parse_run_config(j, base), ErrorCode::config_error);

  j = fixture_json();
  j["annotation"]["labelers"][0] = {{"id", "live"}, {"type", "http"}, {"base_url", "http://x"}, {"model", "m"}};
  EXPECT_STG_ERROR(run::parse_run_config(j, base), ErrorCode::config_error);
  j["live"] = true;
  EXPECT_NO_THROW(run::parse_run_config(j, base));

  j = fixture_json();
  j["split"]["ratio"] = 1.0;
  EXPECT_STG_ERROR(run::parse_run_config(j, base), ErrorCode::config_error);

  j = fixture_json();
  j["finetune"]["overrides"] = {{"batch_size", "zero"}};
  EXPECT_STG_ERROR(run::parse_run_config(j, base), ErrorCode::config_error);

  j = fixture_json();
  j["generation"]["modality"] = "Audio";
  EXPECT_STG_ERROR(run::parse_run_config(j, base), ErrorCode::config_error);

  EXPECT_STG_ERROR(run::load_run_config(base / "nope.json"), ErrorCode::config_error);
}

TEST(Run, StageErrorsNameTheStage) {
  testing_support::TempDir dir;
  auto cfg = fixture_config(dir / "out");
  cfg.media_root = dir.path();
  try {
    run::run_end_to_end(cfg);
    FAIL() << "expected a stage error";
  } catch (const run::StageError& e) {
    EXPECT_EQ(e.stage(), "sdmg");
    EXPECT_EQ(std::string(e.what()).rfind("[sdmg]", 0), 0u) << e.what();
  }
}

TEST(Run, ManifestJsonRoundTrip) {
  testing_support::TempDir dir;
  const auto m = run::run_end_to_end(fixture_config(dir / "out"));
  const auto back = run::manifest_from_json(run::to_json(m));
  EXPECT_EQ(back.artifacts(), m.artifacts());
  EXPECT_EQ(back.inputs, m.inputs);
  EXPECT_EQ(back.version, run::version());
}
