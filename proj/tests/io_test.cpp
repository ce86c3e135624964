/* Copyright 2026 The xddpm Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "test_util.hpp"
#include "xddpm/io.hpp"

namespace xddpm {
namespace {

using testing::scratch_dir;
using testing::slurp;
using testing::tiny_config;

TEST(Config, EmptyObjectGivesDefaultsAndNotices) {
  std::ostringstream notes;
  const TrainConfig c = config_from_json(Json::object(), &notes);
  EXPECT_EQ(config_to_json(c), config_to_json(TrainConfig{}));
  EXPECT_NE(notes.str().find("'lambda_vib' not set"), std::string::npos);
  EXPECT_NE(notes.str().find("'T' not set"), std::string::npos);
}

TEST(Config, PartialObjectKeepsOtherDefaults) {
  std::ostringstream notes;
  const TrainConfig c = config_from_json(Json{{"T", 200}, {"D", 16}}, &notes);
  EXPECT_EQ(c.steps_T, 200);
  EXPECT_EQ(c.dim, 16);
  EXPECT_EQ(c.lambda_vib, TrainConfig{}.lambda_vib);
  EXPECT_EQ(notes.str().find("'T' not set"), std::string::npos);
}

void expect_error_naming(const Json& j, const std::string& key) {
  try {
    config_from_json(j);
    FAIL() << "expected an error for " << j.dump();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("'" + key + "'"), std::string::npos) << e.what();
  }
}

TEST(Config, ErrorsNameTheKey) {
  expect_error_naming(Json{{"lambda_vib", -1}}, "lambda_vib");
  expect_error_naming(Json{{"lr", "fast"}}, "lr");
  expect_error_naming(Json{{"batch_size", 0}}, "batch_size");
  expect_error_naming(Json{{"schedule", "cosine"}}, "schedule");
  expect_error_naming(Json{{"seed", -3}}, "seed");
  expect_error_naming(Json{{"wibble", 1}}, "wibble");
  expect_error_naming(Json{{"k", 16}}, "k");
  expect_error_naming(Json{{"denoiser_hidden", {8, 0}}}, "denoiser_hidden");
}

TEST(Config, FileRoundTripAndMalformedJson) {
  const auto dir = scratch_dir("config");
  TrainConfig c = tiny_config();
  c.beta_end = 0.3;
  write_json(config_to_json(c), dir / "c.json");
  const TrainConfig back = load_config(dir / "c.json");
  EXPECT_EQ(config_to_json(back), config_to_json(c));
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_NE(config_hash(back), config_hash(TrainConfig{}));
  EXPECT_EQ(config_hash(c).size(), 16u);
  std::ofstream(dir / "bad.json") << "{\"lr\": ";
  EXPECT_THROW(load_config(dir / "bad.json"), Error);
  EXPECT_THROW(load_config(dir / "missing.json"), Error);
}

Checkpoint trained_checkpoint() {
  const TrainConfig cfg = tiny_config();
  TrainResult r = train_loop(cfg, make_dataset(cfg), TrainMode::kXddpm);
  return {cfg, TrainMode::kXddpm, std::move(r.state), kCheckpointFormatVersion};
}

TEST(Checkpoint, SaveLoadSaveIsByteStable) {
  const auto dir = scratch_dir("ckpt");
  const Checkpoint c = trained_checkpoint();
  save_checkpoint(c, dir / "a.json");
  const Checkpoint back = load_checkpoint(dir / "a.json");
  save_checkpoint(back, dir / "b.json");
  EXPECT_EQ(slurp(dir / "a.json"), slurp(dir / "b.json"));
  EXPECT_EQ(back.state.model.theta.values(), c.state.model.theta.values());
  EXPECT_EQ(back.state.model.phi_sig.values(), c.state.model.phi_sig.values());
  EXPECT_EQ(back.state.optimizer.phi_mask.v.values(), c.state.optimizer.phi_mask.v.values());
  EXPECT_EQ(back.state.optimizer.step, c.state.optimizer.step);
  EXPECT_EQ(back.state.step, c.state.step);
  EXPECT_EQ(back.mode, c.mode);
}

TEST(Checkpoint, ResumingZeroStepsIsBitIdentical) {
  const Checkpoint c = trained_checkpoint();
  const Checkpoint back = checkpoint_from_json(Json::parse(dump_checkpoint(c)));
  const TrainResult r = resume_training(back.state, back.config, make_dataset(back.config),
                                        back.mode, back.state.step);
  EXPECT_TRUE(r.trace.rows.empty());
  EXPECT_EQ(r.state.model.theta.values(), c.state.model.theta.values());
  EXPECT_EQ(r.state.model.phi_mask.values(), c.state.model.phi_mask.values());
}

TEST(Checkpoint, ResumingContinuesTheSameTrajectory) {
  TrainConfig cfg = tiny_config();
  const SyntheticDataset data = make_dataset(cfg);
  const TrainResult full = resume_training(initial_state(cfg), cfg, data, TrainMode::kXddpm, 10);
  TrainResult half = resume_training(initial_state(cfg), cfg, data, TrainMode::kXddpm, 4);
  const Checkpoint c{cfg, TrainMode::kXddpm, std::move(half.state), kCheckpointFormatVersion};
  const Checkpoint back = checkpoint_from_json(Json::parse(dump_checkpoint(c)));
  const TrainResult rest = resume_training(back.state, cfg, data, TrainMode::kXddpm, 10);
  EXPECT_EQ(rest.state.model.theta.values(), full.state.model.theta.values());
}

TEST(Checkpoint, RejectsWrongVersionAndDamage) {
  Json j = checkpoint_to_json(trained_checkpoint());
  Json v = j;
  v["format_version"] = kCheckpointFormatVersion + 1;
  EXPECT_THROW(checkpoint_from_json(v), Error);
  Json missing = j;
  missing["theta"].erase("W0");
  EXPECT_THROW(checkpoint_from_json(missing), Error);
  Json short_block = j;
  short_block["phi_sig"]["b0"].erase(0);
  EXPECT_THROW(checkpoint_from_json(short_block), Error);
  Json no_opt = j;
  no_opt.erase("optimizer");
  EXPECT_THROW(checkpoint_from_json(no_opt), Error);
  const auto dir = scratch_dir("ckpt_bad");
  std::ofstream(dir / "x.json") << "not json";
  EXPECT_THROW(load_checkpoint(dir / "x.json"), Error);
}

TEST(FormatDouble, RoundTripsExactly) {
  RngStream r(1, 1);
  for (int i = 0; i < 10000; ++i) {
    const double v = r.normal() * std::pow(10.0, r.uniform_int(-30, 30));
    ASSERT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_double(0.0), "0");
}

TEST(Csv, TraceHeaderAndRows) {
  const auto dir = scratch_dir("trace");
  TrainTrace t;
  t.append({{1.5, 0.25, 2.0, 11.75, 1}, 1.0, 1.5}, 1, 0.0);
  t.append({{0.5, 0.25, 2.0, 10.75, 2}, 1.0, 1.5}, 2, 0.0);
  write_trace_csv(t, dir / "trace.csv");
  EXPECT_EQ(slurp(dir / "trace.csv"),
            "step,denoise,kl,signal_mse,total,ema_denoise,wall_ms\n"
            "1,1.5,0.25,2,11.75,1.5,0\n"
            "2,0.5,0.25,2,10.75,1.4899999999999998,0\n");
}

TEST(Csv, SamplesRoundTrip) {
  const auto dir = scratch_dir("samples");
  const Matrix w = RngStream(2, 2).normal(3, 5);
  write_samples_csv(w, dir / "s.csv");
  EXPECT_EQ(slurp(dir / "s.csv").substr(0, 9), "x0,x1,x2\n");
  EXPECT_EQ(read_samples_csv(dir / "s.csv"), w);
}

TEST(Manifest, ListsArtifactsAndExtras) {
  RunManifest m;
  m.command = "train";
  m.artifacts = {"a", "b"};
  m.extra["mode"] = "xddpm";
  const Json j = m.to_json();
  EXPECT_EQ(j["artifacts"].size(), 2u);
  EXPECT_EQ(j["mode"], "xddpm");
  EXPECT_EQ(utc_now().size(), 20u);
}

TEST(OutDirLock, SecondLockFailsUntilReleased) {
  const auto dir = scratch_dir("lock");
  {
    const OutDirLock a(dir);
    EXPECT_THROW(OutDirLock b(dir), Error);
  }
  EXPECT_NO_THROW(OutDirLock c(dir));
  EXPECT_FALSE(std::filesystem::exists(dir / ".lock"));
}

}  // namespace
}  // namespace xddpm
