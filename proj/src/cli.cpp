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

#include "xddpm/cli.hpp"

#include <functional>

#include "xddpm/grad_check.hpp"
#include "xddpm/synthdata.hpp"

namespace xddpm {

namespace {

constexpr std::uint64_t kSampleStream = 0x5A3B;
constexpr std::uint64_t kEvalStream = 0xE7A1;
constexpr std::uint64_t kGradStream = 0x6C4D;

// Maps exceptions to exit codes. NumericalError derives from Error, so it
// is caught first.
int guarded(const RunContext& ctx, const std::function<int()>& body) {
  try {
    return body();
  } catch (const NumericalError& e) {
    *ctx.err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    *ctx.err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    *ctx.err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    *ctx.err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

TrainConfig config_or_default(const fs::path& path, const RunContext& ctx) {
  if (path.empty()) return TrainConfig{};
  return load_config(path, ctx.err);
}

RunManifest begin_manifest(const RunContext& ctx, const std::string& command,
                           const TrainConfig& cfg, std::uint64_t seed) {
  RunManifest m;
  m.command_line = ctx.command_line;
  m.command = command;
  m.config_hash = config_hash(cfg);
  m.seed = seed;
  m.started = utc_now();
  m.extra["config"] = config_to_json(cfg);
  return m;
}

void finish_manifest(RunManifest& m, const fs::path& out_dir) {
  m.finished = utc_now();
  m.artifacts.push_back((out_dir / "manifest.json").string());
  write_json(m.to_json(), out_dir / "manifest.json");
}

Json loss_json(const LossBreakdown& l) {
  return {{"step", l.step},
          {"denoise", l.denoise},
          {"kl", l.kl},
          {"signal_mse", l.signal_mse},
          {"total", l.total}};
}

Json optional_step(const std::optional<std::int64_t>& s) { return s ? Json(*s) : Json(nullptr); }

struct TrainOutcome {
  bool aborted = false;
  TrainTrace trace;
};

// Trains one mode into `dir`, writing checkpoint.json and trace.csv (or
// the partial trace plus abort.json). Artifacts are appended to `m`.
TrainOutcome train_into(const TrainConfig& cfg, const SyntheticDataset& data, TrainMode mode,
                        const fs::path& dir, RunManifest& m, const RunContext& ctx) {
  fs::create_directories(dir);
  TrainOutcome out;
  out.trace.has_truth = data.relevant_count() < data.dim();
  // Rows are mirrored here so a partial trace survives an abort.
  auto observer = [&out](const TraceRow& row) { out.trace.rows.push_back(row); };
  try {
    TrainResult r = train_loop(cfg, data, mode, observer);
    Checkpoint ckpt{cfg, mode, std::move(r.state), kCheckpointFormatVersion};
    save_checkpoint(ckpt, dir / "checkpoint.json");
    m.artifacts.push_back((dir / "checkpoint.json").string());
  } catch (const TrainingAborted& e) {
    out.aborted = true;
    write_json({{"error", e.what()}, {"step", e.step()}, {"loss", loss_json(e.loss())},
                {"mode", to_string(mode)}},
               dir / "abort.json");
    m.artifacts.push_back((dir / "abort.json").string());
    *ctx.err << "training aborted: " << e.what() << "\n";
  }
  write_trace_csv(out.trace, dir / "trace.csv");
  m.artifacts.push_back((dir / "trace.csv").string());
  return out;
}

}  // namespace

TrainConfig tiny_gradcheck_config() {
  TrainConfig c;
  c.dim = 4;
  c.signal_dim = 1;
  c.denoiser_hidden = {8};
  c.mask_hidden = {8};
  c.decoder_hidden = {8};
  c.time_width = 4;
  c.batch_size = 8;
  c.dataset.n = 64;
  c.dataset.relevant = 2;
  return c;
}

int run_train(const fs::path& config_path, TrainMode mode, const fs::path& out_dir,
              std::optional<std::uint64_t> seed, const RunContext& ctx) {
  return guarded(ctx, [&] {
    TrainConfig cfg = config_or_default(config_path, ctx);
    if (seed) cfg.seed = *seed;
    const OutDirLock lock(out_dir);
    RunManifest m = begin_manifest(ctx, "train", cfg, cfg.seed);
    m.extra["mode"] = to_string(mode);
    const SyntheticDataset data = make_dataset(cfg);
    const TrainOutcome r = train_into(cfg, data, mode, out_dir, m, ctx);
    finish_manifest(m, out_dir);
    if (r.aborted) return kExitNumerical;
    *ctx.out << "trained " << cfg.total_steps << " steps (" << to_string(mode)
             << "), final ema_denoise " << r.trace.ema_denoise() << "\n";
    return kExitOk;
  });
}

int run_sample(const fs::path& checkpoint, Eigen::Index n, std::optional<std::uint64_t> seed,
               const fs::path& out_dir, const RunContext& ctx) {
  return guarded(ctx, [&] {
    require(n >= 1, "--n must be >= 1");
    const Checkpoint ckpt = load_checkpoint(checkpoint);
    const std::uint64_t s = seed.value_or(ckpt.config.seed);
    const OutDirLock lock(out_dir);
    RunManifest m = begin_manifest(ctx, "sample", ckpt.config, s);
    m.extra["checkpoint"] = checkpoint.string();
    m.extra["n"] = n;
    const GeneratedBatch gen = generate(ckpt.state.model.denoiser, ckpt.state.model.theta,
                                        ckpt.config.schedule(), n, RngStream(s, kSampleStream),
                                        ckpt.mode);
    write_samples_csv(gen.w, out_dir / "samples.csv");
    write_json({{"seed", gen.seed},
                {"stream_id", gen.stream_id},
                {"mode", to_string(gen.mode)},
                {"T", gen.steps_T},
                {"n", n},
                {"D", gen.w.rows()},
                {"checkpoint", checkpoint.string()}},
               out_dir / "samples.json");
    m.artifacts = {(out_dir / "samples.csv").string(), (out_dir / "samples.json").string()};
    finish_manifest(m, out_dir);
    *ctx.out << "wrote " << n << " samples\n";
    return kExitOk;
  });
}

int run_eval(const fs::path& checkpoint, const fs::path& config_path, Eigen::Index n_gen,
             std::optional<std::uint64_t> seed, const fs::path& out_dir, const RunContext& ctx) {
  return guarded(ctx, [&] {
    const Checkpoint ckpt = load_checkpoint(checkpoint);
    TrainConfig data_cfg = ckpt.config;
    if (!config_path.empty()) {
      const TrainConfig given = load_config(config_path, ctx.err);
      data_cfg.dataset = given.dataset;
      data_cfg.dim = given.dim;
      data_cfg.signal_dim = given.signal_dim;
    }
    const std::uint64_t s = seed.value_or(ckpt.config.seed);
    const OutDirLock lock(out_dir);
    RunManifest m = begin_manifest(ctx, "evaluate", data_cfg, s);
    m.extra["checkpoint"] = checkpoint.string();
    m.extra["n_gen"] = n_gen;
    const SyntheticDataset data = make_dataset(data_cfg);
    const EvalReport rep = evaluate(ckpt.state.model, ckpt.config.schedule(), data, n_gen,
                                    RngStream(s, kEvalStream), ckpt.mode);
    Json j = eval_report_to_json(rep);
    j["mode"] = to_string(ckpt.mode);
    j["seed"] = s;
    write_json(j, out_dir / "report.json");
    write_per_coordinate_csv(rep, out_dir / "per_coordinate.csv");
    m.artifacts = {(out_dir / "report.json").string(), (out_dir / "per_coordinate.csv").string()};
    finish_manifest(m, out_dir);
    *ctx.out << "mask_auc " << rep.mask_auc << ", max |corr| " << rep.max_abs_cross_corr
             << ", irrelevant var " << rep.empirical_irrelevant_var << " (predicted "
             << rep.predicted_irrelevant_var << ")\n";
    return kExitOk;
  });
}

int run_gradcheck(const fs::path& config_path, const fs::path& out_dir, bool corrupt_gradient,
                  const RunContext& ctx) {
  return guarded(ctx, [&] {
    const TrainConfig cfg =
        config_path.empty() ? tiny_gradcheck_config() : load_config(config_path, ctx.err);
    const Model model = make_model(cfg, RngStream(cfg.seed, kGradStream));
    const SyntheticDataset data = make_dataset(cfg);
    const Batch batch =
        draw_batch(data, cfg.batch_size, cfg.steps_T, RngStream(cfg.seed, kGradStream + 1), 0);
    const Schedule sched = cfg.schedule();
    const LossWeights w{cfg.lambda_vib, cfg.beta_ib};

    struct Case {
      LossClosure loss;
      ParamVector params;
    };
    std::vector<Case> cases;
    cases.push_back({ddpm_loss_closure(model, batch, sched), model.theta});
    cases.push_back({vib_loss_closure(model, batch, cfg.beta_ib),
                     concat({{"phi_mask.", &model.phi_mask}, {"phi_sig.", &model.phi_sig}})});
    cases.push_back({joint_loss_closure(model, batch, w, sched),
                     concat({{"theta.", &model.theta},
                             {"phi_mask.", &model.phi_mask},
                             {"phi_sig.", &model.phi_sig}})});

    bool ok = true;
    Json reports = Json::array();
    for (std::size_t i = 0; i < cases.size(); ++i) {
      LossClosure loss = cases[i].loss;
      if (corrupt_gradient) {
        auto g = loss.gradient;
        loss.gradient = [g](const ParamVector& p) -> Vector { return 1.001 * g(p); };
      }
      const GradReport rep = grad_check(cases[i].params, loss, kGradStep,
                                        RngStream(cfg.seed, kGradStream).derive({i}));
      const bool pass = rep.global_max_rel_err < kGradTolerance;
      ok = ok && pass;
      *ctx.out << rep.loss_name << ": max rel err " << rep.global_max_rel_err << " over "
               << rep.coordinates_checked << " coordinates " << (pass ? "ok" : "FAIL") << "\n";
      for (const auto& [block, err] : rep.per_block_max_rel_err)
        *ctx.out << "  " << block << " " << err << "\n";
      reports.push_back({{"loss", rep.loss_name},
                         {"max_rel_err", rep.global_max_rel_err},
                         {"per_block", rep.per_block_max_rel_err},
                         {"h", rep.h},
                         {"coordinates_checked", rep.coordinates_checked},
                         {"pass", pass}});
    }
    if (!out_dir.empty()) {
      const OutDirLock lock(out_dir);
      RunManifest m = begin_manifest(ctx, "gradcheck", cfg, cfg.seed);
      write_json({{"tolerance", kGradTolerance}, {"pass", ok}, {"losses", reports}},
                 out_dir / "gradcheck.json");
      m.artifacts = {(out_dir / "gradcheck.json").string()};
      finish_manifest(m, out_dir);
    }
    return ok ? kExitOk : kExitNumerical;
  });
}

int run_compare_speed(const fs::path& config_path, const fs::path& out_dir,
                      const RunContext& ctx) {
  return guarded(ctx, [&] {
    const TrainConfig cfg = config_or_default(config_path, ctx);
    const OutDirLock lock(out_dir);
    RunManifest m = begin_manifest(ctx, "compare-speed", cfg, cfg.seed);
    const SyntheticDataset data = make_dataset(cfg);
    const fs::path dir_x = out_dir / to_string(TrainMode::kXddpm);
    const fs::path dir_d = out_dir / to_string(TrainMode::kDdpmBaseline);
    const TrainOutcome rx = train_into(cfg, data, TrainMode::kXddpm, dir_x, m, ctx);
    const TrainOutcome rd = train_into(cfg, data, TrainMode::kDdpmBaseline, dir_d, m, ctx);

    const auto sx = steps_to_threshold(rx.trace, cfg.loss_threshold);
    const auto sd = steps_to_threshold(rd.trace, cfg.loss_threshold);
    Json ratio = nullptr;
    if (sx && sd) ratio = static_cast<double>(*sx) / static_cast<double>(*sd);
    auto final_unmasked = [](const TrainOutcome& r) {
      return r.trace.rows.empty() ? Json(nullptr) : Json(r.trace.rows.back().ema_unmasked);
    };
    auto final_metric = [](const TrainOutcome& r) {
      if (r.trace.rows.empty()) return Json(nullptr);
      const TraceRow& row = r.trace.rows.back();
      return Json(r.trace.has_truth ? row.ema_relevant : row.ema_denoise);
    };
    const Json speed{
        {"steps_xddpm", optional_step(sx)},
        {"steps_ddpm", optional_step(sd)},
        {"ratio", ratio},
        {"threshold", cfg.loss_threshold},
        {"reference_ratio", kReferenceSpeedRatio},
        {"metric", rx.trace.has_truth ? "ema of denoise loss on ground-truth relevant coordinates"
                                      : "ema of denoise loss"},
        {"final_metric_xddpm", final_metric(rx)},
        {"final_metric_ddpm", final_metric(rd)},
        {"final_unmasked_relevant_xddpm", final_unmasked(rx)},
        {"final_unmasked_relevant_ddpm", final_unmasked(rd)},
        {"trace_xddpm", (dir_x / "trace.csv").string()},
        {"trace_ddpm", (dir_d / "trace.csv").string()}};
    write_json(speed, out_dir / "speed.json");
    m.artifacts.push_back((out_dir / "speed.json").string());
    finish_manifest(m, out_dir);
    if (rx.aborted || rd.aborted) return kExitNumerical;
    *ctx.out << "steps to threshold " << cfg.loss_threshold << ": xddpm "
             << speed["steps_xddpm"].dump() << ", ddpm " << speed["steps_ddpm"].dump()
             << ", ratio " << ratio.dump() << " (reference " << kReferenceSpeedRatio << ")\n";
    return kExitOk;
  });
}

}  // namespace xddpm
