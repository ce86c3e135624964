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

// Command-line front end. See README.md for the subcommands.

#include <string>

#include "CLI11.hpp"
#include "xddpm/cli.hpp"

int main(int argc, char** argv) {
  using namespace xddpm;
  CLI::App app{"xddpm: relevance-masked diffusion on synthetic data"};
  app.require_subcommand(1);

  std::string config, out, checkpoint, mode_name = "xddpm";
  std::uint64_t seed = 0;
  Eigen::Index n = 0;
  bool corrupt = false;

  auto* train = app.add_subcommand("train", "train a model and write checkpoint/trace/manifest");
  train->add_option("--config", config, "config JSON (defaults when omitted)");
  train->add_option("--mode", mode_name, "xddpm or ddpm-baseline")
      ->check(CLI::IsMember({"xddpm", "ddpm-baseline"}));
  train->add_option("--out", out, "output directory")->required();
  auto* train_seed = train->add_option("--seed", seed, "override the config seed");

  auto* sample = app.add_subcommand("sample", "generate samples from a checkpoint");
  sample->add_option("--checkpoint", checkpoint)->required();
  sample->add_option("--n", n, "number of samples")->default_val(1000);
  sample->add_option("--out", out)->required();
  auto* sample_seed = sample->add_option("--seed", seed);

  auto* evaluate = app.add_subcommand("evaluate", "mask AUC and generated-sample statistics");
  evaluate->add_option("--checkpoint", checkpoint)->required();
  evaluate->add_option("--config", config, "dataset spec (defaults to the checkpoint's)");
  evaluate->add_option("--n", n, "generated samples")->default_val(2000);
  evaluate->add_option("--out", out)->required();
  auto* eval_seed = evaluate->add_option("--seed", seed);

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of every loss");
  gradcheck->add_option("--config", config, "config JSON (tiny model when omitted)");
  gradcheck->add_option("--out", out, "write gradcheck.json here");
  gradcheck->add_flag("--corrupt-gradient", corrupt, "test hook: perturb analytic gradients");

  auto* speed = app.add_subcommand("compare-speed", "paired xddpm / ddpm-baseline training");
  speed->add_option("--config", config);
  speed->add_option("--out", out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  RunContext ctx;
  for (int i = 0; i < argc; ++i) ctx.command_line += (i ? " " : "") + std::string(argv[i]);
  auto opt_seed = [&](const CLI::Option* o) {
    return o->count() ? std::optional<std::uint64_t>(seed) : std::nullopt;
  };

  if (*train) {
    TrainMode mode;
    try {
      mode = parse_train_mode(mode_name);
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitUsage;
    }
    return run_train(config, mode, out, opt_seed(train_seed), ctx);
  }
  if (*sample) return run_sample(checkpoint, n, opt_seed(sample_seed), out, ctx);
  if (*evaluate) return run_eval(checkpoint, config, n, opt_seed(eval_seed), out, ctx);
  if (*gradcheck) return run_gradcheck(config, out, corrupt, ctx);
  return run_compare_speed(config, out, ctx);
}
