// sdcn: segment spectral datacubes by deep clustering in a learned latent
// space. Subcommands: generate | train | segment | eval. Each takes a JSON
// config file; a few flags override config values.

#include <CLI11.hpp>
#include <cstdint>
#include <string>

#include "sdcn/cli.hpp"

namespace {

struct CommandArgs {
  std::string config;
  sdcn::cli::Overrides overrides;
};

void add_common_flags(CLI::App* cmd, CommandArgs& args,
                      std::optional<std::uint64_t>& seed,
                      std::optional<std::string>& out) {
  cmd->add_option("--config", args.config, "Path to the JSON run config")
      ->required();
  cmd->add_option("--seed", seed, "Override the config seed");
  cmd->add_option("--out", out, "Override the output directory");
  cmd->add_flag("--quiet", args.overrides.quiet, "Suppress progress output");
}

}  // namespace

int main(int argc, char** argv) {
  sdcn::cli::apply_thread_cap();

  CLI::App app{"Spectral datacube segmentation via deep clustering"};
  app.require_subcommand(1);

  CommandArgs gen, train, seg, eval;
  std::optional<std::uint64_t> gen_seed, train_seed, seg_seed, eval_seed;
  std::optional<std::string> gen_out, train_out, seg_out, eval_out;

  auto* cmd_generate =
      app.add_subcommand("generate", "Synthesize a labeled datacube from an RGB seed");
  add_common_flags(cmd_generate, gen, gen_seed, gen_out);

  auto* cmd_train = app.add_subcommand("train", "Train an autoencoder on cube spectra");
  add_common_flags(cmd_train, train, train_seed, train_out);

  auto* cmd_segment = app.add_subcommand("segment", "Segment a cube with a trained model");
  add_common_flags(cmd_segment, seg, seg_seed, seg_out);
  cmd_segment->add_flag("--integrated", seg.overrides.integrated,
                        "Also write energy-integrated maps");

  auto* cmd_eval = app.add_subcommand("eval", "Score a segmentation against labels");
  add_common_flags(cmd_eval, eval, eval_seed, eval_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : sdcn::cli::kExitConfig;
  }

  if (cmd_generate->parsed()) {
    gen.overrides.seed = gen_seed;
    gen.overrides.out_dir = gen_out;
    return sdcn::cli::run_generate(gen.config, gen.overrides);
  }
  if (cmd_train->parsed()) {
    train.overrides.seed = train_seed;
    train.overrides.out_dir = train_out;
    return sdcn::cli::run_train(train.config, train.overrides);
  }
  if (cmd_segment->parsed()) {
    seg.overrides.seed = seg_seed;
    seg.overrides.out_dir = seg_out;
    return sdcn::cli::run_segment(seg.config, seg.overrides);
  }
  if (cmd_eval->parsed()) {
    eval.overrides.seed = eval_seed;
    eval.overrides.out_dir = eval_out;
    return sdcn::cli::run_eval(eval.config, eval.overrides);
  }
  return sdcn::cli::kExitConfig;
}
