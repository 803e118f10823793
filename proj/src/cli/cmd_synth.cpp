#include <iostream>

#include "commands.hpp"
#include "uqxai/synth.hpp"

namespace uqxai::cli {

CLI::App* add_synth(CLI::App& app, SynthOptions& o) {
  auto* sub = app.add_subcommand("synth", "Generate a deterministic synthetic fixture directory");
  add_common_options(sub, o.common, true);
  sub->add_option("--n-cal", o.n_cal, "Calibration samples")->capture_default_str();
  sub->add_option("--n-test", o.n_test, "Evaluation samples")->capture_default_str();
  sub->add_option("--num-classes", o.num_classes, "Classes K")->capture_default_str();
  sub->add_option("--passes", o.passes, "Stochastic passes T")->capture_default_str();
  sub->add_option("--miscalibration", o.miscalibration,
                  "Logit multiplier c (ground-truth temperature)")
      ->capture_default_str();
  sub->add_option("--logit-scale", o.logit_scale, "Std-dev of base logits")->capture_default_str();
  sub->add_option("--pass-noise", o.pass_noise, "Std-dev of per-pass logit noise")
      ->capture_default_str();
  sub->add_option("--image-size", o.image_size, "Side of the square planted images")
      ->capture_default_str();
  sub->add_option("--cell", o.cell, "Superpixel grid cell size")->capture_default_str();
  return sub;
}

void run_synth(const SynthOptions& o) {
  SynthConfig cfg;
  cfg.seed = require_seed(o.common, "synth");
  cfg.n_cal = o.n_cal;
  cfg.n_test = o.n_test;
  cfg.num_classes = o.num_classes;
  cfg.passes = o.passes;
  cfg.miscalibration = o.miscalibration;
  cfg.logit_scale = o.logit_scale;
  cfg.pass_noise = o.pass_noise;
  cfg.image_size = o.image_size;
  cfg.cell = o.cell;
  cfg.validate();
  ensure_out_dir(o.common.out);
  const SynthFixture fx = generate_fixture(cfg);
  write_fixture(fx, o.common.out);
  std::cout << "synth: wrote " << fx.samples() << " samples (K = " << cfg.num_classes
            << ", T = " << cfg.passes << ", c = " << cfg.miscalibration << ") to "
            << o.common.out << "\n";
}

}  // namespace uqxai::cli
