// Command-line front end: synthesize / image / verify / psf, driven by a
// JSON run config.  Exit code 0 iff the requested work (and any checks)
// succeeded.

#include <CLI11.hpp>

#include "wgfm/runner.hpp"

namespace {

wgfm::RunConfig load(const std::string& config_path, const std::string& out_override,
                     long long seed_override) {
  wgfm::RunConfig cfg = wgfm::load_config(config_path);
  if (!out_override.empty()) cfg.outputs.directory = out_override;
  if (seed_override >= 0) cfg.noise_seed = static_cast<std::uint64_t>(seed_override);
  return cfg;
}

void print_metrics(const char* name, const wgfm::SupportMetrics& m) {
  std::printf("%s: argmax_z1=%.4f ratio=%.3f halfmax=[%.4f, %.4f] jaccard=%.3f\n",
              name, m.argmax_z1, m.inside_outside_ratio, m.halfmax_lo, m.halfmax_hi,
              m.jaccard);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"single-mode multi-frequency waveguide imaging"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  long long seed = -1;
  double verify_theta = std::numeric_limits<double>::quiet_NaN();

  auto add_common = [&](CLI::App* sub, bool with_out) {
    sub->add_option("--config", config_path, "run config (JSON)")->required();
    if (with_out) sub->add_option("--out", out_dir, "output directory override");
    sub->add_option("--seed", seed, "noise seed override");
  };

  auto* synth = app.add_subcommand("synthesize", "write dataset CSV files");
  add_common(synth, true);
  auto* image = app.add_subcommand("image", "image synthesized datasets");
  add_common(image, true);
  auto* verify = app.add_subcommand("verify", "run consistency checks");
  add_common(verify, false);
  verify->add_option("--theta", verify_theta,
                     "build the middle factor with this theta (negative control)");
  auto* psf_cmd = app.add_subcommand("psf", "write the point-spread-function profile");
  add_common(psf_cmd, true);

  CLI11_PARSE(app, argc, argv);

  try {
    const wgfm::RunConfig cfg = load(config_path, out_dir, seed);
    const std::string dir = cfg.outputs.directory;
    if (synth->parsed()) {
      const wgfm::RunManifest man = wgfm::run_synthesize(cfg, dir);
      for (const auto& f : man.files) std::printf("wrote %s/%s\n", dir.c_str(), f.c_str());
    } else if (image->parsed()) {
      const wgfm::ImageOutputs out = wgfm::run_image(cfg, dir);
      if (out.fm) print_metrics("fm", *out.fm);
      if (out.fbsm) print_metrics("fbsm", *out.fbsm);
    } else if (verify->parsed()) {
      std::optional<double> theta;
      if (!std::isnan(verify_theta)) theta = verify_theta;
      const wgfm::VerifyReport report = wgfm::run_verify(cfg, theta);
      for (const auto& c : report.checks)
        std::printf("%-28s %12.5e  (threshold %.5e)  %s\n", c.name.c_str(), c.value,
                    c.threshold, c.pass ? "ok" : "FAIL");
      if (!report.all_pass()) return 1;
    } else if (psf_cmd->parsed()) {
      wgfm::run_psf(cfg, dir);
      std::printf("wrote %s/psf_profile.csv\n", dir.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
