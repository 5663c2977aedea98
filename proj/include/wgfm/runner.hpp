#pragma once

// Command implementations behind the CLI verbs: synthesize, image,
// verify, psf.  Kept in the library so tests can drive them directly.

#include <limits>
#include <chrono>
#include <iostream>
#include <random>

#include "wgfm/config.hpp"

namespace wgfm {

namespace paths {
inline std::string dataset(MeasurementSide s) {
  return s == MeasurementSide::Left ? "dataset_left.csv" : "dataset_right.csv";
}
inline constexpr const char* kBlockDataset = "dataset_block.csv";
}  // namespace paths

inline DataSet synthesize_from_config(const RunConfig& cfg, MeasurementSide side) {
  if (!cfg.source && !cfg.block)
    throw std::invalid_argument("config has neither a source nor a block to synthesize");
  if (cfg.block) {
    MeasurementConfig src(cfg.measurement_a, cfg.block->source_xperp, side);
    DataSet ds = block_dataset(cfg.waveguide, cfg.block->x1, src,
                               cfg.measurement(side), cfg.grid);
    return cfg.noise_delta > 0.0 ? add_noise(ds, cfg.noise_delta, cfg.noise_seed) : ds;
  }
  DataSet ds = synthesize_dataset(cfg.waveguide, *cfg.source, cfg.measurement(side),
                                  cfg.grid, cfg.quadrature, cfg.alpha);
  return cfg.noise_delta > 0.0 ? add_noise(ds, cfg.noise_delta, cfg.noise_seed) : ds;
}

/// Write the configured dataset file(s) and the run manifest.
inline RunManifest run_synthesize(const RunConfig& cfg, const std::string& outdir) {
  namespace fs = std::filesystem;
  fs::create_directories(outdir);
  RunManifest man;
  man.config_hash = fnv1a_hash(cfg.canonical);
  man.seed = cfg.noise_seed;
  auto emit = [&](const DataSet& ds, const std::string& name) {
    write_csv(ds, (fs::path(outdir) / name).string());
    man.files.push_back(name);
  };
  if (cfg.block) {
    emit(synthesize_from_config(cfg, MeasurementSide::Left), paths::kBlockDataset);
  } else {
    if (cfg.side_left)
      emit(synthesize_from_config(cfg, MeasurementSide::Left),
           paths::dataset(MeasurementSide::Left));
    if (cfg.side_right)
      emit(synthesize_from_config(cfg, MeasurementSide::Right),
           paths::dataset(MeasurementSide::Right));
  }
  man.write(outdir);
  return man;
}

/// Assemble the configured operator from dataset files on disk.
inline FarFieldMatrix assemble_from_config(const RunConfig& cfg,
                                           const std::string& outdir) {
  namespace fs = std::filesystem;
  if (cfg.block) {
    DataSet ds = read_dataset_csv((fs::path(outdir) / paths::kBlockDataset).string());
    return assemble_backscatter(ds, ds.theta);
  }
  DataSet left =
      read_dataset_csv((fs::path(outdir) / paths::dataset(MeasurementSide::Left)).string());
  if (!(left.grid == cfg.grid))
    throw std::invalid_argument("dataset grid does not match the config grid");
  if (cfg.alpha) return assemble_alpha(left, *cfg.alpha, cfg.tau);
  if (cfg.side_right) {
    DataSet right = read_dataset_csv(
        (fs::path(outdir) / paths::dataset(MeasurementSide::Right)).string());
    return assemble_two_sided(left, right);
  }
  return assemble_backscatter(left, left.theta);
}

struct ImageOutputs {
  std::optional<SupportMetrics> fm;
  std::optional<SupportMetrics> fbsm;
};

/// Run the configured imaging methods against the synthesized datasets,
/// writing image CSV/PGM files and a metrics record per method.
inline ImageOutputs run_image(const RunConfig& cfg, const std::string& outdir,
                              RunManifest* manifest_out = nullptr) {
  namespace fs = std::filesystem;
  FarFieldMatrix F = assemble_from_config(cfg, outdir);
  const int c = cfg.imaging.doubled.value_or(F.doubled) ? 2 : 1;
  const SamplingGrid sgrid(cfg.imaging.z1_min, cfg.imaging.z1_max,
                           cfg.waveguide.height, cfg.imaging.nx, cfg.imaging.nperp);
  const auto [d_lo, d_hi] = cfg.true_range_support();

  RunManifest man;
  man.config_hash = fnv1a_hash(cfg.canonical);
  man.seed = cfg.noise_seed;
  ImageOutputs outputs;

  auto emit = [&](const ImageField& img, const SupportMetrics& m, const std::string& stem) {
    if (cfg.outputs.csv) {
      write_csv(img, (fs::path(outdir) / (stem + ".csv")).string());
      man.files.push_back(stem + ".csv");
    }
    if (cfg.outputs.pgm) {
      write_pgm(img, (fs::path(outdir) / (stem + ".pgm")).string());
      man.files.push_back(stem + ".pgm");
    }
    std::ofstream os(fs::path(outdir) / (stem + "_metrics.txt"));
    write_metrics(m, os);
    man.files.push_back(stem + "_metrics.txt");
    man.metrics.emplace_back(stem + "_argmax_z1", m.argmax_z1);
    man.metrics.emplace_back(stem + "_ratio", m.inside_outside_ratio);
    man.metrics.emplace_back(stem + "_jaccard", m.jaccard);
  };

  if (cfg.imaging.fm) {
    const Eigensystem es = hermitian_sqrt(F);
    auto indicator = [&](double z1, double) {
      return picard_indicator(es, Probe(z1, cfg.imaging.epsilon, F.meas_x1, c),
                              F.grid, cfg.imaging.rho);
    };
    const ImageField img = scan(indicator, sgrid, IndicatorKind::FM);
    const SupportMetrics m = support_metrics(img, d_lo, d_hi, cfg.imaging.epsilon);
    outputs.fm = m;
    emit(img, m, "image_fm");
  }
  if (cfg.imaging.fbsm) {
    auto indicator = [&](double z1, double) {
      return fbsm_indicator(F, Probe(z1, 0.0, F.meas_x1, c));
    };
    const ImageField img = scan(indicator, sgrid, IndicatorKind::FBSM);
    const SupportMetrics m = support_metrics(img, d_lo, d_hi, cfg.imaging.epsilon);
    outputs.fbsm = m;
    emit(img, m, "image_fbsm");
  }
  man.write(outdir);
  if (manifest_out) *manifest_out = man;
  return outputs;
}

// ---------------------------------------------------------------------------
// verify

struct CheckResult {
  std::string name;
  double value;
  double threshold;
  bool pass;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

namespace detail {

inline void add_check(VerifyReport& r, const std::string& name, double value,
                      double threshold) {
  r.checks.push_back({name, value, threshold, value <= threshold});
}

// Max |mu_1(omega_{sigma gamma}) - |sigma - gamma|| over random triples.
// |sigma - gamma| is kept >= 0.05: below that the rounding of omega itself
// erases the information needed to reach 1e-12 in double precision, and
// physical grids never place sigma pairs that close.
inline double dispersion_identity_error(int samples) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> ulam(0.05, 12.0);
  std::uniform_real_distribution<double> usig(0.0, 12.0);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double l1 = (s % 8 == 0) ? 0.0 : ulam(rng);
    double sig = usig(rng), gam = usig(rng);
    if (std::abs(sig - gam) < 0.05) gam = sig + (gam >= sig ? 0.05 : -0.05);
    const double om = omega(l1, sig, gam);
    const Waveguide wg = l1 > 0.0 ? Waveguide(pi / l1, BoundaryKind::Dirichlet)
                                  : Waveguide(pi / 12.0, BoundaryKind::Neumann);
    const double mu1 = mu_n(wg, 1, om).value.real();
    worst = std::max(worst, std::abs(mu1 - std::abs(sig - gam)));
  }
  return worst;
}

inline double alpha_identity_error(int samples) {
  std::mt19937_64 rng(2025);
  std::uniform_real_distribution<double> ulam(0.5, 12.0);
  std::uniform_real_distribution<double> ual(2.0, 64.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double l1 = ulam(rng);
    const double l2 = l1 * (1.5 + u01(rng));
    const double al = ual(rng);
    const double kpa = std::sqrt(l2 * l2 - l1 * l1) / al;
    double sig = u01(rng) * kpa, gam = u01(rng) * kpa;
    // keep the linearized value away from the cutoff where double rounding
    // of omega itself caps the attainable accuracy
    if (sig - gam + kpa < std::max(0.05 * kpa, 1e-13 * l1 * l1)) gam = sig;
    const double om = omega_alpha(l1, l2, al, sig, gam);
    const Waveguide wg(pi / l1, BoundaryKind::Dirichlet);
    const double mu1 = mu_n(wg, 1, om).value.real();
    worst = std::max(worst, std::abs(mu1 - (sig - gam + kpa)));
  }
  return worst;
}

}  // namespace detail

/// Consistency report: dispersion identities, Hermiticity, factorization
/// residual, PSF closed form vs sigma quadrature, eigensolver residuals.
/// theta_override, when set, builds the middle factor with that theta
/// instead of the config's (negative control for the factorization check).
inline VerifyReport run_verify(const RunConfig& cfg,
                               std::optional<double> theta_override = std::nullopt) {
  VerifyReport report;
  detail::add_check(report, "dispersion_identity",
                    detail::dispersion_identity_error(100000), 1e-12);
  detail::add_check(report, "alpha_dispersion_identity",
                    detail::alpha_identity_error(100000), 1e-12);

  // PSF closed form vs composite-Simpson sigma quadrature.
  {
    const Point y{0.0, cfg.waveguide.height / 2.0};
    const int n = 20000;  // even
    double worst = 0.0;
    for (double z1 : {0.0, 0.37, 1.44, -2.11, 3.6}) {
      const double a = cfg.grid.k_minus, b = cfg.grid.k_plus;
      const double hstep = (b - a) / n;
      const double amp = std::sqrt(psi_n(cfg.waveguide, 1, y.xperp));
      cplx acc = std::exp(cplx(0.0, a * (z1 - y.x1))) +
                 std::exp(cplx(0.0, b * (z1 - y.x1)));
      for (int i = 1; i < n; ++i)
        acc += (i % 2 ? 4.0 : 2.0) * std::exp(cplx(0.0, (a + i * hstep) * (z1 - y.x1)));
      acc *= amp * hstep / 3.0;
      worst = std::max(worst, std::abs(acc - psf(cfg.waveguide, cfg.grid, z1, y)));
    }
    detail::add_check(report, "psf_quadrature_error", worst, 1e-8);
  }

  if (!cfg.source && !cfg.block) return report;  // nothing to synthesize

  // Assembled operator from the configured pipeline (in memory, with noise).
  const DataSet ds = synthesize_from_config(cfg, MeasurementSide::Left);
  FarFieldMatrix F = cfg.alpha ? assemble_alpha(ds, *cfg.alpha, cfg.tau)
                               : assemble_backscatter(ds, ds.theta);
  if (!cfg.alpha) {
    const double herm = (F.entries - F.entries.adjoint().eval()).cwiseAbs().maxCoeff();
    detail::add_check(report, "hermiticity", herm,
                      1e-15 * F.entries.cwiseAbs().maxCoeff());
  }

  if (cfg.source) {
    // Noise-free data against factors on the same quadrature; the identity
    // is exact up to the diagonal rule, shared by both sides.
    const DataSet clean = synthesize_dataset(cfg.waveguide, *cfg.source,
                                             cfg.measurement(MeasurementSide::Left),
                                             cfg.grid, cfg.quadrature, cfg.alpha);
    const FarFieldMatrix Fc = cfg.alpha
                                  ? assemble_alpha(clean, *cfg.alpha, cfg.tau)
                                  : assemble_backscatter(clean, clean.theta);
    SourceSpec factor_src = *cfg.source;
    if (theta_override) {
      factor_src.theta = *theta_override;  // negative control
    }
    const FarFieldKind kind = cfg.alpha ? FarFieldKind::Alpha : FarFieldKind::Backscatter;
    const DiscreteFactors fac =
        discrete_factors(cfg.waveguide, factor_src, cfg.measurement(MeasurementSide::Left),
                         cfg.grid, cfg.quadrature, kind, cfg.alpha.value_or(0.0));
    detail::add_check(report, "factorization_residual", verify_factorization(Fc, fac),
                      2e-2);
    // Coercivity surrogate of the middle operator.
    if (cfg.alpha) {
      const cplx rot = std::exp(cplx(0.0, cfg.tau));
      double mn = std::numeric_limits<double>::infinity();
      for (int q = 0; q < fac.T.size(); ++q) mn = std::min(mn, (rot * fac.T(q)).real());
      detail::add_check(report, "alpha_coercivity_min_eig", -mn, -1e-12);
    } else {
      const cplx rot = std::exp(cplx(0.0, -factor_src.theta));
      double mn = std::numeric_limits<double>::infinity();
      for (int q = 0; q < fac.T.size(); ++q) mn = std::min(mn, std::abs(rot * fac.T(q)));
      double c1 = std::numeric_limits<double>::infinity();
      for (const auto& r : factor_src.regions)
        c1 = std::min(c1, std::abs(r.amplitude));
      const double bound = c1 * psi_n(cfg.waveguide, 1, cfg.measurement_xperp) / 2.0;
      detail::add_check(report, "coercivity_margin", bound - mn, 1e-14 * bound);
    }
  }

  // Eigendecomposition contract on the assembled operator.
  {
    const Eigen::MatrixXcd A = hermitian_part(F);
    const Eigensystem es = hermitian_sqrt(F);
    const double scale = std::max(1e-300, A.norm());
    double worst = 0.0;
    for (int j = 0; j < es.values.size(); ++j)
      worst = std::max(
          worst, (A * es.vectors.col(j) - es.raw(j) * es.vectors.col(j)).norm() / scale);
    const Eigen::MatrixXcd gram = es.vectors.adjoint() * es.vectors;
    const double ortho =
        (gram - Eigen::MatrixXcd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
    detail::add_check(report, "eigen_residual", worst, 1e-10);
    detail::add_check(report, "eigen_orthonormality", ortho, 1e-10);
  }
  return report;
}

/// Normalized |psf| profile along z1; Fig.-3-style output.
inline RunManifest run_psf(const RunConfig& cfg, const std::string& outdir) {
  namespace fs = std::filesystem;
  fs::create_directories(outdir);
  const Point y{0.0, cfg.waveguide.height / 2.0};
  const int n = cfg.imaging.nx;
  std::vector<double> z(n), v(n);
  for (int i = 0; i < n; ++i) {
    z[i] = cfg.imaging.z1_min + (cfg.imaging.z1_max - cfg.imaging.z1_min) * i / (n - 1);
    v[i] = std::abs(psf(cfg.waveguide, cfg.grid, z[i], y));
  }
  const double peak = *std::max_element(v.begin(), v.end());
  std::ofstream os(fs::path(outdir) / "psf_profile.csv");
  os << "z1,value\n";
  for (int i = 0; i < n; ++i)
    os << detail::fmt(z[i]) << "," << detail::fmt(v[i] / peak) << "\n";
  RunManifest man;
  man.config_hash = fnv1a_hash(cfg.canonical);
  man.seed = cfg.noise_seed;
  man.files.push_back("psf_profile.csv");
  man.write(outdir);
  return man;
}

}  // namespace wgfm
