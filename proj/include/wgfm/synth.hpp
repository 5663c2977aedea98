#pragma once

// Forward data synthesis: quadrature of the volume integral against the
// propagating Green function, sampled on the difference lattice of a
// uniform sigma grid, plus seeded noise injection and the single-mode
// mirror model for a complete sound-soft block.

#include <limits>
#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <vector>

#include "wgfm/modal.hpp"
#include "wgfm/quadrature.hpp"

namespace wgfm {

// Largest admissible evanescent contamination of a synthesized sample,
// relative to nothing: the dataset claims to be a far-field measurement,
// so the neglected Green-series tail at the nearest source point must be
// below this at every synthesized wavenumber.
inline constexpr double kTailTolerance = 1e-6;

struct SourceRegion {
  Region shape;
  cplx amplitude;  // piecewise-constant f0 on this region
};

/// Source f = sum of constant amplitudes over regions, with the phase
/// theta making e^{i theta} f real and single-signed.
struct SourceSpec {
  std::vector<SourceRegion> regions;
  double theta = 0.0;

  SourceSpec(std::vector<SourceRegion> regs, double th)
      : regions(std::move(regs)), theta(th) {
    if (regions.empty()) throw std::invalid_argument("source needs at least one region");
    const cplx rot = std::exp(cplx(0.0, theta));
    double sign = 0.0;
    for (const auto& r : regions) {
      const cplx v = rot * r.amplitude;
      if (std::abs(v) == 0.0)
        throw std::invalid_argument("source amplitude must be nonzero");
      if (std::abs(v.imag()) > 1e-12 * std::abs(v))
        throw std::invalid_argument("e^{i theta} f must be real");
      const double s = v.real() > 0.0 ? 1.0 : -1.0;
      if (sign == 0.0) sign = s;
      else if (s != sign)
        throw std::invalid_argument("e^{i theta} f must be single-signed across regions");
    }
  }
};

enum class MeasurementSide { Left, Right };

/// Measurement point on the cross-section {-a} x Sigma (Left) or
/// {a} x Sigma (Right).
struct MeasurementConfig {
  double offset;  // a > 0
  double xperp;
  MeasurementSide side = MeasurementSide::Left;

  MeasurementConfig(double a, double xp, MeasurementSide s = MeasurementSide::Left)
      : offset(a), xperp(xp), side(s) {
    if (!(a > 0.0)) throw std::invalid_argument("measurement offset a must be > 0");
  }
  double x1() const { return side == MeasurementSide::Left ? -offset : offset; }
  Point point() const { return {x1(), xperp}; }
};

enum class GridMode { Vertex, Midpoint };

/// Uniform sigma grid on (k_minus, k_plus).  Vertex mode excludes both
/// endpoints (n-1 points i*delta), midpoint mode uses n cell centers.
struct FrequencyGrid {
  double k_minus;
  double k_plus;
  int n;
  GridMode mode = GridMode::Vertex;

  FrequencyGrid(double km, double kp, int count, GridMode m = GridMode::Vertex)
      : k_minus(km), k_plus(kp), n(count), mode(m) {
    if (!(km >= 0.0) || !(kp > km)) throw std::invalid_argument("need 0 <= k_minus < k_plus");
    if (count < 2) throw std::invalid_argument("grid needs n >= 2");
  }

  static FrequencyGrid default_for(const Waveguide& wg, int count,
                                   GridMode m = GridMode::Vertex) {
    const auto [l1, l2] = passband(wg);
    return FrequencyGrid(0.0, std::sqrt(l2 * l2 - l1 * l1), count, m);
  }

  double delta() const { return (k_plus - k_minus) / n; }
  int num_sigma() const { return mode == GridMode::Vertex ? n - 1 : n; }
  double sigma(int i) const {  // i = 0..num_sigma()-1
    return mode == GridMode::Vertex ? k_minus + (i + 1) * delta()
                                    : k_minus + (i + 0.5) * delta();
  }
  std::vector<double> sigmas() const {
    std::vector<double> s(num_sigma());
    for (int i = 0; i < num_sigma(); ++i) s[i] = sigma(i);
    return s;
  }
  bool operator==(const FrequencyGrid& o) const {
    return k_minus == o.k_minus && k_plus == o.k_plus && n == o.n && mode == o.mode;
  }
};

struct NoiseSpec {
  double delta;
  std::uint64_t seed;
};

/// Single-mode far-field samples on the difference lattice.  Standard
/// datasets hold offsets m = 1..n-1 with wavenumber
/// omega_m = sqrt(lambda_1^2 + (m delta)^2); alpha datasets hold signed
/// offsets m = -(P-1)..P-1 shifted by (1/alpha) sqrt(lambda_2^2-lambda_1^2).
struct DataSet {
  Waveguide waveguide;
  FrequencyGrid grid;
  MeasurementConfig measurement;
  double theta = 0.0;
  bool doubled = false;
  std::optional<double> alpha;
  std::optional<NoiseSpec> noise;
  int m_min = 1;
  std::vector<cplx> samples;  // samples[m - m_min]

  const cplx& sample(int m) const {
    const int idx = m - m_min;
    if (idx < 0 || idx >= static_cast<int>(samples.size()))
      throw std::out_of_range("lattice offset " + std::to_string(m) +
                              " missing from dataset");
    return samples[static_cast<std::size_t>(idx)];
  }

  int m_max() const { return m_min + static_cast<int>(samples.size()) - 1; }

  /// Frequency-shift of the lattice: 0 normally, (1/alpha) k_+ for alpha data.
  double lattice_shift() const {
    if (!alpha) return 0.0;
    const auto [l1, l2] = passband(waveguide);
    return std::sqrt(l2 * l2 - l1 * l1) / *alpha;
  }

  double omega(int m) const {
    const double l1 = lambda_n(waveguide, 1);
    const double s = m * grid.delta() + lattice_shift();
    return std::sqrt(l1 * l1 + s * s);
  }
};

/// Midpoint-quadrature approximation of the propagating scattered field
/// int_D G_p(x, y; k) f(y) dy at measurement point x.
inline cplx forward_field(const Waveguide& wg, const SourceSpec& src, Point x,
                          double k, const QuadratureRule& quad) {
  for (const auto& r : src.regions)
    if (r.shape.contains(x))
      throw std::invalid_argument("measurement point lies inside a source region");
  cplx acc{0.0, 0.0};
  for (const auto& r : src.regions) {
    const auto nodes = quadrature_nodes({r.shape}, quad);
    cplx part{0.0, 0.0};
    for (const auto& node : nodes) part += green_p(wg, x, node.y, k) * node.weight;
    acc += part * r.amplitude;
  }
  return acc;
}

namespace detail {

inline double min_range_separation(const SourceSpec& src, double x1) {
  double sep = std::numeric_limits<double>::infinity();
  for (const auto& r : src.regions) {
    const BoundingBox b = r.shape.bbox();
    if (x1 >= b.x1_min && x1 <= b.x1_max) return 0.0;
    sep = std::min(sep, x1 < b.x1_min ? b.x1_min - x1 : x1 - b.x1_max);
  }
  return sep;
}

inline void require_far_field(const Waveguide& wg, double sep, double k_worst,
                              const char* what) {
  if (!(sep > 0.0))
    throw std::invalid_argument(std::string(what) +
                                ": no range separation from the source");
  const double tail = green_tail_bound(wg, sep, k_worst, 8);
  if (tail > kTailTolerance)
    throw std::invalid_argument(
        std::string(what) + ": evanescent tail bound " + std::to_string(tail) +
        " exceeds " + std::to_string(kTailTolerance) +
        " at separation " + std::to_string(sep) + "; increase the measurement offset");
}

inline void require_valid_lattice(const Waveguide& wg, const DataSet& ds) {
  const auto [l1, l2] = passband(wg);
  for (int m = ds.m_min; m <= ds.m_max(); ++m) {
    const double om = ds.omega(m);
    if (!(om > l1 && om < l2))
      throw std::invalid_argument("lattice wavenumber " + std::to_string(om) +
                                  " outside open passband");
  }
  if (psi_n(wg, 1, ds.measurement.xperp) == 0.0)
    throw std::invalid_argument("psi_1 vanishes at the measurement point");
}

}  // namespace detail

/// Synthesize the noise-free difference-lattice dataset for a source.
/// Pass alpha to sample the signed, shifted lattice of the F_alpha
/// operator instead (requires k_minus = 0 and k_plus = (1/alpha) k_+).
inline DataSet synthesize_dataset(const Waveguide& wg, const SourceSpec& src,
                                  const MeasurementConfig& meas,
                                  const FrequencyGrid& grid,
                                  const QuadratureRule& quad,
                                  std::optional<double> alpha = std::nullopt) {
  DataSet ds{wg, grid, meas, src.theta, false, alpha, std::nullopt, 1, {}};
  if (alpha) {
    if (*alpha < 2.0) throw std::invalid_argument("alpha must be >= 2");
    const auto [l1, l2] = passband(wg);
    const double kpa = std::sqrt(l2 * l2 - l1 * l1) / *alpha;
    if (grid.k_minus != 0.0 || std::abs(grid.k_plus - kpa) > 1e-12 * kpa)
      throw std::invalid_argument("alpha dataset requires the grid (0, k_+/alpha)");
    ds.m_min = -(grid.num_sigma() - 1);
    ds.samples.resize(2 * grid.num_sigma() - 1);
  } else {
    ds.m_min = 1;
    ds.samples.resize(grid.n - 1);
  }
  detail::require_valid_lattice(wg, ds);
  const double sep = detail::min_range_separation(src, meas.x1());
  detail::require_far_field(wg, sep, ds.omega(ds.m_max()), "synthesize_dataset");
  for (int m = ds.m_min; m <= ds.m_max(); ++m)
    ds.samples[m - ds.m_min] = forward_field(wg, src, meas.point(), ds.omega(m), quad);
  return ds;
}

/// Per-sample relative circular complex Gaussian noise
/// u -> u (1 + delta (xi_1 + i xi_2)/sqrt 2), deterministic in the seed.
inline DataSet add_noise(const DataSet& ds, double delta, std::uint64_t seed) {
  if (delta < 0.0) throw std::invalid_argument("noise level must be >= 0");
  DataSet out = ds;
  out.noise = NoiseSpec{delta, seed};
  if (delta == 0.0) return out;
  std::mt19937_64 rng(seed);
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  for (auto& s : out.samples) {
    // Box-Muller; std::normal_distribution is implementation-defined and
    // would break byte-identical reruns across toolchains.
    const double u1 = uniform(), u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    const cplx xi(r * std::cos(2.0 * pi * u2), r * std::sin(2.0 * pi * u2));
    s *= 1.0 + delta * xi / std::sqrt(2.0);
  }
  return out;
}

/// Mirror-model data for a complete sound-soft block at {block_x1} x Sigma:
/// mode-1 reflection coefficient -1, travel distance source->block->receiver.
inline DataSet block_dataset(const Waveguide& wg, double block_x1,
                             const MeasurementConfig& source,
                             const MeasurementConfig& receiver,
                             const FrequencyGrid& grid) {
  const bool src_left = source.x1() < block_x1;
  const bool rcv_left = receiver.x1() < block_x1;
  if (src_left != rcv_left)
    throw std::invalid_argument("block source and receiver must be on the same side");
  DataSet ds{wg, grid, receiver, 0.0, true, std::nullopt, std::nullopt, 1, {}};
  ds.samples.resize(grid.n - 1);
  detail::require_valid_lattice(wg, ds);
  const double k_worst = ds.omega(ds.m_max());
  detail::require_far_field(wg, std::abs(block_x1 - source.x1()), k_worst, "block_dataset");
  detail::require_far_field(wg, std::abs(block_x1 - receiver.x1()), k_worst, "block_dataset");
  const double round_trip =
      std::abs(block_x1 - source.x1()) + std::abs(block_x1 - receiver.x1());
  const double ps = psi_n(wg, 1, source.xperp) * psi_n(wg, 1, receiver.xperp);
  for (int m = 1; m <= ds.m_max(); ++m) {
    const double mu1 = mu_n(wg, 1, ds.omega(m)).value.real();
    ds.samples[m - 1] =
        -cplx(0.0, 1.0) / (2.0 * mu1) * ps * std::exp(cplx(0.0, mu1 * round_trip));
  }
  return ds;
}

// ---------------------------------------------------------------------------
// CSV serialization.  Header rows are keyword-tagged, then one row per
// lattice offset: m, omega_m, re, im.  All doubles at %.17g so the
// round-trip is bit exact.

namespace detail {
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace detail

inline void write_csv(const DataSet& ds, std::ostream& os) {
  using detail::fmt;
  os << "wgfm_dataset,1\n";
  os << "waveguide," << fmt(ds.waveguide.height) << "," << to_string(ds.waveguide.boundary) << "\n";
  os << "grid," << fmt(ds.grid.k_minus) << "," << fmt(ds.grid.k_plus) << ","
     << ds.grid.n << "," << (ds.grid.mode == GridMode::Vertex ? "vertex" : "midpoint") << "\n";
  os << "measurement," << fmt(ds.measurement.offset) << "," << fmt(ds.measurement.xperp)
     << "," << (ds.measurement.side == MeasurementSide::Left ? "left" : "right") << "\n";
  os << "theta," << fmt(ds.theta) << "\n";
  os << "doubled," << (ds.doubled ? 1 : 0) << "\n";
  if (ds.alpha) os << "alpha," << fmt(*ds.alpha) << "\n";
  if (ds.noise) os << "noise," << fmt(ds.noise->delta) << "," << ds.noise->seed << "\n";
  os << "m,omega,re,im\n";
  for (int m = ds.m_min; m <= ds.m_max(); ++m) {
    const cplx& s = ds.sample(m);
    os << m << "," << fmt(ds.omega(m)) << "," << fmt(s.real()) << "," << fmt(s.imag()) << "\n";
  }
}

inline void write_csv(const DataSet& ds, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_csv(ds, os);
}

namespace detail {
inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') { out.push_back(cur); cur.clear(); }
    else if (c != '\r') cur += c;
  }
  out.push_back(cur);
  return out;
}
}  // namespace detail

inline DataSet read_dataset_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || detail::split_csv(line)[0] != "wgfm_dataset")
    throw std::runtime_error("not a wgfm dataset file");
  std::optional<Waveguide> wg;
  std::optional<FrequencyGrid> grid;
  std::optional<MeasurementConfig> meas;
  double theta = 0.0;
  bool doubled = false;
  std::optional<double> alpha;
  std::optional<NoiseSpec> noise;
  std::vector<std::pair<int, cplx>> rows;
  bool in_samples = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv(line);
    if (!in_samples) {
      if (f[0] == "waveguide") {
        wg.emplace(std::stod(f.at(1)), boundary_from_string(f.at(2)));
      } else if (f[0] == "grid") {
        grid.emplace(std::stod(f.at(1)), std::stod(f.at(2)), std::stoi(f.at(3)),
                     f.at(4) == "vertex" ? GridMode::Vertex : GridMode::Midpoint);
      } else if (f[0] == "measurement") {
        meas.emplace(std::stod(f.at(1)), std::stod(f.at(2)),
                     f.at(3) == "left" ? MeasurementSide::Left : MeasurementSide::Right);
      } else if (f[0] == "theta") {
        theta = std::stod(f.at(1));
      } else if (f[0] == "doubled") {
        doubled = f.at(1) == "1";
      } else if (f[0] == "alpha") {
        alpha = std::stod(f.at(1));
      } else if (f[0] == "noise") {
        noise = NoiseSpec{std::stod(f.at(1)), std::stoull(f.at(2))};
      } else if (f[0] == "m") {
        in_samples = true;
      } else {
        throw std::runtime_error("unknown dataset header row: " + f[0]);
      }
    } else {
      rows.emplace_back(std::stoi(f.at(0)), cplx(std::stod(f.at(2)), std::stod(f.at(3))));
    }
  }
  if (!wg || !grid || !meas || rows.empty())
    throw std::runtime_error("incomplete dataset file");
  DataSet ds{*wg, *grid, *meas, theta, doubled, alpha, noise, rows.front().first, {}};
  ds.samples.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].first != ds.m_min + static_cast<int>(i))
      throw std::runtime_error("dataset lattice offsets not contiguous");
    ds.samples[i] = rows[i].second;
  }
  return ds;
}

inline DataSet read_dataset_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_dataset_csv(is);
}

}  // namespace wgfm
