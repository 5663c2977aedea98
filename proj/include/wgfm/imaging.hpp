#pragma once

// Imaging stage: probe functions, Hermitian square root, the Picard
// indicator (factorization method), the |<F psi_z, psi_z>| indicator
// (factorization-based sampling method), the point spread function, grid
// scans and support-localization metrics.

#include <limits>
#include <algorithm>
#include <functional>

#include "wgfm/mfop.hpp"
#include "wgfm/threads.hpp"

namespace wgfm {

/// Test function of the sampling methods.  epsilon = 0 is the point probe
/// psi_z(sigma) = e^{i c sigma (z_1 - x*_1)}; epsilon > 0 averages it over
/// a disc of radius epsilon.  phase_factor is 2 for block imaging (round
/// trips double the travel time), 1 otherwise.
struct Probe {
  double z1;
  double epsilon;
  double xstar1;
  int phase_factor = 1;

  Probe(double z, double eps, double x1, int c = 1)
      : z1(z), epsilon(eps), xstar1(x1), phase_factor(c) {
    if (eps < 0.0) throw std::invalid_argument("probe epsilon must be >= 0");
    if (c != 1 && c != 2) throw std::invalid_argument("phase factor must be 1 or 2");
  }
};

namespace detail {
// 2 J_1(x)/x, continuous value 1 at x = 0.
inline double jinc(double x) {
  const double ax = std::abs(x);
  if (ax < 1e-4) return 1.0 - x * x / 8.0 + x * x * x * x / 192.0;
  return 2.0 * std::cyl_bessel_j(1.0, ax) / ax;
}
}  // namespace detail

/// Disc-averaged probe in closed form: the average of e^{i c sigma y_1}
/// over B(z, eps) is the phase at the center times 2 J_1(c sigma eps) /
/// (c sigma eps), independent of the cross-section coordinate.
inline cplx probe_eval(const Probe& p, double sigma) {
  const double cs = p.phase_factor * sigma;
  const cplx phase = std::exp(cplx(0.0, cs * (p.z1 - p.xstar1)));
  if (p.epsilon == 0.0) return phase;
  return phase * detail::jinc(cs * p.epsilon);
}

/// Eigensystem of the Hermitian square root A^{1/2}: values are
/// alpha_j = |lambda_j|^{1/2} sorted descending, vectors orthonormal.
/// raw keeps the signed lambda_j of A in the same order.
struct Eigensystem {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;
  Eigen::VectorXd raw;
};

inline Eigensystem hermitian_sqrt(const Eigen::MatrixXcd& matrix) {
  if (matrix.rows() != matrix.cols())
    throw std::invalid_argument("hermitian_sqrt needs a square matrix");
  const Eigen::MatrixXcd A = 0.5 * (matrix + matrix.adjoint().eval());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(A);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("hermitian eigendecomposition did not converge");
  const int n = static_cast<int>(A.rows());
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  const auto& ev = solver.eigenvalues();
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return std::abs(ev(a)) > std::abs(ev(b)); });
  Eigensystem es{Eigen::VectorXd(n), Eigen::MatrixXcd(n, n), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    es.raw(i) = ev(order[i]);
    es.values(i) = std::sqrt(std::abs(ev(order[i])));
    es.vectors.col(i) = solver.eigenvectors().col(order[i]);
  }
  return es;
}

/// Symmetrizes first (noise breaks exact Hermiticity; the alpha kind is
/// rotated by e^{i tau}), then takes the spectral square root.
inline Eigensystem hermitian_sqrt(const FarFieldMatrix& F) {
  return hermitian_sqrt(hermitian_part(F));
}

/// Picard-series indicator of the factorization method:
/// ( sum_j |<psi_z^eps, phi_j>|^2 / alpha_j^2 )^{-1} over the eigenpairs
/// with alpha_j >= rho alpha_max.  Probe values carry weight sqrt(delta).
/// Returns 0 when the series overflows.
inline double picard_indicator(const Eigensystem& es, const Eigen::VectorXcd& psi,
                               double rho) {
  if (rho < 0.0 || rho >= 1.0) throw std::invalid_argument("rho must be in [0, 1)");
  const int n = static_cast<int>(es.values.size());
  if (n == 0 || es.values(0) == 0.0)
    throw std::invalid_argument("empty retained spectrum");
  if (psi.size() != n)
    throw std::invalid_argument("probe does not match eigensystem dimension");
  const double cutoff = rho * es.values(0);
  double sum = 0.0;
  for (int j = 0; j < n && es.values(j) >= cutoff; ++j) {
    const double c = std::norm(es.vectors.col(j).dot(psi));
    sum += c / (es.values(j) * es.values(j));
  }
  if (!std::isfinite(sum)) return 0.0;
  return sum > 0.0 ? 1.0 / sum : 0.0;
}

inline double picard_indicator(const Eigensystem& es, const Probe& p,
                               const FrequencyGrid& grid, double rho) {
  if (!(p.epsilon > 0.0))
    throw std::invalid_argument("factorization method needs a disc probe (epsilon > 0)");
  const auto sigmas = grid.sigmas();
  Eigen::VectorXcd psi(static_cast<int>(sigmas.size()));
  const double root_delta = std::sqrt(grid.delta());
  for (int i = 0; i < psi.size(); ++i) psi(i) = probe_eval(p, sigmas[i]) * root_delta;
  return picard_indicator(es, psi, rho);
}

/// |<F psi_z, psi_z>| delta; the alpha kind is imaged through its
/// rotated Hermitian part.
inline double fbsm_indicator(const FarFieldMatrix& F, const Probe& p) {
  if (p.epsilon != 0.0)
    throw std::invalid_argument("the sampling indicator uses the point probe");
  const int n = F.size();
  const auto sigmas = F.grid.sigmas();
  Eigen::VectorXcd psi(n);
  for (int i = 0; i < n; ++i) psi(i) = probe_eval(p, sigmas[i]);
  const cplx quad = F.kind == FarFieldKind::Alpha
                        ? cplx(psi.dot(hermitian_part(F) * psi))
                        : cplx(psi.dot(F.entries * psi));
  return std::abs(quad) * F.weight;
}

/// Point spread function (S psi_z)(y): closed form
/// sqrt(psi_1(y_perp)) (e^{i k_+ t} - e^{i k_- t})/(i t), t = z_1 - y_1,
/// equal to sqrt(psi_1) (k_+ - k_-) in the limit t -> 0.
inline cplx psf(const Waveguide& wg, const FrequencyGrid& grid, double z1, Point y) {
  const double t = z1 - y.x1;
  const double amp = std::sqrt(psi_n(wg, 1, y.xperp));
  const double w = grid.k_plus - grid.k_minus;
  if (t == 0.0) return amp * w;
  // (e^{ik+t}-e^{ik-t})/(it) = e^{i(k+ + k-)t/2} 2 sin(w t/2)/t; the sine
  // form keeps |psf| exactly even in t.
  const cplx carrier = std::exp(cplx(0.0, 0.5 * (grid.k_plus + grid.k_minus) * t));
  return amp * carrier * (2.0 * std::sin(0.5 * w * t) / t);
}

// ---------------------------------------------------------------------------
// Grid scans

struct SamplingGrid {
  double z1_min, z1_max;
  double height;  // cross extent (0, height)
  int nx, nperp;

  SamplingGrid(double lo, double hi, double h, int n1, int np)
      : z1_min(lo), z1_max(hi), height(h), nx(n1), nperp(np) {
    if (!(lo < hi) || !(h > 0.0)) throw std::invalid_argument("empty sampling extents");
    if (n1 < 2 || np < 2) throw std::invalid_argument("sampling resolution must be >= 2 per axis");
  }
  double z1(int i) const { return z1_min + (z1_max - z1_min) * i / (nx - 1); }
  double zperp(int j) const { return height * (j + 0.5) / nperp; }
};

enum class IndicatorKind { FM, FBSM };

struct ImageField {
  SamplingGrid grid;
  Eigen::MatrixXd values;  // nperp rows x nx columns, max normalized to 1
  IndicatorKind kind;
};

/// Evaluate an indicator over the sampling grid and normalize the maximum
/// to 1.  Points are independent; evaluation is split across threads.
inline ImageField scan(const std::function<double(double z1, double zperp)>& indicator,
                       const SamplingGrid& grid, IndicatorKind kind) {
  ImageField img{grid, Eigen::MatrixXd(grid.nperp, grid.nx), kind};
  parallel_for(static_cast<std::size_t>(grid.nx), [&](std::size_t i) {
    const double z1 = grid.z1(static_cast<int>(i));
    for (int j = 0; j < grid.nperp; ++j)
      img.values(j, static_cast<int>(i)) = indicator(z1, grid.zperp(j));
  });
  if (!img.values.allFinite()) throw std::runtime_error("indicator produced non-finite values");
  const double peak = img.values.maxCoeff();
  if (peak <= 0.0) throw std::runtime_error("all-zero image field");
  img.values /= peak;
  return img;
}

struct SupportMetrics {
  double argmax_z1;
  double inside_mean;
  double outside_mean;
  double inside_outside_ratio;
  double halfmax_lo;
  double halfmax_hi;
  double jaccard;  // half-max interval vs the true interval
};

/// Localization quality of an image against the known range support
/// [d1_lo, d1_hi]; the inside/outside split dilates the interval by tol.
inline SupportMetrics support_metrics(const ImageField& img, double d1_lo,
                                      double d1_hi, double tol) {
  if (!(d1_lo <= d1_hi)) throw std::invalid_argument("empty true support interval");
  const auto& g = img.grid;
  // Indicators never read zperp, so rows are identical; use the profile.
  const Eigen::RowVectorXd profile = img.values.row(0);
  double in_sum = 0.0, out_sum = 0.0;
  int in_n = 0, out_n = 0;
  int arg = 0;
  double halfmax_lo = std::numeric_limits<double>::quiet_NaN();
  double halfmax_hi = halfmax_lo;
  for (int i = 0; i < g.nx; ++i) {
    const double z = g.z1(i);
    const double v = profile(i);
    if (v > profile(arg)) arg = i;
    if (z >= d1_lo - tol && z <= d1_hi + tol) { in_sum += v; ++in_n; }
    else { out_sum += v; ++out_n; }
    if (v >= 0.5) {
      if (std::isnan(halfmax_lo)) halfmax_lo = z;
      halfmax_hi = z;
    }
  }
  SupportMetrics m{};
  m.argmax_z1 = g.z1(arg);
  m.inside_mean = in_n ? in_sum / in_n : 0.0;
  m.outside_mean = out_n ? out_sum / out_n : 0.0;
  m.inside_outside_ratio = out_n && m.outside_mean > 0.0
                               ? m.inside_mean / m.outside_mean
                               : std::numeric_limits<double>::infinity();
  m.halfmax_lo = halfmax_lo;
  m.halfmax_hi = halfmax_hi;
  const double ilo = std::max(halfmax_lo, d1_lo), ihi = std::min(halfmax_hi, d1_hi);
  const double ulo = std::min(halfmax_lo, d1_lo), uhi = std::max(halfmax_hi, d1_hi);
  m.jaccard = (uhi > ulo) ? std::max(0.0, ihi - ilo) / (uhi - ulo) : 1.0;
  return m;
}

// ---------------------------------------------------------------------------
// Output formats

inline void write_csv(const ImageField& img, std::ostream& os) {
  using detail::fmt;
  os << "z1,zperp,value\n";
  for (int j = 0; j < img.grid.nperp; ++j)
    for (int i = 0; i < img.grid.nx; ++i)
      os << fmt(img.grid.z1(i)) << "," << fmt(img.grid.zperp(j)) << ","
         << fmt(img.values(j, i)) << "\n";
}

inline void write_csv(const ImageField& img, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_csv(img, os);
}

/// 8-bit binary PGM (P5), top row = top of the waveguide.
inline void write_pgm(const ImageField& img, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << "P5\n" << img.grid.nx << " " << img.grid.nperp << "\n255\n";
  for (int j = img.grid.nperp - 1; j >= 0; --j) {
    for (int i = 0; i < img.grid.nx; ++i) {
      const double v = std::clamp(img.values(j, i), 0.0, 1.0);
      os.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
    }
  }
}

inline void write_metrics(const SupportMetrics& m, std::ostream& os) {
  using detail::fmt;
  os << "argmax_z1=" << fmt(m.argmax_z1) << "\n";
  os << "inside_mean=" << fmt(m.inside_mean) << "\n";
  os << "outside_mean=" << fmt(m.outside_mean) << "\n";
  os << "inside_outside_ratio=" << fmt(m.inside_outside_ratio) << "\n";
  os << "halfmax_lo=" << fmt(m.halfmax_lo) << "\n";
  os << "halfmax_hi=" << fmt(m.halfmax_hi) << "\n";
  os << "jaccard=" << fmt(m.jaccard) << "\n";
}

}  // namespace wgfm
