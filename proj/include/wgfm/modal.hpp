#pragma once

// Closed-form mode eigensystem, dispersion relation and propagating Green
// function for a 2-D acoustic waveguide (-inf,inf) x (0,height).  The
// cross-section is an interval, so eigenpairs are analytic per boundary
// kind; no numerical eigensolver is involved.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace wgfm {

inline constexpr double pi = 3.141592653589793238462643383279502884;

using cplx = std::complex<double>;

/// Boundary condition of the waveguide walls.  Mixed kinds put the
/// Dirichlet wall on the named side and Neumann on the other.
enum class BoundaryKind {
  Dirichlet,
  Neumann,
  MixedDirichletTop,
  MixedDirichletBottom,
};

inline std::string to_string(BoundaryKind b) {
  switch (b) {
    case BoundaryKind::Dirichlet: return "dirichlet";
    case BoundaryKind::Neumann: return "neumann";
    case BoundaryKind::MixedDirichletTop: return "mixed_dirichlet_top";
    case BoundaryKind::MixedDirichletBottom: return "mixed_dirichlet_bottom";
  }
  throw std::logic_error("unreachable boundary kind");
}

inline BoundaryKind boundary_from_string(const std::string& s) {
  if (s == "dirichlet") return BoundaryKind::Dirichlet;
  if (s == "neumann") return BoundaryKind::Neumann;
  if (s == "mixed_dirichlet_top") return BoundaryKind::MixedDirichletTop;
  if (s == "mixed_dirichlet_bottom") return BoundaryKind::MixedDirichletBottom;
  throw std::invalid_argument("unknown boundary kind: " + s);
}

struct Waveguide {
  double height;       // |Sigma| > 0
  BoundaryKind boundary;

  Waveguide(double h, BoundaryKind b) : height(h), boundary(b) {
    if (!(h > 0.0)) throw std::invalid_argument("waveguide height must be > 0");
  }
};

/// Propagation regime of mode n at wavenumber k.
enum class ModeRegime { Propagating, Evanescent, Cutoff };

/// Group wavenumber mu_n(k) on the branch with nonnegative imaginary part.
struct GroupWavenumber {
  cplx value;
  ModeRegime regime;
};

namespace detail {
inline void require_mode(int n) {
  if (n < 1) throw std::invalid_argument("mode index must be >= 1");
}
}  // namespace detail

/// n-th transverse eigenvalue lambda_n, sorted nondecreasing.
inline double lambda_n(const Waveguide& wg, int n) {
  detail::require_mode(n);
  switch (wg.boundary) {
    case BoundaryKind::Dirichlet: return n * pi / wg.height;
    case BoundaryKind::Neumann: return (n - 1) * pi / wg.height;
    case BoundaryKind::MixedDirichletTop:
    case BoundaryKind::MixedDirichletBottom: return (n - 0.5) * pi / wg.height;
  }
  throw std::logic_error("unreachable");
}

/// L2-normalized real eigenfunction psi_n evaluated at xperp in [0, height].
/// Sign convention: psi_1 >= 0 on the cross-section.
inline double psi_n(const Waveguide& wg, int n, double xperp) {
  detail::require_mode(n);
  const double h = wg.height;
  if (xperp < 0.0 || xperp > h)
    throw std::domain_error("xperp outside cross-section [0, height]");
  switch (wg.boundary) {
    case BoundaryKind::Dirichlet:
      return std::sqrt(2.0 / h) * std::sin(n * pi * xperp / h);
    case BoundaryKind::Neumann:
      if (n == 1) return std::sqrt(1.0 / h);
      return std::sqrt(2.0 / h) * std::cos((n - 1) * pi * xperp / h);
    case BoundaryKind::MixedDirichletTop:
      return std::sqrt(2.0 / h) * std::cos((n - 0.5) * pi * xperp / h);
    case BoundaryKind::MixedDirichletBottom:
      return std::sqrt(2.0 / h) * std::sin((n - 0.5) * pi * xperp / h);
  }
  throw std::logic_error("unreachable");
}

/// Group wavenumber mu_n(k) = sqrt(k^2 - lambda_n^2), branch Im >= 0.
inline GroupWavenumber mu_n(const Waveguide& wg, int n, double k) {
  detail::require_mode(n);
  if (!(k > 0.0)) throw std::invalid_argument("wavenumber k must be > 0");
  const double ln = lambda_n(wg, n);
  const double d = (k - ln) * (k + ln);
  if (d > 0.0) return {cplx(std::sqrt(d), 0.0), ModeRegime::Propagating};
  if (d < 0.0) return {cplx(0.0, std::sqrt(-d)), ModeRegime::Evanescent};
  return {cplx(0.0, 0.0), ModeRegime::Cutoff};
}

/// Wavenumber interval (lambda_1, lambda_2) on which exactly one mode
/// propagates.
inline std::pair<double, double> passband(const Waveguide& wg) {
  return {lambda_n(wg, 1), lambda_n(wg, 2)};
}

struct Point {
  double x1;     // range coordinate
  double xperp;  // cross-section coordinate
};

/// Propagating (n=1) part of the waveguide Green function.  Requires k
/// strictly inside the passband; at k = lambda_1 the mode-1 term is
/// singular and at k >= lambda_2 a second mode would propagate.
inline cplx green_p(const Waveguide& wg, Point x, Point y, double k) {
  const auto [l1, l2] = passband(wg);
  if (!(k > l1 && k < l2))
    throw std::domain_error("wavenumber outside open passband (" +
                            std::to_string(l1) + ", " + std::to_string(l2) + ")");
  const double m1 = std::sqrt((k - l1) * (k + l1));
  const cplx phase = std::exp(cplx(0.0, m1 * std::abs(x.x1 - y.x1)));
  return cplx(0.0, 1.0) / (2.0 * m1) * psi_n(wg, 1, x.xperp) *
         psi_n(wg, 1, y.xperp) * phase;
}

/// Upper bound on the evanescent tail sum_{n>=2} |psi_n|_inf^2
/// e^{-|mu_n| sep} / (2|mu_n|) of the Green series at range separation
/// sep > 0 and k in the passband.  The first n_terms terms (n = 2..)
/// are summed explicitly; the remainder is bounded geometrically with
/// ratio e^{-(pi/height) sep}, valid since consecutive |mu_n| gaps are
/// at least pi/height.
inline double green_tail_bound(const Waveguide& wg, double sep, double k,
                               int n_terms) {
  if (!(sep > 0.0)) throw std::invalid_argument("separation must be > 0");
  if (n_terms < 0) throw std::invalid_argument("n_terms must be >= 0");
  if (!(k < lambda_n(wg, 2)))
    throw std::domain_error("tail bound requires k below lambda_2 (modes n>=2 evanescent)");
  const double h = wg.height;
  const double sup2 = 2.0 / h;  // |psi_n|_inf^2 for n >= 2, every boundary kind
  auto term = [&](int n) {
    const double mn = std::abs(mu_n(wg, n, k).value);
    return sup2 / (2.0 * mn) * std::exp(-mn * sep);
  };
  double total = 0.0;
  for (int n = 2; n < 2 + n_terms; ++n) total += term(n);
  const double ratio = std::exp(-(pi / h) * sep);
  total += term(2 + n_terms) / (1.0 - ratio);
  return total;
}

}  // namespace wgfm
