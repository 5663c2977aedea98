#pragma once

// Discrete multi-frequency far-field operators assembled from difference-
// lattice data, their factorization factors S and T, and the numerical
// factorization check F = S* T S.
//
// The sigma grid is uniform, so every kernel entry depends on the offset
// i-j only and Hermitian kinds are Hermitian bitwise by construction.
// The sigma = gamma kernel value is not measurable (the data is singular
// at omega = lambda_1); it is recovered by quadratic extrapolation of the
// three nearest off-diagonal kernel values after demodulating the known
// measurement-offset phase e^{i c m delta x*_1}.

#include <Eigen/Dense>

#include "wgfm/synth.hpp"

namespace wgfm {

/// omega_{sigma gamma} = sqrt(lambda_1^2 + (sigma-gamma)^2): the wavenumber
/// at which mu_1 linearizes to |sigma - gamma|.
inline double omega(double lambda1, double sigma, double gamma) {
  return std::hypot(lambda1, sigma - gamma);
}

/// Shifted variant for the F_alpha operator: mu_1 linearizes to
/// sigma - gamma + (1/alpha) sqrt(lambda_2^2 - lambda_1^2).
inline double omega_alpha(double lambda1, double lambda2, double alpha,
                          double sigma, double gamma) {
  if (alpha < 2.0) throw std::invalid_argument("alpha must be >= 2");
  const double shift = std::sqrt(lambda2 * lambda2 - lambda1 * lambda1) / alpha;
  return std::hypot(lambda1, sigma - gamma + shift);
}

enum class FarFieldKind { Backscatter, TwoSided, Alpha };

struct FarFieldMatrix {
  Eigen::MatrixXcd entries;
  FrequencyGrid grid;
  double weight;  // sigma quadrature weight delta, stored, never folded in
  FarFieldKind kind;
  double theta = 0.0;  // Backscatter
  double alpha = 0.0;  // Alpha
  double tau = 0.0;    // Alpha
  bool doubled = false;
  double meas_x1 = 0.0;
  double meas_xperp = 0.0;

  int size() const { return static_cast<int>(entries.rows()); }
};

namespace detail {

// Quadratic (falling back to linear/constant) extrapolation of the kernel
// to offset zero.  kernel(m) must be valid for m = 1..points; the values
// are demodulated by e^{i m delta rate} before extrapolating, which is
// exact at offset zero.
template <typename KernelFn>
cplx extrapolate_kernel(KernelFn&& kernel, int points, double delta, double rate) {
  auto demod = [&](int m) {
    return kernel(m) * std::exp(cplx(0.0, m * delta * rate));
  };
  switch (points) {
    case 1: return demod(1);
    case 2: return 2.0 * demod(1) - demod(2);
    default: return 3.0 * demod(1) - 3.0 * demod(2) + demod(3);
  }
}

inline int extrapolation_points(int grid_points) {
  if (grid_points < 2)
    throw std::invalid_argument("far-field matrix needs at least 2 sigma points");
  return std::min(3, grid_points - 1);
}

}  // namespace detail

/// Backscattering operator F (Eq.-(17) kernel): Hermitian bitwise for any
/// dataset, noisy or not, because the (i,j) and (j,i) entries are built
/// from the same lattice sample.
inline FarFieldMatrix assemble_backscatter(const DataSet& ds, double theta) {
  if (ds.alpha) throw std::invalid_argument("alpha dataset needs assemble_alpha");
  if (theta != ds.theta)
    throw std::invalid_argument("theta does not match dataset metadata");
  const int p = ds.grid.num_sigma();
  const int q = detail::extrapolation_points(p);
  const double delta = ds.grid.delta();
  if (ds.m_max() < std::max(p - 1, q))
    throw std::out_of_range("dataset missing lattice samples for this grid");

  const cplx rot = std::exp(cplx(0.0, theta));
  auto kernel = [&](int m) {
    return cplx(0.0, -m * delta) * rot * ds.sample(m);
  };
  FarFieldMatrix F{Eigen::MatrixXcd(p, p), ds.grid,          delta,
                   FarFieldKind::Backscatter, theta,         0.0,
                   0.0,                    ds.doubled,        ds.measurement.x1(),
                   ds.measurement.xperp};
  const double c = ds.doubled ? 2.0 : 1.0;
  const double diag =
      detail::extrapolate_kernel(kernel, q, delta, c * ds.measurement.x1()).real();
  for (int i = 0; i < p; ++i) {
    F.entries(i, i) = diag;
    for (int j = 0; j < i; ++j) {
      const cplx k = kernel(i - j);
      F.entries(i, j) = k;
      F.entries(j, i) = std::conj(k);
    }
  }
  return F;
}

/// Two-sided operator F~ from backscattering (left) and forward (right)
/// measurements at x_l = (x*_1, x*_perp), x_r = (-x*_1, x*_perp).
inline FarFieldMatrix assemble_two_sided(const DataSet& left, const DataSet& right) {
  if (left.alpha || right.alpha || left.doubled || right.doubled)
    throw std::invalid_argument("two-sided assembly takes plain datasets");
  if (!(left.grid == right.grid))
    throw std::invalid_argument("two-sided datasets must share one grid");
  if (left.measurement.side != MeasurementSide::Left ||
      right.measurement.side != MeasurementSide::Right ||
      left.measurement.offset != right.measurement.offset ||
      left.measurement.xperp != right.measurement.xperp)
    throw std::invalid_argument("two-sided measurements must mirror each other");
  const int p = left.grid.num_sigma();
  const int q = detail::extrapolation_points(p);
  const double delta = left.grid.delta();
  const double x1 = left.measurement.x1();
  if (left.m_max() < std::max(p - 1, q) || right.m_max() < std::max(p - 1, q))
    throw std::out_of_range("dataset missing lattice samples for this grid");

  auto kernel_l = [&](int m) { return cplx(0.0, -m * delta) * left.sample(m); };
  auto kernel_r = [&](int m) {
    return cplx(0.0, -m * delta) * std::exp(cplx(0.0, 2.0 * m * delta * x1)) *
           right.sample(m);
  };
  FarFieldMatrix F{Eigen::MatrixXcd(p, p), left.grid, delta, FarFieldKind::TwoSided,
                   0.0, 0.0, 0.0, false, x1, left.measurement.xperp};
  const cplx diag = 0.5 * (detail::extrapolate_kernel(kernel_l, q, delta, x1) +
                           detail::extrapolate_kernel(kernel_r, q, delta, -x1));
  for (int i = 0; i < p; ++i) {
    F.entries(i, i) = diag;
    for (int j = 0; j < p; ++j) {
      if (i > j) F.entries(i, j) = kernel_l(i - j);
      else if (i < j) F.entries(i, j) = kernel_r(j - i);
    }
  }
  return F;
}

/// F_alpha: backscattering-only operator on the shifted signed lattice.
/// mu_1(omega_{sigma gamma alpha}) > 0 everywhere, so the diagonal is
/// plain data, no extrapolation.
inline FarFieldMatrix assemble_alpha(const DataSet& ds, double alpha, double tau) {
  if (!ds.alpha || *ds.alpha != alpha)
    throw std::invalid_argument("dataset was not synthesized for this alpha");
  const int p = ds.grid.num_sigma();
  const double delta = ds.grid.delta();
  const double shift = ds.lattice_shift();
  if (ds.m_min > -(p - 1) || ds.m_max() < p - 1)
    throw std::out_of_range("dataset missing signed lattice samples for this grid");
  FarFieldMatrix F{Eigen::MatrixXcd(p, p), ds.grid, delta, FarFieldKind::Alpha,
                   0.0, alpha, tau, false, ds.measurement.x1(), ds.measurement.xperp};
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      F.entries(i, j) = cplx(0.0, -((i - j) * delta + shift)) * ds.sample(i - j);
  return F;
}

/// Hermitian part used by the imaging stage: plain symmetrization for the
/// Hermitian kinds, Re(e^{i tau} F) for the alpha kind.
inline Eigen::MatrixXcd hermitian_part(const FarFieldMatrix& F) {
  Eigen::MatrixXcd A = F.entries;
  if (F.kind == FarFieldKind::Alpha) A *= std::exp(cplx(0.0, F.tau));
  return 0.5 * (A + A.adjoint().eval());
}

// ---------------------------------------------------------------------------
// Discrete factors

struct DiscreteFactors {
  Eigen::MatrixXcd S;        // Q x P, S(q,i) = sqrt(psi_1(yq_perp)) e^{-i sigma_i (yq_1 - x*_1)}
  Eigen::VectorXcd T;        // diagonal middle operator at the nodes
  Eigen::VectorXd weights;   // quadrature weights w_D
  double wsigma;             // sigma weight delta
  FarFieldKind kind;
};

inline DiscreteFactors discrete_factors(const Waveguide& wg, const SourceSpec& src,
                                        const MeasurementConfig& meas,
                                        const FrequencyGrid& grid,
                                        const QuadratureRule& quad, FarFieldKind kind,
                                        double alpha = 0.0) {
  const int p = grid.num_sigma();
  const auto sigmas = grid.sigmas();
  std::vector<QuadNode> nodes;
  std::vector<cplx> amplitudes;
  for (const auto& r : src.regions) {
    for (const auto& node : quadrature_nodes({r.shape}, quad)) {
      nodes.push_back(node);
      amplitudes.push_back(r.amplitude);
    }
  }
  const int qn = static_cast<int>(nodes.size());
  if (qn == 0) throw std::invalid_argument("source quadrature produced no nodes");

  DiscreteFactors fac{Eigen::MatrixXcd(qn, p), Eigen::VectorXcd(qn),
                      Eigen::VectorXd(qn), grid.delta(), kind};
  const double x1 = meas.x1();
  const double psi_star = psi_n(wg, 1, meas.xperp);
  double shift = 0.0;
  if (kind == FarFieldKind::Alpha) {
    if (alpha < 2.0) throw std::invalid_argument("alpha must be >= 2");
    const auto [l1, l2] = passband(wg);
    shift = std::sqrt(l2 * l2 - l1 * l1) / alpha;
  }
  for (int q = 0; q < qn; ++q) {
    const Point y = nodes[q].y;
    const double sq = std::sqrt(psi_n(wg, 1, y.xperp));
    for (int i = 0; i < p; ++i)
      fac.S(q, i) = sq * std::exp(cplx(0.0, -sigmas[i] * (y.x1 - x1)));
    fac.weights(q) = nodes[q].weight;
    cplx t = psi_star * amplitudes[q] / 2.0;
    switch (kind) {
      case FarFieldKind::Backscatter: t *= std::exp(cplx(0.0, src.theta)); break;
      case FarFieldKind::TwoSided: break;
      case FarFieldKind::Alpha:
        t *= std::exp(cplx(0.0, shift * std::abs(x1 - y.x1)));
        break;
    }
    fac.T(q) = t;
  }
  return fac;
}

/// Relative Frobenius residual || F - S^H diag(w T) S || / || F ||.  For
/// the Hermitian kinds the reference diagonal is rebuilt with the same
/// extrapolation rule as assembly, so the residual isolates quadrature
/// error; identical sigma weights multiply both sides and cancel.
inline double verify_factorization(const FarFieldMatrix& F, const DiscreteFactors& fac) {
  const int p = F.size();
  if (fac.S.cols() != p)
    throw std::invalid_argument("factor/operator grid size mismatch");
  Eigen::MatrixXcd R = fac.S.adjoint() *
                       (fac.weights.array() * fac.T.array()).matrix().asDiagonal() *
                       fac.S;
  if (F.kind != FarFieldKind::Alpha && p >= 2) {
    const int q = detail::extrapolation_points(p);
    const double delta = F.grid.delta();
    const double c = F.doubled ? 2.0 : 1.0;
    auto lower = [&](int m) { return R(m, 0); };
    cplx diag;
    if (F.kind == FarFieldKind::Backscatter) {
      diag = detail::extrapolate_kernel(lower, q, delta, c * F.meas_x1).real();
    } else {
      auto upper = [&](int m) { return R(0, m); };
      diag = 0.5 * (detail::extrapolate_kernel(lower, q, delta, F.meas_x1) +
                    detail::extrapolate_kernel(upper, q, delta, -F.meas_x1));
    }
    R.diagonal().setConstant(diag);
  }
  return (F.entries - R).norm() / F.entries.norm();
}

// ---------------------------------------------------------------------------
// CSV serialization: header rows then i, j, re, im.

inline std::string to_string(FarFieldKind k) {
  switch (k) {
    case FarFieldKind::Backscatter: return "backscatter";
    case FarFieldKind::TwoSided: return "two_sided";
    case FarFieldKind::Alpha: return "alpha";
  }
  throw std::logic_error("unreachable kind");
}

inline void write_csv(const FarFieldMatrix& F, std::ostream& os) {
  using detail::fmt;
  os << "wgfm_farfield,1\n";
  os << "kind," << to_string(F.kind) << "\n";
  os << "grid," << fmt(F.grid.k_minus) << "," << fmt(F.grid.k_plus) << "," << F.grid.n
     << "," << (F.grid.mode == GridMode::Vertex ? "vertex" : "midpoint") << "\n";
  os << "weight," << fmt(F.weight) << "\n";
  os << "params," << fmt(F.theta) << "," << fmt(F.alpha) << "," << fmt(F.tau) << ","
     << (F.doubled ? 1 : 0) << "\n";
  os << "measurement," << fmt(F.meas_x1) << "," << fmt(F.meas_xperp) << "\n";
  os << "i,j,re,im\n";
  for (int i = 0; i < F.size(); ++i)
    for (int j = 0; j < F.size(); ++j)
      os << i << "," << j << "," << fmt(F.entries(i, j).real()) << ","
         << fmt(F.entries(i, j).imag()) << "\n";
}

inline void write_csv(const FarFieldMatrix& F, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_csv(F, os);
}

inline FarFieldMatrix read_farfield_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || detail::split_csv(line)[0] != "wgfm_farfield")
    throw std::runtime_error("not a wgfm far-field file");
  std::optional<FrequencyGrid> grid;
  FarFieldKind kind = FarFieldKind::Backscatter;
  double weight = 0.0, theta = 0.0, alpha = 0.0, tau = 0.0;
  double mx1 = 0.0, mxp = 0.0;
  bool doubled = false;
  std::vector<std::tuple<int, int, cplx>> rows;
  bool in_rows = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv(line);
    if (!in_rows) {
      if (f[0] == "kind") {
        if (f.at(1) == "backscatter") kind = FarFieldKind::Backscatter;
        else if (f.at(1) == "two_sided") kind = FarFieldKind::TwoSided;
        else if (f.at(1) == "alpha") kind = FarFieldKind::Alpha;
        else throw std::runtime_error("unknown far-field kind " + f.at(1));
      } else if (f[0] == "grid") {
        grid.emplace(std::stod(f.at(1)), std::stod(f.at(2)), std::stoi(f.at(3)),
                     f.at(4) == "vertex" ? GridMode::Vertex : GridMode::Midpoint);
      } else if (f[0] == "weight") {
        weight = std::stod(f.at(1));
      } else if (f[0] == "params") {
        theta = std::stod(f.at(1));
        alpha = std::stod(f.at(2));
        tau = std::stod(f.at(3));
        doubled = f.at(4) == "1";
      } else if (f[0] == "measurement") {
        mx1 = std::stod(f.at(1));
        mxp = std::stod(f.at(2));
      } else if (f[0] == "i") {
        in_rows = true;
      } else {
        throw std::runtime_error("unknown far-field header row: " + f[0]);
      }
    } else {
      rows.emplace_back(std::stoi(f.at(0)), std::stoi(f.at(1)),
                        cplx(std::stod(f.at(2)), std::stod(f.at(3))));
    }
  }
  if (!grid || rows.empty()) throw std::runtime_error("incomplete far-field file");
  const int p = grid->num_sigma();
  if (static_cast<int>(rows.size()) != p * p)
    throw std::runtime_error("far-field file row count does not match grid");
  FarFieldMatrix F{Eigen::MatrixXcd(p, p), *grid, weight, kind, theta,
                   alpha, tau, doubled, mx1, mxp};
  for (const auto& [i, j, v] : rows) F.entries(i, j) = v;
  return F;
}

inline FarFieldMatrix read_farfield_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_farfield_csv(is);
}

}  // namespace wgfm
