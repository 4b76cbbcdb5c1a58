#include "entpdf/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "entpdf/errors.hpp"

namespace entpdf {

namespace {

constexpr double kPi = 3.14159265358979323846;

Matrix4c spin_flip() {
  Matrix4c f = Matrix4c::Zero();
  f(0, 3) = -1.0;
  f(1, 2) = 1.0;
  f(2, 1) = 1.0;
  f(3, 0) = -1.0;
  return f;
}

// Taking square roots turns eigenvalue noise of order machine epsilon into
// 1e-8-sized spurious contributions; values below this absolute floor (the
// inputs here are trace-normalized) are treated as exact zeros.
constexpr double kEigFloor = 1e-13;

Matrix4c hermitian_sqrt(const Matrix4c& a) {
  const HermitianEigen he = hermitian_eigen(a);
  Matrix4c s = Matrix4c::Zero();
  for (int i = 0; i < kDim; ++i) {
    const double v = he.values[i] < kEigFloor ? 0.0 : he.values[i];
    s += std::sqrt(v) * (he.vectors.col(i) * he.vectors.col(i).adjoint());
  }
  return s;
}

double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  return a;
}

void check_unit_interval(double v, const char* name) {
  if (!std::isfinite(v) || v < -1e-9 || v > 1.0 + 1e-9) {
    std::ostringstream os;
    os << name << " must lie in [0, 1], got " << v;
    throw DomainError(os.str());
  }
}

}  // namespace

double wootters_concurrence(const DensityMatrix& rho) {
  static const Matrix4c f = spin_flip();
  const Matrix4c tilde = f * rho.mat().conjugate() * f;
  const Matrix4c sq = hermitian_sqrt(rho.mat());
  // sqrt(rho) rho~ sqrt(rho) is Hermitian PSD and shares the spectrum of
  // rho rho~, so the Jacobi solver applies.
  Matrix4c m = sq * tilde * sq;
  m = Complex(0.5, 0.0) * (m + m.adjoint().eval());
  const HermitianEigen he = hermitian_eigen(m);
  double c = 0.0;
  for (int i = 0; i < kDim; ++i) {
    const double v = he.values[i] < kEigFloor ? 0.0 : he.values[i];
    const double s = std::sqrt(v);
    c += (i == 0) ? s : -s;
  }
  return std::max(c, 0.0);
}

double negativity(const DensityMatrix& rho) {
  const Matrix4c& m = rho.mat();
  Matrix4c pt;
  for (int i1 = 0; i1 < 2; ++i1) {
    for (int i2 = 0; i2 < 2; ++i2) {
      for (int j1 = 0; j1 < 2; ++j1) {
        for (int j2 = 0; j2 < 2; ++j2) {
          // transpose the second-qubit indices
          pt(2 * i1 + i2, 2 * j1 + j2) = m(2 * i1 + j2, 2 * j1 + i2);
        }
      }
    }
  }
  const HermitianEigen he = hermitian_eigen(pt);
  double n = 0.0;
  for (int i = 0; i < kDim; ++i) {
    n += std::abs(he.values[i]) - he.values[i];
  }
  return n;
}

ConvexityReport concurrence_convexity_check(const DensityMatrix& rho) {
  const SpectralDecomposition sd = eigendecompose(rho);
  const Matrix4c pi2 =
      sd.eigenvectors[0].projector() + sd.eigenvectors[1].projector();
  const double c_pi2 =
      2.0 * wootters_concurrence(DensityMatrix(Complex(0.5, 0.0) * pi2));
  ConvexityReport rep;
  rep.lhs = wootters_concurrence(rho);
  rep.rhs = (sd.eigenvalues[0] - sd.eigenvalues[1]) *
                pure_concurrence(sd.eigenvectors[0]) +
            (sd.eigenvalues[1] - sd.eigenvalues[2]) * c_pi2;
  rep.slack = rep.rhs - rep.lhs;
  rep.satisfied = rep.lhs <= rep.rhs + 1e-8;
  return rep;
}

MarkerSet extract_markers(const DensityMatrix& rho) {
  const SpectralDecomposition sd = eigendecompose(rho);
  const NestedResolution nr = nested_resolution(sd);
  MarkerSet ms;
  ms.w1 = nr.weights[0];
  ms.w2 = nr.weights[1];
  ms.w3 = nr.weights[2];
  ms.e1 = pure_concurrence(sd.eigenvectors[0]);
  const CanonicalPlane cp =
      canonical_plane(sd.eigenvectors[0], sd.eigenvectors[1]);
  const PlaneMarkers mk = plane_markers(cp.x, cp.y, cp.z);
  ms.e_max = mk.e_max;
  ms.e_cusp = mk.e_cusp;
  ms.e_perp = triple_canonical(nr.projections[2]).e_perp;
  return ms;
}

ReconstructionExtras measure_extras(const DensityMatrix& rho) {
  const SpectralDecomposition sd = eigendecompose(rho);
  const CanonicalPlane cp =
      canonical_plane(sd.eigenvectors[0], sd.eigenvectors[1]);
  const Matrix4c lift = cp.lo.lift();

  ReconstructionExtras ex;
  {
    const Vector4c img = lift * sd.eigenvectors[0].amps();
    const Complex u = cp.chi1.amps().dot(img);
    const Complex v = cp.chi2.amps().dot(img);
    ex.theta = 2.0 * std::atan2(std::abs(v), std::abs(u));
    ex.phi = wrap_angle(std::arg(u) - std::arg(v));
  }
  {
    const auto [c1p, c2p] = complement_plane(cp);
    const Vector4c img = lift * sd.eigenvectors[3].amps();
    const Complex u = c1p.amps().dot(img);
    const Complex v = c2p.amps().dot(img);
    ex.theta_perp = 2.0 * std::atan2(std::abs(v), std::abs(u));
    ex.phi_perp = wrap_angle(std::arg(u) - std::arg(v));
  }
  return ex;
}

DensityMatrix reconstruct_state(const MarkerSet& ms,
                                const ReconstructionExtras& ex) {
  check_unit_interval(ms.w1, "w1");
  check_unit_interval(ms.w2, "w2");
  check_unit_interval(ms.w3, "w3");
  check_unit_interval(ms.e1, "e1");
  check_unit_interval(ms.e_cusp, "e_cusp");
  check_unit_interval(ms.e_max, "e_max");
  check_unit_interval(ms.e_perp, "e_perp");
  if (ms.e_cusp > ms.e_max + 1e-12) {
    throw DomainError("marker set requires e_cusp <= e_max");
  }
  const double w4 = 1.0 - ms.w1 - ms.w2 - ms.w3;
  if (w4 < -1e-9) {
    throw DomainError("weights w1 + w2 + w3 must not exceed 1");
  }
  const auto check_angle = [](double v, double hi, const char* name) {
    if (!std::isfinite(v) || v < -1e-9 || v > hi + 1e-9) {
      std::ostringstream os;
      os << name << " out of range";
      throw DomainError(os.str());
    }
  };
  check_angle(ex.theta, kPi, "theta");
  check_angle(ex.theta_perp, kPi, "theta_perp");
  check_angle(ex.phi, 2.0 * kPi, "phi");
  check_angle(ex.phi_perp, 2.0 * kPi, "phi_perp");

  // Spectrum from the weights.
  const std::array<double, 4> w{ms.w1, ms.w2, ms.w3, std::max(w4, 0.0)};
  const double denom = w[0] + 2.0 * w[1] + 3.0 * w[2] + 4.0 * w[3];
  if (denom <= 0.0) throw DomainError("weight vector is degenerate");
  std::array<double, 4> lam{};
  lam[0] = 1.0 / denom;
  for (int i = 1; i < 4; ++i) lam[i] = lam[i - 1] - w[i - 1] * lam[0];

  // Canonical plane and its complement.
  const PlaneParams pp = invert_markers(ms.e_max, ms.e_cusp);
  const PureState b1(Vector4c(1.0, 0.0, 0.0, 0.0));
  const PureState b2 = PureState::normalized(Vector4c(0.0, pp.x, pp.y, pp.z));
  CanonicalPlane cp;
  cp.x = pp.x;
  cp.y = pp.y;
  cp.z = pp.z;
  cp.chi1 = b1;
  cp.chi2 = b2;
  const auto [c1p, c2p] = complement_plane(cp);

  const auto place = [](const PureState& u, const PureState& v, double theta,
                        double phi) {
    const Complex a =
        std::cos(0.5 * theta) * Complex(std::cos(phi), std::sin(phi));
    const double b = std::sin(0.5 * theta);
    return PureState::normalized(a * u.amps() + b * v.amps());
  };
  const auto partner = [](const PureState& u, const PureState& v, double theta,
                          double phi) {
    const Complex a =
        -std::sin(0.5 * theta) * Complex(std::cos(phi), std::sin(phi));
    const double b = std::cos(0.5 * theta);
    Vector4c w = a * u.amps() + b * v.amps();
    phase_fix_largest(w);
    return PureState::normalized(w);
  };

  const PureState psi1 = place(b1, b2, ex.theta, ex.phi);
  const double c1 = pure_concurrence(psi1);
  if (std::abs(c1 - ms.e1) > 1e-8) {
    std::ostringstream os;
    os << "placement (theta, phi) gives concurrence " << c1
       << " but the marker set requires e1 = " << ms.e1;
    throw InconsistencyError("e1", os.str());
  }
  const PureState psi2 = partner(b1, b2, ex.theta, ex.phi);

  const PureState psi4 = place(c1p, c2p, ex.theta_perp, ex.phi_perp);
  const double cperp = pure_concurrence(psi4);
  if (std::abs(cperp - ms.e_perp) > 1e-8) {
    std::ostringstream os;
    os << "placement (theta_perp, phi_perp) gives concurrence " << cperp
       << " but the marker set requires e_perp = " << ms.e_perp;
    throw InconsistencyError("e_perp", os.str());
  }
  const PureState psi3 = partner(c1p, c2p, ex.theta_perp, ex.phi_perp);

  Matrix4c rho = lam[0] * psi1.projector() + lam[1] * psi2.projector() +
                 lam[2] * psi3.projector() + lam[3] * psi4.projector();
  rho = Complex(0.5, 0.0) * (rho + rho.adjoint().eval());
  return DensityMatrix(rho);
}

}  // namespace entpdf
