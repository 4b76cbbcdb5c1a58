#include "entpdf/localops.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "entpdf/errors.hpp"

namespace entpdf {

namespace {

// Hermitian 2x2 eigenpairs, descending, deterministic phases.
struct Eigen2 {
  double p1, p2;
  Vector2c v1, v2;
};

Eigen2 eigen2x2(const Matrix2c& h) {
  const double a = h(0, 0).real();
  const double d = h(1, 1).real();
  const Complex b = h(0, 1);
  Eigen2 out;
  const double disc = std::sqrt((a - d) * (a - d) + 4.0 * std::norm(b));
  out.p1 = 0.5 * ((a + d) + disc);
  out.p2 = 0.5 * ((a + d) - disc);
  if (disc <= 1e-14 * (std::abs(a) + std::abs(d) + 1.0)) {
    // Degenerate: canonical basis, matching the global convention.
    out.v1 = Vector2c(1.0, 0.0);
    out.v2 = Vector2c(0.0, 1.0);
    return out;
  }
  Vector2c v1(b, Complex(out.p1 - a, 0.0));
  if (v1.norm() < 1e-14) v1 = Vector2c(1.0, 0.0);
  v1.normalize();
  Vector2c v2(-std::conj(v1(1)), std::conj(v1(0)));
  phase_fix_largest(v1);
  phase_fix_largest(v2);
  out.v1 = v1;
  out.v2 = v2;
  return out;
}

// (<a| (x) 1) |psi>, the qubit-2 partner vector of a qubit-1 direction.
Vector2c partner_of(const Vector2c& a, const Vector4c& psi) {
  Vector2c out;
  for (int q2 = 0; q2 < 2; ++q2)
    out(q2) = std::conj(a(0)) * psi(q2) + std::conj(a(1)) * psi(2 + q2);
  return out;
}

// Splits a U(2) matrix into (SU(2), phase) with u = phase * su.
std::pair<Matrix2c, Complex> su2_split(const Matrix2c& u) {
  Complex det = u(0, 0) * u(1, 1) - u(0, 1) * u(1, 0);
  det /= std::abs(det);
  const Complex ph = std::exp(Complex(0.0, 0.5 * std::arg(det)));
  return {u / ph, ph};
}

Matrix2c diag_phase(double angle) {
  Matrix2c d = Matrix2c::Zero();
  d(0, 0) = std::exp(Complex(0.0, angle));
  d(1, 1) = std::exp(Complex(0.0, -angle));
  return d;
}

}  // namespace

double LocalUnitaryPair::su_residual() const {
  const auto dev = [](const Matrix2c& u) {
    const double uni =
        (u * u.adjoint() - Matrix2c::Identity()).cwiseAbs().maxCoeff();
    const Complex det = u(0, 0) * u(1, 1) - u(0, 1) * u(1, 0);
    return std::max(uni, std::abs(det - Complex(1.0, 0.0)));
  };
  return std::max({dev(u1), dev(u2), std::abs(std::abs(phase) - 1.0)});
}

Complex concurrence_bilinear(const Vector4c& a, const Vector4c& b) {
  return 0.5 * (a(0) * b(3) + a(3) * b(0) - a(1) * b(2) - a(2) * b(1));
}

double pure_concurrence(const PureState& psi) {
  const Vector4c& c = psi.amps();
  // <= 1 for unit vectors; rounding can overshoot by an ulp.
  return std::min(2.0 * std::abs(c(0) * c(3) - c(1) * c(2)), 1.0);
}

SchmidtForm schmidt_canonical(const PureState& psi) {
  const Vector4c& c = psi.amps();
  Matrix2c rho1 = Matrix2c::Zero();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        rho1(i, j) += c(2 * i + k) * std::conj(c(2 * j + k));

  const Eigen2 e = eigen2x2(rho1);
  const Vector2c p1 = partner_of(e.v1, c);
  Vector2c p2 = partner_of(e.v2, c);
  const double n1 = p1.norm();
  if (n1 < 1e-12)
    throw CanonicalizationError("Schmidt reduction produced a null partner",
                                n1);
  const Vector2c b1 = p1 / n1;
  p2 -= b1.dot(p2) * b1;
  const double n2 = p2.norm();
  Vector2c b2;
  if (n2 > 1e-8) {
    b2 = p2 / n2;
  } else {
    b2 = Vector2c(-std::conj(b1(1)), std::conj(b1(0)));
    phase_fix_largest(b2);
  }

  Matrix2c u1, u2;
  u1.row(0) = e.v1.adjoint();
  u1.row(1) = e.v2.adjoint();
  u2.row(0) = b1.adjoint();
  u2.row(1) = b2.adjoint();

  const auto [s1, ph1] = su2_split(u1);
  const auto [s2, ph2] = su2_split(u2);
  SchmidtForm out;
  out.lo = LocalUnitaryPair{s1, s2, ph1 * ph2};
  out.theta = 2.0 * std::atan2(n2, n1);  // n2 <= n1, so theta in [0, pi/2]

  const Vector4c mapped = out.lo.lift() * c;
  Vector4c target = Vector4c::Zero();
  target(0) = std::cos(out.theta / 2.0);
  target(3) = std::sin(out.theta / 2.0);
  const double res = (mapped - target).cwiseAbs().maxCoeff();
  if (res > 1e-9)
    throw CanonicalizationError("Schmidt canonicalization residual too large",
                                res);
  return out;
}

PureState find_separable_in_plane(const PureState& chi1,
                                  const PureState& chi2) {
  const Vector4c& c1 = chi1.amps();
  const Vector4c& c2 = chi2.amps();
  const Complex b11 = concurrence_bilinear(c1, c1);
  const Complex b12 = concurrence_bilinear(c1, c2);
  const Complex b22 = concurrence_bilinear(c2, c2);
  const double scale =
      std::max({std::abs(b11), std::abs(b12), std::abs(b22)});
  if (scale < 1e-16) return chi1;  // every state in the plane is separable

  // Stable complex quadratic b22 w^2 + 2 b12 w + b11 = 0.
  const Complex disc = b12 * b12 - b22 * b11;
  Complex sq = std::sqrt(disc);
  if ((std::conj(b12) * sq).real() < 0.0) sq = -sq;
  const Complex q = -(b12 + sq);

  Complex w;
  if (std::abs(q) < 1e-15 * scale) {
    if (std::abs(b22) < 1e-15 * scale) {
      // b12 ~ 0 too; finite root only if b11 ~ 0, else psi = chi2.
      if (std::abs(b11) < 1e-15 * scale) return chi1;
      return chi2;
    }
    w = 0.0;  // b12 = 0 and b11 = 0: double root at the origin
  } else if (std::abs(b22) < 1e-15 * scale) {
    w = b11 / q;  // second root is chi2 itself (at infinity, larger |z|)
  } else {
    const Complex w1 = q / b22;
    const Complex w2 = b11 / q;
    w = (std::abs(w2) < std::abs(w1)) ? w2 : w1;
  }

  for (int it = 0; it < 3; ++it) {
    const Complex f = (b22 * w + 2.0 * b12) * w + b11;
    const Complex fp = 2.0 * (b22 * w + b12);
    if (std::abs(fp) < 1e-14 * scale) break;
    w -= f / fp;
    if (std::abs(f) < 1e-18 * scale) break;
  }
  return PureState::normalized(c1 + w * c2);
}

CanonicalPlane canonical_plane(const PureState& chi1, const PureState& chi2) {
  const double ortho = std::abs(chi1.amps().dot(chi2.amps()));
  if (ortho > 1e-10) {
    std::ostringstream os;
    os << "plane basis is not orthonormal: |<chi1|chi2>| = " << ortho;
    throw DomainError(os.str());
  }

  const PureState sep = find_separable_in_plane(chi1, chi2);
  const Vector4c s = sep.amps();

  // Plane partner orthogonal to the separable state.
  Vector4c t1 = chi2.amps() - s.dot(chi2.amps()) * s;
  Vector4c t2 = chi1.amps() - s.dot(chi1.amps()) * s;
  Vector4c t = (t1.norm() >= t2.norm()) ? t1 : t2;
  if (t.norm() < 1e-8)
    throw CanonicalizationError("degenerate plane partner", t.norm());
  t.normalize();

  const SchmidtForm sf = schmidt_canonical(sep);
  const Vector4c tp = sf.lo.lift() * t;

  // Residual stabilizer of (1,0,0,0): qubit phases (a, b) and a global g
  // with beta = a + b locked to -g; tau rephases the partner vector.
  const double m1 = std::abs(tp(1));
  const double m2 = std::abs(tp(2));
  const double m3 = std::abs(tp(3));
  const bool n1 = m1 > 1e-12, n2 = m2 > 1e-12, n3 = m3 > 1e-12;
  const double A1 = n1 ? std::arg(tp(1)) : 0.0;
  const double A2 = n2 ? std::arg(tp(2)) : 0.0;
  const double A3 = n3 ? std::arg(tp(3)) : 0.0;
  double tau = 0.0, g = 0.0, alpha = 0.0;
  if (n1 && n2 && n3) {
    tau = A3 - A1 - A2;
    g = 0.5 * (A1 + A2) - A3;
    alpha = 0.5 * (A2 - A1);
  } else if (n1 && n2) {
    g = -0.5 * (A1 + A2);
    alpha = 0.5 * (A2 - A1);
  } else if (n1 && n3) {
    g = -0.5 * A3;
    alpha = -A1 - g;
  } else if (n2 && n3) {
    g = -0.5 * A3;
    alpha = A2 + g;
  } else if (n1) {
    alpha = -A1;
  } else if (n2) {
    alpha = A2;
  } else if (n3) {
    g = -0.5 * A3;
  }
  const double beta = -g;
  const double a = 0.5 * (alpha + beta);
  const double b = 0.5 * (beta - alpha);
  const LocalUnitaryPair resid{diag_phase(a), diag_phase(b),
                               std::exp(Complex(0.0, g))};

  CanonicalPlane cp;
  cp.lo = resid.after(sf.lo);

  double x = m1, y = m2, z = m3;
  const double nrm = std::sqrt(x * x + y * y + z * z);
  if (nrm < 1e-8)
    throw CanonicalizationError("canonical partner collapsed", nrm);
  x /= nrm;
  y /= nrm;
  z /= nrm;
  cp.x = x;
  cp.y = y;
  cp.z = z;
  cp.chi1 = PureState(Vector4c(1.0, 0.0, 0.0, 0.0));
  cp.chi2 = PureState::normalized(Vector4c(0.0, x, y, z));

  // Residual audit: the lo image of the plane must be the stored basis.
  const Vector4c img_t =
      std::exp(Complex(0.0, tau)) * (cp.lo.lift() * t);
  const Vector4c img_s = cp.lo.lift() * s;
  const double res =
      std::max((img_t - cp.chi2.amps()).cwiseAbs().maxCoeff(),
               (img_s - cp.chi1.amps()).cwiseAbs().maxCoeff());
  if (res > 1e-9)
    throw CanonicalizationError("plane canonicalization residual too large",
                                res);
  return cp;
}

std::pair<PureState, PureState> complement_plane(const CanonicalPlane& cp) {
  const double x = cp.x, y = cp.y, z = cp.z;
  const double dd = std::sqrt(z * z + x * x);
  if (dd < 1e-9) {
    // x = z = 0 plane is span{(1,0,0,0),(0,0,1,0)}; orthocomplement below.
    return {PureState(Vector4c(0.0, 1.0, 0.0, 0.0)),
            PureState(Vector4c(0.0, 0.0, 0.0, 1.0))};
  }
  const Vector4c c1p(0.0, z / dd, 0.0, -x / dd);
  const Vector4c c2p(0.0, x * y / dd, -dd, z * y / dd);
  return {PureState::normalized(c1p), PureState::normalized(c2p)};
}

CanonicalTriple triple_canonical(const Matrix4c& pi3) {
  const double herm = max_abs_diff(pi3, pi3.adjoint());
  const double idem = max_abs_diff(pi3 * pi3, pi3);
  const double tr3 = std::abs(pi3.trace() - Complex(3.0, 0.0));
  if (herm > 1e-9 || idem > 1e-9 || tr3 > 1e-9) {
    std::ostringstream os;
    os << "invalid projection: expected a rank-3 projector (hermiticity "
       << herm << ", idempotency " << idem << ", trace-3 deviation " << tr3
       << ")";
    throw DomainError(os.str());
  }
  const Matrix4c ker = Matrix4c::Identity() - pi3;
  int imax = 0;
  for (int i = 1; i < kDim; ++i)
    if (ker(i, i).real() > ker(imax, imax).real()) imax = i;
  Vector4c v = ker.col(imax);
  if (v.norm() < 1e-9)
    throw DomainError("invalid projection: kernel extraction failed");
  phase_fix_largest(v);
  CanonicalTriple out;
  out.psi_perp = PureState::normalized(v);
  out.e_perp = pure_concurrence(out.psi_perp);
  return out;
}

}  // namespace entpdf
