#pragma once

#include <utility>

#include "entpdf/qstate.hpp"
#include "entpdf/types.hpp"

namespace entpdf {

// Local unitary u1 (x) u2 with u1, u2 in SU(2), plus a global phase factor.
// The phase is needed to reach the real-positive canonical forms exactly
// (it cancels in every density-matrix conjugation).
struct LocalUnitaryPair {
  Matrix2c u1 = Matrix2c::Identity();
  Matrix2c u2 = Matrix2c::Identity();
  Complex phase{1.0, 0.0};

  Matrix4c lift() const { return phase * kron(u1, u2); }
  PureState apply(const PureState& psi) const {
    return PureState::normalized(lift() * psi.amps());
  }
  DensityMatrix conjugate(const DensityMatrix& rho) const {
    const Matrix4c u = kron(u1, u2);
    return DensityMatrix(u * rho.mat() * u.adjoint());
  }
  // this after other: apply(other) first, then this.
  LocalUnitaryPair after(const LocalUnitaryPair& other) const {
    return LocalUnitaryPair{u1 * other.u1, u2 * other.u2,
                            phase * other.phase};
  }
  // Special-unitarity residual, for validation.
  double su_residual() const;
};

// 2|c_uu c_dd - c_ud c_du| for the pure state.
double pure_concurrence(const PureState& psi);

// Bilinear form whose zero set is the separable states:
// B(psi,psi) = c_uu c_dd - c_ud c_du.
Complex concurrence_bilinear(const Vector4c& a, const Vector4c& b);

struct SchmidtForm {
  double theta;          // in [0, pi/2]
  LocalUnitaryPair lo;   // lo.apply(psi) = cos(theta/2)|uu> + sin(theta/2)|dd>
};

SchmidtForm schmidt_canonical(const PureState& psi);

// Separable (zero-concurrence) unit vector in span{chi1, chi2}.
// Solutions of the quadratic always exist; deterministic root choice.
PureState find_separable_in_plane(const PureState& chi1, const PureState& chi2);

// Canonical plane basis {(1,0,0,0), (0,x,y,z)} with x,y,z >= 0 real,
// x^2+y^2+z^2 = 1, together with the local operation that maps the input
// plane onto it.
struct CanonicalPlane {
  double x, y, z;
  LocalUnitaryPair lo;
  PureState chi1, chi2;
};

CanonicalPlane canonical_plane(const PureState& chi1, const PureState& chi2);

// Orthocomplement plane of cp, in the same canonical frame: a basis
// {chi1', chi2'} with chi1' separable.
std::pair<PureState, PureState> complement_plane(const CanonicalPlane& cp);

struct CanonicalTriple {
  double e_perp;       // concurrence of the kernel state
  PureState psi_perp;  // unit kernel vector of Pi_3
};

// pi3 must be a rank-3 Hermitian projector (validated within 1e-9).
CanonicalTriple triple_canonical(const Matrix4c& pi3);

}  // namespace entpdf
