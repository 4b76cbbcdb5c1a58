#pragma once

#include <cmath>

#include "entpdf/qstate.hpp"

namespace testutil {

// Reference mixed state used across the test suite.  Its eigensystem is
// known only to three decimals, so the vectors are renormalized one by one
// and the assembled matrix is Hermitian, PSD and unit trace, while its
// actual spectrum sits within ~1e-3 of the nominal weights.
inline entpdf::Vector4c ref_vec(int i) {
  entpdf::Vector4c v;
  switch (i) {
    case 0: v << 0.998, 0.000, 0.031, 0.050; break;
    case 1: v << 0.059, -0.009, -0.528, -0.847; break;
    case 2: v << 0.000, 0.924, 0.325, -0.202; break;
    default: v << 0.000, 0.383, -0.784, 0.489; break;
  }
  return v / v.norm();
}

inline const double kRefEigs[4] = {0.385, 0.288, 0.231, 0.096};

inline entpdf::DensityMatrix ref_state() {
  entpdf::Matrix4c m = entpdf::Matrix4c::Zero();
  for (int i = 0; i < 4; ++i) {
    const entpdf::Vector4c v = ref_vec(i);
    m += kRefEigs[i] * (v * v.adjoint());
  }
  m /= m.trace().real();
  return entpdf::DensityMatrix(m);
}

// Gram-Schmidt orthonormalization of the first two reference vectors, for
// tests that need an exactly orthonormal plane basis.
inline std::pair<entpdf::PureState, entpdf::PureState> ref_plane_basis() {
  const entpdf::Vector4c a = ref_vec(0);
  entpdf::Vector4c b = ref_vec(1);
  b -= a * (a.adjoint() * b)(0);
  b /= b.norm();
  return {entpdf::PureState(a), entpdf::PureState::normalized(b)};
}

}  // namespace testutil
