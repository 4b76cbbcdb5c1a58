#pragma once

#include <array>
#include <optional>

#include "entpdf/types.hpp"

namespace entpdf {

// Unit-norm two-qubit pure state.
class PureState {
 public:
  PureState() : amps_(1.0, 0.0, 0.0, 0.0) {}
  // Validates unit norm within 1e-12.
  explicit PureState(const Vector4c& amps);
  // Rescales an arbitrary nonzero vector to unit norm.
  static PureState normalized(const Vector4c& raw);

  const Vector4c& amps() const { return amps_; }
  Complex operator[](int i) const { return amps_(i); }
  Matrix4c projector() const { return amps_ * amps_.adjoint(); }

 private:
  Vector4c amps_;
};

// 4x4 density matrix.  Construction validates Hermiticity (1e-10),
// unit trace (1e-10) and positive semidefiniteness (eigenvalues >= -1e-10).
class DensityMatrix {
 public:
  explicit DensityMatrix(const Matrix4c& m);
  static DensityMatrix from_pure(const PureState& psi);

  const Matrix4c& mat() const { return mat_; }

 private:
  Matrix4c mat_;
};

struct SpectralDecomposition {
  // Descending order; eigenvalues clamped to [0,1] and renormalized so the
  // sum is exactly the input trace.
  std::array<double, 4> eigenvalues;
  std::array<PureState, 4> eigenvectors;
};

// Nested resolution rho = sum_M Lambda_M Pi_M with Pi_M the projector onto
// the span of the top M eigenvectors, Lambda_M = lambda_M - lambda_{M+1}
// (Lambda_4 = lambda_4) and weights omega_M = Lambda_M / lambda_1.
struct NestedResolution {
  std::array<double, 4> lambdas;   // Lambda_1..Lambda_4
  std::array<double, 4> weights;   // omega_1..omega_4, sum = 1
  std::array<Matrix4c, 4> projections;  // Pi_1..Pi_4
};

// Cyclic complex Jacobi eigensolver.  Degenerate eigenspaces (eigenvalue gap
// <= 1e-9) get a deterministic orthonormal basis: Gram-Schmidt of the block
// projector applied to the canonical basis in order, every vector's phase
// fixed so its largest-magnitude component is real positive.
SpectralDecomposition eigendecompose(const DensityMatrix& rho);

NestedResolution nested_resolution(const SpectralDecomposition& sd);

// Normalized projection of psi onto the range of the projector pi, or
// nullopt when the projection norm is below 1e-12.
std::optional<PureState> project_onto(const Matrix4c& pi, const PureState& psi);

// Eigenvalues of an arbitrary Hermitian 4x4 (descending) plus eigenvectors,
// without density-matrix validation.  Shared by analysis routines.
struct HermitianEigen {
  std::array<double, 4> values;
  Matrix4c vectors;  // columns
};
HermitianEigen hermitian_eigen(const Matrix4c& a);

}  // namespace entpdf
