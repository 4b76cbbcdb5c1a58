#pragma once

#include <Eigen/Dense>
#include <complex>

namespace entpdf {

// Two-qubit computational basis order used everywhere: {uu, ud, du, dd}.
inline constexpr int kDim = 4;

using Complex = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;
using Vector2c = Eigen::Vector2cd;
using Vector4c = Eigen::Vector4cd;

Matrix4c kron(const Matrix2c& a, const Matrix2c& b);

double max_abs_diff(const Matrix4c& a, const Matrix4c& b);
bool approx_equal(const Matrix4c& a, const Matrix4c& b, double tol);
bool approx_equal(const Vector4c& a, const Vector4c& b, double tol);

// Frobenius norm of the off-diagonal part.
double offdiag_norm(const Matrix4c& a);

// Multiplies by a unit phase so the largest-magnitude component becomes
// real positive (first index wins ties).  Shared determinism convention.
void phase_fix_largest(Vector2c& v);
void phase_fix_largest(Vector4c& v);

}  // namespace entpdf
