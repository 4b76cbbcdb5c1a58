#include "entpdf/types.hpp"

namespace entpdf {

Matrix4c kron(const Matrix2c& a, const Matrix2c& b) {
  Matrix4c out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

double max_abs_diff(const Matrix4c& a, const Matrix4c& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

bool approx_equal(const Matrix4c& a, const Matrix4c& b, double tol) {
  return max_abs_diff(a, b) <= tol;
}

bool approx_equal(const Vector4c& a, const Vector4c& b, double tol) {
  return (a - b).cwiseAbs().maxCoeff() <= tol;
}

double offdiag_norm(const Matrix4c& a) {
  double s = 0.0;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

namespace {
template <typename Vec>
void phase_fix_impl(Vec& v) {
  int imax = 0;
  double best = std::abs(v(0));
  for (int i = 1; i < v.size(); ++i) {
    const double m = std::abs(v(i));
    if (m > best) {
      best = m;
      imax = i;
    }
  }
  if (best < 1e-300) return;
  const Complex ph = v(imax) / best;
  v *= std::conj(ph);
  v(imax) = Complex(std::abs(v(imax)), 0.0);
}
}  // namespace

void phase_fix_largest(Vector2c& v) { phase_fix_impl(v); }
void phase_fix_largest(Vector4c& v) { phase_fix_impl(v); }

}  // namespace entpdf
