#include "entpdf/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "entpdf/errors.hpp"

namespace entpdf {

namespace {

constexpr double kOffdiagTol = 1e-13;
constexpr int kMaxSweeps = 100;
constexpr double kDegeneracyGap = 1e-9;
constexpr double kPsdClamp = -1e-10;

// One cyclic complex Jacobi pass: for a Hermitian pivot (p,q) write
// a_pq = r e^{i phi}, strip the phase with diag(e^{i phi/2}, e^{-i phi/2}),
// then apply the standard symmetric rotation.
void jacobi_rotate(Matrix4c& a, Matrix4c& v, int p, int q) {
  const Complex apq = a(p, q);
  const double r = std::abs(apq);
  if (r < 1e-300) {
    a(p, q) = a(q, p) = 0.0;
    return;
  }
  const Complex eiphi = apq / r;
  const double app = a(p, p).real();
  const double aqq = a(q, q).real();
  const double tau = (aqq - app) / (2.0 * r);
  const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(tau) + std::sqrt(1.0 + tau * tau));
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = t * c;

  // Column rotation J: (p,q) block [[c, s*e^{i phi}], [-s*e^{-i phi}, c]]
  // ... applied as A <- J^dagger A J, V <- V J with
  // J(p,p)=c, J(p,q)=s*eiphi, J(q,p)=-s*conj(eiphi), J(q,q)=c.
  const Complex jpq = s * eiphi;
  const Complex jqp = -s * std::conj(eiphi);
  for (int k = 0; k < kDim; ++k) {
    const Complex akp = a(k, p), akq = a(k, q);
    a(k, p) = akp * c + akq * jqp;
    a(k, q) = akp * jpq + akq * c;
  }
  for (int k = 0; k < kDim; ++k) {
    const Complex apk = a(p, k), aqk = a(q, k);
    a(p, k) = c * apk + std::conj(jqp) * aqk;
    a(q, k) = std::conj(jpq) * apk + c * aqk;
  }
  a(p, q) = a(q, p) = 0.0;
  a(p, p) = Complex(a(p, p).real(), 0.0);
  a(q, q) = Complex(a(q, q).real(), 0.0);
  for (int k = 0; k < kDim; ++k) {
    const Complex vkp = v(k, p), vkq = v(k, q);
    v(k, p) = vkp * c + vkq * jqp;
    v(k, q) = vkp * jpq + vkq * c;
  }
}

}  // namespace

PureState::PureState(const Vector4c& amps) : amps_(amps) {
  const double n = amps_.norm();
  if (std::abs(n - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "pure state is not unit norm: |norm - 1| = " << std::abs(n - 1.0);
    throw InvalidStateError(os.str());
  }
}

PureState PureState::normalized(const Vector4c& raw) {
  const double n = raw.norm();
  if (n < 1e-12) throw InvalidStateError("cannot normalize a null vector");
  PureState out;
  out.amps_ = raw / n;
  return out;
}

DensityMatrix::DensityMatrix(const Matrix4c& m) : mat_(m) {
  const double herm = max_abs_diff(m, m.adjoint());
  if (herm > 1e-10) {
    std::ostringstream os;
    os << "density matrix is not Hermitian: max |rho - rho^dagger| = " << herm;
    throw InvalidStateError(os.str());
  }
  const double tr = std::abs(m.trace() - Complex(1.0, 0.0));
  if (tr > 1e-10) {
    std::ostringstream os;
    os << "density matrix trace differs from 1 by " << tr;
    throw InvalidStateError(os.str());
  }
  const HermitianEigen he = hermitian_eigen((m + m.adjoint()) / 2.0);
  const double lmin = he.values[3];
  if (lmin < kPsdClamp) {
    std::ostringstream os;
    os << "density matrix is not positive semidefinite: min eigenvalue = "
       << lmin;
    throw InvalidStateError(os.str());
  }
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
  return DensityMatrix(psi.projector());
}

HermitianEigen hermitian_eigen(const Matrix4c& input) {
  Matrix4c a = (input + input.adjoint()) / 2.0;
  Matrix4c v = Matrix4c::Identity();
  int sweep = 0;
  while (offdiag_norm(a) > kOffdiagTol) {
    if (++sweep > kMaxSweeps) {
      throw NumericalError("Jacobi eigensolver did not converge in 100 sweeps",
                           offdiag_norm(a));
    }
    for (int p = 0; p < kDim; ++p)
      for (int q = p + 1; q < kDim; ++q) jacobi_rotate(a, v, p, q);
  }
  std::array<int, 4> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
    return a(i, i).real() > a(j, j).real();
  });
  HermitianEigen out;
  for (int i = 0; i < kDim; ++i) {
    out.values[i] = a(order[i], order[i]).real();
    out.vectors.col(i) = v.col(order[i]);
  }
  return out;
}

SpectralDecomposition eigendecompose(const DensityMatrix& rho) {
  HermitianEigen he = hermitian_eigen(rho.mat());

  std::array<double, 4> lam = he.values;
  for (double& l : lam) {
    if (l < 0.0) {
      if (l < kPsdClamp)
        throw InvalidStateError("negative eigenvalue beyond clamp range");
      l = 0.0;
    }
  }
  const double sum = std::accumulate(lam.begin(), lam.end(), 0.0);
  if (sum <= 0.0) throw InvalidStateError("density matrix has zero trace");
  for (double& l : lam) l /= sum;

  // Deterministic bases inside degenerate blocks: Gram-Schmidt of the block
  // projector applied to e0..e3 in canonical order.
  Matrix4c vecs = he.vectors;
  int i = 0;
  while (i < kDim) {
    int j = i + 1;
    while (j < kDim && lam[j - 1] - lam[j] <= kDegeneracyGap) ++j;
    const int dim = j - i;
    if (dim > 1) {
      Matrix4c proj = Matrix4c::Zero();
      for (int k = i; k < j; ++k)
        proj += vecs.col(k) * vecs.col(k).adjoint();
      std::vector<Vector4c> basis;
      for (int e = 0; e < kDim && static_cast<int>(basis.size()) < dim; ++e) {
        Vector4c w = proj.col(e);
        for (const Vector4c& b : basis) w -= b.dot(w) * b;
        const double n = w.norm();
        if (n > 1e-6) basis.push_back(w / n);
      }
      // Practically unreachable: greedy completion if the canonical sweep
      // left the block short.
      while (static_cast<int>(basis.size()) < dim) {
        Vector4c best = Vector4c::Zero();
        double bn = -1.0;
        for (int e = 0; e < kDim; ++e) {
          Vector4c w = proj.col(e);
          for (const Vector4c& b : basis) w -= b.dot(w) * b;
          if (w.norm() > bn) {
            bn = w.norm();
            best = w;
          }
        }
        basis.push_back(best / bn);
      }
      for (int k = 0; k < dim; ++k) vecs.col(i + k) = basis[k];
    }
    i = j;
  }

  SpectralDecomposition sd;
  sd.eigenvalues = lam;
  for (int k = 0; k < kDim; ++k) {
    Vector4c v = vecs.col(k);
    phase_fix_largest(v);
    sd.eigenvectors[k] = PureState::normalized(v);
  }
  return sd;
}

NestedResolution nested_resolution(const SpectralDecomposition& sd) {
  const auto& lam = sd.eigenvalues;
  if (lam[0] <= 0.0)
    throw InvalidStateError("nested resolution needs lambda_1 > 0");
  for (int k = 0; k + 1 < kDim; ++k)
    if (lam[k] < lam[k + 1] - 1e-12)
      throw InvalidStateError("eigenvalues are not sorted descending");

  NestedResolution nr;
  Matrix4c acc = Matrix4c::Zero();
  for (int m = 0; m < kDim; ++m) {
    acc += sd.eigenvectors[m].projector();
    nr.projections[m] = acc;
    const double next = (m + 1 < kDim) ? lam[m + 1] : 0.0;
    nr.lambdas[m] = std::max(0.0, lam[m] - next);
    nr.weights[m] = nr.lambdas[m] / lam[0];
  }
  // sum omega = 1 by construction up to roundoff; pin it exactly.
  const double ws =
      std::accumulate(nr.weights.begin(), nr.weights.end(), 0.0);
  for (double& w : nr.weights) w /= ws;
  return nr;
}

std::optional<PureState> project_onto(const Matrix4c& pi,
                                      const PureState& psi) {
  const double idem = max_abs_diff(pi * pi, pi);
  const double herm = max_abs_diff(pi, pi.adjoint());
  if (idem > 1e-9 || herm > 1e-9) {
    std::ostringstream os;
    os << "projector validation failed: |Pi^2 - Pi| = " << idem
       << ", |Pi - Pi^dagger| = " << herm;
    throw DomainError(os.str());
  }
  const Vector4c w = pi * psi.amps();
  if (w.norm() < 1e-12) return std::nullopt;
  return PureState::normalized(w);
}

}  // namespace entpdf
