#pragma once

#include "entpdf/entdensity.hpp"
#include "entpdf/localops.hpp"
#include "entpdf/qstate.hpp"

namespace entpdf {

// Spin-flip (Wootters) concurrence of a mixed state: C = max(0, s1-s2-s3-s4)
// with s_i the descending square roots of the eigenvalues of rho * rho~,
// rho~ = F conj(rho) F and F the spin flip (uu <-> -dd, ud <-> du).
double wootters_concurrence(const DensityMatrix& rho);

// Twice the absolute sum of the negative eigenvalues of the partial
// transpose over the second qubit.  Equals concurrence on pure states.
double negativity(const DensityMatrix& rho);

struct ConvexityReport {
  double lhs = 0.0;     // wootters_concurrence(rho)
  double rhs = 0.0;     // (l1-l2) C(psi1) + (l2-l3) C(Pi2)
  double slack = 0.0;   // rhs - lhs
  bool satisfied = false;
};

// Convexity bound on concurrence over the nested resolution.  C(Pi2) is the
// concurrence of the rank-2 projector itself; by the homogeneity of the
// spin-flip functional it equals 2 * wootters_concurrence(Pi2 / 2), and the
// rank-3 and rank-4 terms vanish identically.
ConvexityReport concurrence_convexity_check(const DensityMatrix& rho);

// The seven local-unitary invariants of a two-qubit mixed state.
struct MarkerSet {
  double w1 = 0.0, w2 = 0.0, w3 = 0.0;  // omega_1..omega_3 (omega_4 implied)
  double e1 = 0.0;                      // delta location (top eigenvector)
  double e_cusp = 0.0, e_max = 0.0;     // plane markers
  double e_perp = 0.0;                  // triple marker
};

MarkerSet extract_markers(const DensityMatrix& rho);

// Placement angles completing a MarkerSet to a full state: Bloch chart of
// psi_1 within the canonical plane and of psi_perp within the complement
// plane, psi = cos(theta/2) e^{i phi} b1 + sin(theta/2) b2.
struct ReconstructionExtras {
  double theta = 0.0;
  double phi = 0.0;
  double theta_perp = 0.0;
  double phi_perp = 0.0;
};

// Reads the extras off rho's own eigenvectors in its canonical frames, so
// that reconstruct_state(extract_markers(rho), measure_extras(rho)) has the
// same markers as rho.
ReconstructionExtras measure_extras(const DensityMatrix& rho);

// Builds the canonical representative with the given markers: psi_1 placed
// at (theta, phi) in the plane from invert_markers, psi_perp placed at
// (theta_perp, phi_perp) in its complement, psi_2/psi_3 completing the
// nesting, spectrum assembled from the weights.  The placements must
// reproduce e1 and e_perp within 1e-8.
DensityMatrix reconstruct_state(const MarkerSet& ms,
                                const ReconstructionExtras& ex);

}  // namespace entpdf
