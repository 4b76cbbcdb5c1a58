#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "entpdf/entdensity.hpp"
#include "entpdf/localops.hpp"

namespace entpdf {

/* ------------------------------------------------------------------ */
/* RNG: splitmix64 counter stream, splittable by (seed, stream_id).    */
/* Fixed-size chunks make parallel histograms bit-identical to serial  */
/* regardless of worker count.                                         */
/* ------------------------------------------------------------------ */

class RngStream {
 public:
  RngStream(uint64_t seed, uint64_t stream_id);

  uint64_t next_u64();
  // Uniform in [0, 1).
  double next_unit();
  // Uniform in [a, b).
  double uniform(double a, double b) { return a + (b - a) * next_unit(); }
  // Standard normal (Box-Muller, one value cached).
  double normal();

 private:
  uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/* ------------------------------------------------------------------ */
/* Subspace samplers: one Haar-consistent entanglement draw each.      */
/* ------------------------------------------------------------------ */

// Fubini-Study draw in the plane: cos(theta) uniform on [-1,1], phi uniform
// on [0,2pi); returns the concurrence of
// cos(theta/2) e^{i phi/2} chi1 + sin(theta/2) e^{-i phi/2} chi2.
double sample_plane_entanglement(const CanonicalPlane& cp, RngStream& rng);

// Fubini-Study draw in the span of three orthonormal states.
double sample_triple_entanglement(const std::array<PureState, 3>& basis,
                                  RngStream& rng);

// Haar draw over the full state space (8 normals, normalized).
double sample_full_entanglement(RngStream& rng);

PureState random_pure_state(RngStream& rng);
Matrix2c random_su2(RngStream& rng);
LocalUnitaryPair random_local_unitary(RngStream& rng);
// Orthonormal pair spanning a Haar-random plane.
std::pair<PureState, PureState> random_plane(RngStream& rng);
// Random mixed state; eigenvalue gaps at least min_gap (0 = unconstrained).
DensityMatrix random_density_matrix(RngStream& rng, double min_gap = 0.0);

/* ------------------------------------------------------------------ */
/* Histograms and curve comparison.                                    */
/* ------------------------------------------------------------------ */

struct Histogram {
  std::vector<double> edges;     // bins+1 ascending edges over [0,1]
  std::vector<uint64_t> counts;  // per-bin counts
  uint64_t total = 0;

  int bins() const { return static_cast<int>(counts.size()); }
  double density(int i) const;
  // Empirical CDF at a bin edge index.
  double cdf_at_edge(int i) const;
};

using Sampler = std::function<double(RngStream&)>;

// Deterministic given (seed, n, bins): samples are drawn in fixed chunks of
// 65536, chunk i using stream_id i.  The parallel version distributes chunks
// over OpenMP threads and merges counts by addition.
Histogram mc_histogram(const Sampler& sampler, uint64_t n, int bins,
                       uint64_t seed);
Histogram mc_histogram_serial(const Sampler& sampler, uint64_t n, int bins,
                              uint64_t seed);

struct ComparisonReport {
  double ks_distance = 0.0;
  double sup_excluded = 0.0;     // sup-norm over non-flagged bins
  std::vector<double> z_scores;  // per-bin standardized deviations
  std::vector<int> flagged_bins;
  uint64_t samples = 0;
  bool pass = false;             // ks < 0.01 and sup_excluded < 0.02
};

inline constexpr double kKsThreshold = 0.01;
inline constexpr double kSupThreshold = 0.02;

// KS distance between the empirical CDF and the trapezoid-integrated curve
// CDF at bin edges, plus a sup-norm over bin-average densities excluding
// bins flagged as containing a cusp, divergence or support endpoint.
ComparisonReport compare(const DensityCurve& curve, const Histogram& hist);

// End-to-end oracle: mixture CDF (deltas included as jumps) against an
// empirical mixture histogram.  Pass threshold: KS < 0.015.
ComparisonReport compare_mixture(const MixedDensity& md,
                                 const Histogram& hist);
inline constexpr double kMixtureKsThreshold = 0.015;

// Samples the entanglement distribution of rho itself: picks subspace M
// with probability omega_M, then samples within it.
class MixtureSampler {
 public:
  explicit MixtureSampler(const DensityMatrix& rho);
  double operator()(RngStream& rng) const;

 private:
  std::array<double, 4> cum_{};
  double e1_ = 0.0;
  bool has_plane_ = false;
  CanonicalPlane plane_;
  double plane_e_max_ = 0.0;
  std::array<PureState, 3> triple_basis_;
};

}  // namespace entpdf
