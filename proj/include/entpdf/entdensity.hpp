#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "entpdf/localops.hpp"

namespace entpdf {

struct PlaneMarkers {
  double e_max;   // largest entanglement in the plane
  double e_cusp;  // location of the logarithmic divergence
  double mu;      // acos(e_cusp / e_max), 0 when e_max = 0
};

// Markers of the canonical plane {(1,0,0,0), (0,x,y,z)}.
PlaneMarkers plane_markers(double x, double y, double z);

struct PlaneParams {
  double x, y, z;
};

// Closed-form inverse: canonical plane parameters from (e_max, e_cusp).
// Returns the x >= y representative (the markers are x<->y symmetric).
PlaneParams invert_markers(double e_max, double e_cusp);

enum class CurveKind { plane, triple, universal };

struct CurveAnnotations {
  std::optional<double> cusp;  // logarithmic divergence inside the support
  std::optional<double> kink;  // derivative discontinuity (triple curves)
  double support_max = 1.0;    // density is 0 beyond this
  bool divergent_at_support_end = false;
};

struct DensityCurve {
  CurveKind kind = CurveKind::plane;
  std::vector<double> grid;     // ascending, inside [0,1]
  std::vector<double> density;  // same length as grid
  CurveAnnotations annotations;
  double trapezoid_mass = 0.0;
  bool mass_warning = false;

  // Linear interpolation on the grid; 0 beyond the support.
  double value_at(double e) const;
  // Trapezoid CDF normalized by trapezoid_mass.
  double cdf_at(double e) const;
};

// Entanglement density of an equal-weight canonical plane mixture,
// evaluated by quadrature of the phase-space integral on a refined grid of
// about grid_n base nodes (grid_n >= 16).  OpenMP-parallel over grid nodes;
// plane_pdf_serial is the sequential reference with bit-identical output.
DensityCurve plane_pdf(const CanonicalPlane& cp, int grid_n = 512);
DensityCurve plane_pdf_serial(const CanonicalPlane& cp, int grid_n = 512);

// Closed-form triple density 2e/sqrt(1-e_perp^2) * acosh(1/max(e, e_perp)),
// with the e_perp = 1 limit equal to 2e.
double triple_density(double e, double e_perp);
DensityCurve triple_pdf(double e_perp, int grid_n = 512);

struct UniversalOptions {
  std::optional<std::string> cache_dir;  // overrides ENTPDF_CACHE_DIR
  bool allow_generate = true;
};

// Cached full-space curve: 1e7 Haar samples, 512 bins, fixed seed, local
// quadratic smoothing.  The cache is a versioned text table; if it is absent
// it is regenerated (unless disabled, which raises UnavailableError).
DensityCurve universal_pdf(int grid_n = 512);
DensityCurve universal_pdf(int grid_n, const UniversalOptions& opts);

inline constexpr uint64_t kUniversalSeed = 2718281828u;
inline constexpr uint64_t kUniversalSamples = 10000000u;
inline constexpr int kUniversalBins = 512;

struct DeltaComponent {
  double location;
  double weight;
};

struct PlanePart {
  double weight = 0.0;
  std::optional<PlaneMarkers> markers;
  std::optional<DensityCurve> curve;
  std::optional<DeltaComponent> separable_delta;  // e_max = 0 planes
};

struct TriplePart {
  double weight = 0.0;
  std::optional<double> e_perp;
  std::optional<DensityCurve> curve;
};

struct UniversalPart {
  double weight = 0.0;
  std::optional<DensityCurve> curve;
};

struct MixedDensity {
  std::array<double, 4> weights{};          // omega_1..omega_4
  std::optional<DeltaComponent> delta;      // pure-state part at e_1
  PlanePart plane;
  TriplePart triple;
  UniversalPart universal;
  double total_mass = 0.0;  // delta weights + weighted curve masses
  bool mass_warning = false;

  // Mixture CDF including delta jumps.
  double cdf_at(double e) const;
};

// Full decomposition rho -> weighted entanglement density.
// Components with weight < 1e-12 are omitted (weight recorded as 0).
MixedDensity mixed_pdf(const DensityMatrix& rho, int grid_n = 512);

}  // namespace entpdf
