#include "entpdf/entdensity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "entpdf/errors.hpp"
#include "entpdf/haarmc.hpp"
#include "entpdf/qstate.hpp"

namespace entpdf {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Below this the plane kernel degenerates to the flat density on [0, e_max].
constexpr double kFlatCutoff = 1e-7;
// Above 1 - this the plane is Bell-like: density e / sqrt(1 - e^2).
constexpr double kBellCutoff = 1e-7;
// Refinement ladders shrink by sqrt(2) per rung down to this fraction of e_max.
constexpr double kLadderMinFrac = 1e-8;
constexpr double kLadderRatio = 1.41421356237309504880;
// Per-node absolute quadrature target and the failure threshold.
constexpr double kQuadTarget = 1e-8;
constexpr double kQuadFailure = 1e-6;

/* ---------------- adaptive Gauss-Legendre ---------------- */

// 16-point Gauss-Legendre rule on [-1,1], positive abscissae.
constexpr int kGlHalf = 8;
constexpr double kGlX[kGlHalf] = {
    0.0950125098376374401853, 0.2816035507792589132304,
    0.4580167776572273863424, 0.6178762444026437484467,
    0.7554044083550030338951, 0.8656312023878317438805,
    0.9445750230732325760780, 0.9894009349916499325962};
constexpr double kGlW[kGlHalf] = {
    0.1894506104550684962854, 0.1826034150449235888667,
    0.1691565193950025381893, 0.1495959888165767320815,
    0.1246289712555338720525, 0.0951585116824927848099,
    0.0622535239386478928628, 0.0271524594117540948518};

template <class F>
double gl16(const F& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < kGlHalf; ++i) {
    acc += kGlW[i] * (f(mid + half * kGlX[i]) + f(mid - half * kGlX[i]));
  }
  return half * acc;
}

struct QuadAccum {
  double value = 0.0;
  double err = 0.0;
  long long calls = 0;
};

// Bounds the work of one density evaluation; overruns raise IntegrationError
// instead of spinning.
constexpr long long kAdaptBudget = 100000;

template <class F>
void adapt_gl(const F& f, double a, double b, double tol, int depth,
              QuadAccum& out) {
  if (++out.calls > kAdaptBudget) {
    throw IntegrationError("plane density quadrature exceeded its budget",
                           out.err);
  }
  const double whole = gl16(f, a, b);
  const double mid = 0.5 * (a + b);
  const double left = gl16(f, a, mid);
  const double right = gl16(f, mid, b);
  const double err = std::abs(whole - (left + right));
  if (err < tol || depth >= 30 || b - a < 1e-15) {
    out.value += left + right;
    out.err += err;
    return;
  }
  adapt_gl(f, a, mid, 0.5 * tol, depth + 1, out);
  adapt_gl(f, mid, b, 0.5 * tol, depth + 1, out);
}

// Integrates g over an interval of width w, where g takes the offsets
// (delta, gamma) from the interval's left and right ends.  Each half is
// substituted s^2 = offset, which removes inverse-square-root endpoint
// behavior; passing offsets instead of absolute positions keeps them exact
// below the ulp scale of the endpoint, where end + delta would quantize.
template <class G>
void integrate_offsets(const G& g, double w, double tol, QuadAccum& acc) {
  if (!(w > 0.0)) return;
  const double sl = std::sqrt(0.5 * w);
  adapt_gl(
      [&](double s) {
        const double d = s * s;
        return 2.0 * s * g(d, w - d);
      },
      0.0, sl, 0.5 * tol, 0, acc);
  adapt_gl(
      [&](double s) {
        const double gm = s * s;
        return 2.0 * s * g(w - gm, gm);
      },
      0.0, sl, 0.5 * tol, 0, acc);
}

template <class F>
double bisect(const F& f, double lo, double hi) {
  double flo = f(lo);
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/* ---------------- scaled plane kernel ---------------- */

// Density of the scaled plane (e_max = 1) with cusp at zc^2.  The level
// functions over theta in [0, pi] are
//   U(theta) = c - C cos(theta + th0),   upper envelope, peak 1 at pi - th0
//   L(theta) = |C cos(theta - th0) - c|, lower envelope, peak zc^2 at th0
// with c = (1 - zc^2)/2, C = (1 + zc^2)/2, th0 = 2 atan(zc), and the density
// is (e/pi) times the integral of sin(theta)/sqrt((e^2-L^2)(U^2-e^2)) over
// {L <= e <= U}.  Differences of the level functions against the integration
// boundaries are evaluated in product form to avoid cancellation.
double scaled_plane_density(double e, double zc) {
  if (zc < kFlatCutoff) return 1.0;
  if (zc > 1.0 - kBellCutoff) {
    const double s = std::max((1.0 - e) * (1.0 + e), 1e-300);
    return e / std::sqrt(s);
  }

  const double zc2 = zc * zc;
  const double th0 = 2.0 * std::atan(zc);
  const double c = 0.5 * (1.0 - zc2);
  const double C = 0.5 * (1.0 + zc2);
  const double e_top = 1.0 - zc2;  // common value U(pi) = L(pi)

  // Never evaluate exactly at the cusp or the boundary values.
  if (std::abs(e - zc2) < 1e-14) e = zc2 + (e >= zc2 ? 1e-14 : -1e-14);
  if (std::abs(e - e_top) < 1e-14) e = e_top + (e >= e_top ? 1e-14 : -1e-14);
  e = std::min(std::max(e, 1e-12), 1.0 - 1e-12);

  const auto u_of = [&](double th) { return c - C * std::cos(th + th0); };
  const auto l_signed = [&](double th) { return C * std::cos(th - th0) - c; };

  // Region boundaries.  U rises 0 -> 1 on [0, pi - th0] and falls to e_top
  // at pi; L rises 0 -> zc^2 on [0, th0], falls to 0 at 2 th0, then rises
  // to e_top at pi.  The falling U branch re-crosses e at the reflection of
  // th_u about pi - th0; taking the reflection itself as the interval end
  // (rather than a second root search) keeps the product form below exactly
  // zero there -- an endpoint that misses the root by even an ulp plants an
  // unresolvable singularity inside the substituted interval.
  const double th_u =
      bisect([&](double t) { return u_of(t) - e; }, 0.0, kPi - th0);
  const double th_refl = 2.0 * (kPi - th0) - th_u;
  const double th_hi =
      e >= e_top
          ? th_refl
          : bisect([&](double t) { return l_signed(t) + e; }, 2.0 * th0, kPi);
  const bool split = e < zc2;  // cusp side: L exceeds e around its peak
  double th_l1 = 0.0, th_l2 = 0.0;
  if (split) {
    th_l1 = bisect([&](double t) { return l_signed(t) - e; }, 0.0, th0);
    th_l2 = bisect([&](double t) { return l_signed(t) - e; }, th0, 2.0 * th0);
  }

  // The integrand over each interval is sin(theta)/sqrt(A1 A2 A3 A4) with
  //   A1 = e - l_signed,  A2 = e + l_signed,  A3 = U - e,  A4 = U + e,
  // using (e - L)(e + L) = (e - l_signed)(e + l_signed) regardless of the
  // sign of l_signed.  Every factor vanishing at an interval end is written
  // as a prosthaphaeresis product in the offsets supplied by
  // integrate_offsets; near-bell planes collapse the regions to widths
  // around 1e-10 where theta-based differences quantize at theta's ulp.
  const double tol = 0.25 * kQuadTarget * kPi / e;
  QuadAccum acc;

  if (split) {
    {
      // [th_u, th_l1], on the rising side of the L peak: A3 vanishes at the
      // left end, A1 = 2C sin(b1s + gamma/2) sin(gamma/2) at the right.
      const double ta = th_u;
      const double tb = th_l1;
      const double b3r = th_refl - tb;
      const double b1s = th0 - th_l1;
      const auto g = [&](double d, double gm) {
        const double th = ta + d;
        const double a1 =
            2.0 * C * std::sin(b1s + 0.5 * gm) * std::sin(0.5 * gm);
        const double a2 = e + l_signed(th);
        const double a3 =
            2.0 * C * std::sin(0.5 * d) * std::sin(0.5 * (gm + b3r));
        const double prod = std::max(a1, 0.0) * std::max(a2, 0.0) *
                            std::max(a3, 0.0) * (u_of(th) + e);
        if (prod <= 0.0) return 0.0;
        return std::sin(th) / std::sqrt(prod);
      };
      integrate_offsets(g, tb - ta, tol, acc);
    }
    {
      // [max(th_l2, th_u), th_hi], past the L peak.  U may still be below e
      // at th_l2, in which case the left anchor is th_u instead; the offset
      // bases make whichever factor owns the endpoint vanish exactly there.
      const double ta = std::max(th_l2, th_u);
      const double tb = th_hi;
      const double b1l = ta - th_l2;
      const double b3l = ta - th_u;
      const double b3r = th_refl - tb;  // zero when e >= e_top
      const double b2s = th_l2 - th0;
      const double bh = th_hi - th0;
      const auto g = [&](double d, double gm) {
        const double th = ta + d;
        const double a1 = 2.0 * C * std::sin(b2s + 0.5 * (b1l + d)) *
                          std::sin(0.5 * (b1l + d));
        const double a2 =
            e >= e_top
                ? (e - e_top) +
                      2.0 * C * std::cos(0.5 * th) * std::cos(0.5 * th - th0)
                : 2.0 * C * std::sin(bh - 0.5 * gm) * std::sin(0.5 * gm);
        const double a3 = 2.0 * C * std::sin(0.5 * (d + b3l)) *
                          std::sin(0.5 * (gm + b3r));
        const double prod = std::max(a1, 0.0) * std::max(a2, 0.0) *
                            std::max(a3, 0.0) * (u_of(th) + e);
        if (prod <= 0.0) return 0.0;
        return std::sin(th) / std::sqrt(prod);
      };
      integrate_offsets(g, tb - ta, tol, acc);
    }
  } else {
    const auto run_nonsplit = [&](double ta, double tb) {
      if (!(tb > ta)) return;
      const double b3l = ta - th_u;
      const double b3r = th_refl - tb;
      const double b2r = th_hi - tb;
      const double bh = th_hi - th0;
      const auto g = [&](double d, double gm) {
        const double th = ta + d;
        const double s1 = std::sin(0.5 * (th - th0));
        const double a1 = (e - zc2) + 2.0 * C * s1 * s1;
        double a2;
        if (e >= e_top) {
          a2 = (e - e_top) +
               2.0 * C * std::cos(0.5 * th) * std::cos(0.5 * th - th0);
        } else {
          const double g2 = gm + b2r;
          a2 = 2.0 * C * std::sin(bh - 0.5 * g2) * std::sin(0.5 * g2);
        }
        const double a3 = 2.0 * C * std::sin(0.5 * (d + b3l)) *
                          std::sin(0.5 * (gm + b3r));
        const double prod = std::max(a1, 0.0) * std::max(a2, 0.0) *
                            std::max(a3, 0.0) * (u_of(th) + e);
        if (prod <= 0.0) return 0.0;
        return std::sin(th) / std::sqrt(prod);
      };
      integrate_offsets(g, tb - ta, tol, acc);
    };
    // Just above the cusp the A1 factor dips to e - zc^2 at th0; when that
    // near-singular point falls inside the range, make it an interval end
    // so the endpoint substitution absorbs the spike.
    if (th0 > th_u && th0 < th_hi) {
      run_nonsplit(th_u, th0);
      run_nonsplit(th0, th_hi);
    } else {
      run_nonsplit(th_u, th_hi);
    }
  }

  const double scale = e / kPi;
  if (scale * acc.err > kQuadFailure) {
    std::ostringstream msg;
    msg << "plane density quadrature did not converge at e = " << e;
    throw IntegrationError(msg.str(), scale * acc.err);
  }
  return scale * acc.value;
}

/* ---------------- grids ---------------- */

void append_ladder(std::vector<double>& grid, double anchor, double h,
                   double scale, int direction) {
  const double d_min = kLadderMinFrac * scale;
  for (double d = h / kLadderRatio; d > 0.999 * d_min; d /= kLadderRatio) {
    const double node = anchor + direction * d;
    if (node > 0.0 && node < scale) grid.push_back(node);
  }
}

std::vector<double> finalize_grid(std::vector<double> grid, double scale) {
  std::sort(grid.begin(), grid.end());
  std::vector<double> out;
  out.reserve(grid.size());
  for (double g : grid) {
    if (out.empty() || g - out.back() > 1e-12 * scale) out.push_back(g);
  }
  return out;
}

void finish_curve(DensityCurve& curve) {
  const auto& g = curve.grid;
  const auto& v = curve.density;
  double mass = 0.0;
  for (size_t i = 0; i + 1 < g.size(); ++i) {
    mass += 0.5 * (v[i] + v[i + 1]) * (g[i + 1] - g[i]);
  }
  curve.trapezoid_mass = mass;
  curve.mass_warning = std::abs(mass - 1.0) > 5e-3;
}

DensityCurve plane_curve_impl(const CanonicalPlane& cp, int grid_n,
                              bool parallel) {
  if (grid_n < 16) throw InputError("grid_n must be at least 16");
  const PlaneMarkers mk = plane_markers(cp.x, cp.y, cp.z);
  if (mk.e_max < 1e-9) {
    throw DomainError(
        "plane density is a point mass at zero when e_max vanishes; "
        "handle the separable plane as a delta component");
  }
  const double e_max = mk.e_max;
  const double zc = std::sqrt(std::max(mk.e_cusp, 0.0) / e_max);
  const bool flat = zc < kFlatCutoff;
  const bool bell = zc > 1.0 - kBellCutoff;
  const double sin_mu = std::sin(mk.mu);
  const bool end_divergent = bell || sin_mu < 1e-4;

  std::vector<double> grid;
  grid.reserve(static_cast<size_t>(grid_n) + 160);
  const double h = e_max / grid_n;
  for (int k = 0; k <= grid_n; ++k) grid.push_back(e_max * k / grid_n);
  if (!flat && !bell) {
    append_ladder(grid, mk.e_cusp, h, e_max, -1);
    append_ladder(grid, mk.e_cusp, h, e_max, +1);
  }
  append_ladder(grid, e_max, h, e_max, -1);
  grid = finalize_grid(std::move(grid), e_max);

  // Keep a guard zone around the cusp: the ladder rungs stop at
  // kLadderMinFrac * e_max and nothing may land closer.
  if (!flat && !bell) {
    const double guard = 0.45 * kLadderMinFrac * e_max;
    std::vector<double> kept;
    kept.reserve(grid.size());
    for (double g : grid) {
      if (std::abs(g - mk.e_cusp) >= guard) kept.push_back(g);
    }
    grid = std::move(kept);
  }
  if (end_divergent && grid.back() > e_max - 0.5 * kLadderMinFrac * e_max) {
    grid.pop_back();  // no finite value at the support end
  }

  const auto n = static_cast<long long>(grid.size());
  std::vector<double> vals(grid.size(), 0.0);
  std::vector<std::string> failures(grid.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long long i = 0; i < n; ++i) {
    try {
      const double e = grid[static_cast<size_t>(i)];
      double val;
      if (!end_divergent && e >= e_max * (1.0 - 1e-12)) {
        val = 1.0 / (e_max * sin_mu);  // endpoint limit of the density
      } else {
        const double es = e <= 0.0 ? 1e-7 : e / e_max;
        val = scaled_plane_density(es, zc) / e_max;
      }
      vals[static_cast<size_t>(i)] = val;
    } catch (const Error& ex) {
      failures[static_cast<size_t>(i)] = ex.what();
    }
  }
  for (const auto& f : failures) {
    if (!f.empty()) throw IntegrationError(f, 0.0);
  }

  DensityCurve curve;
  curve.kind = CurveKind::plane;
  curve.grid = std::move(grid);
  curve.density = std::move(vals);
  curve.annotations.support_max = e_max;
  curve.annotations.divergent_at_support_end = end_divergent;
  if (!flat && !bell) curve.annotations.cusp = mk.e_cusp;
  finish_curve(curve);
  return curve;
}

/* ---------------- universal curve helpers ---------------- */

constexpr const char* kUniversalMagic = "entpdf-universal-v1";
constexpr const char* kUniversalFile = "universal_curve_v1.txt";
constexpr int kSmoothWindow = 9;

// Local quadratic least-squares fit through (t_j, v_j), evaluated at t = 0.
double local_quadratic_at(const std::vector<double>& t,
                          const std::vector<double>& v) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  for (size_t j = 0; j < t.size(); ++j) {
    const Eigen::Vector3d b(1.0, t[j], t[j] * t[j]);
    m += b * b.transpose();
    rhs += v[j] * b;
  }
  return m.ldlt().solve(rhs)(0);
}

DensityCurve curve_from_histogram(const Histogram& hist) {
  const int n = hist.bins();
  std::vector<double> centers(n), raw(n);
  for (int i = 0; i < n; ++i) {
    centers[i] = 0.5 * (hist.edges[i] + hist.edges[i + 1]);
    raw[i] = hist.density(i);
  }

  DensityCurve curve;
  curve.kind = CurveKind::universal;
  curve.grid.reserve(n + 2);
  curve.grid.push_back(0.0);
  curve.grid.insert(curve.grid.end(), centers.begin(), centers.end());
  curve.grid.push_back(1.0);

  // Savitzky-Golay style smoothing: a 9-point local quadratic, with
  // one-sided windows near the boundaries.  Fitting at the abscissa of the
  // node removes the bin-average bias where the density has a nonzero slope.
  curve.density.resize(curve.grid.size());
  const size_t last = curve.grid.size() - 1;
  for (size_t k = 1; k < last; ++k) {
    const double a = curve.grid[k];
    const int i0 = std::clamp(static_cast<int>(k) - 1 - kSmoothWindow / 2, 0,
                              n - kSmoothWindow);
    std::vector<double> t(kSmoothWindow), v(kSmoothWindow);
    for (int j = 0; j < kSmoothWindow; ++j) {
      t[j] = centers[i0 + j] - a;
      v[j] = raw[i0 + j];
    }
    curve.density[k] = std::max(local_quadratic_at(t, v), 0.0);
  }
  // Polynomial extrapolation beyond the data overshoots badly where the
  // density has a root-type edge.  Instead pick the boundary node so the
  // piecewise-linear curve reproduces the probability observed in the
  // terminal bin: integrating the interpolant over [0, h] (resp. [1-h, 1])
  // and matching the raw bin density gives the 4/-1/2/-5/2 stencil.  Exact
  // whenever the density crosses the edge linearly.
  curve.density[0] = std::max(
      4.0 * raw[0] - 0.5 * curve.density[2] - 2.5 * curve.density[1], 0.0);
  curve.density[last] = std::max(4.0 * raw[n - 1] -
                                     0.5 * curve.density[last - 2] -
                                     2.5 * curve.density[last - 1],
                                 0.0);

  // The histogram normalizes to 1 exactly; preserve that through smoothing.
  finish_curve(curve);
  if (curve.trapezoid_mass > 0.0) {
    for (double& d : curve.density) d /= curve.trapezoid_mass;
  }
  finish_curve(curve);
  curve.annotations.support_max = 1.0;
  return curve;
}

std::string resolve_cache_dir(const UniversalOptions& opts) {
  if (opts.cache_dir) return *opts.cache_dir;
  if (const char* env = std::getenv("ENTPDF_CACHE_DIR")) return env;
  if (const char* home = std::getenv("HOME")) {
    return std::string(home) + "/.cache/entpdf";
  }
  return ".entpdf_cache";
}

bool load_universal_cache(const std::string& path, DensityCurve& out) {
  std::ifstream in(path);
  if (!in) return false;
  std::string magic;
  if (!std::getline(in, magic) || magic != kUniversalMagic) return false;
  uint64_t seed = 0, samples = 0;
  int bins = 0, nodes = 0;
  std::string key;
  for (int i = 0; i < 4; ++i) {
    if (!(in >> key)) return false;
    if (key == "seed") {
      in >> seed;
    } else if (key == "samples") {
      in >> samples;
    } else if (key == "bins") {
      in >> bins;
    } else if (key == "nodes") {
      in >> nodes;
    } else {
      return false;
    }
  }
  if (!in || seed != kUniversalSeed || samples != kUniversalSamples ||
      bins != kUniversalBins || nodes < 16) {
    return false;
  }
  DensityCurve curve;
  curve.kind = CurveKind::universal;
  curve.grid.resize(nodes);
  curve.density.resize(nodes);
  for (int i = 0; i < nodes; ++i) {
    if (!(in >> curve.grid[i] >> curve.density[i])) return false;
    if (!std::isfinite(curve.grid[i]) || !std::isfinite(curve.density[i]) ||
        curve.density[i] < 0.0 || curve.grid[i] < 0.0 ||
        curve.grid[i] > 1.0) {
      return false;
    }
    if (i > 0 && curve.grid[i] <= curve.grid[i - 1]) return false;
  }
  curve.annotations.support_max = 1.0;
  finish_curve(curve);
  out = std::move(curve);
  return true;
}

void store_universal_cache(const std::string& dir, const DensityCurve& curve) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path target = fs::path(dir) / kUniversalFile;
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) return;  // cache persistence is best effort
    out.precision(17);
    out << kUniversalMagic << "\n";
    out << "seed " << kUniversalSeed << "\n";
    out << "samples " << kUniversalSamples << "\n";
    out << "bins " << kUniversalBins << "\n";
    out << "nodes " << curve.grid.size() << "\n";
    for (size_t i = 0; i < curve.grid.size(); ++i) {
      out << curve.grid[i] << " " << curve.density[i] << "\n";
    }
    if (!out.flush()) return;
  }
  fs::rename(tmp, target, ec);
}

}  // namespace

/* ---------------- markers ---------------- */

PlaneMarkers plane_markers(double x, double y, double z) {
  if (!(std::isfinite(x) && std::isfinite(y) && std::isfinite(z))) {
    throw DomainError("plane parameters must be finite");
  }
  if (x < -1e-9 || y < -1e-9 || z < -1e-9) {
    throw DomainError("plane parameters must be non-negative");
  }
  const double norm = x * x + y * y + z * z;
  if (std::abs(norm - 1.0) > 1e-6) {
    throw DomainError("plane parameters must be normalized");
  }
  x = std::max(x, 0.0);
  y = std::max(y, 0.0);
  z = std::max(z, 0.0);
  PlaneMarkers mk;
  mk.e_max = x * y + std::sqrt(z * z + x * x * y * y);
  mk.e_cusp = mk.e_max > 0.0 ? z * z / mk.e_max : 0.0;
  mk.mu = mk.e_max > 0.0
              ? std::acos(std::clamp(mk.e_cusp / mk.e_max, -1.0, 1.0))
              : 0.0;
  return mk;
}

PlaneParams invert_markers(double e_max, double e_cusp) {
  if (!(std::isfinite(e_max) && std::isfinite(e_cusp))) {
    throw DomainError("markers must be finite");
  }
  if (e_cusp < 0.0 || e_max > 1.0 + 1e-12 || e_cusp > e_max + 1e-12) {
    throw DomainError("markers must satisfy 0 <= e_cusp <= e_max <= 1");
  }
  e_max = std::min(e_max, 1.0);
  e_cusp = std::min(e_cusp, e_max);
  const double a = std::sqrt((1.0 + e_max) * (1.0 - e_cusp));
  const double b = std::sqrt((1.0 - e_max) * (1.0 + e_cusp));
  PlaneParams p;
  p.x = 0.5 * (a + b);
  p.y = 0.5 * (a - b);
  p.z = std::sqrt(e_max * e_cusp);
  return p;
}

/* ---------------- curves ---------------- */

double DensityCurve::value_at(double e) const {
  if (grid.empty() || e < grid.front() || e > annotations.support_max) {
    return 0.0;
  }
  if (e >= grid.back()) return density.back();
  const auto it = std::upper_bound(grid.begin(), grid.end(), e);
  const size_t hi = static_cast<size_t>(it - grid.begin());
  const size_t lo = hi - 1;
  const double span = grid[hi] - grid[lo];
  if (span <= 0.0) return density[lo];
  const double w = (e - grid[lo]) / span;
  return (1.0 - w) * density[lo] + w * density[hi];
}

double DensityCurve::cdf_at(double e) const {
  if (grid.size() < 2 || trapezoid_mass <= 0.0) return 0.0;
  if (e <= grid.front()) return 0.0;
  if (e >= grid.back()) return 1.0;
  double acc = 0.0;
  for (size_t i = 0; i + 1 < grid.size(); ++i) {
    const double a = grid[i];
    const double b = grid[i + 1];
    if (e >= b) {
      acc += 0.5 * (density[i] + density[i + 1]) * (b - a);
    } else {
      const double w = (e - a) / (b - a);
      const double v = (1.0 - w) * density[i] + w * density[i + 1];
      acc += 0.5 * (density[i] + v) * (e - a);
      break;
    }
  }
  return acc / trapezoid_mass;
}

DensityCurve plane_pdf(const CanonicalPlane& cp, int grid_n) {
  return plane_curve_impl(cp, grid_n, true);
}

DensityCurve plane_pdf_serial(const CanonicalPlane& cp, int grid_n) {
  return plane_curve_impl(cp, grid_n, false);
}

double triple_density(double e, double e_perp) {
  if (!(std::isfinite(e) && std::isfinite(e_perp)) || e_perp < -1e-12 ||
      e_perp > 1.0 + 1e-12) {
    throw DomainError("e_perp must lie in [0, 1]");
  }
  if (e <= 0.0 || e > 1.0) return 0.0;
  if (e_perp >= 1.0 - 1e-12) return 2.0 * e;
  e_perp = std::max(e_perp, 0.0);
  const double arg = std::max(e, e_perp);
  return 2.0 * e * std::acosh(1.0 / arg) /
         std::sqrt((1.0 - e_perp) * (1.0 + e_perp));
}

DensityCurve triple_pdf(double e_perp, int grid_n) {
  if (grid_n < 16) throw InputError("grid_n must be at least 16");
  if (!(std::isfinite(e_perp)) || e_perp < -1e-12 || e_perp > 1.0 + 1e-12) {
    throw DomainError("e_perp must lie in [0, 1]");
  }
  e_perp = std::clamp(e_perp, 0.0, 1.0);

  std::vector<double> grid;
  grid.reserve(static_cast<size_t>(grid_n) + 80);
  const double h = 1.0 / grid_n;
  for (int k = 0; k <= grid_n; ++k) grid.push_back(static_cast<double>(k) / grid_n);
  if (e_perp > 1e-9 && e_perp < 1.0 - 1e-9) grid.push_back(e_perp);
  append_ladder(grid, 1.0, h, 1.0, -1);  // sqrt(1 - e) slope at the end
  grid = finalize_grid(std::move(grid), 1.0);

  DensityCurve curve;
  curve.kind = CurveKind::triple;
  curve.density.reserve(grid.size());
  for (double e : grid) curve.density.push_back(triple_density(e, e_perp));
  curve.grid = std::move(grid);
  curve.annotations.support_max = 1.0;
  if (e_perp > 1e-9 && e_perp < 1.0 - 1e-9) curve.annotations.kink = e_perp;
  finish_curve(curve);
  return curve;
}

DensityCurve universal_pdf(int grid_n) {
  return universal_pdf(grid_n, UniversalOptions{});
}

DensityCurve universal_pdf(int grid_n, const UniversalOptions& opts) {
  if (grid_n < 16) throw InputError("grid_n must be at least 16");
  const std::string dir = resolve_cache_dir(opts);
  const std::string path =
      (std::filesystem::path(dir) / kUniversalFile).string();

  static std::mutex mu;
  static std::map<std::string, DensityCurve> memo;
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = memo.find(path); it != memo.end()) return it->second;

  DensityCurve curve;
  if (load_universal_cache(path, curve)) {
    memo[path] = curve;
    return curve;
  }
  if (!opts.allow_generate) {
    throw UnavailableError("universal curve cache unavailable at " + path +
                           " and regeneration is disabled");
  }
  const Histogram hist = mc_histogram(
      [](RngStream& rng) { return sample_full_entanglement(rng); },
      kUniversalSamples, kUniversalBins, kUniversalSeed);
  curve = curve_from_histogram(hist);
  store_universal_cache(dir, curve);
  memo[path] = curve;
  return curve;
}

/* ---------------- mixtures ---------------- */

double MixedDensity::cdf_at(double e) const {
  double acc = 0.0;
  if (delta && delta->location <= e) acc += delta->weight;
  if (plane.separable_delta && plane.separable_delta->location <= e) {
    acc += plane.separable_delta->weight;
  }
  if (plane.curve) acc += plane.weight * plane.curve->cdf_at(e);
  if (triple.curve) acc += triple.weight * triple.curve->cdf_at(e);
  if (universal.curve) acc += universal.weight * universal.curve->cdf_at(e);
  return acc;
}

MixedDensity mixed_pdf(const DensityMatrix& rho, int grid_n) {
  if (grid_n < 16) throw InputError("grid_n must be at least 16");
  const SpectralDecomposition sd = eigendecompose(rho);
  const NestedResolution nr = nested_resolution(sd);

  MixedDensity md;
  constexpr double kWeightCut = 1e-12;
  for (int i = 0; i < 4; ++i) {
    md.weights[i] = nr.weights[i] >= kWeightCut ? nr.weights[i] : 0.0;
  }

  double mass = 0.0;
  if (md.weights[0] > 0.0) {
    md.delta = DeltaComponent{pure_concurrence(sd.eigenvectors[0]),
                              md.weights[0]};
    mass += md.weights[0];
  }
  if (md.weights[1] > 0.0) {
    const CanonicalPlane cp =
        canonical_plane(sd.eigenvectors[0], sd.eigenvectors[1]);
    const PlaneMarkers mk = plane_markers(cp.x, cp.y, cp.z);
    md.plane.weight = md.weights[1];
    md.plane.markers = mk;
    if (mk.e_max < 1e-9) {
      md.plane.separable_delta = DeltaComponent{0.0, md.weights[1]};
      mass += md.weights[1];
    } else {
      md.plane.curve = plane_pdf(cp, grid_n);
      mass += md.weights[1] * md.plane.curve->trapezoid_mass;
    }
  }
  if (md.weights[2] > 0.0) {
    const CanonicalTriple tc = triple_canonical(nr.projections[2]);
    md.triple.weight = md.weights[2];
    md.triple.e_perp = tc.e_perp;
    md.triple.curve = triple_pdf(tc.e_perp, grid_n);
    mass += md.weights[2] * md.triple.curve->trapezoid_mass;
  }
  if (md.weights[3] > 0.0) {
    md.universal.weight = md.weights[3];
    md.universal.curve = universal_pdf(grid_n);
    mass += md.weights[3] * md.universal.curve->trapezoid_mass;
  }
  md.total_mass = mass;
  md.mass_warning = std::abs(mass - 1.0) > 5e-3;
  return md;
}

}  // namespace entpdf
