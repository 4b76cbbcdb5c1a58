#include "entpdf/haarmc.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "entpdf/errors.hpp"
#include "entpdf/qstate.hpp"

namespace entpdf {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ull;

uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Concurrence of a normalized 4-vector in the product basis.
double conc4(const Vector4c& v) {
  return 2.0 * std::abs(v(0) * v(3) - v(1) * v(2));
}

}  // namespace

/* ---------------- RngStream ---------------- */

RngStream::RngStream(uint64_t seed, uint64_t stream_id)
    : state_(mix64(seed + kGolden * (stream_id + 1))) {}

uint64_t RngStream::next_u64() {
  state_ += kGolden;
  return mix64(state_);
}

double RngStream::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // log argument in (0, 1] so the draw is always finite
  const double u = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  const double a = 2.0 * kPi * next_unit();
  const double r = std::sqrt(-2.0 * std::log(u));
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

/* ---------------- samplers ---------------- */

double sample_plane_entanglement(const CanonicalPlane& cp, RngStream& rng) {
  // Fubini-Study measure on the plane: cos(theta) uniform, phi uniform.
  const double ct = rng.uniform(-1.0, 1.0);
  const double phi = rng.uniform(0.0, 2.0 * kPi);
  const double ch = std::sqrt(0.5 * (1.0 + ct));
  const double sh = std::sqrt(0.5 * (1.0 - ct));
  const Complex a = ch * Complex(std::cos(0.5 * phi), std::sin(0.5 * phi));
  const Complex b = sh * Complex(std::cos(0.5 * phi), -std::sin(0.5 * phi));
  const Vector4c v = a * cp.chi1.amps() + b * cp.chi2.amps();
  return conc4(v);
}

double sample_triple_entanglement(const std::array<PureState, 3>& basis,
                                  RngStream& rng) {
  // Fubini-Study measure on a three-dimensional subspace.
  const double u = rng.next_unit();
  const double st = std::pow(u, 0.25);  // sin(theta), theta = asin(u^(1/4))
  const double ct = std::sqrt(std::max(0.0, 1.0 - st * st));
  const double c2b = rng.uniform(-1.0, 1.0);
  const double cb = std::sqrt(0.5 * (1.0 + c2b));
  const double sb = std::sqrt(0.5 * (1.0 - c2b));
  // The two phases must cover the torus independently; coupling them as
  // alpha +- gamma over half-period ranges reaches only half of it and
  // skews every subspace whose bilinear form mixes three basis states.
  const double p2 = rng.uniform(0.0, 2.0 * kPi);
  const double p3 = rng.uniform(0.0, 2.0 * kPi);
  const Complex e2(std::cos(p2), std::sin(p2));
  const Complex e3(std::cos(p3), std::sin(p3));
  const Vector4c v = ct * basis[0].amps() + e2 * (st * cb) * basis[1].amps() -
                     e3 * (st * sb) * basis[2].amps();
  return conc4(v);
}

double sample_full_entanglement(RngStream& rng) {
  Vector4c v;
  for (int i = 0; i < kDim; ++i) {
    v(i) = Complex(rng.normal(), rng.normal());
  }
  v /= v.norm();
  return conc4(v);
}

PureState random_pure_state(RngStream& rng) {
  Vector4c v;
  for (int i = 0; i < kDim; ++i) {
    v(i) = Complex(rng.normal(), rng.normal());
  }
  return PureState::normalized(v);
}

Matrix2c random_su2(RngStream& rng) {
  // Unit quaternion -> SU(2).
  double q[4];
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (double& c : q) {
      c = rng.normal();
      n2 += c * c;
    }
  } while (n2 < 1e-12);
  const double n = std::sqrt(n2);
  for (double& c : q) c /= n;
  Matrix2c u;
  u << Complex(q[0], q[1]), Complex(q[2], q[3]),
      Complex(-q[2], q[3]), Complex(q[0], -q[1]);
  return u;
}

LocalUnitaryPair random_local_unitary(RngStream& rng) {
  LocalUnitaryPair lo;
  lo.u1 = random_su2(rng);
  lo.u2 = random_su2(rng);
  return lo;
}

std::pair<PureState, PureState> random_plane(RngStream& rng) {
  const PureState a = random_pure_state(rng);
  for (;;) {
    const PureState b = random_pure_state(rng);
    const Complex ip = a.amps().dot(b.amps());
    const Vector4c w = b.amps() - ip * a.amps();
    if (w.norm() > 1e-6) return {a, PureState::normalized(w)};
  }
}

DensityMatrix random_density_matrix(RngStream& rng, double min_gap) {
  if (min_gap < 0.0 || min_gap > 0.15) {
    throw InputError("min_gap must lie in [0, 0.15]");
  }
  // Flat Dirichlet spectrum via sorted uniform cuts, rejected until all
  // adjacent gaps clear min_gap.
  std::array<double, 4> lam{};
  for (int attempt = 0;; ++attempt) {
    if (attempt > 200000) {
      throw NumericalError("could not draw a spectrum with the requested gaps",
                           min_gap);
    }
    double cut[5] = {0.0, rng.next_unit(), rng.next_unit(), rng.next_unit(),
                     1.0};
    std::sort(cut, cut + 5);
    for (int i = 0; i < 4; ++i) lam[i] = cut[i + 1] - cut[i];
    std::sort(lam.begin(), lam.end(), std::greater<>());
    bool ok = lam[3] > 1e-6;
    for (int i = 0; i < 3 && ok; ++i) ok = lam[i] - lam[i + 1] >= min_gap;
    if (ok) break;
  }

  // Haar basis from the QR decomposition of a Ginibre matrix.
  Matrix4c g;
  for (int r = 0; r < kDim; ++r) {
    for (int c = 0; c < kDim; ++c) {
      g(r, c) = Complex(rng.normal(), rng.normal());
    }
  }
  Eigen::HouseholderQR<Matrix4c> qr(g);
  Matrix4c q = qr.householderQ();
  const Matrix4c r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < kDim; ++j) {
    const Complex d = r(j, j);
    if (std::abs(d) > 0.0) q.col(j) *= d / std::abs(d);
  }

  Matrix4c rho = Matrix4c::Zero();
  for (int j = 0; j < kDim; ++j) {
    rho += lam[j] * (q.col(j) * q.col(j).adjoint());
  }
  rho = Complex(0.5, 0.0) * (rho + rho.adjoint().eval());
  return DensityMatrix(rho);
}

/* ---------------- histograms ---------------- */

double Histogram::density(int i) const {
  const double w = edges[i + 1] - edges[i];
  if (total == 0 || w <= 0.0) return 0.0;
  return static_cast<double>(counts[i]) / (static_cast<double>(total) * w);
}

double Histogram::cdf_at_edge(int i) const {
  if (total == 0) return 0.0;
  uint64_t acc = 0;
  for (int j = 0; j < i; ++j) acc += counts[j];
  return static_cast<double>(acc) / static_cast<double>(total);
}

namespace {

constexpr uint64_t kChunk = 65536;

Histogram mc_histogram_impl(const Sampler& sampler, uint64_t n, int bins,
                            uint64_t seed, bool parallel) {
  if (bins < 8) throw InputError("histogram needs at least 8 bins");
  if (n < static_cast<uint64_t>(bins)) {
    throw InputError("histogram needs at least as many samples as bins");
  }
  Histogram h;
  h.edges.resize(bins + 1);
  for (int i = 0; i <= bins; ++i) {
    h.edges[i] = static_cast<double>(i) / bins;
  }
  h.counts.assign(bins, 0);
  h.total = n;

  // Chunk c always uses stream c over its fixed index range, so the merged
  // counts are identical for any thread count (integer adds commute).
  const auto nchunks = static_cast<long long>((n + kChunk - 1) / kChunk);
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long long c = 0; c < nchunks; ++c) {
    RngStream rng(seed, static_cast<uint64_t>(c));
    std::vector<uint64_t> local(bins, 0);
    const uint64_t lo = static_cast<uint64_t>(c) * kChunk;
    const uint64_t hi = std::min(n, lo + kChunk);
    for (uint64_t s = lo; s < hi; ++s) {
      const double v = sampler(rng);
      int b = static_cast<int>(v * bins);
      b = std::clamp(b, 0, bins - 1);
      ++local[b];
    }
#pragma omp critical(entpdf_hist_merge)
    {
      for (int i = 0; i < bins; ++i) h.counts[i] += local[i];
    }
  }
  return h;
}

}  // namespace

Histogram mc_histogram(const Sampler& sampler, uint64_t n, int bins,
                       uint64_t seed) {
  return mc_histogram_impl(sampler, n, bins, seed, true);
}

Histogram mc_histogram_serial(const Sampler& sampler, uint64_t n, int bins,
                              uint64_t seed) {
  return mc_histogram_impl(sampler, n, bins, seed, false);
}

/* ---------------- comparisons ---------------- */

ComparisonReport compare(const DensityCurve& curve, const Histogram& hist) {
  if (hist.bins() < 1 || hist.total == 0) {
    throw InputError("histogram is empty");
  }
  if (std::abs(hist.edges.front()) > 1e-9 ||
      std::abs(hist.edges.back() - 1.0) > 1e-9 ||
      curve.annotations.support_max > 1.0 + 1e-9) {
    throw DomainError("curve and histogram must share the support [0, 1]");
  }
  const int n = hist.bins();
  ComparisonReport rep;
  rep.samples = hist.total;

  uint64_t running = 0;
  for (int i = 0; i <= n; ++i) {
    const double emp =
        static_cast<double>(running) / static_cast<double>(hist.total);
    rep.ks_distance =
        std::max(rep.ks_distance, std::abs(emp - curve.cdf_at(hist.edges[i])));
    if (i < n) running += hist.counts[i];
  }

  // Bins touching a cusp, kink or the support endpoint are excluded from the
  // density sup norm; the curve is biased there by construction.
  std::vector<bool> flagged(n, false);
  const auto flag_point = [&](double p) {
    for (int i = 0; i < n; ++i) {
      if (p >= hist.edges[i] - 1e-12 && p <= hist.edges[i + 1] + 1e-12) {
        flagged[i] = true;
      }
    }
  };
  if (curve.annotations.cusp) flag_point(*curve.annotations.cusp);
  if (curve.annotations.kink) flag_point(*curve.annotations.kink);
  flag_point(curve.annotations.support_max);

  rep.z_scores.resize(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double w = hist.edges[i + 1] - hist.edges[i];
    const double p =
        curve.cdf_at(hist.edges[i + 1]) - curve.cdf_at(hist.edges[i]);
    const double model = p / w;
    const double nn = static_cast<double>(hist.total);
    if (p > 1e-12 && p < 1.0 - 1e-12) {
      rep.z_scores[i] = (static_cast<double>(hist.counts[i]) - nn * p) /
                        std::sqrt(nn * p * (1.0 - p));
    }
    if (flagged[i]) {
      rep.flagged_bins.push_back(i);
    } else {
      rep.sup_excluded =
          std::max(rep.sup_excluded, std::abs(hist.density(i) - model));
    }
  }
  rep.pass =
      rep.ks_distance < kKsThreshold && rep.sup_excluded < kSupThreshold;
  return rep;
}

ComparisonReport compare_mixture(const MixedDensity& md,
                                 const Histogram& hist) {
  if (hist.bins() < 1 || hist.total == 0) {
    throw InputError("histogram is empty");
  }
  ComparisonReport rep;
  rep.samples = hist.total;
  uint64_t running = 0;
  const int n = hist.bins();
  for (int i = 0; i <= n; ++i) {
    const double emp =
        static_cast<double>(running) / static_cast<double>(hist.total);
    // Evaluate just below the edge so point masses sitting exactly on an
    // edge land in the same bin as their samples.  The final edge is
    // inclusive: clamping puts boundary samples in the last bin.
    const double model = (i == n) ? md.cdf_at(hist.edges[i] + 1e-9)
                                  : md.cdf_at(hist.edges[i] - 1e-12);
    rep.ks_distance = std::max(rep.ks_distance, std::abs(emp - model));
    if (i < n) running += hist.counts[i];
  }
  rep.pass = rep.ks_distance < kMixtureKsThreshold;
  return rep;
}

/* ---------------- mixture sampler ---------------- */

MixtureSampler::MixtureSampler(const DensityMatrix& rho) {
  const SpectralDecomposition sd = eigendecompose(rho);
  const NestedResolution nr = nested_resolution(sd);
  double acc = 0.0;
  for (int i = 0; i < 4; ++i) {
    acc += nr.weights[i];
    cum_[i] = acc;
  }
  e1_ = pure_concurrence(sd.eigenvectors[0]);
  if (nr.weights[1] >= 1e-12) {
    plane_ = canonical_plane(sd.eigenvectors[0], sd.eigenvectors[1]);
    plane_e_max_ = plane_markers(plane_.x, plane_.y, plane_.z).e_max;
    has_plane_ = true;
  }
  triple_basis_ = {sd.eigenvectors[0], sd.eigenvectors[1],
                   sd.eigenvectors[2]};
}

double MixtureSampler::operator()(RngStream& rng) const {
  const double u = rng.next_unit() * cum_[3];
  if (u < cum_[0]) return e1_;
  if (u < cum_[1]) {
    if (!has_plane_) return e1_;
    return sample_plane_entanglement(plane_, rng);
  }
  if (u < cum_[2]) return sample_triple_entanglement(triple_basis_, rng);
  return sample_full_entanglement(rng);
}

}  // namespace entpdf
