#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>

#include "entpdf/entdensity.hpp"
#include "entpdf/errors.hpp"
#include "entpdf/haarmc.hpp"
#include "entpdf/localops.hpp"
#include "helpers.hpp"

using namespace entpdf;

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

std::array<PureState, 3> triplet_basis() {
  return {PureState(),  // |uu>
          PureState(Vector4c(0.0, kInvSqrt2, kInvSqrt2, 0.0)),
          PureState(Vector4c(0.0, 0.0, 0.0, 1.0))};
}

std::array<PureState, 3> uu_dual_basis() {
  return {PureState(Vector4c(0, 1, 0, 0)), PureState(Vector4c(0, 0, 1, 0)),
          PureState(Vector4c(0, 0, 0, 1))};
}

}  // namespace

TEST_CASE("rng streams are deterministic and independent") {
  RngStream a(123, 0), b(123, 0), c(123, 1);
  bool all_equal = true, any_equal_to_other_stream = false;
  for (int i = 0; i < 1000; ++i) {
    const uint64_t va = a.next_u64(), vb = b.next_u64(), vc = c.next_u64();
    all_equal = all_equal && (va == vb);
    any_equal_to_other_stream = any_equal_to_other_stream || (va == vc);
  }
  CHECK(all_equal);
  CHECK(!any_equal_to_other_stream);

  RngStream u(7, 7);
  double lo = 1.0, hi = 0.0, acc = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double v = u.next_unit();
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    acc += v;
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  CHECK(acc / 100000 == doctest::Approx(0.5).epsilon(0.01));

  // Box-Muller normals: first two moments.
  RngStream g(99, 0);
  double m1 = 0.0, m2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double v = g.normal();
    m1 += v;
    m2 += v * v;
  }
  CHECK(std::abs(m1 / n) < 0.01);
  CHECK(m2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("histogram construction and determinism") {
  const Sampler constant = [](RngStream&) { return 0.3; };
  const Histogram h = mc_histogram(constant, 100000, 10, 5);
  CHECK(h.bins() == 10);
  CHECK(h.total == 100000);
  CHECK(h.edges.front() == 0.0);
  CHECK(h.edges.back() == 1.0);
  for (int i = 0; i < 10; ++i) {
    CHECK(h.counts[i] == (i == 3 ? 100000u : 0u));
  }
  CHECK(h.density(3) == doctest::Approx(10.0));
  CHECK(h.cdf_at_edge(4) == doctest::Approx(1.0));

  const Sampler noisy = [](RngStream& rng) { return rng.next_unit(); };
  const Histogram h1 = mc_histogram(noisy, 300000, 64, 17);
  const Histogram h2 = mc_histogram(noisy, 300000, 64, 17);
  CHECK(h1.counts == h2.counts);
  const Histogram h3 = mc_histogram(noisy, 300000, 64, 18);
  CHECK(h1.counts != h3.counts);

  CHECK_THROWS_AS(mc_histogram(constant, 100, 4, 1), InputError);
  CHECK_THROWS_AS(mc_histogram(constant, 10, 16, 1), InputError);
}

TEST_CASE("plane sampler: analytic mean on the maximal plane") {
  const CanonicalPlane cp =
      canonical_plane(PureState(), PureState(Vector4c(0, 0, 0, 1)));
  RngStream rng(2024, 0);
  const int n = 1000000;
  double acc = 0.0, mx = 0.0;
  for (int i = 0; i < n; ++i) {
    const double e = sample_plane_entanglement(cp, rng);
    acc += e;
    mx = std::max(mx, e);
  }
  // E entanglement = E|sin(theta)| = pi/4 under uniform cos(theta);
  // sigma = 0.223, so 3 standard errors is 6.7e-4.
  CHECK(std::abs(acc / n - M_PI / 4) < 6.7e-4);
  CHECK(mx <= 1.0 + 1e-12);
}

TEST_CASE("plane sampler: flat law when the cusp sits at zero") {
  const PlaneParams pp = invert_markers(0.75, 0.0);
  const CanonicalPlane cp = canonical_plane(
      PureState(), PureState::normalized(Vector4c(0, pp.x, pp.y, pp.z)));
  const Sampler s = [&cp](RngStream& rng) {
    return sample_plane_entanglement(cp, rng);
  };
  const Histogram h = mc_histogram(s, 1000000, 512, 31);
  for (int i = 0; i <= 512; ++i) {
    const double e = h.edges[i];
    const double want = std::min(e / 0.75, 1.0);
    CHECK(std::abs(h.cdf_at_edge(i) - want) < 2e-3);
  }
}

TEST_CASE("triple sampler matches the closed forms") {
  const Sampler dual_singlet = [](RngStream& rng) {
    static const std::array<PureState, 3> basis = triplet_basis();
    return sample_triple_entanglement(basis, rng);
  };
  const Histogram h1 = mc_histogram(dual_singlet, 1000000, 32, 71);
  const ComparisonReport r1 = compare(triple_pdf(1.0), h1);
  CHECK(r1.ks_distance < kKsThreshold);
  CHECK(r1.sup_excluded < kSupThreshold);
  CHECK(r1.pass);

  const Sampler dual_uu = [](RngStream& rng) {
    static const std::array<PureState, 3> basis = uu_dual_basis();
    return sample_triple_entanglement(basis, rng);
  };
  const Histogram h0 = mc_histogram(dual_uu, 1000000, 32, 72);
  const ComparisonReport r0 = compare(triple_pdf(0.0), h0);
  CHECK(r0.pass);

  // Negative control: the same samples against the wrong curve.
  const ComparisonReport bad = compare(triple_pdf(1.0), h0);
  CHECK(bad.ks_distance > 0.05);
  CHECK(!bad.pass);
}

TEST_CASE("triple histogram shows the derivative kink") {
  const SpectralDecomposition sd = eigendecompose(testutil::ref_state());
  const std::array<PureState, 3> basis = {
      sd.eigenvectors[0], sd.eigenvectors[1], sd.eigenvectors[2]};
  const NestedResolution nr = nested_resolution(sd);
  const CanonicalTriple ct = triple_canonical(nr.projections[2]);
  CHECK(ct.e_perp == doctest::Approx(0.602004).epsilon(1e-4));

  const Sampler s = [&basis](RngStream& rng) {
    return sample_triple_entanglement(basis, rng);
  };
  const int bins = 32;
  const uint64_t n = 1000000;
  const Histogram h = mc_histogram(s, n, bins, 73);

  // One-sided finite-difference slopes across the kink bin; the closed form
  // drops from 2 acosh(1/p)/sqrt(1-p^2) to a negative slope at p.
  const int k = static_cast<int>(ct.e_perp * bins);
  const double hw = 1.0 / bins;
  const auto f = [&](int i) { return h.density(i); };
  const auto sigma2 = [&](int i) {
    return f(i) / (static_cast<double>(n) * hw);  // Poisson density variance
  };
  const double below = (f(k - 1) - f(k - 3)) / (2 * hw);
  const double above = (f(k + 3) - f(k + 1)) / (2 * hw);
  const double sig = std::sqrt(sigma2(k - 1) + sigma2(k - 3) + sigma2(k + 1) +
                               sigma2(k + 3)) /
                     (2 * hw);
  CHECK(below - above > 5.0 * sig);

  // And the curve itself passes the distribution test.
  const ComparisonReport rep = compare(triple_pdf(ct.e_perp), h);
  CHECK(rep.pass);
}

TEST_CASE("full-space sampler endpoints and reproducibility") {
  const Sampler s = [](RngStream& rng) {
    return sample_full_entanglement(rng);
  };
  // Terminal-bin densities sit below 0.1 once the bins are fine enough to
  // resolve the root-type edges (the bin average of K sqrt(1-e) over the
  // last bin is (2K/3) sqrt(h)).
  const Histogram h = mc_histogram(s, 2000000, 1024, 2001);
  CHECK(h.density(0) < 0.1);
  CHECK(h.density(1023) < 0.1);

  double m1 = 0.0, m2 = 0.0;
  RngStream r1(55, 0), r2(56, 0);
  const int n = 500000;
  for (int i = 0; i < n; ++i) m1 += sample_full_entanglement(r1);
  for (int i = 0; i < n; ++i) m2 += sample_full_entanglement(r2);
  // Same distribution from independent seeds: means agree within 3 combined
  // standard errors (sigma < 0.25).
  CHECK(std::abs(m1 - m2) / n < 3.0 * 0.25 * std::sqrt(2.0 / n));
}

TEST_CASE("comparison validation") {
  Histogram partial;
  partial.edges = {0.0, 0.25, 0.5};
  partial.counts = {10, 10};
  partial.total = 20;
  CHECK_THROWS_AS(compare(triple_pdf(0.5), partial), DomainError);

  Histogram empty;
  CHECK_THROWS_AS(compare(triple_pdf(0.5), empty), InputError);
}

TEST_CASE("mixture sampler against the mixture density") {
  Matrix4c m = Matrix4c::Zero();
  m(0, 0) = 0.63;
  m(1, 1) = 0.27;
  m(2, 2) = 0.07;
  m(3, 3) = 0.03;
  const DensityMatrix rho(m);
  const MixedDensity md = mixed_pdf(rho);
  const MixtureSampler ms(rho);
  const Sampler s = [&ms](RngStream& rng) { return ms(rng); };
  const Histogram h = mc_histogram(s, 1000000, 256, 2718);
  const ComparisonReport rep = compare_mixture(md, h);
  CHECK(rep.ks_distance < kMixtureKsThreshold);
  CHECK(rep.pass);
}

TEST_CASE("random state generators") {
  RngStream rng(31415, 2);
  for (int i = 0; i < 25; ++i) {
    const PureState psi = random_pure_state(rng);
    CHECK(psi.amps().norm() == doctest::Approx(1.0).epsilon(1e-12));

    const Matrix2c u = random_su2(rng);
    CHECK((u * u.adjoint() - Matrix2c::Identity()).norm() < 1e-12);
    CHECK(std::abs(u.determinant() - Complex(1.0, 0.0)) < 1e-12);

    const LocalUnitaryPair lu = random_local_unitary(rng);
    CHECK(lu.su_residual() < 1e-12);

    const auto [c1, c2] = random_plane(rng);
    CHECK(std::abs((c1.amps().adjoint() * c2.amps())(0)) < 1e-12);
  }

  for (int i = 0; i < 25; ++i) {
    const DensityMatrix rho = random_density_matrix(rng, 0.05);
    const SpectralDecomposition sd = eigendecompose(rho);
    for (int j = 0; j < 3; ++j) {
      CHECK(sd.eigenvalues[j] - sd.eigenvalues[j + 1] >= 0.05 - 1e-9);
    }
  }
  CHECK_THROWS_AS(random_density_matrix(rng, 0.2), InputError);
  CHECK_THROWS_AS(random_density_matrix(rng, -0.1), InputError);
}
