#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "entpdf/entdensity.hpp"
#include "entpdf/haarmc.hpp"
#include "entpdf/localops.hpp"
#include "entpdf/qstate.hpp"

using namespace entpdf;

namespace {

CanonicalPlane plane_from_markers(double e_max, double e_cusp) {
  const PlaneParams pp = invert_markers(e_max, e_cusp);
  CanonicalPlane cp;
  cp.x = pp.x;
  cp.y = pp.y;
  cp.z = pp.z;
  cp.chi1 = PureState(Vector4c(1.0, 0.0, 0.0, 0.0));
  cp.chi2 = PureState::normalized(Vector4c(0.0, pp.x, pp.y, pp.z));
  return cp;
}

std::filesystem::path fresh_dir(const std::string& tag) {
  const auto p = std::filesystem::temp_directory_path() /
                 ("entpdf_par_" + tag + "_" + std::to_string(getpid()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

std::string file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void check_identical(const DensityCurve& a, const DensityCurve& b) {
  REQUIRE(a.grid.size() == b.grid.size());
  for (size_t i = 0; i < a.grid.size(); ++i) {
    CHECK(a.grid[i] == b.grid[i]);
    CHECK(a.density[i] == b.density[i]);
  }
  CHECK(a.trapezoid_mass == b.trapezoid_mass);
  CHECK(a.annotations.cusp.has_value() == b.annotations.cusp.has_value());
  if (a.annotations.cusp) CHECK(*a.annotations.cusp == *b.annotations.cusp);
  CHECK(a.annotations.support_max == b.annotations.support_max);
}

}  // namespace

TEST_CASE("plane quadrature: parallel kernel equals the serial reference") {
  const std::vector<std::pair<double, double>> cases{
      {0.9, 0.3}, {0.7, 0.69}, {0.999, 0.1}, {0.5, 0.499999}, {0.85, 0.0}};
  for (const auto& [e_max, e_cusp] : cases) {
    const CanonicalPlane cp = plane_from_markers(e_max, e_cusp);
    for (const int grid_n : {257, 512}) {
      check_identical(plane_pdf(cp, grid_n), plane_pdf_serial(cp, grid_n));
    }
  }
}

TEST_CASE("histogram sampler: chunk accumulation is thread-count independent") {
  const CanonicalPlane cp = plane_from_markers(0.8, 0.45);
  const Sampler sampler = [&cp](RngStream& rng) {
    return sample_plane_entanglement(cp, rng);
  };
  // 200000 spans three full chunks plus a partial one.
  const Histogram base = mc_histogram_serial(sampler, 200000, 64, 777);
  const Histogram par = mc_histogram(sampler, 200000, 64, 777);
  REQUIRE(base.counts.size() == par.counts.size());
  for (size_t i = 0; i < base.counts.size(); ++i) {
    CHECK(base.counts[i] == par.counts[i]);
  }
  CHECK(base.total == par.total);

#ifdef _OPENMP
  for (const int threads : {1, 2, 4}) {
    omp_set_num_threads(threads);
    const Histogram h = mc_histogram(sampler, 200000, 64, 777);
    for (size_t i = 0; i < base.counts.size(); ++i) {
      CHECK(h.counts[i] == base.counts[i]);
    }
  }
#endif

  const Histogram full_a = mc_histogram(
      [](RngStream& rng) { return sample_full_entanglement(rng); }, 150000, 32,
      4242);
  const Histogram full_b = mc_histogram_serial(
      [](RngStream& rng) { return sample_full_entanglement(rng); }, 150000, 32,
      4242);
  for (size_t i = 0; i < full_a.counts.size(); ++i) {
    CHECK(full_a.counts[i] == full_b.counts[i]);
  }
}

TEST_CASE("universal curve regeneration is reproducible") {
  const auto dir_a = fresh_dir("ua");
  const auto dir_b = fresh_dir("ub");

  UniversalOptions opt_a;
  opt_a.cache_dir = dir_a.string();
  const DensityCurve a = universal_pdf(256, opt_a);

#ifdef _OPENMP
  omp_set_num_threads(3);
#endif
  UniversalOptions opt_b;
  opt_b.cache_dir = dir_b.string();
  const DensityCurve b = universal_pdf(256, opt_b);

  check_identical(a, b);
  CHECK(file_bytes(dir_a / "universal_curve_v1.txt") ==
        file_bytes(dir_b / "universal_curve_v1.txt"));

  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
}
