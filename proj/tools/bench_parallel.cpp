// Compares the OpenMP kernels against their serial reference
// implementations: wall time plus a bit-identical output check.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "entpdf/entdensity.hpp"
#include "entpdf/haarmc.hpp"
#include "entpdf/localops.hpp"

namespace {

using namespace entpdf;
using Clock = std::chrono::steady_clock;

template <typename F>
double time_ms(F&& f) {
  const auto t0 = Clock::now();
  f();
  const auto t1 = Clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

bool identical(const DensityCurve& a, const DensityCurve& b) {
  if (a.grid != b.grid) return false;
  return a.density == b.density;
}

bool identical(const Histogram& a, const Histogram& b) {
  return a.edges == b.edges && a.counts == b.counts;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"entpdf parallel-kernel benchmark"};
  uint64_t samples = 4000000;
  int grid_n = 512;
  int bins = 256;
  app.add_option("--samples", samples, "Monte Carlo samples")
      ->capture_default_str();
  app.add_option("--grid", grid_n, "plane density grid")
      ->capture_default_str();
  app.add_option("--bins", bins, "histogram bins")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads = %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; both columns run serially\n");
#endif

  // A representative entangled plane (cusp well inside the support).
  RngStream rng(20240817, 0);
  const auto [chi1, chi2] = random_plane(rng);
  const CanonicalPlane cp = canonical_plane(chi1, chi2);
  std::printf("plane: x=%.4f y=%.4f z=%.4f\n", cp.x, cp.y, cp.z);

  DensityCurve serial_curve, parallel_curve;
  const double t_plane_serial =
      time_ms([&] { serial_curve = plane_pdf_serial(cp, grid_n); });
  const double t_plane_parallel =
      time_ms([&] { parallel_curve = plane_pdf(cp, grid_n); });
  std::printf("plane_pdf   grid=%-6d serial %8.1f ms   parallel %8.1f ms   "
              "speedup %.2fx   identical=%s\n",
              grid_n, t_plane_serial, t_plane_parallel,
              t_plane_serial / t_plane_parallel,
              identical(serial_curve, parallel_curve) ? "yes" : "NO");

  Histogram serial_hist, parallel_hist;
  const auto sampler = [](RngStream& r) { return sample_full_entanglement(r); };
  const double t_mc_serial = time_ms(
      [&] { serial_hist = mc_histogram_serial(sampler, samples, bins, 7); });
  const double t_mc_parallel = time_ms(
      [&] { parallel_hist = mc_histogram(sampler, samples, bins, 7); });
  std::printf("mc_histogram n=%-8llu serial %8.1f ms   parallel %8.1f ms   "
              "speedup %.2fx   identical=%s\n",
              static_cast<unsigned long long>(samples), t_mc_serial,
              t_mc_parallel, t_mc_serial / t_mc_parallel,
              identical(serial_hist, parallel_hist) ? "yes" : "NO");

  const bool ok = identical(serial_curve, parallel_curve) &&
                  identical(serial_hist, parallel_hist);
  return ok ? 0 : 1;
}
