#include "entpdf/statelib.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "entpdf/errors.hpp"

namespace entpdf {

namespace {

// Nested-resolution weights omega_M = (lam_M - lam_{M+1}) / lam_1 from a
// descending spectrum.
std::array<double, 4> weights_from_spectrum(std::array<double, 4> lam) {
  std::sort(lam.begin(), lam.end(), std::greater<double>());
  std::array<double, 4> w{};
  for (int i = 0; i < 3; ++i) w[i] = (lam[i] - lam[i + 1]) / lam[0];
  w[3] = lam[3] / lam[0];
  return w;
}

void require_range(double v, double lo, double hi, const std::string& what) {
  if (!std::isfinite(v) || v < lo - 1e-12 || v > hi + 1e-12) {
    std::ostringstream os;
    os << "parameter out of range: " << what << " (got " << v << ")";
    throw DomainError(os.str());
  }
}

constexpr double kWeightEps = 1e-12;

}  // namespace

std::pair<DensityMatrix, ExpectedSummary> gen_product(double k1, double k2) {
  require_range(k1, 0.0, 1.0, "0 <= k1 <= 1");
  require_range(k2, 0.0, 1.0, "0 <= k2 <= 1");
  Matrix4c m = Matrix4c::Zero();
  const std::array<double, 4> diag{
      0.25 * (1.0 + k1) * (1.0 + k2), 0.25 * (1.0 + k1) * (1.0 - k2),
      0.25 * (1.0 - k1) * (1.0 + k2), 0.25 * (1.0 - k1) * (1.0 - k2)};
  for (int i = 0; i < 4; ++i) m(i, i) = diag[i];

  ExpectedSummary es;
  es.weights = weights_from_spectrum(diag);
  if (es.weights[0] > kWeightEps) es.delta_location = 0.0;
  if (es.weights[1] > kWeightEps) es.plane_tag = "separable";
  if (es.weights[2] > kWeightEps) es.e_perp = 0.0;
  return {DensityMatrix(m), es};
}

std::pair<DensityMatrix, ExpectedSummary> gen_vector_polarized(double p1,
                                                               double p2) {
  require_range(p1, 0.0, 1.0, "0 <= p1 <= 1");
  require_range(p2, 0.0, 1.0, "0 <= p2 <= 1");
  if (p1 + p2 > 1.0 + 1e-12) {
    throw DomainError(
        "positivity requires p1 + p2 <= 1 (smallest eigenvalue is "
        "(1 - p1 - p2)/4)");
  }
  Matrix4c m = Matrix4c::Zero();
  const std::array<double, 4> diag{
      0.25 * (1.0 + p1 + p2), 0.25 * (1.0 + p1 - p2), 0.25 * (1.0 - p1 + p2),
      0.25 * (1.0 - p1 - p2)};
  for (int i = 0; i < 4; ++i) m(i, i) = std::max(diag[i], 0.0);

  ExpectedSummary es;
  es.weights = weights_from_spectrum(diag);
  if (es.weights[0] > kWeightEps) es.delta_location = 0.0;
  if (es.weights[1] > kWeightEps) es.plane_tag = "separable";
  if (es.weights[2] > kWeightEps) es.e_perp = 0.0;
  return {DensityMatrix(m), es};
}

std::pair<DensityMatrix, ExpectedSummary> gen_pseudopure(double k) {
  require_range(k, -1.0, 1.0 / 3.0, "-1 <= k <= 1/3");
  Matrix4c m = Matrix4c::Zero();
  m(0, 0) = 0.25 * (1.0 + k);
  m(3, 3) = 0.25 * (1.0 + k);
  m(1, 1) = 0.25 * (1.0 - k);
  m(2, 2) = 0.25 * (1.0 - k);
  m(1, 2) = 0.5 * k;
  m(2, 1) = 0.5 * k;

  // Spectrum: triplet (1+k)/4 three-fold, singlet (1-3k)/4.
  ExpectedSummary es;
  es.weights = weights_from_spectrum(
      {0.25 * (1.0 + k), 0.25 * (1.0 + k), 0.25 * (1.0 + k),
       0.25 * (1.0 - 3.0 * k)});
  if (es.weights[0] > kWeightEps) es.delta_location = 1.0;  // singlet on top
  if (es.weights[2] > kWeightEps) es.e_perp = 1.0;  // kernel is the singlet
  return {DensityMatrix(m), es};
}

std::pair<DensityMatrix, ExpectedSummary> gen_cross_tensor(double p) {
  require_range(p, 0.0, 0.125, "0 <= p <= 1/8");
  Matrix4c m = Matrix4c::Zero();
  for (int i = 0; i < 4; ++i) m(i, i) = 0.25;
  m(1, 2) = Complex(0.0, 2.0 * p);
  m(2, 1) = Complex(0.0, -2.0 * p);

  ExpectedSummary es;
  es.weights =
      weights_from_spectrum({0.25 + 2.0 * p, 0.25, 0.25, 0.25 - 2.0 * p});
  if (es.weights[0] > kWeightEps) es.delta_location = 1.0;
  if (es.weights[2] > kWeightEps) es.e_perp = 1.0;
  return {DensityMatrix(m), es};
}

std::pair<DensityMatrix, ExpectedSummary> gen_quadrupolar(double lam,
                                                          double mu_q) {
  if (!std::isfinite(lam) || !std::isfinite(mu_q) || mu_q < -1e-12 ||
      lam < mu_q - 1e-12) {
    throw DomainError("quadrupolar parameters require lam >= mu_q >= 0");
  }
  if (lam + mu_q > 0.25 + 1e-12) {
    throw DomainError("quadrupolar parameters require lam + mu_q <= 1/4");
  }
  Matrix4c m = Matrix4c::Zero();
  m(0, 0) = 0.25 - lam;
  m(3, 3) = 0.25 - lam;
  m(0, 3) = mu_q;
  m(3, 0) = mu_q;
  m(1, 1) = 0.25 + lam;
  m(2, 2) = 0.25 + lam;
  m(1, 2) = lam;
  m(2, 1) = lam;

  // Bell spectrum: 1/4 + 2 lam, 1/4, 1/4 - lam + mu_q, 1/4 - lam - mu_q.
  ExpectedSummary es;
  es.weights = weights_from_spectrum({0.25 + 2.0 * lam, 0.25,
                                      0.25 - lam + mu_q, 0.25 - lam - mu_q});
  if (es.weights[0] > kWeightEps) es.delta_location = 1.0;
  if (es.weights[1] > kWeightEps) es.plane_tag = "bell";
  if (es.weights[2] > kWeightEps) es.e_perp = 1.0;
  return {DensityMatrix(m), es};
}

std::string family_name(Family f) {
  switch (f) {
    case Family::product: return "product";
    case Family::vector_polarized: return "vector_polarized";
    case Family::pseudopure: return "pseudopure";
    case Family::cross_tensor: return "cross_tensor";
    case Family::quadrupolar: return "quadrupolar";
  }
  throw InputError("unknown family enum value");
}

Family family_from_name(const std::string& name) {
  if (name == "product") return Family::product;
  if (name == "vector_polarized") return Family::vector_polarized;
  if (name == "pseudopure") return Family::pseudopure;
  if (name == "cross_tensor") return Family::cross_tensor;
  if (name == "quadrupolar") return Family::quadrupolar;
  throw InputError("unknown state family '" + name +
                   "' (expected product, vector_polarized, pseudopure, "
                   "cross_tensor or quadrupolar)");
}

std::vector<std::string> family_params(Family f) {
  switch (f) {
    case Family::product: return {"k1", "k2"};
    case Family::vector_polarized: return {"p1", "p2"};
    case Family::pseudopure: return {"k"};
    case Family::cross_tensor: return {"p"};
    case Family::quadrupolar: return {"lam", "mu"};
  }
  throw InputError("unknown family enum value");
}

std::pair<DensityMatrix, ExpectedSummary> generate(const FamilySpec& spec) {
  const auto names = family_params(spec.family);
  std::vector<double> v;
  for (const auto& n : names) {
    const auto it = spec.params.find(n);
    if (it == spec.params.end()) {
      throw InputError("family '" + family_name(spec.family) +
                       "' requires parameter '" + n + "'");
    }
    v.push_back(it->second);
  }
  for (const auto& [key, unused] : spec.params) {
    (void)unused;
    if (std::find(names.begin(), names.end(), key) == names.end()) {
      throw InputError("family '" + family_name(spec.family) +
                       "' does not take parameter '" + key + "'");
    }
  }
  switch (spec.family) {
    case Family::product: return gen_product(v[0], v[1]);
    case Family::vector_polarized: return gen_vector_polarized(v[0], v[1]);
    case Family::pseudopure: return gen_pseudopure(v[0]);
    case Family::cross_tensor: return gen_cross_tensor(v[0]);
    case Family::quadrupolar: return gen_quadrupolar(v[0], v[1]);
  }
  throw InputError("unknown family enum value");
}

}  // namespace entpdf
