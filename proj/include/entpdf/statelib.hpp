#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "entpdf/qstate.hpp"

namespace entpdf {

// Predicted density summary shipped with each generated state, for golden
// tests against extract_markers / mixed_pdf.
struct ExpectedSummary {
  std::array<double, 4> weights{};       // omega_1..omega_4, sum 1
  std::optional<double> delta_location;  // concurrence of psi_1, if omega_1 > 0
  std::optional<std::string> plane_tag;  // "separable" or "bell", if omega_2 > 0
  std::optional<double> e_perp;          // kernel concurrence, if omega_3 > 0
};

// rho = rho_1 (x) rho_2 with z-polarizations k1, k2 in [0, 1].
std::pair<DensityMatrix, ExpectedSummary> gen_product(double k1, double k2);

// rho = (1 + p1 sigma1_z + p2 sigma2_z)/4; requires p1 + p2 <= 1 for PSD.
std::pair<DensityMatrix, ExpectedSummary> gen_vector_polarized(double p1,
                                                               double p2);

// rho = (1 + k sigma_1 . sigma_2)/4 with -1 <= k <= 1/3.
std::pair<DensityMatrix, ExpectedSummary> gen_pseudopure(double k);

// rho = 1/4 + p (sigma1_x sigma2_y - sigma1_y sigma2_x), 0 <= p <= 1/8.
std::pair<DensityMatrix, ExpectedSummary> gen_cross_tensor(double p);

// Bell-diagonal quadrupolar-order state, lam >= mu_q >= 0, lam + mu_q <= 1/4.
std::pair<DensityMatrix, ExpectedSummary> gen_quadrupolar(double lam,
                                                          double mu_q);

enum class Family { product, vector_polarized, pseudopure, cross_tensor,
                    quadrupolar };

std::string family_name(Family f);
Family family_from_name(const std::string& name);  // unknown -> InputError
// Required parameter names, in declaration order.
std::vector<std::string> family_params(Family f);

struct FamilySpec {
  Family family = Family::product;
  std::map<std::string, double> params;
};

// Dispatches to the gen_* function; missing/unknown parameter -> InputError,
// range violations -> DomainError naming the constraint.
std::pair<DensityMatrix, ExpectedSummary> generate(const FamilySpec& spec);

}  // namespace entpdf
