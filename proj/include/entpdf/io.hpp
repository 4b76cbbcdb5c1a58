#pragma once

#include <string>

#include "entpdf/analysis.hpp"
#include "entpdf/entdensity.hpp"
#include "entpdf/haarmc.hpp"
#include "entpdf/qstate.hpp"
#include "entpdf/statelib.hpp"

namespace entpdf {

inline constexpr int kStateFileVersion = 1;

// Whole-file helpers; unreadable/unwritable paths raise InputError.
std::string slurp_file(const std::string& path);
void spew_file(const std::string& path, const std::string& text);

// State files: JSON with format_version, a 4x4 row-major matrix of [re, im]
// pairs in basis order {uu, ud, du, dd}, and optional metadata.  Parsing
// rejects invalid content with the violated invariant and its residual.
DensityMatrix parse_state_file(const std::string& text);
DensityMatrix read_state_file(const std::string& path);
std::string state_file_json(const DensityMatrix& rho,
                            const std::string& label = {},
                            const std::string& source = {});
void write_state_file(const std::string& path, const DensityMatrix& rho,
                      const std::string& label = {},
                      const std::string& source = {});

// Marker sets: {"w1","w2","w3","e1","e_cusp","e_max","e_perp"}.
std::string marker_set_json(const MarkerSet& ms);
MarkerSet parse_marker_set(const std::string& text);
MarkerSet read_marker_set(const std::string& path);

// Reconstruction extras: {"theta","phi","theta_perp","phi_perp"}.
std::string extras_json(const ReconstructionExtras& ex);
ReconstructionExtras parse_extras(const std::string& text);
ReconstructionExtras read_extras(const std::string& path);

// Family specs: {"family": name, "params": {...}}.
std::string family_spec_json(const FamilySpec& fs);
FamilySpec parse_family_spec(const std::string& text);

std::string expected_summary_json(const ExpectedSummary& es);

// 17 significant digits, '.' decimal separator.
std::string format_g17(double v);

// CSV emitters (LF line endings).
std::string curve_csv(const DensityCurve& c);          // e,density
void write_curve_csv(const std::string& path, const DensityCurve& c);
std::string histogram_csv(const Histogram& h);  // bin_low,bin_high,count,density
void write_histogram_csv(const std::string& path, const Histogram& h);

}  // namespace entpdf
