#include "entpdf/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "entpdf/errors.hpp"
#include "json.hpp"

namespace entpdf {

namespace {

using nlohmann::json;

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("invalid JSON in ") + what + ": " + e.what());
  }
}

double number_field(const json& j, const char* key, const char* what) {
  if (!j.contains(key)) {
    throw InputError(std::string(what) + " is missing field '" + key + "'");
  }
  const json& v = j.at(key);
  if (!v.is_number()) {
    throw InputError(std::string(what) + " field '" + key +
                     "' must be a number");
  }
  return v.get<double>();
}

}  // namespace

std::string slurp_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw InputError("failed while reading '" + path + "'");
  return os.str();
}

void spew_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw InputError("failed while writing '" + path + "'");
}

DensityMatrix parse_state_file(const std::string& text) {
  const json j = parse_json(text, "state file");
  if (!j.is_object()) throw InputError("state file must be a JSON object");
  if (!j.contains("format_version") ||
      !j.at("format_version").is_number_integer()) {
    throw InputError("state file is missing an integer format_version");
  }
  const int version = j.at("format_version").get<int>();
  if (version != kStateFileVersion) {
    std::ostringstream os;
    os << "unsupported state file format_version " << version << " (expected "
       << kStateFileVersion << ")";
    throw InputError(os.str());
  }
  if (!j.contains("matrix")) throw InputError("state file has no matrix");
  const json& m = j.at("matrix");
  if (!m.is_array() || m.size() != 4) {
    throw InputError("matrix must be 4x4");
  }
  Matrix4c rho;
  for (int r = 0; r < 4; ++r) {
    const json& row = m.at(r);
    if (!row.is_array() || row.size() != 4) {
      throw InputError("matrix must be 4x4");
    }
    for (int c = 0; c < 4; ++c) {
      const json& entry = row.at(c);
      if (!entry.is_array() || entry.size() != 2 ||
          !entry.at(0).is_number() || !entry.at(1).is_number()) {
        throw InputError("matrix entries must be [re, im] pairs");
      }
      rho(r, c) = Complex(entry.at(0).get<double>(),
                          entry.at(1).get<double>());
    }
  }
  return DensityMatrix(rho);  // validation errors carry their residuals
}

DensityMatrix read_state_file(const std::string& path) {
  return parse_state_file(slurp_file(path));
}

std::string state_file_json(const DensityMatrix& rho, const std::string& label,
                            const std::string& source) {
  json m = json::array();
  for (int r = 0; r < 4; ++r) {
    json row = json::array();
    for (int c = 0; c < 4; ++c) {
      row.push_back({rho.mat()(r, c).real(), rho.mat()(r, c).imag()});
    }
    m.push_back(std::move(row));
  }
  json j{{"format_version", kStateFileVersion}, {"matrix", std::move(m)}};
  if (!label.empty() || !source.empty()) {
    json meta = json::object();
    if (!label.empty()) meta["label"] = label;
    if (!source.empty()) meta["source"] = source;
    j["metadata"] = std::move(meta);
  }
  return j.dump(2) + "\n";
}

void write_state_file(const std::string& path, const DensityMatrix& rho,
                      const std::string& label, const std::string& source) {
  spew_file(path, state_file_json(rho, label, source));
}

std::string marker_set_json(const MarkerSet& ms) {
  const json j{{"w1", ms.w1},         {"w2", ms.w2},
               {"w3", ms.w3},         {"e1", ms.e1},
               {"e_cusp", ms.e_cusp}, {"e_max", ms.e_max},
               {"e_perp", ms.e_perp}};
  return j.dump(2) + "\n";
}

MarkerSet parse_marker_set(const std::string& text) {
  const json j = parse_json(text, "marker file");
  if (!j.is_object()) throw InputError("marker file must be a JSON object");
  MarkerSet ms;
  ms.w1 = number_field(j, "w1", "marker file");
  ms.w2 = number_field(j, "w2", "marker file");
  ms.w3 = number_field(j, "w3", "marker file");
  ms.e1 = number_field(j, "e1", "marker file");
  ms.e_cusp = number_field(j, "e_cusp", "marker file");
  ms.e_max = number_field(j, "e_max", "marker file");
  ms.e_perp = number_field(j, "e_perp", "marker file");
  return ms;
}

MarkerSet read_marker_set(const std::string& path) {
  return parse_marker_set(slurp_file(path));
}

std::string extras_json(const ReconstructionExtras& ex) {
  const json j{{"theta", ex.theta},
               {"phi", ex.phi},
               {"theta_perp", ex.theta_perp},
               {"phi_perp", ex.phi_perp}};
  return j.dump(2) + "\n";
}

ReconstructionExtras parse_extras(const std::string& text) {
  const json j = parse_json(text, "extras file");
  if (!j.is_object()) throw InputError("extras file must be a JSON object");
  ReconstructionExtras ex;
  ex.theta = number_field(j, "theta", "extras file");
  ex.phi = number_field(j, "phi", "extras file");
  ex.theta_perp = number_field(j, "theta_perp", "extras file");
  ex.phi_perp = number_field(j, "phi_perp", "extras file");
  return ex;
}

ReconstructionExtras read_extras(const std::string& path) {
  return parse_extras(slurp_file(path));
}

std::string family_spec_json(const FamilySpec& fs) {
  json params = json::object();
  for (const auto& [k, v] : fs.params) params[k] = v;
  const json j{{"family", family_name(fs.family)},
               {"params", std::move(params)}};
  return j.dump(2) + "\n";
}

FamilySpec parse_family_spec(const std::string& text) {
  const json j = parse_json(text, "family spec");
  if (!j.is_object() || !j.contains("family") ||
      !j.at("family").is_string()) {
    throw InputError("family spec needs a string 'family' field");
  }
  FamilySpec fs;
  fs.family = family_from_name(j.at("family").get<std::string>());
  if (j.contains("params")) {
    const json& p = j.at("params");
    if (!p.is_object()) throw InputError("family spec params must be an object");
    for (const auto& [k, v] : p.items()) {
      if (!v.is_number()) {
        throw InputError("family spec parameter '" + k +
                         "' must be a number");
      }
      fs.params[k] = v.get<double>();
    }
  }
  return fs;
}

std::string expected_summary_json(const ExpectedSummary& es) {
  json j{{"weights", es.weights}};
  if (es.delta_location) j["delta_location"] = *es.delta_location;
  if (es.plane_tag) j["plane_tag"] = *es.plane_tag;
  if (es.e_perp) j["e_perp"] = *es.e_perp;
  return j.dump(2) + "\n";
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string curve_csv(const DensityCurve& c) {
  std::string out = "e,density\n";
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    out += format_g17(c.grid[i]);
    out += ',';
    out += format_g17(c.density[i]);
    out += '\n';
  }
  return out;
}

void write_curve_csv(const std::string& path, const DensityCurve& c) {
  spew_file(path, curve_csv(c));
}

std::string histogram_csv(const Histogram& h) {
  std::string out = "bin_low,bin_high,count,density\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    out += format_g17(h.edges[i]);
    out += ',';
    out += format_g17(h.edges[i + 1]);
    out += ',';
    out += std::to_string(h.counts[i]);
    out += ',';
    out += format_g17(h.density(i));
    out += '\n';
  }
  return out;
}

void write_histogram_csv(const std::string& path, const Histogram& h) {
  spew_file(path, histogram_csv(h));
}

}  // namespace entpdf
