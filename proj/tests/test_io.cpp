#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "entpdf/entdensity.hpp"
#include "entpdf/errors.hpp"
#include "entpdf/haarmc.hpp"
#include "entpdf/io.hpp"
#include "entpdf/qstate.hpp"
#include "entpdf/statelib.hpp"
#include "json.hpp"

using namespace entpdf;
using nlohmann::json;

namespace {

std::filesystem::path work_dir() {
  static const std::filesystem::path p = [] {
    auto d = std::filesystem::temp_directory_path() /
             ("entpdf_io_" + std::to_string(getpid()));
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
    return d;
  }();
  return p;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (const char c : text) {
    if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

}  // namespace

TEST_CASE("state file round trip") {
  RngStream rng(606, 0);
  const DensityMatrix rho = random_density_matrix(rng);
  const std::string text = state_file_json(rho, "unit test state", "tests");
  CHECK(text.find("\"format_version\"") != std::string::npos);
  CHECK(text.find("unit test state") != std::string::npos);

  const DensityMatrix back = parse_state_file(text);
  CHECK(max_abs_diff(back.mat(), rho.mat()) < 1e-15);

  const auto path = (work_dir() / "state.json").string();
  write_state_file(path, rho);
  CHECK(max_abs_diff(read_state_file(path).mat(), rho.mat()) < 1e-15);

  // Metadata block only appears when requested.
  const json bare = json::parse(state_file_json(rho));
  CHECK(!bare.contains("metadata"));
  const json tagged = json::parse(text);
  CHECK(tagged.at("metadata").at("source") == "tests");
}

TEST_CASE("state file rejections") {
  CHECK_THROWS_AS(parse_state_file("{"), InputError);
  CHECK_THROWS_AS(parse_state_file("[1, 2]"), InputError);
  CHECK_THROWS_AS(parse_state_file(R"({"matrix": []})"), InputError);

  const auto message_of = [](const std::string& text) {
    try {
      parse_state_file(text);
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };

  {
    const std::string text = R"({"format_version": 2, "matrix": []})";
    CHECK(message_of(text).find("format_version") != std::string::npos);
  }
  {
    // A 3x3 matrix must be named as the violation.
    json j{{"format_version", 1}};
    json m = json::array();
    for (int r = 0; r < 3; ++r) {
      json row = json::array();
      for (int c = 0; c < 3; ++c) row.push_back({0.0, 0.0});
      m.push_back(row);
    }
    j["matrix"] = m;
    CHECK(message_of(j.dump()) == "matrix must be 4x4");
  }
  {
    json j{{"format_version", 1}};
    json m = json::array();
    for (int r = 0; r < 4; ++r) {
      json row = json::array();
      for (int c = 0; c < 4; ++c) row.push_back(0.25);  // bare numbers
      m.push_back(row);
    }
    j["matrix"] = m;
    CHECK(message_of(j.dump()).find("[re, im] pairs") != std::string::npos);
  }

  const auto matrix_json = [](const Matrix4c& m) {
    json rows = json::array();
    for (int r = 0; r < 4; ++r) {
      json row = json::array();
      for (int c = 0; c < 4; ++c) {
        row.push_back({m(r, c).real(), m(r, c).imag()});
      }
      rows.push_back(row);
    }
    return json{{"format_version", 1}, {"matrix", rows}}.dump();
  };
  {
    Matrix4c m = 0.25 * Matrix4c::Identity();
    m(0, 1) = Complex(0.2, 0.0);  // no conjugate partner
    CHECK_THROWS_AS(parse_state_file(matrix_json(m)), InvalidStateError);
  }
  {
    Matrix4c m = 0.20 * Matrix4c::Identity();  // trace 0.8
    CHECK_THROWS_AS(parse_state_file(matrix_json(m)), InvalidStateError);
  }
  {
    Matrix4c m = Matrix4c::Zero();
    m(0, 0) = 0.7;
    m(1, 1) = 0.5;
    m(2, 2) = -0.1;
    m(3, 3) = -0.1;
    CHECK_THROWS_AS(parse_state_file(matrix_json(m)), InvalidStateError);
  }
}

TEST_CASE("marker and extras round trips") {
  MarkerSet ms;
  ms.w1 = 0.25170812345678901;
  ms.w2 = 0.14852823456789012;
  ms.w3 = 0.35041934567890123;
  ms.e1 = 0.09909745678901234;
  ms.e_cusp = 0.82083956789012345;
  ms.e_max = 0.86554967890123456;
  ms.e_perp = 0.60200478901234567;
  const MarkerSet back = parse_marker_set(marker_set_json(ms));
  CHECK(back.w1 == ms.w1);
  CHECK(back.w2 == ms.w2);
  CHECK(back.w3 == ms.w3);
  CHECK(back.e1 == ms.e1);
  CHECK(back.e_cusp == ms.e_cusp);
  CHECK(back.e_max == ms.e_max);
  CHECK(back.e_perp == ms.e_perp);

  const auto path = (work_dir() / "markers.json").string();
  spew_file(path, marker_set_json(ms));
  CHECK(read_marker_set(path).e_max == ms.e_max);

  {
    json j = json::parse(marker_set_json(ms));
    j.erase("e_perp");
    try {
      parse_marker_set(j.dump());
      CHECK(false);
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("e_perp") != std::string::npos);
    }
  }
  {
    json j = json::parse(marker_set_json(ms));
    j["w1"] = "big";
    CHECK_THROWS_AS(parse_marker_set(j.dump()), InputError);
  }

  ReconstructionExtras ex;
  ex.theta = 1.2345678901234567;
  ex.phi = 5.4321098765432109;
  ex.theta_perp = 0.00012345678901234;
  ex.phi_perp = 6.2831853071795862;
  const ReconstructionExtras exb = parse_extras(extras_json(ex));
  CHECK(exb.theta == ex.theta);
  CHECK(exb.phi == ex.phi);
  CHECK(exb.theta_perp == ex.theta_perp);
  CHECK(exb.phi_perp == ex.phi_perp);
  {
    json j = json::parse(extras_json(ex));
    j.erase("phi_perp");
    CHECK_THROWS_AS(parse_extras(j.dump()), InputError);
  }
}

TEST_CASE("family spec round trip") {
  {
    FamilySpec fs;
    fs.family = Family::pseudopure;
    fs.params["k"] = -0.25;
    const FamilySpec back = parse_family_spec(family_spec_json(fs));
    CHECK(back.family == Family::pseudopure);
    CHECK(back.params.at("k") == -0.25);
    const auto [rho_a, es_a] = generate(fs);
    const auto [rho_b, es_b] = generate(back);
    CHECK(max_abs_diff(rho_a.mat(), rho_b.mat()) == 0.0);
  }
  {
    FamilySpec fs;
    fs.family = Family::quadrupolar;
    fs.params["lam"] = 0.15;
    fs.params["mu"] = 0.08;
    const FamilySpec back = parse_family_spec(family_spec_json(fs));
    CHECK(back.params.size() == 2);
    CHECK(back.params.at("lam") == 0.15);
  }
  CHECK_THROWS_AS(parse_family_spec(R"({"family": "wigner"})"), InputError);
  CHECK_THROWS_AS(parse_family_spec(R"({"params": {"k": 1}})"), InputError);
  CHECK_THROWS_AS(
      parse_family_spec(R"({"family": "pseudopure", "params": [1]})"),
      InputError);
  CHECK_THROWS_AS(
      parse_family_spec(R"({"family": "pseudopure", "params": {"k": "x"}})"),
      InputError);
}

TEST_CASE("expected summary json") {
  {
    const auto [rho, es] = gen_quadrupolar(0.15, 0.08);
    const json j = json::parse(expected_summary_json(es));
    CHECK(j.at("weights").size() == 4);
    CHECK(j.at("weights")[0].get<double>() ==
          doctest::Approx(0.30 / 0.55).epsilon(1e-12));
    CHECK(j.at("plane_tag") == "bell");
    CHECK(j.at("delta_location").get<double>() == 1.0);
    CHECK(j.at("e_perp").get<double>() == 1.0);
  }
  {
    const auto [rho, es] = gen_product(0.0, 0.0);
    const json j = json::parse(expected_summary_json(es));
    CHECK(!j.contains("delta_location"));
    CHECK(!j.contains("plane_tag"));
    CHECK(!j.contains("e_perp"));
    CHECK(j.at("weights")[3].get<double>() == 1.0);
  }
}

TEST_CASE("numeric formatting") {
  const std::vector<double> tricky{1.0 / 3.0,       0.1,
                                   3.14159265358979323846, 1e-300,
                                   12345.6789,      std::ldexp(1.0, -52)};
  for (const double v : tricky) {
    const std::string s = format_g17(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
    CHECK(s.find(',') == std::string::npos);
  }
  CHECK(format_g17(0.5) == "0.5");
  CHECK(format_g17(2.0) == "2");
}

TEST_CASE("curve csv") {
  const DensityCurve c = triple_pdf(0.5, 32);
  const std::string csv = curve_csv(c);
  CHECK(csv.find('\r') == std::string::npos);
  const auto lines = split_lines(csv);
  REQUIRE(lines.size() == c.grid.size() + 1);
  CHECK(lines[0] == "e,density");
  for (size_t i = 0; i < c.grid.size(); ++i) {
    const std::string& line = lines[i + 1];
    const auto comma = line.find(',');
    REQUIRE(comma != std::string::npos);
    CHECK(std::strtod(line.substr(0, comma).c_str(), nullptr) == c.grid[i]);
    CHECK(std::strtod(line.substr(comma + 1).c_str(), nullptr) ==
          c.density[i]);
  }

  const auto path = (work_dir() / "curve.csv").string();
  write_curve_csv(path, c);
  CHECK(slurp_file(path) == csv);
}

TEST_CASE("histogram csv") {
  const Histogram h = mc_histogram(
      [](RngStream& rng) { return rng.next_unit(); }, 4096, 8, 11);
  const std::string csv = histogram_csv(h);
  const auto lines = split_lines(csv);
  REQUIRE(lines.size() == h.counts.size() + 1);
  CHECK(lines[0] == "bin_low,bin_high,count,density");

  uint64_t total = 0;
  for (size_t i = 0; i < h.counts.size(); ++i) {
    std::vector<std::string> fields;
    std::string cur;
    for (const char ch : lines[i + 1]) {
      if (ch == ',') {
        fields.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    fields.push_back(cur);
    REQUIRE(fields.size() == 4);
    CHECK(std::strtod(fields[0].c_str(), nullptr) == h.edges[i]);
    CHECK(std::strtod(fields[1].c_str(), nullptr) == h.edges[i + 1]);
    total += std::strtoull(fields[2].c_str(), nullptr, 10);
    CHECK(std::strtod(fields[3].c_str(), nullptr) == h.density(i));
  }
  CHECK(total == 4096);

  const auto path = (work_dir() / "hist.csv").string();
  write_histogram_csv(path, h);
  CHECK(slurp_file(path) == csv);
}

TEST_CASE("slurp and spew") {
  const auto path = (work_dir() / "blob.txt").string();
  const std::string text = "line one\nline two\n\ttabbed\n";
  spew_file(path, text);
  CHECK(slurp_file(path) == text);

  CHECK_THROWS_AS(slurp_file((work_dir() / "missing.txt").string()),
                  InputError);
  CHECK_THROWS_AS(spew_file("/entpdf_no_such_dir/blob.txt", text), InputError);
}
