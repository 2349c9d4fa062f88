#include <doctest.h>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "mmc/export.hpp"
#include "oracles.hpp"

using namespace mmc;

namespace {

std::size_t count_of(const std::string& s, std::string_view part) {
  std::size_t n = 0;
  for (auto pos = s.find(part); pos != std::string::npos; pos = s.find(part, pos + 1)) ++n;
  return n;
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string line; std::getline(is, line);) out.push_back(line);
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Corner coordinates listed in the first polygon's points attribute.
std::vector<Point> polygon_points(const std::string& svg, std::size_t which = 0) {
  std::size_t pos = 0;
  for (std::size_t k = 0; k <= which; ++k) {
    pos = svg.find("points=\"", pos);
    REQUIRE(pos != std::string::npos);
    pos += 8;
  }
  const auto end = svg.find('"', pos);
  std::istringstream is(svg.substr(pos, end - pos));
  std::vector<Point> out;
  for (std::string pair; is >> pair;) {
    const auto comma = pair.find(',');
    out.push_back({std::stod(pair.substr(0, comma)), std::stod(pair.substr(comma + 1))});
  }
  return out;
}

}  // namespace

TEST_SUITE("export") {

TEST_CASE("history CSV layout") {
  CHECK(std::string(kHistoryHeader) == "iteration,compliance,volume,volume_fraction,constraint_value,max_design_change");
  const IterationRecord r{1, 69.44, 1.0004, 0.5002, 4e-4, 0.125};
  const auto one = history_csv(std::span(&r, 1));
  const auto lines = lines_of(one);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == kHistoryHeader);
  CHECK(lines[1] == "1,69.44,1.0004,0.5002,4e-04,0.125");
  CHECK(one.back() == '\n');
  CHECK(one.find('\r') == std::string::npos);

  std::vector<IterationRecord> many(7);
  for (int k = 0; k < 7; ++k) many[k].iteration = k + 1;
  CHECK(lines_of(history_csv(many)).size() == 8);
}

TEST_CASE("shortest formatting round-trips") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int k = 0; k < 2000; ++k) {
    const double v = std::pow(10.0, u(rng)) * (k % 2 ? 1 : -1);
    const auto s = format_shortest(v);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == v);
  }
  CHECK(format_shortest(0.1) == "0.1");
  CHECK(format_shortest(78.54) == "78.54");
  CHECK(format_shortest(1.0) == "1");
}

TEST_CASE("component table") {
  const std::vector<Component> comps{{0.53, 0.95, 1.50, 0.20, 0.04}, {1.2, 0.3, 0.4, 0.1, -0.94}};
  const auto lines = lines_of(component_table_csv(comps));
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "component,x0,y0,L_half,t_half,p");
  CHECK(lines[1] == "1,0.53,0.95,0.75,0.10,0.04");
  CHECK(lines[2].substr(lines[2].rfind(',') + 1) == "-0.94");
  CHECK(lines[2].rfind("2,", 0) == 0);
}

TEST_CASE("contour of a single axis-aligned component matches its box") {
  const Mesh mesh(80, 40, 0.025);
  Regularization reg;
  reg.epsilon = 0.1;
  const Component c{1.0, 0.5, 1.2, 0.4, 0.0};
  const auto contours = extract_zero_contours(std::span(&c, 1), mesh, reg);
  REQUIRE(contours.size() == 1);
  double min_x = 1e9, max_x = -1e9, min_y = 1e9, max_y = -1e9;
  for (const auto& p : contours[0]) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double h = mesh.h();
  CHECK(std::abs(min_x - 0.4) <= h);
  CHECK(std::abs(max_x - 1.6) <= h);
  CHECK(std::abs(min_y - 0.3) <= h);
  CHECK(std::abs(max_y - 0.7) <= h);
  // Every vertex sits on the zero level set up to interpolation error.
  for (const auto& p : contours[0]) CHECK(std::abs(component_tdf(c, p)) < 0.2);

  const auto svg = contour_svg(std::span(&c, 1), mesh, reg);
  CHECK(oracle::xml_problem(svg).empty());
  CHECK(count_of(svg, "<path") == 1);
  CHECK(contour_svg(std::span(&c, 1), mesh, reg) == svg);
}

TEST_CASE("empty design gives just the domain outline") {
  const Mesh mesh(20, 10, 0.1);
  Regularization reg;
  const std::vector<Component> none;
  const auto svg = contour_svg(none, mesh, reg);
  CHECK(count_of(svg, "<path") == 0);
  CHECK(count_of(svg, "<rect") == 1);
  CHECK(oracle::xml_problem(svg).empty());
  // A component entirely outside the domain leaves nothing either.
  const Component outside{5.0, 5.0, 0.5, 0.1, 0.0};
  CHECK(extract_zero_contours(std::span(&outside, 1), mesh, reg).empty());
}

TEST_CASE("contours of several shapes are closed and well-formed") {
  const Mesh mesh(60, 30, 1.0 / 30);
  Regularization reg;
  const std::vector<Component> comps{{0.5, 0.5, 0.8, 0.2, 0.6}, {1.5, 0.5, 0.8, 0.2, -0.6}, {1.0, 0.2, 1.8, 0.15, 0.0}};
  const auto contours = extract_zero_contours(comps, mesh, reg);
  CHECK(!contours.empty());
  for (const auto& loop : contours) CHECK(loop.size() >= 3);
  CHECK(oracle::xml_problem(contour_svg(comps, mesh, reg)).empty());
}

TEST_CASE("the XML oracle itself flags broken documents") {
  CHECK(oracle::xml_problem("<svg><rect/></svg>").empty());
  CHECK(!oracle::xml_problem("<svg><rect></svg>").empty());
  CHECK(!oracle::xml_problem("<svg a=\"1></svg>").empty());
  CHECK(!oracle::xml_problem("<a/><b/>").empty());
}

TEST_CASE("CAD corners") {
  const Component axis{0, 0, 2, 1, 0};
  const auto k = component_corners(axis);
  CHECK(k[0] == Point{-1, -0.5});
  CHECK(k[1] == Point{1, -0.5});
  CHECK(k[2] == Point{1, 0.5});
  CHECK(k[3] == Point{-1, 0.5});

  const auto svg = cad_svg(std::span(&axis, 1), 0.0);
  const auto pts = polygon_points(svg);
  REQUIRE(pts.size() == 4);
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(pts[j].x == doctest::Approx(k[j].x));
    CHECK(pts[j].y == doctest::Approx(k[j].y));
  }

  // 45 degrees: corners stay at the half-diagonal from the center and the
  // long edge points along (1, 1).
  const Component rotated{0.3, -0.2, 2, 1, 1 / std::sqrt(2.0)};
  const auto r = component_corners(rotated);
  const double half_diag = std::hypot(1.0, 0.5);
  for (const auto& p : r) CHECK(std::hypot(p.x - 0.3, p.y + 0.2) == doctest::Approx(half_diag).epsilon(1e-12));
  CHECK(r[1].x - r[0].x == doctest::Approx(std::sqrt(2.0)));
  CHECK(r[1].y - r[0].y == doctest::Approx(std::sqrt(2.0)));
  CHECK(std::hypot(r[3].x - r[0].x, r[3].y - r[0].y) == doctest::Approx(1.0));
}

TEST_CASE("CAD polygon count and threshold") {
  const std::vector<Component> comps{{0.5, 0.5, 0.8, 0.2, 0.6}, {1.5, 0.5, 0.8, 0.005, -0.6}, {1.0, 0.2, 1.8, 0.15, 0.0}};
  const auto all = cad_svg(comps, 0.0, Domain{2.0, 1.0});
  CHECK(count_of(all, "<polygon") == 3);
  CHECK(oracle::xml_problem(all).empty());
  CHECK(count_of(cad_svg(comps, 0.01), "<polygon") == 2);
  CHECK(count_of(cad_svg(comps, 0.16), "<polygon") == 1);
  CHECK(oracle::xml_problem(cad_svg(comps, 1.0)).empty());
}

TEST_CASE("file writers") {
  const auto dir = std::filesystem::temp_directory_path() / "mmc_export_test";
  std::filesystem::create_directories(dir);
  const IterationRecord r{1, 2.0, 0.5, 0.25, -0.5, 0.0};
  export_history_csv(std::span(&r, 1), dir / "history.csv");
  CHECK(slurp(dir / "history.csv") == history_csv(std::span(&r, 1)));
  const Component c{1.0, 0.5, 1.0, 0.2, 0.0};
  export_component_table(std::span(&c, 1), dir / "components.csv");
  CHECK(slurp(dir / "components.csv") == component_table_csv(std::span(&c, 1)));
  export_cad_svg(std::span(&c, 1), 0.0, dir / "cad.svg");
  CHECK(slurp(dir / "cad.svg") == cad_svg(std::span(&c, 1), 0.0));

  const auto missing = dir / "no" / "such" / "dir" / "x.csv";
  CHECK_THROWS_AS(export_history_csv(std::span(&r, 1), missing), std::runtime_error);
  CHECK_THROWS_AS(export_component_table(std::span(&c, 1), missing), std::runtime_error);
  CHECK_THROWS_AS(export_cad_svg(std::span(&c, 1), 0.0, missing), std::runtime_error);
  const Mesh mesh(20, 10, 0.1);
  CHECK_THROWS_AS(export_contour_svg(std::span(&c, 1), mesh, Regularization{}, missing), std::runtime_error);
  CHECK_THROWS(export_history_csv({}, dir / "empty.csv"));
  std::filesystem::remove_all(dir);
}

}
