#include "mmc/export.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mmc {

namespace {

constexpr double kOutsideValue = -1e30;
constexpr double kPixelsPerUnit = 300.0;

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::string coord(double v) {
  char buf[64];
  // Avoid "-0.000000".
  if (std::abs(v) < 5e-7) v = 0.0;
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string two_decimals(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string svg_open(double width, double height, double min_x = 0.0, double min_y = 0.0) {
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << coord(width * kPixelsPerUnit)
     << "\" height=\"" << coord(height * kPixelsPerUnit) << "\" viewBox=\"" << coord(min_x) << " " << coord(-min_y - height)
     << " " << coord(width) << " " << coord(height) << "\">\n"
     // Flip so +y points up in domain coordinates.
     << "<g transform=\"scale(1,-1)\">\n";
  return os.str();
}

std::string svg_close() { return "</g>\n</svg>\n"; }

std::string domain_rect(double width, double height) {
  return "<rect x=\"0.000000\" y=\"0.000000\" width=\"" + coord(width) + "\" height=\"" + coord(height) +
         "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"" + coord(0.004 * std::max(width, height)) + "\"/>\n";
}

// Node lattice padded with one ring of void nodes around the mesh.
class PaddedField {
 public:
  PaddedField(std::span<const Component> comps, const Mesh& mesh, const Regularization& reg)
      : comps_(comps), mesh_(mesh), reg_(reg), stride_(mesh.nx() + 3), rows_(mesh.ny() + 3),
        values_(static_cast<std::size_t>(stride_) * rows_, kOutsideValue) {
    for (int j = 0; j <= mesh.ny(); ++j) {
      for (int i = 0; i <= mesh.nx(); ++i) {
        const Point p{i * mesh.h(), j * mesh.h()};
        values_[id(i, j)] = comps.empty() ? kOutsideValue : structure_tdf(comps, p, reg.exponent).phi_structure;
      }
    }
  }

  // Padded indices run from -1 to nx+1 (resp. ny+1).
  std::size_t id(int i, int j) const { return static_cast<std::size_t>(j + 1) * stride_ + (i + 1); }
  double value(int i, int j) const { return values_[id(i, j)]; }
  Point coord(int i, int j) const { return {i * mesh_.h(), j * mesh_.h()}; }
  int stride() const { return stride_; }
  int rows() const { return rows_; }

  bool cell_in_domain(int i, int j) const { return i >= 0 && j >= 0 && i < mesh_.nx() && j < mesh_.ny(); }
  double center_value(int i, int j) const {
    if (!cell_in_domain(i, j) || comps_.empty()) return kOutsideValue;
    return structure_tdf(comps_, {(i + 0.5) * mesh_.h(), (j + 0.5) * mesh_.h()}, reg_.exponent).phi_structure;
  }

 private:
  std::span<const Component> comps_;
  const Mesh& mesh_;
  const Regularization& reg_;
  int stride_;
  int rows_;
  std::vector<double> values_;
};

struct Segment {
  std::size_t a;  // edge ids
  std::size_t b;
};

}  // namespace

std::string format_shortest(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw std::runtime_error("format_shortest: conversion failed");
  return std::string(buf, ptr);
}

std::string history_csv(std::span<const IterationRecord> records) {
  std::string out = kHistoryHeader;
  out += '\n';
  for (const auto& r : records) {
    out += std::to_string(r.iteration) + ',' + format_shortest(r.compliance) + ',' + format_shortest(r.volume) + ',' +
           format_shortest(r.volume_fraction) + ',' + format_shortest(r.constraint_value) + ',' +
           format_shortest(r.max_design_change) + '\n';
  }
  return out;
}

std::string component_table_csv(std::span<const Component> comps) {
  std::string out = kComponentHeader;
  out += '\n';
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const auto& c = comps[i];
    out += std::to_string(i + 1) + ',' + two_decimals(c.x0) + ',' + two_decimals(c.y0) + ',' +
           two_decimals(0.5 * c.length) + ',' + two_decimals(0.5 * c.thickness) + ',' + two_decimals(c.sin_angle) + '\n';
  }
  return out;
}

std::vector<Contour> extract_zero_contours(std::span<const Component> comps, const Mesh& mesh,
                                           const Regularization& reg) {
  const PaddedField field(comps, mesh, reg);

  // Edge ids: 2*node for the edge to the right neighbour, 2*node+1 upwards.
  auto h_edge = [&](int i, int j) { return 2 * field.id(i, j); };
  auto v_edge = [&](int i, int j) { return 2 * field.id(i, j) + 1; };

  auto crossing = [&](std::size_t edge) {
    const std::size_t node = edge / 2;
    const int i = static_cast<int>(node % field.stride()) - 1;
    const int j = static_cast<int>(node / field.stride()) - 1;
    const int i2 = (edge % 2 == 0) ? i + 1 : i;
    const int j2 = (edge % 2 == 0) ? j : j + 1;
    const double va = field.value(i, j);
    const double vb = field.value(i2, j2);
    const double t = va / (va - vb);
    const Point pa = field.coord(i, j);
    const Point pb = field.coord(i2, j2);
    return Point{pa.x + t * (pb.x - pa.x), pa.y + t * (pb.y - pa.y)};
  };

  std::vector<Segment> segments;
  for (int j = -1; j <= mesh.ny(); ++j) {
    for (int i = -1; i <= mesh.nx(); ++i) {
      const bool in0 = field.value(i, j) > 0.0;
      const bool in1 = field.value(i + 1, j) > 0.0;
      const bool in2 = field.value(i + 1, j + 1) > 0.0;
      const bool in3 = field.value(i, j + 1) > 0.0;
      const int code = int(in0) | int(in1) << 1 | int(in2) << 2 | int(in3) << 3;
      if (code == 0 || code == 15) continue;
      const std::size_t e0 = h_edge(i, j);      // bottom
      const std::size_t e1 = v_edge(i + 1, j);  // right
      const std::size_t e2 = h_edge(i, j + 1);  // top
      const std::size_t e3 = v_edge(i, j);      // left
      switch (code) {
        case 1: case 14: segments.push_back({e3, e0}); break;
        case 2: case 13: segments.push_back({e0, e1}); break;
        case 3: case 12: segments.push_back({e3, e1}); break;
        case 4: case 11: segments.push_back({e1, e2}); break;
        case 6: case 9: segments.push_back({e0, e2}); break;
        case 7: case 8: segments.push_back({e3, e2}); break;
        case 5:
          if (field.center_value(i, j) > 0.0) {
            segments.push_back({e0, e1});
            segments.push_back({e2, e3});
          } else {
            segments.push_back({e3, e0});
            segments.push_back({e1, e2});
          }
          break;
        case 10:
          if (field.center_value(i, j) > 0.0) {
            segments.push_back({e3, e0});
            segments.push_back({e1, e2});
          } else {
            segments.push_back({e0, e1});
            segments.push_back({e2, e3});
          }
          break;
        default: break;
      }
    }
  }

  // Every crossed edge is shared by exactly two segments.
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  const std::size_t edge_count = 2 * static_cast<std::size_t>(field.stride()) * field.rows();
  std::vector<std::array<std::size_t, 2>> incident(edge_count, {kNone, kNone});
  for (std::size_t s = 0; s < segments.size(); ++s) {
    for (std::size_t e : {segments[s].a, segments[s].b}) {
      auto& slot = incident[e];
      (slot[0] == kNone ? slot[0] : slot[1]) = s;
    }
  }

  std::vector<bool> used(segments.size(), false);
  std::vector<Contour> contours;
  for (std::size_t start = 0; start < segments.size(); ++start) {
    if (used[start]) continue;
    Contour loop;
    used[start] = true;
    const std::size_t first_edge = segments[start].a;
    loop.push_back(crossing(first_edge));
    std::size_t edge = segments[start].b;
    std::size_t seg = start;
    while (edge != first_edge) {
      loop.push_back(crossing(edge));
      const auto& slot = incident[edge];
      const std::size_t next = slot[0] == seg ? slot[1] : slot[0];
      if (next == kNone || used[next]) break;
      used[next] = true;
      seg = next;
      edge = segments[next].a == edge ? segments[next].b : segments[next].a;
    }
    contours.push_back(std::move(loop));
  }
  return contours;
}

std::string contour_svg(std::span<const Component> comps, const Mesh& mesh, const Regularization& reg) {
  const auto contours = extract_zero_contours(comps, mesh, reg);
  std::string out = svg_open(mesh.width(), mesh.height());
  if (!contours.empty()) {
    out += "<path fill=\"#3b3b3b\" fill-rule=\"evenodd\" stroke=\"#000000\" stroke-width=\"" +
           coord(0.002 * std::max(mesh.width(), mesh.height())) + "\" d=\"";
    for (const auto& loop : contours) {
      for (std::size_t k = 0; k < loop.size(); ++k) {
        out += (k == 0 ? "M" : " L");
        out += coord(loop[k].x) + "," + coord(loop[k].y);
      }
      out += " Z ";
    }
    out += "\"/>\n";
  }
  out += domain_rect(mesh.width(), mesh.height());
  out += svg_close();
  return out;
}

std::array<Point, 4> component_corners(const Component& c) {
  const double p = c.sin_angle;
  const double q = c.cos_angle();
  const double hl = 0.5 * c.length;
  const double ht = 0.5 * c.thickness;
  // Axis direction (q, p), normal (-p, q).
  auto at = [&](double s, double r) {
    return Point{c.x0 + s * hl * q - r * ht * p, c.y0 + s * hl * p + r * ht * q};
  };
  return {at(-1, -1), at(1, -1), at(1, 1), at(-1, 1)};
}

std::string cad_svg(std::span<const Component> comps, double threshold, std::optional<Domain> domain) {
  double min_x = 0.0, min_y = 0.0, max_x = 1.0, max_y = 1.0;
  if (domain) {
    max_x = domain->width;
    max_y = domain->height;
  } else if (!comps.empty()) {
    min_x = min_y = std::numeric_limits<double>::infinity();
    max_x = max_y = -std::numeric_limits<double>::infinity();
    for (const auto& c : comps) {
      for (const Point& p : component_corners(c)) {
        min_x = std::min(min_x, p.x);
        min_y = std::min(min_y, p.y);
        max_x = std::max(max_x, p.x);
        max_y = std::max(max_y, p.y);
      }
    }
  }
  std::string out = svg_open(max_x - min_x, max_y - min_y, min_x, min_y);
  for (const auto& c : comps) {
    if (c.thickness < threshold) continue;
    out += "<polygon fill=\"#3b3b3b\" fill-opacity=\"0.85\" stroke=\"none\" points=\"";
    const auto corners = component_corners(c);
    for (std::size_t k = 0; k < corners.size(); ++k) {
      if (k) out += ' ';
      out += coord(corners[k].x) + "," + coord(corners[k].y);
    }
    out += "\"/>\n";
  }
  if (domain) out += domain_rect(domain->width, domain->height);
  out += svg_close();
  return out;
}

void export_history_csv(std::span<const IterationRecord> records, const std::filesystem::path& path) {
  if (records.empty()) throw std::invalid_argument("export_history_csv: no records");
  write_file(path, history_csv(records));
}

void export_component_table(std::span<const Component> comps, const std::filesystem::path& path) {
  if (comps.empty()) throw std::invalid_argument("export_component_table: no components");
  write_file(path, component_table_csv(comps));
}

void export_contour_svg(std::span<const Component> comps, const Mesh& mesh, const Regularization& reg,
                        const std::filesystem::path& path) {
  write_file(path, contour_svg(comps, mesh, reg));
}

void export_cad_svg(std::span<const Component> comps, double threshold, const std::filesystem::path& path,
                    std::optional<Domain> domain) {
  write_file(path, cad_svg(comps, threshold, domain));
}

}  // namespace mmc
