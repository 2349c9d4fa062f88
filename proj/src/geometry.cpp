#include "mmc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mmc {

namespace {

// Far-field ratios are clamped before exponentiation so the power terms stay
// finite; such points sit deep in the Heaviside dead zone anyway.
constexpr double kRatioClamp = 1e6;

double clamp_ratio(double r) { return std::clamp(r, -kRatioClamp, kRatioClamp); }

// r^k for small integer k without going through std::pow.
double ipow(double r, int k) {
  double result = 1.0;
  double base = r;
  while (k > 0) {
    if (k & 1) result *= base;
    base *= base;
    k >>= 1;
  }
  return result;
}

struct LocalFrame {
  double dx, dy;  // offset from the center
  double p, q;    // sin, cos
  double a, b;    // u/(L/2), v/(t/2), clamped
};

LocalFrame local_frame(const Component& c, Point x) {
  LocalFrame f{};
  f.dx = x.x - c.x0;
  f.dy = x.y - c.y0;
  f.p = c.sin_angle;
  f.q = c.cos_angle();
  const double u = f.q * f.dx + f.p * f.dy;
  const double v = -f.p * f.dx + f.q * f.dy;
  f.a = clamp_ratio(u / (0.5 * c.length));
  f.b = clamp_ratio(v / (0.5 * c.thickness));
  return f;
}

}  // namespace

double Component::cos_angle() const { return std::sqrt(std::max(0.0, 1.0 - sin_angle * sin_angle)); }

void Component::validate() const {
  if (!(length >= kMinComponentSize) || !(thickness >= kMinComponentSize)) {
    throw std::invalid_argument("component length and thickness must be >= " +
                                std::to_string(kMinComponentSize));
  }
  if (!(std::abs(sin_angle) <= kMaxSinAngle)) {
    throw std::invalid_argument("component |sin_angle| exceeds " + std::to_string(kMaxSinAngle));
  }
  if (!std::isfinite(x0) || !std::isfinite(y0)) {
    throw std::invalid_argument("component center is not finite");
  }
}

void Regularization::validate() const {
  if (exponent < 2 || exponent % 2 != 0) {
    throw std::invalid_argument("superellipse exponent must be an even integer >= 2");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("Heaviside epsilon must be positive");
  if (!(alpha > 0.0 && alpha <= 0.01)) throw std::invalid_argument("Heaviside alpha must lie in (0, 0.01]");
}

double component_tdf(const Component& comp, Point x, int exponent) {
  const LocalFrame f = local_frame(comp, x);
  return 1.0 - ipow(f.a, exponent) - ipow(f.b, exponent);
}

FieldSample structure_tdf(std::span<const Component> comps, Point x, int exponent) {
  if (comps.empty()) throw std::invalid_argument("structure_tdf: design has no components");
  FieldSample s;
  s.phi_per_component.reserve(comps.size());
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const double phi = component_tdf(comps[i], x, exponent);
    s.phi_per_component.push_back(phi);
    if (i == 0 || phi > s.phi_structure) {
      s.phi_structure = phi;
      s.argmax_component = i;
    }
  }
  return s;
}

double smoothed_heaviside(double phi, const Regularization& reg) {
  const double eps = reg.epsilon;
  if (phi >= eps) return 1.0;
  if (phi <= -eps) return reg.alpha;
  const double r = phi / eps;
  return 0.75 * (1.0 - reg.alpha) * (r - r * r * r / 3.0) + 0.5 * (1.0 + reg.alpha);
}

double smoothed_delta(double phi, const Regularization& reg) {
  const double eps = reg.epsilon;
  if (std::abs(phi) >= eps) return 0.0;
  const double r = phi / eps;
  return 0.75 * (1.0 - reg.alpha) / eps * (1.0 - r * r);
}

double component_tdf_with_gradient(const Component& comp, Point x, int exponent,
                                   ComponentGradient& grad) {
  if (std::abs(comp.sin_angle) > kMaxSinAngle) {
    throw std::domain_error("component_tdf_gradient: |sin_angle| too close to 1 (near-vertical singularity)");
  }
  const LocalFrame f = local_frame(comp, x);
  const double half_l = 0.5 * comp.length;
  const double half_t = 0.5 * comp.thickness;
  const double a_pow = ipow(f.a, exponent - 1);
  const double b_pow = ipow(f.b, exponent - 1);
  const double n = exponent;

  // d(phi) = -n a^(n-1) da - n b^(n-1) db
  const double ca = -n * a_pow;
  const double cb = -n * b_pow;

  // du/dx0 = -q, dv/dx0 = p ; du/dy0 = -p, dv/dy0 = -q
  grad[0] = ca * (-f.q) / half_l + cb * f.p / half_t;
  grad[1] = ca * (-f.p) / half_l + cb * (-f.q) / half_t;
  // da/dL = -a/L, db/dt = -b/t
  grad[2] = ca * (-f.a / comp.length);
  grad[3] = cb * (-f.b / comp.thickness);
  // dq/dp = -p/q
  const double du_dp = -f.p / f.q * f.dx + f.dy;
  const double dv_dp = -f.dx - f.p / f.q * f.dy;
  grad[4] = ca * du_dp / half_l + cb * dv_dp / half_t;

  return 1.0 - a_pow * f.a - b_pow * f.b;
}

ComponentGradient component_tdf_gradient(const Component& comp, Point x, int exponent) {
  ComponentGradient g{};
  component_tdf_with_gradient(comp, x, exponent, g);
  return g;
}

std::vector<double> flatten(std::span<const Component> comps) {
  std::vector<double> d;
  d.reserve(comps.size() * kVarsPerComponent);
  for (const auto& c : comps) {
    d.insert(d.end(), {c.x0, c.y0, c.length, c.thickness, c.sin_angle});
  }
  return d;
}

std::vector<Component> unflatten(std::span<const double> design) {
  if (design.size() % kVarsPerComponent != 0) {
    throw std::invalid_argument("design vector length is not a multiple of 5");
  }
  std::vector<Component> comps;
  comps.reserve(design.size() / kVarsPerComponent);
  for (std::size_t i = 0; i < design.size(); i += kVarsPerComponent) {
    comps.push_back({design[i], design[i + 1], design[i + 2], design[i + 3], design[i + 4]});
  }
  return comps;
}

}  // namespace mmc
