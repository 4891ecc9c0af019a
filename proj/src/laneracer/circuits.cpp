#include <cmath>
#include <functional>
#include <numbers>

#include "laneracer/track.hpp"

namespace lr::sim {

namespace {

using Curve = std::function<Vec2(double)>;  // t in [0, 2*pi), counter-clockwise

Curve polar(std::function<double(double)> radius) {
  return [radius](double t) {
    const double r = radius(t);
    return Vec2{r * std::cos(t), r * std::sin(t)};
  };
}

double signed_pow(double v, double e) { return std::copysign(std::pow(std::abs(v), e), v); }

Curve superellipse(double a, double b, double p) {
  return [=](double t) { return Vec2{a * signed_pow(std::cos(t), 2.0 / p), b * signed_pow(std::sin(t), 2.0 / p)}; };
}

// Samples the curve densely, then resamples it at uniform arc-length spacing
// close to `spacing`. start_fraction picks the waypoint where laps are counted.
TrackSpec make_track(std::string name, CircuitRole role, const Curve& curve, double start_fraction,
                     double spacing = 1.0) {
  constexpr std::size_t dense = 8000;
  std::vector<Vec2> pts(dense);
  for (std::size_t i = 0; i < dense; ++i) pts[i] = curve(2.0 * std::numbers::pi * static_cast<double>(i) / dense);
  std::vector<double> cum(dense + 1, 0.0);
  for (std::size_t i = 0; i < dense; ++i) {
    const Vec2 a = pts[i], b = pts[(i + 1) % dense];
    cum[i + 1] = cum[i] + std::hypot(b.x - a.x, b.y - a.y);
  }
  const double length = cum[dense];
  const auto n = static_cast<std::size_t>(std::round(length / spacing));
  TrackSpec t;
  t.name = std::move(name);
  t.role = role;
  t.centerline.reserve(n);
  std::size_t j = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double s = length * static_cast<double>(k) / static_cast<double>(n);
    while (cum[j + 1] < s) ++j;
    const double f = (s - cum[j]) / (cum[j + 1] - cum[j]);
    const Vec2 a = pts[j], b = pts[(j + 1) % dense];
    t.centerline.push_back({a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)});
  }
  t.start_index = static_cast<std::size_t>(std::round(start_fraction * static_cast<double>(n))) % n;
  return t;
}

std::vector<TrackSpec> generate() {
  std::vector<TrackSpec> out;
  // 1. Plain oval.
  out.push_back(make_track("simple_oval", CircuitRole::train, polar([](double t) {
                             const double c = std::cos(t) / 85.0, s = std::sin(t) / 55.0;
                             return 1.0 / std::sqrt(c * c + s * s);
                           }),
                           0.75));
  // 2. Rounded rectangle.
  out.push_back(make_track("rounded_rectangle", CircuitRole::train, superellipse(85.0, 45.0, 4.0), 0.75));
  // 3. Loop with two concave bends.
  out.push_back(make_track("s_curve", CircuitRole::train, polar([](double t) {
                             return 58.0 * (1.0 + 0.3 * std::cos(2.0 * t) + 0.1 * std::cos(3.0 * t + 0.5));
                           }),
                           0.75));
  // 4. Many gentle alternating curves.
  out.push_back(make_track("many_curves", CircuitRole::train, polar([](double t) {
                             return 62.0 * (1.0 + 0.07 * std::cos(5.0 * t) + 0.04 * std::cos(7.0 * t + 1.0));
                           }),
                           0.75));
  // 5. Long straights, tight ends and a chicane on the lower straight.
  out.push_back(make_track("montmelo_like", CircuitRole::test,
                           [](double t) {
                             const Vec2 p = superellipse(125.0, 38.0, 3.0)(t);
                             double bump = 0.0;
                             if (p.y < 0.0) {
                               bump = -7.0 * std::exp(-std::pow((p.x - 30.0) / 14.0, 2)) +
                                      7.0 * std::exp(-std::pow((p.x + 5.0) / 14.0, 2));
                             }
                             return Vec2{p.x, p.y + bump};
                           },
                           0.25));
  // 6. Near-rectangular loop with tight corners.
  out.push_back(make_track("monaco_like", CircuitRole::test, superellipse(70.0, 42.0, 8.0), 0.75));
  // 7. High-curvature lobed loop.
  out.push_back(make_track("extreme_loop", CircuitRole::test, polar([](double t) {
                             return 52.0 * (1.0 + 0.22 * std::cos(3.0 * t) + 0.08 * std::cos(5.0 * t + 0.7));
                           }),
                           0.75));
  for (auto& t : out) validate_track(t);
  return out;
}

}  // namespace

std::vector<TrackSpec> builtin_circuits() {
  static const std::vector<TrackSpec> circuits = generate();
  return circuits;
}

}  // namespace lr::sim
