#pragma once

// Test-only reference routes, kept independent of the library code paths.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
using Mat2 = std::array<std::array<cplx, 2>, 2>;
using Vec2 = std::array<cplx, 2>;

inline constexpr double pi = 3.14159265358979323846;

inline Vec2 mul(const Mat2& m, const Vec2& v) {
  return {m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]};
}

/// |q><q| with q = (1, 1)/sqrt(2), written out entrywise.
inline Mat2 projector_q() { return {{{0.5, 0.5}, {0.5, 0.5}}}; }

inline double wrap(double a) {
  double r = std::fmod(a + pi, 2.0 * pi);
  if (r <= 0.0) r += 2.0 * pi;
  return r - pi;
}

/// Textbook arctan form of the loop phase; valid for |dchi| < pi.
inline double arctan_phase(double t, double chi1, double chi2) {
  const double d = chi2 - chi1;
  const double st = std::sqrt(t);
  return 0.5 * (chi1 + chi2) - std::atan(std::tan(0.5 * d) * (1.0 - st) / (1.0 + st));
}

/// Solid angle by the line integral of (1 - cos theta) dphi along a densely
/// sampled closed polyline that avoids the poles.
template <class Points>
double line_integral_solid_angle(const Points& pts) {
  double omega = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const auto& a = pts[k];
    const auto& b = pts[k + 1];
    const double phi_a = std::atan2(a[1], a[0]);
    const double phi_b = std::atan2(b[1], b[0]);
    const double dphi = wrap(phi_b - phi_a);
    const double z_mid = 0.5 * (a[2] + b[2]);
    omega += (1.0 - z_mid) * dphi;
  }
  return omega;
}

/// Solid angle of the loop q -> meridian -> latitude(dchi) -> geodesic -> q by
/// the line integral: the meridian has dphi = 0, the latitude contributes
/// (1 - cos theta) dchi exactly, and the closing great circle is sampled here.
inline double evolution_loop_solid_angle(double t, double dchi, int samples = 200000) {
  const double cos_theta = (1.0 - t) / (1.0 + t);
  const double sin_theta = std::sqrt(1.0 - cos_theta * cos_theta);
  const std::array<double, 3> start{sin_theta * std::cos(dchi), sin_theta * std::sin(dchi), cos_theta};
  const std::array<double, 3> end{1.0, 0.0, 0.0};
  const double dot = start[0] * end[0] + start[1] * end[1] + start[2] * end[2];
  const double angle = std::acos(std::max(-1.0, std::min(1.0, dot)));
  std::vector<std::array<double, 3>> arc;
  for (int k = 0; k <= samples; ++k) {
    const double s = static_cast<double>(k) / samples;
    const double wa = angle > 0 ? std::sin((1 - s) * angle) / std::sin(angle) : 1 - s;
    const double wb = angle > 0 ? std::sin(s * angle) / std::sin(angle) : s;
    arc.push_back({wa * start[0] + wb * end[0], wa * start[1] + wb * end[1], wa * start[2] + wb * end[2]});
  }
  return (1.0 - cos_theta) * dchi + line_integral_solid_angle(arc);
}

}  // namespace oracle
