#include "pathphase/bloch_geometry.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "pathphase/errors.hpp"

namespace pathphase {

namespace {

bool antipodal(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return (a + b).norm() < kSphereTolerance;
}

// Signed solid angle of the spherical triangle (a, b, c).
double triangle_excess(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
  const double numerator = a.dot(b.cross(c));
  const double denominator = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
  return 2.0 * std::atan2(numerator, denominator);
}

}  // namespace

BlochVector::BlochVector(double x, double y, double z) : v_(x, y, z) {
  const double n = v_.norm();
  if (!std::isfinite(n) || n == 0.0) throw DomainError("Bloch vector must be finite and nonzero");
  v_ /= n;
}

BlochVector BlochVector::from_spherical(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

double BlochVector::polar() const noexcept { return std::acos(std::clamp(v_.z(), -1.0, 1.0)); }

double BlochVector::azimuth() const noexcept { return std::atan2(v_.y(), v_.x()); }

BlochVector bloch_from_state(const PathState& state) {
  if (!state.is_finite()) throw DomainError("non-finite path amplitudes");
  const double n = state.norm_squared();
  if (n < 1e-12) throw DomainError("zero state has no Bloch vector");
  const Amplitude c = std::conj(state.perp) * state.p;
  return {2.0 * c.real() / n, 2.0 * c.imag() / n, (std::norm(state.perp) - std::norm(state.p)) / n};
}

double absorber_polar_angle(double transmissivity) {
  check_transmissivity(transmissivity);
  return 2.0 * std::atan(std::sqrt(transmissivity));
}

const char* to_string(ArcKind kind) noexcept {
  switch (kind) {
    case ArcKind::Geodesic:
      return "geodesic";
    case ArcKind::Latitude:
      return "latitude";
  }
  return "unknown";
}

ArcSegment ArcSegment::geodesic(const BlochVector& start, const BlochVector& end) {
  if (start.antipodal_to(end)) throw GeodesicError();
  ArcSegment arc;
  arc.kind_ = ArcKind::Geodesic;
  arc.start_ = start;
  arc.end_ = end;
  return arc;
}

ArcSegment ArcSegment::latitude(double polar, double phi_start, double span) {
  if (!std::isfinite(polar) || !std::isfinite(phi_start) || !std::isfinite(span)) {
    throw DomainError("latitude arc parameters must be finite");
  }
  ArcSegment arc;
  arc.kind_ = ArcKind::Latitude;
  arc.polar_ = polar;
  arc.phi_start_ = phi_start;
  arc.span_ = span;
  arc.start_ = BlochVector::from_spherical(polar, phi_start);
  arc.end_ = BlochVector::from_spherical(polar, phi_start + span);
  return arc;
}

std::vector<Eigen::Vector3d> ArcSegment::sample(int n) const {
  if (n < 1) throw DomainError("arc discretization needs at least one chord");
  std::vector<Eigen::Vector3d> points;
  points.reserve(static_cast<std::size_t>(n) + 1);

  if (kind_ == ArcKind::Latitude) {
    for (int k = 0; k <= n; ++k) {
      const double phi = phi_start_ + span_ * static_cast<double>(k) / n;
      points.push_back(BlochVector::from_spherical(polar_, phi).vec());
    }
    return points;
  }

  const Eigen::Vector3d& a = start_.vec();
  const Eigen::Vector3d& b = end_.vec();
  const Eigen::Vector3d axis = a.cross(b);
  const double angle = std::atan2(axis.norm(), a.dot(b));
  if (angle < 1e-15) {
    for (int k = 0; k <= n; ++k) points.push_back(a);
  } else {
    // Orthonormal pair (a, u) spanning the great circle through a and b.
    const Eigen::Vector3d u = (b - a.dot(b) * a).normalized();
    for (int k = 0; k <= n; ++k) {
      const double t = angle * static_cast<double>(k) / n;
      points.push_back((std::cos(t) * a + std::sin(t) * u).normalized());
    }
  }
  points.back() = b;
  return points;
}

SpherePath::SpherePath(std::vector<ArcSegment> segments, int segments_per_arc)
    : segments_(std::move(segments)), segments_per_arc_(segments_per_arc) {
  if (segments_.empty()) throw DomainError("sphere path needs at least one arc");
  if (segments_per_arc_ < 1) throw DomainError("segments per arc must be positive");
  for (std::size_t k = 0; k + 1 < segments_.size(); ++k) {
    if (!segments_[k].end().approx(segments_[k + 1].start())) {
      throw DomainError("sphere path arcs " + std::to_string(k) + " and " + std::to_string(k + 1) +
                        " are not connected");
    }
  }
}

bool SpherePath::closed() const noexcept {
  return segments_.back().end().approx(segments_.front().start());
}

std::vector<Eigen::Vector3d> SpherePath::vertices() const {
  std::vector<Eigen::Vector3d> out;
  out.reserve(segments_.size() * static_cast<std::size_t>(segments_per_arc_) + 1);
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    auto pts = segments_[k].sample(segments_per_arc_);
    out.insert(out.end(), pts.begin() + (k == 0 ? 0 : 1), pts.end());
  }
  return out;
}

SpherePath build_evolution_path(double transmissivity, double dchi, int segments_per_arc) {
  check_transmissivity(transmissivity);
  if (!std::isfinite(dchi)) throw DomainError("dchi must be finite");
  if (segments_per_arc < 2) throw DomainError("segments per arc must be at least 2");

  const BlochVector q(1.0, 0.0, 0.0);
  if (transmissivity == 0.0) {
    // Beam block: the state sits on the north pole and no latitude arc exists.
    const BlochVector north(0.0, 0.0, 1.0);
    return SpherePath({ArcSegment::geodesic(q, north), ArcSegment::geodesic(north, q)},
                      segments_per_arc);
  }

  const double theta = absorber_polar_angle(transmissivity);
  auto rotation = ArcSegment::latitude(theta, 0.0, dchi);
  auto rise = ArcSegment::geodesic(q, rotation.start());
  auto closure = ArcSegment::geodesic(rotation.end(), q);
  return SpherePath({rise, rotation, closure}, segments_per_arc);
}

double fan_solid_angle(std::span<const Eigen::Vector3d> loop, std::size_t anchor) {
  if (loop.size() < 2 || (loop.front() - loop.back()).norm() >= kSphereTolerance) {
    throw DomainError("solid angle requires a closed path");
  }
  const std::size_t m = loop.size() - 1;  // distinct vertices
  if (anchor >= m) throw DomainError("fan anchor index out of range");
  if (m < 3) return 0.0;

  auto at = [&](std::size_t i) -> const Eigen::Vector3d& { return loop[(anchor + i) % m]; };
  auto index_of = [&](std::size_t i) { return (anchor + i) % m; };
  auto fail = [&](std::size_t i) -> double {
    throw GeodesicError("antipodal triangle corners at path vertex " + std::to_string(index_of(i)));
  };

  const Eigen::Vector3d& a = at(0);
  if (antipodal(a, at(1))) fail(1);
  if (antipodal(a, at(m - 1))) fail(m - 1);

  double total = 0.0;
  std::size_t i = 1;
  while (i + 1 < m) {
    const Eigen::Vector3d& b = at(i);
    const Eigen::Vector3d& c = at(i + 1);
    if (antipodal(b, c)) fail(i + 1);
    if (!antipodal(a, c)) {
      total += triangle_excess(a, b, c);
      ++i;
      continue;
    }
    // c sits opposite the anchor: replace (a,b,c) + (a,c,d) by the other
    // diagonal split (a,b,d) + (b,c,d) of the same quadrilateral.
    if (i + 2 >= m) fail(i + 1);
    const Eigen::Vector3d& d = at(i + 2);
    if (antipodal(a, d) || antipodal(b, d) || antipodal(c, d)) fail(i + 2);
    total += triangle_excess(a, b, d) + triangle_excess(b, c, d);
    i += 2;
  }
  return total;
}

double reduce_solid_angle(double omega) noexcept {
  constexpr double kFourPi = 2.0 * kTwoPi;
  double r = std::remainder(omega, kFourPi);
  if (r <= -kTwoPi) r += kFourPi;
  return r;
}

double signed_solid_angle(std::span<const Eigen::Vector3d> loop, std::size_t anchor) {
  return reduce_solid_angle(fan_solid_angle(loop, anchor));
}

double signed_solid_angle(const SpherePath& path, std::size_t anchor) {
  if (!path.closed()) throw DomainError("solid angle requires a closed path");
  const auto v = path.vertices();
  return signed_solid_angle(std::span<const Eigen::Vector3d>(v), anchor);
}

double geometric_phase_from_area(const SpherePath& path) { return -0.5 * signed_solid_angle(path); }

void write_path_csv(const SpherePath& path, std::ostream& out) {
  out << "segment_index,kind,x,y,z\n";
  char buf[128];
  const auto& segs = path.segments();
  for (std::size_t k = 0; k < segs.size(); ++k) {
    for (const auto& p : segs[k].sample(path.segments_per_arc())) {
      std::snprintf(buf, sizeof buf, "%zu,%s,%.9g,%.9g,%.9g\n", k, to_string(segs[k].kind()), p.x(),
                    p.y(), p.z());
      out << buf;
    }
  }
}

}  // namespace pathphase
