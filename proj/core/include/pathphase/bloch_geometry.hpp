#pragma once

/*
 * Bloch-sphere picture of the second-loop evolution.
 *
 * North pole = |p_perp><p_perp|, south pole = |p><p|, |q><q| = (1, 0, 0).
 * The absorber moves the state up the phi = 0 meridian to polar angle theta
 * with T = tan^2(theta/2), the phase shifter rotates it along the circle of
 * latitude by dchi, and recombination closes the loop with a geodesic back to
 * |q><q|.  The signed solid angle of that loop gives the geometric phase
 * -Omega/2.
 *
 * Solid angles are accumulated as a fan of spherical triangles around an
 * anchor vertex using the Van Oosterom-Strackee excess
 *
 *   tan(E/2) = a.(b x c) / (1 + a.b + b.c + c.a)
 *
 * and reduced modulo 4pi into (-2pi, 2pi].
 */

#include <Eigen/Core>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "pathphase/state_engine.hpp"

namespace pathphase {

inline constexpr double kSphereTolerance = 1e-9;
inline constexpr int kDefaultSegmentsPerArc = 1024;

/// Unit 3-vector on the Bloch sphere.  Renormalized on construction.
class BlochVector {
public:
  BlochVector() : v_(0.0, 0.0, 1.0) {}
  BlochVector(double x, double y, double z);
  explicit BlochVector(const Eigen::Vector3d& v) : BlochVector(v.x(), v.y(), v.z()) {}

  /// Point at polar angle theta (from the north pole) and azimuth phi.
  static BlochVector from_spherical(double theta, double phi);

  double x() const noexcept { return v_.x(); }
  double y() const noexcept { return v_.y(); }
  double z() const noexcept { return v_.z(); }
  const Eigen::Vector3d& vec() const noexcept { return v_; }

  double polar() const noexcept;
  double azimuth() const noexcept;

  bool approx(const BlochVector& other, double tol = kSphereTolerance) const noexcept {
    return (v_ - other.v_).norm() < tol;
  }
  bool antipodal_to(const BlochVector& other, double tol = kSphereTolerance) const noexcept {
    return (v_ + other.v_).norm() < tol;
  }

private:
  Eigen::Vector3d v_;
};

/// Throws DomainError for a (numerically) zero state.
BlochVector bloch_from_state(const PathState& state);

/// theta in [0, pi/2] with T = tan^2(theta/2).
double absorber_polar_angle(double transmissivity);

enum class ArcKind { Geodesic, Latitude };

const char* to_string(ArcKind kind) noexcept;

class ArcSegment {
public:
  /// Shorter great-circle arc.  Throws GeodesicError for antipodal endpoints.
  static ArcSegment geodesic(const BlochVector& start, const BlochVector& end);

  /// Arc along the circle of latitude at `polar` from azimuth `phi_start`
  /// through a signed span (may exceed 2pi, winding more than once).
  static ArcSegment latitude(double polar, double phi_start, double span);

  ArcKind kind() const noexcept { return kind_; }
  const BlochVector& start() const noexcept { return start_; }
  const BlochVector& end() const noexcept { return end_; }
  double polar() const noexcept { return polar_; }
  double span() const noexcept { return span_; }

  /// n + 1 points with uniform parameter spacing, endpoints included.
  std::vector<Eigen::Vector3d> sample(int n) const;

private:
  ArcSegment() = default;

  ArcKind kind_ = ArcKind::Geodesic;
  BlochVector start_;
  BlochVector end_;
  double polar_ = 0.0;
  double phi_start_ = 0.0;
  double span_ = 0.0;
};

/// Connected sequence of arcs, each discretized into the same number of chords.
class SpherePath {
public:
  /// Throws DomainError when consecutive arcs are not connected or
  /// segments_per_arc < 1.
  SpherePath(std::vector<ArcSegment> segments, int segments_per_arc);

  const std::vector<ArcSegment>& segments() const noexcept { return segments_; }
  int segments_per_arc() const noexcept { return segments_per_arc_; }
  bool closed() const noexcept;

  /// Discretized polyline; shared arc endpoints appear once.
  std::vector<Eigen::Vector3d> vertices() const;

private:
  std::vector<ArcSegment> segments_;
  int segments_per_arc_;
};

/// Loop q -> meridian up to theta(T) -> latitude through dchi -> geodesic back
/// to q.  T = 0 yields the zero-area out-and-back meridian.  Throws
/// GeodesicError when the end point is antipodal to q (T = 1, dchi = pi mod 2pi).
SpherePath build_evolution_path(double transmissivity, double dchi,
                                int segments_per_arc = kDefaultSegmentsPerArc);

/// Raw fan sum of signed triangle excesses around vertex `anchor` of a
/// closed polyline (last vertex equal to the first).  Not reduced.
double fan_solid_angle(std::span<const Eigen::Vector3d> loop, std::size_t anchor = 0);

/// Reduces a solid angle modulo 4pi into (-2pi, 2pi].
double reduce_solid_angle(double omega) noexcept;

/// Signed enclosed solid angle in (-2pi, 2pi].
double signed_solid_angle(std::span<const Eigen::Vector3d> loop, std::size_t anchor = 0);
double signed_solid_angle(const SpherePath& path, std::size_t anchor = 0);

/// -Omega/2 for a closed path.
double geometric_phase_from_area(const SpherePath& path);

/// CSV with header `segment_index,kind,x,y,z`.
void write_path_csv(const SpherePath& path, std::ostream& out);

}  // namespace pathphase
