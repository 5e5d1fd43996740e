#pragma once

/*
 * Synthetic interferograms, sinusoid fits and the phase sweep with
 * visibility damping.
 *
 * The experimental phase model is
 *
 *   Phi(dchi) = arg[ sqrt(T1) e^{-i s1 dchi} + C sqrt(T2) e^{i s2 dchi} ],
 *
 * with plate-thickness fractions s1 + s2 = 1 and damping C in [0, 1]
 * absorbing partial beam overlap and inhomogeneities.
 */

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace pathphase {

/// Default plate fractions d1/(d1+d2) with d1 = 0.5 mm, d2 = 4.1 mm.
inline constexpr double kDefaultS1 = 0.5 / 4.6;
inline constexpr double kDefaultS2 = 4.1 / 4.6;
inline constexpr double kDefaultT1 = 1.0;
inline constexpr double kDefaultT2 = 0.120;
inline constexpr double kDefaultDamping = 0.57;

struct DampedModel {
  double t1 = kDefaultT1;
  double t2 = kDefaultT2;
  double s1 = kDefaultS1;
  double s2 = kDefaultS2;
  double c = kDefaultDamping;

  /// Throws DomainError unless T1, T2 in (0, 1], C in [0, 1], |s1 + s2 - 1| <= 1e-9.
  void validate() const;
  double transmission_ratio() const noexcept { return t2 / t1; }

  friend bool operator==(const DampedModel&, const DampedModel&) = default;
};

struct ModelPoint {
  double phase = 0.0;      ///< principal value
  double amplitude = 0.0;  ///< modulus of the phasor sum
};

/// Throws OrthogonalityError when the phasor sum vanishes.
ModelPoint damped_phase_model(const DampedModel& model, double dchi);

/// Dynamical phase left over when -dchi1/dchi2 = s1/s2 differs from T_ratio.
double residual_dynamical_phase(double t_ratio, double s1, double s2, double dchi);

/// Fringe visibility 2|S|/(1 + |S|^2) for phasor sum S against a unit reference.
double fringe_visibility(const DampedModel& model, double dchi);

enum class NoiseKind { None, Poisson };

struct InterferogramMeta {
  DampedModel model;
  double dchi = 0.0;
  double mean_counts = 0.0;
  NoiseKind noise = NoiseKind::None;
  std::uint64_t seed = 0;
};

struct Interferogram {
  std::vector<double> eta;     ///< reference phase settings, radians
  std::vector<double> counts;  ///< nonnegative
  std::optional<InterferogramMeta> meta;

  /// Throws DomainError on size mismatch, fewer than 5 points, non-increasing
  /// eta or negative counts.
  void validate() const;
};

struct SynthesisOptions {
  double mean_counts = 1000.0;
  int n_points = 32;
  NoiseKind noise = NoiseKind::None;
  std::uint64_t seed = 0;
};

/// Counts mean*(1 + V cos(eta - Phi)) on eta_k = 4pi k/n.  Poisson draws use a
/// stream derived from the seed and the generating parameters only.
Interferogram synthesize_interferogram(const DampedModel& model, double dchi,
                                       const SynthesisOptions& options);

struct FringeFit {
  double offset = 0.0;
  double amplitude = 0.0;
  double phase = 0.0;  ///< (-pi, pi]
  double phase_stderr = 0.0;
  bool converged = false;

  double contrast() const noexcept { return offset != 0.0 ? amplitude / offset : 0.0; }
};

/// Weighted linear least squares for counts ~ A + B cos(eta - Phi).  A rank
/// deficient design returns converged = false; a vanishing B throws
/// OrthogonalityError.
FringeFit fit_fringe(const Interferogram& data);

struct SweepRow {
  double dchi = 0.0;
  double phi_ideal = 0.0;
  double phi_damped = 0.0;
  double phi_dynamical_residual = 0.0;
  double phi_geometric = 0.0;
  double omega = 0.0;
  double amplitude = 0.0;
};

/// Nearest-branch continuation of principal phases, leaving `anchor` as is.
std::vector<double> unwrap_phases(std::span<const double> principal, std::size_t anchor);

/// `steps` points from `from` with spacing (to - from)/steps; `to` itself is
/// excluded.
std::vector<double> uniform_grid(double from, double to, int steps);

struct SweepOptions {
  /// Use dynamical-phase-free shifts for the geometric column; otherwise the
  /// plate split chi1 = -s1 dchi, chi2 = s2 dchi.
  bool compensated = true;
  int segments_per_arc = 1024;
};

std::vector<SweepRow> phase_sweep(const DampedModel& model, std::span<const double> grid,
                                  const SweepOptions& options = {});

struct PhasePoint {
  double dchi = 0.0;
  double phase = 0.0;
};

struct VisibilityFit {
  double c = 0.0;
  double stderr_c = 0.0;
  double residual_sum_squares = 0.0;
};

/// Least-squares damping coefficient on [0, 1].  model.c is ignored.  Throws
/// IdentifiabilityError when the phases do not depend on C.
VisibilityFit fit_visibility_c(std::span<const PhasePoint> points, const DampedModel& model);

struct ContrastPoint {
  double dchi = 0.0;
  double amplitude = 0.0;
};

std::vector<ContrastPoint> fringe_contrast_curve(const DampedModel& model, std::span<const double> grid);

}  // namespace pathphase
