#include "pathphase/fringe_lab.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <string>

#include "pathphase/bloch_geometry.hpp"
#include "pathphase/errors.hpp"
#include "pathphase/state_engine.hpp"

namespace pathphase {

namespace {

void check_exponents(double s1, double s2) {
  if (!std::isfinite(s1) || !std::isfinite(s2) || std::abs(s1 + s2 - 1.0) > 1e-9) {
    throw DomainError("s1+s2 must equal 1");
  }
}

void check_grid(std::span<const double> grid) {
  if (grid.empty()) throw DomainError("dchi grid is empty");
  for (double d : grid) {
    if (!std::isfinite(d)) throw DomainError("dchi grid contains a non-finite value");
  }
}

std::complex<double> phasor_sum(const DampedModel& m, double damping, double dchi) {
  return std::polar(std::sqrt(m.t1), -m.s1 * dchi) + std::polar(damping * std::sqrt(m.t2), m.s2 * dchi);
}

std::size_t nearest_to_zero(std::span<const double> grid) {
  auto it = std::min_element(grid.begin(), grid.end(),
                             [](double a, double b) { return std::abs(a) < std::abs(b); });
  return static_cast<std::size_t>(it - grid.begin());
}

// Poisson stream depends only on the seed and the generating parameters.
std::mt19937_64 make_stream(std::uint64_t seed, const DampedModel& m, double dchi, double mean_counts,
                            int n_points) {
  std::vector<std::uint32_t> words;
  auto push = [&](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  for (double v : {m.t1, m.t2, m.s1, m.s2, m.c, dchi, mean_counts}) push(std::bit_cast<std::uint64_t>(v));
  push(static_cast<std::uint64_t>(n_points));
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

}  // namespace

void DampedModel::validate() const {
  auto in_unit = [](double t) { return std::isfinite(t) && t > 0.0 && t <= 1.0; };
  if (!in_unit(t1) || !in_unit(t2)) throw DomainError("transmissivities T1, T2 must lie in (0,1]");
  if (!std::isfinite(c) || c < 0.0 || c > 1.0) throw DomainError("damping C must lie in [0,1]");
  check_exponents(s1, s2);
}

ModelPoint damped_phase_model(const DampedModel& model, double dchi) {
  model.validate();
  if (!std::isfinite(dchi)) throw DomainError("dchi must be finite");
  const auto sum = phasor_sum(model, model.c, dchi);
  const double amplitude = std::abs(sum);
  if (amplitude < kOrthogonalityTolerance) throw OrthogonalityError();
  return {principal_angle(std::arg(sum)), amplitude};
}

double residual_dynamical_phase(double t_ratio, double s1, double s2, double dchi) {
  check_exponents(s1, s2);
  if (!std::isfinite(t_ratio) || t_ratio <= 0.0 || t_ratio > 1.0) {
    throw DomainError("transmission ratio must lie in (0,1]");
  }
  const double chi1 = -s1 * dchi;
  const double chi2 = s2 * dchi;
  return (chi1 + t_ratio * chi2) / (1.0 + t_ratio);
}

double fringe_visibility(const DampedModel& model, double dchi) {
  model.validate();
  const double s = std::abs(phasor_sum(model, model.c, dchi));
  return 2.0 * s / (1.0 + s * s);
}

void Interferogram::validate() const {
  if (eta.size() != counts.size()) throw DomainError("interferogram eta and counts differ in length");
  if (eta.size() < 5) throw DomainError("interferogram needs at least 5 points");
  for (std::size_t k = 0; k < eta.size(); ++k) {
    if (!std::isfinite(eta[k]) || !std::isfinite(counts[k])) {
      throw DomainError("interferogram contains non-finite values");
    }
    if (counts[k] < 0.0) throw DomainError("interferogram counts must be nonnegative");
    if (k > 0 && !(eta[k] > eta[k - 1])) throw DomainError("eta values must be strictly increasing");
  }
}

Interferogram synthesize_interferogram(const DampedModel& model, double dchi,
                                       const SynthesisOptions& options) {
  if (options.n_points < 5) throw DomainError("interferogram needs at least 5 points");
  if (!std::isfinite(options.mean_counts) || options.mean_counts <= 0.0) {
    throw DomainError("mean counts must be positive");
  }
  const ModelPoint point = damped_phase_model(model, dchi);
  const double visibility = fringe_visibility(model, dchi);

  Interferogram out;
  out.meta = InterferogramMeta{model, dchi, options.mean_counts, options.noise, options.seed};
  out.eta.reserve(static_cast<std::size_t>(options.n_points));
  out.counts.reserve(static_cast<std::size_t>(options.n_points));

  std::mt19937_64 stream = make_stream(options.seed, model, dchi, options.mean_counts, options.n_points);
  for (int k = 0; k < options.n_points; ++k) {
    const double eta = 2.0 * kTwoPi * static_cast<double>(k) / options.n_points;
    const double expected =
        std::max(0.0, options.mean_counts * (1.0 + visibility * std::cos(eta - point.phase)));
    double count = expected;
    if (options.noise == NoiseKind::Poisson) {
      count = expected > 0.0 ? static_cast<double>(std::poisson_distribution<long long>(expected)(stream))
                             : 0.0;
    }
    out.eta.push_back(eta);
    out.counts.push_back(count);
  }
  return out;
}

FringeFit fit_fringe(const Interferogram& data) {
  data.validate();

  Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  for (std::size_t k = 0; k < data.eta.size(); ++k) {
    const Eigen::Vector3d row(1.0, std::cos(data.eta[k]), std::sin(data.eta[k]));
    const double weight = 1.0 / std::max(data.counts[k], 1.0);
    normal.noalias() += weight * row * row.transpose();
    rhs.noalias() += weight * data.counts[k] * row;
  }

  FringeFit fit;
  Eigen::ColPivHouseholderQR<Eigen::Matrix3d> qr(normal);
  qr.setThreshold(1e-12);
  if (qr.rank() < 3) {
    fit.phase = std::numeric_limits<double>::quiet_NaN();
    fit.phase_stderr = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  const Eigen::Vector3d beta = qr.solve(rhs);
  const Eigen::Matrix3d cov = qr.inverse();

  const double a = beta(0);
  const double p = beta(1);
  const double q = beta(2);
  const double b = std::hypot(p, q);
  if (b < 1e-12 * std::max(1.0, std::abs(a))) {
    throw OrthogonalityError("phase undefined: fringe amplitude vanishes");
  }

  fit.offset = a;
  fit.amplitude = b;
  fit.phase = principal_angle(std::atan2(q, p));
  const double var = (q * q * cov(1, 1) + p * p * cov(2, 2) - 2.0 * p * q * cov(1, 2)) / (b * b * b * b);
  fit.phase_stderr = std::sqrt(std::max(var, 0.0));
  fit.converged = true;
  return fit;
}

std::vector<double> unwrap_phases(std::span<const double> principal, std::size_t anchor) {
  std::vector<double> out(principal.begin(), principal.end());
  if (out.empty()) return out;
  if (anchor >= out.size()) throw DomainError("unwrap anchor out of range");
  for (std::size_t k = anchor + 1; k < out.size(); ++k) {
    out[k] = out[k - 1] + angle_difference(principal[k], out[k - 1]);
  }
  for (std::size_t k = anchor; k-- > 0;) {
    out[k] = out[k + 1] + angle_difference(principal[k], out[k + 1]);
  }
  return out;
}

std::vector<double> uniform_grid(double from, double to, int steps) {
  if (!std::isfinite(from) || !std::isfinite(to) || !(from < to)) {
    throw DomainError("grid requires finite from < to");
  }
  if (steps < 1) throw DomainError("grid requires at least one step");
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) grid.push_back(from + (to - from) * static_cast<double>(k) / steps);
  return grid;
}

std::vector<SweepRow> phase_sweep(const DampedModel& model, std::span<const double> grid,
                                  const SweepOptions& options) {
  model.validate();
  check_grid(grid);
  const double ratio = model.transmission_ratio();
  check_transmissivity(ratio);

  DampedModel ideal = model;
  ideal.c = 1.0;

  std::vector<double> ideal_phase;
  std::vector<double> damped_phase;
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (double dchi : grid) {
    const ModelPoint undamped = damped_phase_model(ideal, dchi);
    const ModelPoint damped = damped_phase_model(model, dchi);
    ideal_phase.push_back(undamped.phase);
    damped_phase.push_back(damped.phase);

    const ShiftPair shifts = options.compensated ? compensated_shifts(ratio, dchi)
                                                 : ShiftPair{-model.s1 * dchi, model.s2 * dchi};

    SweepRow row;
    row.dchi = dchi;
    row.phi_dynamical_residual = residual_dynamical_phase(ratio, model.s1, model.s2, dchi);
    row.phi_geometric = phase_decomposition(ratio, shifts.chi1, shifts.chi2).geometric;
    row.omega = signed_solid_angle(build_evolution_path(ratio, dchi, options.segments_per_arc));
    row.amplitude = damped.amplitude;
    rows.push_back(row);
  }

  const std::size_t anchor = nearest_to_zero(grid);
  const auto ideal_unwrapped = unwrap_phases(ideal_phase, anchor);
  const auto damped_unwrapped = unwrap_phases(damped_phase, anchor);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    rows[k].phi_ideal = ideal_unwrapped[k];
    rows[k].phi_damped = damped_unwrapped[k];
  }
  return rows;
}

VisibilityFit fit_visibility_c(std::span<const PhasePoint> points, const DampedModel& model) {
  DampedModel base = model;
  base.c = 1.0;
  base.validate();
  if (points.size() < 3) throw DomainError("visibility fit needs at least 3 points");
  for (const auto& p : points) {
    if (!std::isfinite(p.dchi) || !std::isfinite(p.phase)) {
      throw DomainError("visibility fit points must be finite");
    }
  }

  auto model_phase = [&](double c, double dchi) { return std::arg(phasor_sum(base, c, dchi)); };
  auto objective = [&](double c) {
    double sum = 0.0;
    for (const auto& p : points) {
      const double r = angle_difference(p.phase, model_phase(c, p.dchi));
      sum += r * r;
    }
    return sum;
  };

  double sensitivity = 0.0;
  for (const auto& p : points) {
    const double reference = model_phase(0.0, p.dchi);
    for (double c : {0.25, 0.5, 0.75, 1.0}) {
      sensitivity = std::max(sensitivity, std::abs(angle_difference(model_phase(c, p.dchi), reference)));
    }
  }
  if (sensitivity < 1e-9) throw IdentifiabilityError("C unidentifiable: phases do not depend on C");

  constexpr int kBits = std::numeric_limits<double>::digits / 2;
  std::uintmax_t max_iter = 500;
  auto [best_c, best_s] = boost::math::tools::brent_find_minima(objective, 0.0, 1.0, kBits, max_iter);
  for (double edge : {0.0, 1.0}) {
    const double s = objective(edge);
    if (s < best_s) {
      best_c = edge;
      best_s = s;
    }
  }

  VisibilityFit fit;
  fit.c = best_c;
  fit.residual_sum_squares = best_s;

  constexpr double h = 1e-4;
  const double mid = std::clamp(best_c, h, 1.0 - h);
  const double curvature = (objective(mid + h) - 2.0 * objective(mid) + objective(mid - h)) / (h * h);
  const double dof = static_cast<double>(points.size() - 1);
  fit.stderr_c = curvature > 0.0 ? std::sqrt(2.0 * (best_s / dof) / curvature)
                                 : std::numeric_limits<double>::infinity();
  return fit;
}

std::vector<ContrastPoint> fringe_contrast_curve(const DampedModel& model, std::span<const double> grid) {
  model.validate();
  check_grid(grid);
  std::vector<ContrastPoint> out;
  out.reserve(grid.size());
  for (double dchi : grid) out.push_back({dchi, std::abs(phasor_sum(model, model.c, dchi))});
  return out;
}

}  // namespace pathphase
