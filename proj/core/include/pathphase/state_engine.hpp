#pragma once

/*
 * Two-path state evolution for the second interferometer loop.
 *
 * The path Hilbert space is spanned by |p_perp> (upper / reflected beam) and
 * |p> (lower / transmitted beam).  The interfering beam starts in |p>, is
 * split onto |q> = (|p_perp> + |p>)/sqrt(2), attenuated on |p>, phase shifted
 * on both paths and finally projected back onto |q> at recombination:
 *
 *   |p>  ->  (|p_perp> + |p>)/sqrt(2)
 *        ->  (|p_perp> + sqrt(T)|p>)/sqrt(2)
 *        ->  (e^{i chi1}|p_perp> + sqrt(T) e^{i chi2}|p>)/sqrt(2)
 *
 * The relative phase against a reference prepared in |q> is the Pancharatnam
 * phase arg<q|psi>.  Its dynamical part is (chi1 + T chi2)/(1 + T) and the
 * remainder is geometric.
 */

#include <complex>
#include <span>
#include <variant>

namespace pathphase {

using Amplitude = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Below this inner-product modulus two states are treated as orthogonal.
inline constexpr double kOrthogonalityTolerance = 1e-12;

/// Principal value of an angle in (-pi, pi].
double principal_angle(double radians) noexcept;

/// Signed distance between two angles, reduced into (-pi, pi].
inline double angle_difference(double a, double b) noexcept { return principal_angle(a - b); }

/// Pure state over the path basis {|p_perp>, |p>}.  May be subnormalized
/// after absorption.
struct PathState {
  Amplitude perp{};
  Amplitude p{};

  double norm_squared() const noexcept { return std::norm(perp) + std::norm(p); }
  bool is_finite() const noexcept;

  static PathState upper() noexcept { return {1.0, 0.0}; }
  static PathState lower() noexcept { return {0.0, 1.0}; }
  /// Equal superposition |q>.
  static PathState q() noexcept;

  friend bool operator==(const PathState&, const PathState&) = default;
};

/// <a|b>
Amplitude inner_product(const PathState& a, const PathState& b) noexcept;

/// Beam splitter onto |q>, scaled so that |p> maps to |q>.  The operator is
/// sqrt(2)|q><q|, so applying it twice equals sqrt(2) times applying it once.
struct SplitToQ {
  friend bool operator==(const SplitToQ&, const SplitToQ&) = default;
};

/// Absorber on the |p> path with intensity transmissivity in [0, 1].
struct Attenuate {
  double transmissivity = 1.0;
  friend bool operator==(const Attenuate&, const Attenuate&) = default;
};

/// Phase shifter: e^{i chi1} on |p_perp>, e^{i chi2} on |p>.
struct PhaseShift {
  double chi1 = 0.0;
  double chi2 = 0.0;
  friend bool operator==(const PhaseShift&, const PhaseShift&) = default;
};

/// Interference projector |q><q| applied at recombination (scaling constant
/// of the projection fixed so that |q> maps to itself).
struct RecombineQ {
  friend bool operator==(const RecombineQ&, const RecombineQ&) = default;
};

using Element = std::variant<SplitToQ, Attenuate, PhaseShift, RecombineQ>;

/// Throws DomainError when the element's parameters are invalid.
void validate(const Element& element);

/// Throws DomainError for non-finite amplitudes or an invalid element.
PathState apply_element(const PathState& state, const Element& element);

/// Applies the elements left to right, starting from `input`.
PathState apply_elements(std::span<const Element> elements, PathState input = PathState::lower());

/// State after split, absorber and phase shifter: (e^{i chi1}, sqrt(T) e^{i chi2})/sqrt(2).
PathState evolve_second_loop(double transmissivity, double chi1, double chi2);

/// arg<r|t> in (-pi, pi].  Throws OrthogonalityError when |<r|t>| < 1e-12.
double pancharatnam_phase(const PathState& t, const PathState& r);

struct PhaseDecomposition {
  double pancharatnam = 0.0;  ///< principal value, radians
  double dynamical = 0.0;     ///< radians
  double geometric = 0.0;     ///< pancharatnam - dynamical
  double amplitude = 0.0;     ///< |<q|psi_t>|
};

/// (chi1 + T chi2)/(1 + T)
double dynamical_phase(double transmissivity, double chi1, double chi2);

/// Closed-form decomposition for the ideal loop.  Throws OrthogonalityError
/// at T = 1, chi2 - chi1 = pi (mod 2pi).
PhaseDecomposition phase_decomposition(double transmissivity, double chi1, double chi2);

struct ShiftPair {
  double chi1 = 0.0;
  double chi2 = 0.0;
};

/// Shifts with chi2 - chi1 = dchi and vanishing dynamical phase.
ShiftPair compensated_shifts(double transmissivity, double dchi);

/// Geometric phase of the compensated loop at dchi = 2pi, tracked
/// continuously: -2pi T/(1 + T).
double cyclic_geometric_phase(double transmissivity);

/// Throws DomainError unless T is finite and within [0, 1].
void check_transmissivity(double transmissivity);

}  // namespace pathphase
