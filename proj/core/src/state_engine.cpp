#include "pathphase/state_engine.hpp"

#include <cmath>
#include <string>

#include "pathphase/errors.hpp"

namespace pathphase {

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

double principal_angle(double radians) noexcept {
  double r = std::remainder(radians, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

bool PathState::is_finite() const noexcept {
  return std::isfinite(perp.real()) && std::isfinite(perp.imag()) && std::isfinite(p.real()) &&
         std::isfinite(p.imag());
}

PathState PathState::q() noexcept { return {kInvSqrt2, kInvSqrt2}; }

Amplitude inner_product(const PathState& a, const PathState& b) noexcept {
  return std::conj(a.perp) * b.perp + std::conj(a.p) * b.p;
}

void check_transmissivity(double transmissivity) {
  if (!std::isfinite(transmissivity) || transmissivity < 0.0 || transmissivity > 1.0) {
    throw DomainError("transmissivity " + std::to_string(transmissivity) + " out of range [0,1]");
  }
}

void validate(const Element& element) {
  std::visit(Overloaded{
                 [](const Attenuate& a) { check_transmissivity(a.transmissivity); },
                 [](const PhaseShift& s) {
                   if (!std::isfinite(s.chi1) || !std::isfinite(s.chi2))
                     throw DomainError("phase shift must be finite");
                 },
                 [](const auto&) {},
             },
             element);
}

PathState apply_element(const PathState& state, const Element& element) {
  if (!state.is_finite()) throw DomainError("non-finite path amplitudes");
  validate(element);
  return std::visit(
      Overloaded{
          [&](const SplitToQ&) {
            // sqrt(2) <q|s> |q> = (a + b)/sqrt(2) (1, 1)
            const Amplitude c = (state.perp + state.p) * kInvSqrt2;
            return PathState{c, c};
          },
          [&](const Attenuate& a) {
            return PathState{state.perp, state.p * std::sqrt(a.transmissivity)};
          },
          [&](const PhaseShift& s) {
            return PathState{state.perp * std::polar(1.0, s.chi1), state.p * std::polar(1.0, s.chi2)};
          },
          [&](const RecombineQ&) {
            const Amplitude c = 0.5 * (state.perp + state.p);
            return PathState{c, c};
          },
      },
      element);
}

PathState apply_elements(std::span<const Element> elements, PathState input) {
  for (const auto& e : elements) input = apply_element(input, e);
  return input;
}

PathState evolve_second_loop(double transmissivity, double chi1, double chi2) {
  check_transmissivity(transmissivity);
  if (!std::isfinite(chi1) || !std::isfinite(chi2)) throw DomainError("phase shift must be finite");
  return {std::polar(kInvSqrt2, chi1), std::polar(std::sqrt(transmissivity) * kInvSqrt2, chi2)};
}

double pancharatnam_phase(const PathState& t, const PathState& r) {
  if (!t.is_finite() || !r.is_finite()) throw DomainError("non-finite path amplitudes");
  const Amplitude overlap = inner_product(r, t);
  if (std::abs(overlap) < kOrthogonalityTolerance) throw OrthogonalityError();
  return principal_angle(std::arg(overlap));
}

double dynamical_phase(double transmissivity, double chi1, double chi2) {
  check_transmissivity(transmissivity);
  return (chi1 + transmissivity * chi2) / (1.0 + transmissivity);
}

PhaseDecomposition phase_decomposition(double transmissivity, double chi1, double chi2) {
  check_transmissivity(transmissivity);
  if (!std::isfinite(chi1) || !std::isfinite(chi2)) throw DomainError("phase shift must be finite");

  const Amplitude sum = std::polar(1.0, chi1) + std::polar(std::sqrt(transmissivity), chi2);
  const double amplitude = 0.5 * std::abs(sum);
  if (amplitude < kOrthogonalityTolerance) throw OrthogonalityError();

  PhaseDecomposition d;
  d.pancharatnam = principal_angle(std::arg(sum));
  d.dynamical = dynamical_phase(transmissivity, chi1, chi2);
  d.geometric = d.pancharatnam - d.dynamical;
  d.amplitude = amplitude;
  return d;
}

ShiftPair compensated_shifts(double transmissivity, double dchi) {
  check_transmissivity(transmissivity);
  if (!std::isfinite(dchi)) throw DomainError("phase shift must be finite");
  const double denom = 1.0 + transmissivity;
  return {-transmissivity * dchi / denom, dchi / denom};
}

double cyclic_geometric_phase(double transmissivity) {
  check_transmissivity(transmissivity);
  return -kTwoPi * transmissivity / (1.0 + transmissivity);
}

}  // namespace pathphase
