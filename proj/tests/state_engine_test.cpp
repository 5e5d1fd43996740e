#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "pathphase/errors.hpp"
#include "pathphase/state_engine.hpp"

using namespace pathphase;
using doctest::Approx;

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

void check_state(const PathState& s, Amplitude perp, Amplitude p, double tol = 1e-12) {
  CHECK(std::abs(s.perp - perp) < tol);
  CHECK(std::abs(s.p - p) < tol);
}

}  // namespace

TEST_CASE("apply_element maps") {
  SUBCASE("split sends |p> to |q>") {
    check_state(apply_element(PathState::lower(), SplitToQ{}), kInvSqrt2, kInvSqrt2);
  }
  SUBCASE("beam block removes the |p> amplitude") {
    check_state(apply_element(PathState::q(), Attenuate{0.0}), kInvSqrt2, 0.0);
  }
  SUBCASE("pi shift on |p> flips its sign") {
    check_state(apply_element(PathState::q(), PhaseShift{0.0, oracle::pi}), kInvSqrt2, -kInvSqrt2);
  }
  SUBCASE("recombine equals the |q><q| matrix product") {
    const PathState in{kInvSqrt2, std::sqrt(0.122) * kInvSqrt2};
    const auto expected = oracle::mul(oracle::projector_q(), {in.perp, in.p});
    const PathState out = apply_element(in, RecombineQ{});
    check_state(out, expected[0], expected[1]);
    // mpmath: (1 + sqrt(0.122))/(2 sqrt(2))
    CHECK(out.perp.real() == Approx(0.477044280945558).epsilon(1e-14));
    CHECK(out.p.real() == Approx(0.477044280945558).epsilon(1e-14));
  }
}

TEST_CASE("split and recombine are projectors up to scale") {
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const PathState s{{u(gen), u(gen)}, {u(gen), u(gen)}};
    const PathState once = apply_element(s, RecombineQ{});
    const PathState twice = apply_element(once, RecombineQ{});
    check_state(twice, once.perp, once.p);

    const PathState split_once = apply_element(s, SplitToQ{});
    const PathState split_twice = apply_element(split_once, SplitToQ{});
    check_state(split_twice, std::sqrt(2.0) * split_once.perp, std::sqrt(2.0) * split_once.p);
  }
}

TEST_CASE("apply_element rejects invalid input") {
  CHECK_THROWS_AS(apply_element(PathState::q(), Attenuate{1.5}), DomainError);
  CHECK_THROWS_AS(apply_element(PathState::q(), Attenuate{-0.1}), DomainError);
  const PathState bad{std::numeric_limits<double>::quiet_NaN(), 0.0};
  CHECK_THROWS_AS(apply_element(bad, SplitToQ{}), DomainError);
  CHECK_THROWS_AS(apply_element(PathState::q(), PhaseShift{std::numeric_limits<double>::infinity(), 0.0}),
                  DomainError);
}

TEST_CASE("evolve_second_loop") {
  check_state(evolve_second_loop(1.0, 0.0, 0.0), kInvSqrt2, kInvSqrt2);
  check_state(evolve_second_loop(0.0, 0.4, 2.0), std::polar(kInvSqrt2, 0.4), 0.0);

  const PathState s = evolve_second_loop(0.122, -0.683, 5.600);
  // mpmath: sqrt(0.122)/sqrt(2) = 0.24698178070456938
  CHECK(std::abs(s.p) == Approx(0.246981780704569).epsilon(1e-14));
  CHECK(std::arg(s.p) == Approx(oracle::wrap(5.600)).epsilon(1e-14));
  CHECK(s.perp.real() == Approx(0.548490598642124).epsilon(1e-14));
  CHECK(s.perp.imag() == Approx(-0.446271288793268).epsilon(1e-14));

  CHECK_THROWS_AS(evolve_second_loop(1.01, 0.0, 0.0), DomainError);
}

TEST_CASE("evolve_second_loop equals the element chain") {
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> tdist(0.0, 1.0);
  std::uniform_real_distribution<double> chi(-10.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    const double t = tdist(gen);
    const double c1 = chi(gen);
    const double c2 = chi(gen);
    const Element chain[] = {SplitToQ{}, Attenuate{t}, PhaseShift{c1, c2}};
    const PathState composed = apply_elements(chain);
    const PathState direct = evolve_second_loop(t, c1, c2);
    check_state(composed, direct.perp, direct.p);
    CHECK(direct.norm_squared() == Approx((1.0 + t) / 2.0).epsilon(1e-14));
    CHECK(direct.norm_squared() <= 1.0 + 1e-15);
  }
}

TEST_CASE("unabsorbed evolution preserves the norm") {
  const PathState s = evolve_second_loop(1.0, 0.3, -2.2);
  CHECK(std::abs(s.norm_squared() - 1.0) < 1e-12);
}

TEST_CASE("pancharatnam_phase") {
  CHECK(pancharatnam_phase(PathState::q(), PathState::q()) == Approx(0.0));

  const PathState t = apply_element(evolve_second_loop(0.122, -0.683, 5.600), RecombineQ{});
  CHECK(pancharatnam_phase(t, PathState::q()) == Approx(-0.683).epsilon(1e-3));

  std::mt19937 gen(3);
  std::uniform_real_distribution<double> delta(-oracle::pi + 1e-9, oracle::pi);
  const PathState r{0.6, Amplitude(0.3, 0.5)};
  for (int i = 0; i < 50; ++i) {
    const double d = delta(gen);
    const Amplitude g = std::polar(1.0, d);
    const PathState shifted{g * r.perp, g * r.p};
    CHECK(pancharatnam_phase(shifted, r) == Approx(d).epsilon(1e-12));
  }

  CHECK_THROWS_AS(pancharatnam_phase(PathState::upper(), PathState::lower()), OrthogonalityError);
}

TEST_CASE("phase_decomposition examples") {
  SUBCASE("compensated cyclic loop at T = 0.122") {
    const auto d = phase_decomposition(0.122, -2.0 * oracle::pi * 0.122 / 1.122, 2.0 * oracle::pi / 1.122);
    CHECK(d.pancharatnam == Approx(-0.683).epsilon(1e-3));
    CHECK(std::abs(d.dynamical) < 1e-12);
    CHECK(d.geometric == Approx(-0.683198402384946).epsilon(1e-12));
  }
  SUBCASE("beam block") {
    const auto d = phase_decomposition(0.0, 0.7, 2.5);
    CHECK(d.pancharatnam == Approx(0.7));
    CHECK(d.dynamical == Approx(0.7));
    CHECK(std::abs(d.geometric) < 1e-15);
  }
  SUBCASE("equal shifts at full transmission") {
    const auto d = phase_decomposition(1.0, -1.1, -1.1);
    CHECK(d.pancharatnam == Approx(-1.1));
    CHECK(d.dynamical == Approx(-1.1));
    CHECK(std::abs(d.geometric) < 1e-15);
  }
  SUBCASE("compensated quarter turn at T = 0.5") {
    const auto d = phase_decomposition(0.5, -oracle::pi / 6.0, oracle::pi / 3.0);
    // mpmath: arg(e^{-i pi/6} + sqrt(0.5) e^{i pi/3})
    CHECK(d.geometric == Approx(0.0918809330720885).epsilon(1e-12));
  }
  SUBCASE("orthogonality") {
    CHECK_THROWS_AS(phase_decomposition(1.0, -oracle::pi / 2, oracle::pi / 2), OrthogonalityError);
  }
}

TEST_CASE("phase_decomposition matches the arctan form away from its poles") {
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> tdist(0.0, 1.0);
  std::uniform_real_distribution<double> base(-3.0, 3.0);
  std::uniform_real_distribution<double> dist(-2.9, 2.9);
  for (int i = 0; i < 500; ++i) {
    const double t = tdist(gen);
    const double c1 = base(gen);
    const double c2 = c1 + dist(gen);
    const auto d = phase_decomposition(t, c1, c2);
    CHECK(std::abs(angle_difference(d.pancharatnam, oracle::arctan_phase(t, c1, c2))) < 1e-10);
  }
}

TEST_CASE("compensated_shifts") {
  auto s = compensated_shifts(1.0, oracle::pi);
  CHECK(s.chi1 == Approx(-oracle::pi / 2));
  CHECK(s.chi2 == Approx(oracle::pi / 2));

  // mpmath LU solve of chi2 - chi1 = 2pi, chi1 + T chi2 = 0
  s = compensated_shifts(0.122, 2.0 * oracle::pi);
  CHECK(s.chi1 == Approx(-0.683198402384946).epsilon(1e-13));
  CHECK(s.chi2 == Approx(5.59998690479464).epsilon(1e-13));

  s = compensated_shifts(0.0, 4.2);
  CHECK(s.chi1 == 0.0);
  CHECK(s.chi2 == Approx(4.2));

  std::mt19937 gen(13);
  std::uniform_real_distribution<double> tdist(0.0, 1.0);
  std::uniform_real_distribution<double> ddist(-20.0, 20.0);
  for (int i = 0; i < 200; ++i) {
    const double t = tdist(gen);
    const double d = ddist(gen);
    const auto p = compensated_shifts(t, d);
    CHECK(p.chi2 - p.chi1 == Approx(d).epsilon(1e-12));
    CHECK(std::abs(dynamical_phase(t, p.chi1, p.chi2)) < 1e-12);
  }
}

TEST_CASE("cyclic_geometric_phase") {
  CHECK(cyclic_geometric_phase(0.0) == 0.0);
  CHECK(cyclic_geometric_phase(0.122) == Approx(-0.683).epsilon(1e-3));
  CHECK(cyclic_geometric_phase(1.0) == Approx(-oracle::pi));
  for (double t : {0.05, 0.3, 0.7, 0.95}) {
    const double cos_theta = (1.0 - t) / (1.0 + t);
    CHECK(cyclic_geometric_phase(t) == Approx(-oracle::pi * (1.0 - cos_theta)).epsilon(1e-14));
  }
}

TEST_CASE("properties of the decomposition") {
  std::mt19937 gen(17);
  std::uniform_real_distribution<double> tdist(0.0, 0.95);
  std::uniform_real_distribution<double> ddist(-9.0, 9.0);
  std::uniform_real_distribution<double> gauge(-12.0, 12.0);

  SUBCASE("gauge shift moves Phi and Phi_d by delta, leaves Phi_g") {
    for (int i = 0; i < 300; ++i) {
      const double t = tdist(gen);
      const double c1 = ddist(gen);
      const double c2 = ddist(gen);
      const double delta = gauge(gen);
      const auto a = phase_decomposition(t, c1, c2);
      const auto b = phase_decomposition(t, c1 + delta, c2 + delta);
      CHECK(std::abs(angle_difference(b.pancharatnam, a.pancharatnam + delta)) < 1e-10);
      CHECK(b.dynamical - a.dynamical == Approx(delta).epsilon(1e-12));
      CHECK(std::abs(angle_difference(b.geometric, a.geometric)) < 1e-10);
    }
  }
  SUBCASE("geometric phase depends only on T and dchi") {
    for (int i = 0; i < 300; ++i) {
      const double t = tdist(gen);
      const double d = ddist(gen);
      const auto ref = compensated_shifts(t, d);
      const double g0 = phase_decomposition(t, ref.chi1, ref.chi2).geometric;
      const double c1 = gauge(gen);
      const double g1 = phase_decomposition(t, c1, c1 + d).geometric;
      CHECK(std::abs(angle_difference(g1, g0)) < 1e-10);
    }
  }
  SUBCASE("antisymmetry in dchi") {
    for (int i = 0; i < 300; ++i) {
      const double t = tdist(gen);
      const double d = ddist(gen);
      const auto plus = compensated_shifts(t, d);
      const auto minus = compensated_shifts(t, -d);
      const double gp = phase_decomposition(t, plus.chi1, plus.chi2).geometric;
      const double gm = phase_decomposition(t, minus.chi1, minus.chi2).geometric;
      CHECK(std::abs(angle_difference(gm, -gp)) < 1e-10);
    }
  }
  SUBCASE("null cases") {
    for (int i = 0; i < 100; ++i) {
      const double t = tdist(gen);
      const double d = ddist(gen);
      CHECK(std::abs(phase_decomposition(t, 0.4, 0.4).geometric) < 1e-12);
      CHECK(std::abs(phase_decomposition(0.0, 0.3, 0.3 + d).geometric) < 1e-12);
      const double inside = std::fmod(d, oracle::pi - 1e-6);
      const auto s = compensated_shifts(1.0, inside);
      CHECK(std::abs(phase_decomposition(1.0, s.chi1, s.chi2).geometric) < 1e-12);
    }
  }
  SUBCASE("aligned phasors at dchi = 2pi") {
    std::uniform_real_distribution<double> sdist(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
      const double s1 = sdist(gen);
      const double t = tdist(gen);
      const auto d = phase_decomposition(t, -s1 * 2.0 * oracle::pi, (1.0 - s1) * 2.0 * oracle::pi);
      CHECK(std::abs(angle_difference(d.pancharatnam, -2.0 * oracle::pi * s1)) < 1e-12);
    }
  }
}

TEST_CASE("principal_angle range") {
  CHECK(principal_angle(oracle::pi) == Approx(oracle::pi));
  CHECK(principal_angle(-oracle::pi) == Approx(oracle::pi));
  CHECK(principal_angle(3.0 * oracle::pi / 2.0) == Approx(-oracle::pi / 2.0));
  CHECK(principal_angle(0.0) == 0.0);
}
