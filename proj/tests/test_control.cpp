#include <gtest/gtest.h>

#include <random>

#include "swq/control.hpp"

using namespace swq;

namespace {

constexpr double kRabi = 2.0 * kPi * 190e3;
constexpr double kLarmor = 2.0 * kPi * 180e3;

ComplexMatrix exp_pauli(double half_angle, const ComplexMatrix& p) {
  return std::cos(half_angle) * pauli::identity() - kI * std::sin(half_angle) * p;
}

PureState qutrit_ket(cplx a, cplx b, cplx c) {
  ComplexVector v(3);
  v << a, b, c;
  return PureState(v);
}

std::array<double, 3> random_axis(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::array<double, 3> a{n(rng), n(rng), n(rng)};
  const double norm = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
  for (auto& x : a) x /= norm;
  return a;
}

}  // namespace

TEST(r_z, examples) {
  EXPECT_LT(max_abs(r_z(0.0, kLarmor) - pauli::identity()), 1e-15);
  const ComplexMatrix half = r_z(2.7778e-6, kLarmor);
  EXPECT_NEAR(half(0, 0).real(), -1.0, 1e-7);
  EXPECT_NEAR(half(1, 1).real(), 1.0, 1e-15);
  EXPECT_LT(max_abs(r_z(2.0 * kPi / kLarmor, kLarmor) - pauli::identity()), 1e-12);
  EXPECT_THROW(r_z(-1e-9, kLarmor), ContractViolation);
}

TEST(r_n, examples) {
  EXPECT_LT(max_abs(r_n(0.0, kRabi, 0.3) - pauli::identity()), 1e-15);
  EXPECT_LT(max_abs(r_n(kPi / kRabi, kRabi, 0.0) + kI * pauli::x()), 1e-12);
  const ComplexVector out = r_n(0.5 * kPi / kRabi, kRabi, 0.0) * spinwave::down().amplitudes();
  EXPECT_LT((out - spinwave::left().amplitudes()).norm(), 1e-12);
  EXPECT_THROW(r_n(-1.0, kRabi, 0.0), ContractViolation);
}

TEST(r_n, axis_by_phase_property) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> dur(0.0, 20e-6);
  std::uniform_real_distribution<double> freq(1e5, 1e7);
  for (int k = 0; k < 1000; ++k) {
    const double t = dur(rng);
    const double omega = freq(rng);
    const ComplexMatrix rx = r_n(t, omega, 0.0);
    const ComplexMatrix ry = r_n(t, omega, -kPi / 2);
    ASSERT_TRUE(is_unitary(rx, 1e-12));
    ASSERT_TRUE(is_unitary(r_z(t, omega), 1e-12));
    ASSERT_NEAR(gate_overlap(rx, exp_pauli(omega * t / 2, pauli::x())), 1.0, 1e-12);
    ASSERT_NEAR(gate_overlap(ry, exp_pauli(omega * t / 2, pauli::y())), 1.0, 1e-12);
  }
}

TEST(zyz_decompose, identity_is_canonical) {
  const auto e = zyz_decompose(pauli::identity());
  EXPECT_EQ(e.alpha, 0.0);
  EXPECT_EQ(e.beta, 0.0);
  EXPECT_EQ(e.gamma, 0.0);
  EXPECT_EQ(e.delta, 0.0);
}

TEST(zyz_decompose, pure_y_rotation) {
  for (double beta : {0.1, 1.0, 2.0, 3.0}) {
    const auto e = zyz_decompose(r_y(beta));
    EXPECT_NEAR(e.alpha, 0.0, 1e-12);
    EXPECT_NEAR(e.gamma, 0.0, 1e-12);
    EXPECT_NEAR(e.beta, beta, 1e-12);
  }
}

TEST(zyz_decompose, haar_round_trip) {
  std::mt19937_64 rng(22);
  for (int k = 0; k < 1000; ++k) {
    const ComplexMatrix u = haar_random_unitary(2, rng);
    const auto e = zyz_decompose(u);
    ASSERT_GE(e.beta, 0.0);
    ASSERT_LE(e.beta, kPi);
    ASSERT_LT(max_abs(zyz_compose(e) - u), 1e-9);
  }
  EXPECT_THROW(zyz_decompose(2.0 * pauli::identity()), ContractViolation);
}

TEST(rotation_from_unitary, inverts_rotation_unitary) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> ang(0.0, kPi);
  for (int k = 0; k < 200; ++k) {
    const RotationSpec spec{random_axis(rng), ang(rng)};
    const RotationSpec back = rotation_from_unitary(std::exp(kI * 0.4) * rotation_unitary(spec));
    ASSERT_LT(phase_invariant_distance(rotation_unitary(back), rotation_unitary(spec)), 1e-10);
  }
}

TEST(compile_rotation, z_axis_single_larmor) {
  for (double theta : {0.2, 1.0, 2.5}) {
    const auto pulses = compile_rotation({{0, 0, 1}, theta}, kRabi, kLarmor);
    ASSERT_EQ(pulses.size(), 1u);
    EXPECT_EQ(pulses[0].kind, PulseKind::LarmorHold);
    EXPECT_LT(pulses[0].duration_s, 2.0 * kPi / kLarmor);
    EXPECT_NEAR(gate_overlap(sequence_unitary(pulses), exp_pauli(theta, pauli::z())), 1.0, 1e-12);
  }
}

TEST(compile_rotation, x_axis_single_raman) {
  const auto pulses = compile_rotation({{1, 0, 0}, kPi / 2}, kRabi, kLarmor);
  ASSERT_EQ(pulses.size(), 1u);
  EXPECT_EQ(pulses[0].kind, PulseKind::RamanPulse);
  EXPECT_NEAR(pulses[0].phase, 0.0, 1e-15);
  EXPECT_NEAR(kRabi * pulses[0].duration_s, kPi, 1e-12);
}

TEST(compile_rotation, diagonal_axis_grid) {
  const double s = 1.0 / std::sqrt(3.0);
  for (int k = 1; k < 12; ++k) {
    const RotationSpec spec{{s, s, s}, k * kPi / 12};
    const auto pulses = compile_rotation(spec, kRabi, kLarmor);
    ASSERT_EQ(pulses.size(), 3u);
    EXPECT_EQ(pulses[1].kind, PulseKind::RamanPulse);
    EXPECT_LT(phase_invariant_distance(sequence_unitary(pulses), rotation_unitary(spec)), 1e-8);
  }
}

TEST(compile_rotation, random_specs_property) {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> ang(-10.0, 10.0);
  for (int k = 0; k < 500; ++k) {
    const RotationSpec spec{random_axis(rng), ang(rng)};
    const auto pulses = compile_rotation(spec, kRabi, kLarmor);
    for (const auto& p : pulses) {
      ASSERT_GE(p.duration_s, 0.0);
      if (p.kind == PulseKind::LarmorHold) ASSERT_LT(p.duration_s, 2.0 * kPi / kLarmor);
    }
    ASSERT_LT(phase_invariant_distance(sequence_unitary(pulses), rotation_unitary(spec)), 1e-8);
  }
}

TEST(compile_rotation, errors) {
  EXPECT_THROW(compile_rotation({{1, 0, 0}, 1.0}, 0.0, kLarmor), ContractViolation);
  EXPECT_THROW(compile_rotation({{1, 1, 0}, 1.0}, kRabi, kLarmor), ContractViolation);
}

TEST(qutrit_hamiltonian, zero_rabi) {
  const auto p = PulseSpec::raman(1e-6, 0.0, 0.3, 2.0 * kPi * 560e3);
  const ComplexMatrix h = qutrit_hamiltonian(p);
  ComplexMatrix want = ComplexMatrix::Zero(3, 3);
  want(2, 2) = 2.0 * kPi * 560e3;
  EXPECT_LT(max_abs(h - want), 1e-15);
  EXPECT_THROW(qutrit_hamiltonian(PulseSpec::larmor_hold(1e-6, kLarmor)), ContractViolation);
}

TEST(qutrit_hamiltonian, far_detuned_limit) {
  // Residual is the second-order light shift ~ pi/(4 ratio) for a pi pulse.
  for (auto [ratio, tol] : {std::pair{1e4, 1e-4}, std::pair{1e7, 1e-6}}) {
    const auto p = PulseSpec::raman(kPi / kRabi, kRabi, 0.4, ratio * kRabi);
    const ComplexMatrix u3 = qutrit_propagator(p);
    const ComplexMatrix block = u3.topLeftCorner(2, 2);
    EXPECT_LT(phase_invariant_distance(block, r_n(p.duration_s, kRabi, 0.4)), tol) << ratio;
  }
}

TEST(qutrit_larmor, aux_phase_opposite) {
  const ComplexMatrix u = qutrit_larmor(1e-6, kLarmor);
  EXPECT_NEAR(std::arg(u(0, 0)), kLarmor * 1e-6, 1e-12);
  EXPECT_NEAR(std::arg(u(2, 2)), -kLarmor * 1e-6, 1e-12);
  EXPECT_LT(max_abs(u.topLeftCorner(2, 2) - r_z(1e-6, kLarmor)), 1e-15);
}

TEST(peak_aux_population, isolated_channel_matches_rabi_formula) {
  for (double ratio : {0.1, 0.25, 240.0 / 560.0, 1.0}) {
    const double delta = 2.0 * kPi * 560e3;
    const double omega = ratio * delta;
    const auto p = PulseSpec::raman(1e-6, omega, 0.0, delta);
    const double t_max = 4.0 * kPi / std::sqrt(omega * omega + delta * delta);
    const double peak = peak_aux_population(p, qutrit_ket(0, 1, 0), t_max, 4000, false);
    EXPECT_NEAR(peak, omega * omega / (omega * omega + delta * delta), 1e-3) << ratio;
  }
}

TEST(peak_aux_population, full_three_level_values) {
  // Full dynamics with the qubit drive on; frozen from a dense time scan.
  const double delta = 2.0 * kPi * 560e3;
  const auto at = [&](double ratio) {
    const auto p = PulseSpec::raman(1e-6, ratio * delta, 0.0, delta);
    return peak_aux_population(p, qutrit_ket(0, 1, 0), 200e-6, 200000, true);
  };
  EXPECT_NEAR(at(0.1), 0.01 / 1.01, 1e-3);
  EXPECT_NEAR(at(240.0 / 560.0), 0.1667, 2e-3);
}

TEST(evolve, empty_schedule_is_identity) {
  const DensityMatrix rho = embed_qutrit(DensityMatrix::from_pure(spinwave::diag()));
  const auto out = evolve(rho, {}, NoiseModel::ideal(), 1, 1);
  EXPECT_EQ(out.matrix(), rho.matrix());
}

TEST(evolve, ideal_pi_pulse) {
  const DensityMatrix rho = embed_qutrit(DensityMatrix::from_pure(spinwave::down()));
  const auto p = PulseSpec::raman(kPi / kRabi, kRabi, 0.0, 1e4 * kRabi);
  const auto out = evolve(rho, {p}, NoiseModel::ideal(), 1, 1);
  EXPECT_GE(out(1, 1).real(), 0.999);
  EXPECT_NEAR(out.matrix().trace().real(), 1.0, 1e-10);
  EXPECT_NEAR(out.purity(), 1.0, 1e-10);
}

TEST(evolve, rabi_noise_monotone) {
  const DensityMatrix rho = embed_qutrit(DensityMatrix::from_pure(spinwave::down()));
  const auto p = PulseSpec::raman(kPi / kRabi, kRabi, 0.0, 1e4 * kRabi);
  double last = 2.0;
  for (double sigma : {0.0, 0.02, 0.05, 0.1}) {
    NoiseModel n = NoiseModel::ideal();
    n.rabi_fractional_sigma = sigma;
    const auto out = evolve(rho, {p}, n, 10000, 31);
    const double transfer = out(1, 1).real();
    if (sigma > 0) EXPECT_LT(transfer, 1.0);
    EXPECT_LT(transfer, last);
    last = transfer;
  }
}

TEST(evolve, deterministic_and_thread_independent) {
  const DensityMatrix rho = embed_qutrit(DensityMatrix::from_pure(spinwave::diag()));
  const auto pulses = compile_rotation({{0.6, 0.0, 0.8}, 1.1}, kRabi, kLarmor, 2.0 * kPi * 560e3);
  NoiseModel n = NoiseModel::ideal();
  n.rabi_fractional_sigma = 0.05;
  n.larmor_sigma = 2e4;
  set_thread_count(1);
  const auto a = evolve(rho, pulses, n, 500, 7);
  set_thread_count(4);
  const auto b = evolve(rho, pulses, n, 500, 7);
  set_thread_count(0);
  EXPECT_EQ(a.matrix(), b.matrix());
  EXPECT_THROW(evolve(rho, pulses, n, 0, 7), ContractViolation);
}

TEST(schedule_json, round_trip) {
  const auto pulses = compile_rotation({{0.6, 0.0, 0.8}, 1.1}, kRabi, kLarmor, 1e6);
  const auto back = schedule_from_json(schedule_to_json(pulses));
  ASSERT_EQ(back.size(), pulses.size());
  EXPECT_EQ(sequence_unitary(back), sequence_unitary(pulses));
  EXPECT_EQ(schedule_to_json(pulses)[0].at("kind"), "LarmorHold");
  EXPECT_THROW(schedule_from_json(json::object()), ContractViolation);
}
