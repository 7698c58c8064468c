#include <gtest/gtest.h>

#include "swq/herald.hpp"

using namespace swq;

namespace {

double overlap(const JonesVector& a, cplx h, cplx v) {
  const double n = std::sqrt(std::norm(h) + std::norm(v));
  return std::abs(std::conj(a.h()) * h / n + std::conj(a.v()) * v / n);
}

}  // namespace

TEST(atom_photon_state, amplitudes) {
  const JointState s = atom_photon_state();
  EXPECT_NEAR(s.amplitudes().norm(), 1.0, 1e-15);
  EXPECT_NEAR(s.amplitude(0, 0).real(), 0.6324555320336759, 1e-15);
  EXPECT_NEAR(s.amplitude(1, 1).real(), -0.7745966692414834, 1e-15);
  EXPECT_EQ(s.amplitude(0, 1), cplx{});
  EXPECT_EQ(s.amplitude(1, 0), cplx{});
}

TEST(target_idler_polarization, examples) {
  EXPECT_NEAR(overlap(target_idler_polarization(0.0, 0.0), 1.0, kI), 1.0, 1e-12);
  EXPECT_NEAR(overlap(target_idler_polarization(kPi / 2, 0.0), -1.0, kI), 1.0, 1e-12);
  const double a = std::sqrt(3.0 / 5.0), b = std::sqrt(2.0 / 5.0);
  const JonesVector p = target_idler_polarization(kPi / 4, 0.0);
  EXPECT_NEAR(overlap(p, (a - b) / std::sqrt(2.0), kI * (a + b) / std::sqrt(2.0)), 1.0, 1e-12);
  EXPECT_NEAR(std::norm(p.h()) + std::norm(p.v()), 1.0, 1e-12);
}

TEST(project_idler, circular_heralds) {
  const auto plus = project_idler(atom_photon_state(), polarization::sigma_plus());
  EXPECT_NEAR(plus.success_probability, 0.4, 1e-12);
  EXPECT_NEAR(std::abs(plus.spinwave[0]), 1.0, 1e-12);
  const auto minus = project_idler(atom_photon_state(), polarization::sigma_minus());
  EXPECT_NEAR(minus.success_probability, 0.6, 1e-12);
  EXPECT_NEAR(std::abs(minus.spinwave[1]), 1.0, 1e-12);
}

TEST(project_idler, round_trip_grid) {
  for (int i = 0; i < 17; ++i) {
    for (int j = 0; j < 17; ++j) {
      const double theta = kPi * i / 16;
      const double phi = 2.0 * kPi * j / 17;
      const auto r = project_idler(atom_photon_state(), target_idler_polarization(theta, phi));
      const PureState want = spinwave::superposition(theta, phi);
      const double f = std::norm(want.amplitudes().dot(r.spinwave.amplitudes()));
      ASSERT_GT(f, 1.0 - 1e-10) << theta << ' ' << phi;
    }
  }
}

TEST(project_idler, cardinal_targets) {
  const PureState targets[] = {spinwave::down(), spinwave::up(),    spinwave::diag(),
                               spinwave::anti(), spinwave::right(), spinwave::left()};
  const double angles[][2] = {{0, 0}, {kPi / 2, 0}, {kPi / 4, 0}, {kPi / 4, kPi},
                              {kPi / 4, kPi / 2}, {kPi / 4, -kPi / 2}};
  for (int k = 0; k < 6; ++k) {
    const auto r = project_idler(atom_photon_state(),
                                 target_idler_polarization(angles[k][0], angles[k][1]));
    EXPECT_NEAR(std::norm(targets[k].amplitudes().dot(r.spinwave.amplitudes())), 1.0, 1e-10);
  }
}

TEST(project_idler, basis_completeness) {
  std::mt19937_64 rng(41);
  for (int k = 0; k < 200; ++k) {
    const ComplexMatrix u = haar_random_unitary(2, rng);
    const JonesVector a(u(0, 0), u(1, 0)), b(u(0, 1), u(1, 1));
    const double total = project_idler(atom_photon_state(), a).success_probability +
                         project_idler(atom_photon_state(), b).success_probability;
    ASSERT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(project_idler, incompatible_projection) {
  ComplexVector amps = ComplexVector::Zero(4);
  amps(0) = 1.0;
  EXPECT_THROW(project_idler(JointState(amps), polarization::sigma_minus()), NumericalError);
}

TEST(herald_sampler, trivial_probabilities) {
  EXPECT_EQ(herald_sampler({0.0, 1000, 1}).count, 0);
  const auto all = herald_sampler({1.0, 25, 1});
  EXPECT_EQ(all.count, 25);
  EXPECT_EQ(all.trial_indices.back(), 24);
  EXPECT_THROW(herald_sampler({1.5, 10, 1}), ContractViolation);
}

TEST(herald_sampler, binomial_statistics) {
  double sum = 0.0, sum_sq = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto r = herald_sampler({3e-3, 1000000, seed});
    ASSERT_EQ(r.count, static_cast<std::int64_t>(r.trial_indices.size()));
    for (std::size_t k = 1; k < r.trial_indices.size(); ++k) {
      ASSERT_LT(r.trial_indices[k - 1], r.trial_indices[k]);
    }
    ASSERT_LT(r.trial_indices.back(), 1000000);
    sum += static_cast<double>(r.count);
    sum_sq += static_cast<double>(r.count) * static_cast<double>(r.count);
  }
  const double mean = sum / 100;
  EXPECT_NEAR(mean, 3000.0, 5.0 * std::sqrt(2991.0));
  const double sd = std::sqrt(sum_sq / 100 - mean * mean);
  EXPECT_NEAR(sd, std::sqrt(2991.0), 15.0);
  EXPECT_EQ(herald_sampler({3e-3, 100000, 9}).trial_indices,
            herald_sampler({3e-3, 100000, 9}).trial_indices);
}

TEST(readout_map, examples) {
  const auto r = readout_map(DensityMatrix::from_pure(spinwave::down()));
  EXPECT_NEAR(r.detected_fraction, 1.0, 1e-15);
  const ComplexVector m = polarization::sigma_minus().vec();
  EXPECT_LT(max_abs(r.signal.matrix() - m * m.adjoint()), 1e-12);

  ComplexMatrix aux_only = ComplexMatrix::Zero(3, 3);
  aux_only(2, 2) = 1.0;
  EXPECT_THROW(readout_map(DensityMatrix(aux_only)), NumericalError);

  ComplexMatrix leaky = ComplexMatrix::Zero(3, 3);
  leaky.topLeftCorner(2, 2) = 0.9 * DensityMatrix::from_pure(spinwave::diag()).matrix();
  leaky(2, 2) = 0.1;
  const auto l = readout_map(DensityMatrix(leaky));
  EXPECT_NEAR(l.detected_fraction, 0.9, 1e-12);
  EXPECT_NEAR(l.signal.matrix().trace().real(), 1.0, 1e-12);
  EXPECT_NEAR(detected_qubit(DensityMatrix(leaky))(0, 1).real(), 0.5, 1e-12);
  EXPECT_THROW(readout_map(DensityMatrix(leaky), 0.0), ContractViolation);
}

TEST(readout_map, isometry_preserves_state) {
  std::mt19937_64 rng(42);
  for (int k = 0; k < 200; ++k) {
    const DensityMatrix rho = DensityMatrix::from_pure(haar_random_state(2, rng));
    const auto back = signal_to_spinwave(readout_map(rho).signal);
    ASSERT_NEAR(state_fidelity(rho, back), 1.0, 1e-12);
  }
}

TEST(prepare_heralded, misalignment_lowers_fidelity) {
  const DensityMatrix ideal = prepare_heralded(kPi / 4, 0.0, 0.0, 1, 1);
  const DensityMatrix want = DensityMatrix::from_pure(spinwave::diag());
  EXPECT_NEAR(state_fidelity(ideal, want), 1.0, 1e-12);
  double last = 1.0 + 1e-12;
  for (double sigma : {0.1, 0.3, 0.6}) {
    const double f = state_fidelity(prepare_heralded(kPi / 4, 0.0, sigma, 4000, 5), want);
    EXPECT_LT(f, last);
    last = f;
  }
}

TEST(herald_record, json_shape) {
  const JonesVector p = target_idler_polarization(0.3, 0.2);
  const json j = herald_record_to_json(0.3, 0.2, p, 0.5);
  EXPECT_EQ(j.at("jones").size(), 2u);
  EXPECT_DOUBLE_EQ(j.at("jones")[1][1].get<double>(), p.v().imag());
  EXPECT_DOUBLE_EQ(j.at("success_probability").get<double>(), 0.5);
}
