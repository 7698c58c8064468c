#include <gtest/gtest.h>

#include <sstream>

#include "swq/tomo.hpp"

using namespace swq;

namespace {

constexpr std::int64_t kExact = 1000000000;

DensityMatrix pure(const PureState& psi) { return DensityMatrix::from_pure(psi); }

TomographyInput exact_counts(const DensityMatrix& rho) {
  return simulate_tomography(rho, kExact, 0.0, 0, CountModel::Expected);
}

ProcessMatrix depolarizing(double p, const ComplexMatrix& u = pauli::identity()) {
  std::vector<ComplexMatrix> kraus{std::sqrt(1.0 - 0.75 * p) * u};
  for (int k = 1; k < 4; ++k) kraus.push_back(std::sqrt(p / 4.0) * pauli::basis(k) * u);
  return chi_from_kraus(kraus);
}

ProcessTomographySet exact_process_data(const ProcessMatrix& chi) {
  ProcessTomographySet set;
  for (Cardinal c : kCardinals) {
    const ComplexMatrix out = chi.apply(pure(cardinal_state(c)).matrix());
    set.set(c, exact_counts(DensityMatrix::project(out)));
  }
  return set;
}

}  // namespace

TEST(simulate_counts, examples) {
  const auto r = simulate_counts(pure(spinwave::down()), Basis::Z, 1000, 0.0, 3);
  EXPECT_EQ(r.n_plus, 1000);
  EXPECT_EQ(r.n_minus, 0);
  const auto mixed = simulate_counts(DensityMatrix::maximally_mixed(2), Basis::X, 1000000, 0.0, 4);
  EXPECT_GE(mixed.n_plus, 498500);
  EXPECT_LE(mixed.n_plus, 501500);
  EXPECT_DOUBLE_EQ(plus_probability(pure(spinwave::right()), Basis::Y, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(plus_probability(pure(spinwave::right()), Basis::Y, 0.1), 0.95);
  EXPECT_EQ(simulate_counts(pure(spinwave::diag()), Basis::Y, 5000, 0.02, 77).n_plus,
            simulate_counts(pure(spinwave::diag()), Basis::Y, 5000, 0.02, 77).n_plus);
  EXPECT_THROW(simulate_counts(pure(spinwave::diag()), Basis::Y, 0, 0.0, 1), ContractViolation);
}

TEST(tomography_input, validation) {
  EXPECT_THROW(TomographyInput({{Basis::X, 1, 0}, {Basis::Y, 1, 0}}), ContractViolation);
  EXPECT_THROW(TomographyInput({{Basis::X, 1, 0}, {Basis::Y, 0, 0}, {Basis::Z, 1, 0}}),
               ContractViolation);
  EXPECT_THROW(TomographyInput({{Basis::X, 1, 0}, {Basis::X, 1, 0}, {Basis::Z, 1, 0}}),
               ContractViolation);
}

TEST(linear_inversion, exact_diagonal_state) {
  const auto r = linear_inversion(exact_counts(pure(spinwave::diag())));
  EXPECT_LT(max_abs(r.rho - pure(spinwave::diag()).matrix()), 1e-12);
  EXPECT_TRUE(r.physical);
}

TEST(linear_inversion, flags_non_physical) {
  const TomographyInput in({{Basis::X, 100, 0}, {Basis::Y, 50, 50}, {Basis::Z, 100, 0}});
  const auto r = linear_inversion(in);
  EXPECT_DOUBLE_EQ(r.stokes.x, 1.0);
  EXPECT_DOUBLE_EQ(r.stokes.y, 0.0);
  EXPECT_DOUBLE_EQ(r.stokes.z, 1.0);
  EXPECT_FALSE(r.physical);
  EXPECT_LT(r.min_eigenvalue, 0.0);
  EXPECT_NEAR(r.rho.trace().real(), 1.0, 1e-15);

  const auto est = mle_state(in);
  EXPECT_GE(hermitian_eig(est.rho.matrix()).values.minCoeff(), -1e-10);
  EXPECT_NEAR(est.rho.matrix().trace().real(), 1.0, 1e-12);
}

TEST(mle_state, cardinal_states_exact) {
  for (Cardinal c : kCardinals) {
    const DensityMatrix truth = pure(cardinal_state(c));
    const auto est = mle_state(exact_counts(truth));
    EXPECT_GT(state_fidelity(est.rho, truth), 1.0 - 1e-6) << cardinal_name(c);
  }
}

TEST(mle_state, agrees_with_physical_linear_inversion) {
  std::mt19937_64 rng(51);
  for (int k = 0; k < 30; ++k) {
    const auto psi = haar_random_state(2, rng);
    const double r = 0.2 + 0.7 * std::uniform_real_distribution<double>()(rng);
    const auto dir = stokes_from_rho(pure(psi));
    const DensityMatrix truth = DensityMatrix::from_stokes({r * dir.x, r * dir.y, r * dir.z});
    const auto in = exact_counts(truth);
    const auto lin = linear_inversion(in);
    ASSERT_TRUE(lin.physical);
    ASSERT_LT(max_abs(mle_state(in).rho.matrix() - lin.rho), 1e-6);
  }
}

TEST(mle_state, restarts_agree) {
  const DensityMatrix truth = DensityMatrix::from_stokes({0.3, -0.5, 0.6});
  const auto in = simulate_tomography(truth, 500, 0.0, 52);
  const auto base = mle_state(in);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    MleOptions opts;
    opts.random_start_seed = seed;
    const auto other = mle_state(in, opts);
    EXPECT_GT(state_fidelity(other.rho, base.rho), 1.0 - 1e-6) << seed;
  }
}

TEST(mle_state, likelihood_not_below_projected_inversion) {
  std::mt19937_64 rng(53);
  for (int k = 0; k < 50; ++k) {
    const DensityMatrix truth = pure(haar_random_state(2, rng));
    const auto in = simulate_tomography(truth, 200, 0.05, 1000 + k);
    const auto est = mle_state(in);
    const auto lin = DensityMatrix::project(linear_inversion(in).rho);
    ASSERT_GE(est.log_likelihood, log_likelihood(lin.matrix(), in) - 1e-9);
  }
}

TEST(mle_state, fidelity_grows_with_counts) {
  std::mt19937_64 rng(54);
  std::vector<DensityMatrix> truths;
  for (int k = 0; k < 200; ++k) truths.push_back(pure(haar_random_state(2, rng)));
  double last = 0.0;
  for (std::int64_t n : {50, 500, 5000, 50000}) {
    double sum = 0.0;
    for (int k = 0; k < 200; ++k) {
      const auto in = simulate_tomography(truths[k], n, 0.0, derive_seed(55, "rep", k));
      sum += state_fidelity(mle_state(in).rho, truths[k]);
    }
    const double mean = sum / 200;
    if (n == 500) EXPECT_GE(mean, 0.99);
    EXPECT_GE(mean, last) << n;
    last = mean;
  }
}

TEST(mle_state, convergence_error_carries_diagnostics) {
  MleOptions opts;
  opts.optimizer.max_iterations = 1;
  const auto in = simulate_tomography(DensityMatrix::from_stokes({0.3, 0.1, 0.2}), 500, 0.0, 56);
  try {
    mle_state(in, opts);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.diagnostics().at("iterations").get<int>(), 1);
    EXPECT_EQ(e.best_so_far().rows(), 2);
  }
}

TEST(bootstrap_state_error, scaling_and_determinism) {
  const DensityMatrix d = pure(spinwave::diag());
  const auto big = bootstrap_state_error(exact_counts(DensityMatrix::from_stokes({0.99, 0, 0})), 50, 1);
  EXPECT_LT(big.fidelity_std, 1e-3);

  const auto small = bootstrap_state_error(simulate_tomography(d, 500, 0.0, 57), 200, 9);
  EXPECT_GE(small.fidelity_std, 1e-4);
  EXPECT_LT(small.fidelity_std, 1e-2);
  const auto larger = bootstrap_state_error(simulate_tomography(d, 5000, 0.0, 57), 200, 9);
  EXPECT_LT(larger.fidelity_std, small.fidelity_std);

  const auto again = bootstrap_state_error(simulate_tomography(d, 500, 0.0, 57), 200, 9);
  EXPECT_EQ(small.fidelity_std, again.fidelity_std);
}

TEST(counts_csv, round_trip) {
  std::vector<LabeledCounts> data{{"down", exact_counts(pure(spinwave::down()))},
                                  {"D", simulate_tomography(pure(spinwave::diag()), 100, 0.0, 5)}};
  std::stringstream ss;
  write_counts_csv(ss, data);
  const auto back = read_counts_csv(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].label, "D");
  EXPECT_EQ(back[1].input[Basis::Y].n_plus, data[1].input[Basis::Y].n_plus);
  std::stringstream bad("label,basis\n");
  EXPECT_THROW(read_counts_csv(bad), ContractViolation);
  std::stringstream bad_row("input_label,basis,n_plus,n_minus\nD,Q,1,2\n");
  EXPECT_THROW(read_counts_csv(bad_row), ContractViolation);
}

TEST(process_matrix, pauli_and_unitary_fidelities) {
  const auto x = chi_from_unitary(pauli::x());
  EXPECT_NEAR(process_fidelity(x, x), 1.0, 1e-12);
  EXPECT_NEAR(process_fidelity(x, chi_from_unitary(pauli::y())), 0.0, 1e-12);
  EXPECT_NEAR(x.matrix()(1, 1).real(), 1.0, 1e-12);
  std::mt19937_64 rng(58);
  for (int k = 0; k < 200; ++k) {
    const ComplexMatrix u = haar_random_unitary(2, rng);
    const ComplexMatrix v = haar_random_unitary(2, rng);
    const double want = std::norm((u.adjoint() * v).trace()) / 4.0;
    ASSERT_NEAR(process_fidelity(chi_from_unitary(u), chi_from_unitary(v)), want, 1e-9);
  }
  EXPECT_THROW(process_fidelity(ProcessMatrix(2.0 * x.matrix()), x), ContractViolation);
}

TEST(process_matrix, choi_round_trip) {
  std::mt19937_64 rng(59);
  const auto chi = chi_from_kraus(random_channel_kraus(2, rng));
  EXPECT_LT(max_abs(choi_to_chi(chi_to_choi(chi.matrix())) - chi.matrix()), 1e-12);
  EXPECT_LT(chi.tp_residual(), 1e-12);
}

TEST(qpt_mle, identity_and_pauli) {
  const auto id = qpt_mle(exact_process_data(ProcessMatrix()), false);
  EXPECT_NEAR(id.chi.matrix()(0, 0).real(), 1.0, 1e-6);
  ComplexMatrix rest = id.chi.matrix();
  rest(0, 0) = 0.0;
  EXPECT_LT(max_abs(rest), 1e-6);
  const auto x = qpt_mle(exact_process_data(chi_from_unitary(pauli::x())), false);
  EXPECT_NEAR(x.chi.matrix()(1, 1).real(), 1.0, 1e-6);
}

TEST(qpt_mle, depolarized_hadamard) {
  const ComplexMatrix h = (pauli::x() + pauli::z()) / std::sqrt(2.0);
  const auto truth = depolarizing(0.05, h);
  for (bool tp : {false, true}) {
    const auto est = qpt_mle(exact_process_data(truth), tp);
    EXPECT_NEAR(process_fidelity(est.chi, chi_from_unitary(h)), 1.0 - 0.75 * 0.05, 1e-5) << tp;
    EXPECT_LT(max_abs(est.chi.matrix() - truth.matrix()), 1e-5);
    if (tp) EXPECT_LE(est.tp_residual, 1e-6);
  }
}

TEST(qpt_mle, random_channels_exact) {
  std::mt19937_64 rng(60);
  for (int k = 0; k < 10; ++k) {
    const auto truth = chi_from_kraus(random_channel_kraus(1 + k % 3, rng));
    const auto est = qpt_mle(exact_process_data(truth), k % 2 == 1);
    ASSERT_LT(max_abs(est.chi.matrix() - truth.matrix()), 1e-5) << k;
    ASSERT_GE(hermitian_eig(est.chi.matrix(), 1e-8).values.minCoeff(), -1e-10);
  }
}

TEST(qpt_mle, duplicate_inputs_warn) {
  std::vector<ProcessDatum> data;
  for (int k = 0; k < 3; ++k) {
    data.push_back({pure(spinwave::down()), simulate_tomography(pure(spinwave::down()), 1000, 0.0, k)});
  }
  const auto est = qpt_mle(data, false);
  ASSERT_EQ(est.warnings.size(), 1u);
  EXPECT_NE(est.warnings[0].find("ill-conditioned"), std::string::npos);
}

TEST(qpt_mle, missing_input_rejected) {
  ProcessTomographySet set;
  set.set(Cardinal::Down, exact_counts(pure(spinwave::down())));
  EXPECT_THROW(qpt_mle(set, false), ContractViolation);
}

TEST(average_fidelity, formula) {
  EXPECT_DOUBLE_EQ(average_fidelity_from_process(1.0), 1.0);
  EXPECT_NEAR(average_fidelity_from_process(0.947), 0.964666666666667, 1e-12);
  EXPECT_DOUBLE_EQ(average_fidelity_from_process(0.25), 0.5);
  EXPECT_THROW(average_fidelity_from_process(1.2), ContractViolation);
}

TEST(average_fidelity, depolarizing_monte_carlo) {
  const auto ideal = monte_carlo_average_fidelity(ProcessMatrix(), pauli::identity(), 1000, 1);
  EXPECT_NEAR(ideal.haar_mean, 1.0, 1e-12);
  for (double p : {0.05, 0.3, 1.0}) {
    const auto mc = monte_carlo_average_fidelity(depolarizing(p), pauli::identity(), 10000, 61);
    // Depolarizing fidelity is input independent, so the sample spread is zero.
    EXPECT_NEAR(mc.haar_mean, 1.0 - p / 2, std::max(3.0 * mc.haar_std_error, 1e-12)) << p;
    EXPECT_NEAR(mc.cardinal_mean, 1.0 - p / 2, 1e-12);
  }
}

TEST(average_fidelity, random_channels_match_formula) {
  std::mt19937_64 rng(62);
  const ComplexMatrix u = haar_random_unitary(2, rng);
  int outside = 0;
  for (int k = 0; k < 50; ++k) {
    const auto kraus = random_channel_kraus(2, rng);
    std::vector<ComplexMatrix> mixed{std::sqrt(0.9) * u};
    for (const auto& m : kraus) mixed.push_back(std::sqrt(0.1) * m);
    const auto chi = chi_from_kraus(mixed);
    const double want = average_fidelity_from_process(process_fidelity(chi, chi_from_unitary(u)));
    const auto mc = monte_carlo_average_fidelity(chi, u, 100000, derive_seed(63, "ch", k));
    EXPECT_NEAR(mc.cardinal_mean, want, 1e-3);
    if (std::abs(mc.haar_mean - want) > 3.0 * mc.haar_std_error) ++outside;
  }
  EXPECT_LE(outside, 2);
}

TEST(average_fidelity, thread_independent) {
  std::mt19937_64 rng(64);
  const auto other = chi_from_kraus(random_channel_kraus(2, rng));
  set_thread_count(1);
  const auto a = monte_carlo_average_fidelity(other, pauli::x(), 20000, 3);
  set_thread_count(3);
  const auto b = monte_carlo_average_fidelity(other, pauli::x(), 20000, 3);
  set_thread_count(0);
  EXPECT_EQ(a.haar_mean, b.haar_mean);
}

TEST(fringe_analysis, ideal_fringe) {
  std::vector<FringePoint> sweep;
  for (int k = 0; k < 24; ++k) {
    const double t = 2.0 * kPi * k / 24;
    sweep.push_back({t, 1e6 * 0.5 * (1 + std::cos(t)), 1e6 * 0.5 * (1 - std::cos(t))});
  }
  const auto r = fringe_analysis(sweep);
  EXPECT_NEAR(r.visibility, 1.0, 1e-6);
  EXPECT_TRUE(r.ratio_capped);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(fringe_analysis, background_mixture) {
  const double f = 0.05;
  const double signal = 1e6;
  const double bg = f * signal / (1.0 - f);
  std::vector<FringePoint> sweep;
  for (int k = 0; k < 24; ++k) {
    const double t = 2.0 * kPi * k / 24;
    sweep.push_back({t, signal * 0.5 * (1 + std::cos(t)) + bg, signal * 0.5 * (1 - std::cos(t)) + bg});
  }
  const auto r = fringe_analysis(sweep);
  EXPECT_NEAR(r.visibility, 1.0 / (1.0 + 2.0 * f / (1.0 - f)), 1e-9);
  EXPECT_NEAR(r.max_min_ratio, (signal + bg) / bg, 1e-6);
  EXPECT_FALSE(r.ratio_capped);
}

TEST(fringe_analysis, errors_and_warnings) {
  std::vector<FringePoint> few{{0, 1, 1}, {1, 1, 1}, {2, 1, 1}};
  EXPECT_THROW(fringe_analysis(few), ContractViolation);
  std::vector<FringePoint> narrow;
  for (int k = 0; k < 6; ++k) narrow.push_back({0.1 * k, 10, 10});
  EXPECT_THROW(fringe_analysis(narrow), ContractViolation);
  std::vector<FringePoint> square;
  for (int k = 0; k < 24; ++k) {
    const double t = 2.0 * kPi * k / 24;
    square.push_back({t, k < 12 ? 1e4 : 10.0, k < 12 ? 10.0 : 1e4});
  }
  const auto r = fringe_analysis(square);
  ASSERT_FALSE(r.warnings.empty());
  EXPECT_EQ(r.warnings[0], "non-sinusoidal data");
}
