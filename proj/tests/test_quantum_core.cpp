#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "qheat/quantum_core.hpp"
#include "support/oracles.hpp"

using namespace qheat;
using qheat::testing::random_hermitian;
using qheat::testing::random_unitary;

namespace {

ComplexMatrix diag2(double a, double b) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

MeasurementBasis random_basis(std::size_t d, std::mt19937_64& gen) {
  return MeasurementBasis::from_vectors(random_unitary(d, gen));
}

}  // namespace

TEST(SpectralDecompose, DiagonalInput) {
  const auto h = spectral_decompose(diag2(-1.0, 1.0));
  EXPECT_DOUBLE_EQ(h.eigenvalues()(0), -1.0);
  EXPECT_DOUBLE_EQ(h.eigenvalues()(1), 1.0);
  EXPECT_LT(max_abs(h.eigenvectors() - ComplexMatrix::Identity(2, 2)), 1e-15);
}

TEST(SpectralDecompose, PauliX) {
  ComplexMatrix x(2, 2);
  x << 0, 1, 1, 0;
  const auto h = spectral_decompose(x);
  EXPECT_NEAR(h.eigenvalues()(0), -1.0, 1e-14);
  EXPECT_NEAR(h.eigenvalues()(1), 1.0, 1e-14);
  const double r = 1.0 / std::sqrt(2.0);
  // phase convention: first max-magnitude entry real positive
  EXPECT_NEAR(std::abs(h.eigenvectors()(0, 0) - Complex(r)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(h.eigenvectors()(1, 0) - Complex(-r)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(h.eigenvectors()(0, 1) - Complex(r)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(h.eigenvectors()(1, 1) - Complex(r)), 0.0, 1e-14);
}

TEST(SpectralDecompose, RandomRoundTrip) {
  std::mt19937_64 gen(7);
  for (std::size_t d : {2u, 3u, 4u, 6u}) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto known = random_hermitian(d, gen);
      const auto h = spectral_decompose(known.matrix);
      const ComplexMatrix rebuilt =
          h.eigenvectors() * h.eigenvalues().cast<Complex>().asDiagonal() * h.eigenvectors().adjoint();
      EXPECT_LT((rebuilt - known.matrix).norm(), 1e-12);
      const auto n = static_cast<Eigen::Index>(d);
      EXPECT_LT(max_abs(h.eigenvectors().adjoint() * h.eigenvectors() - ComplexMatrix::Identity(n, n)), 1e-12);
      for (std::size_t i = 0; i < d; ++i) EXPECT_NEAR(h.energy(i), known.eigenvalues[i], 1e-12);
    }
  }
}

TEST(SpectralDecompose, Errors) {
  ComplexMatrix bad(2, 2);
  bad << 0, 1, 2, 0;
  try {
    spectral_decompose(bad);
    FAIL() << "expected NotHermitian";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotHermitian);
  }
  try {
    spectral_decompose(diag2(0.5, 0.5 + 1e-10));
    FAIL() << "expected DegenerateSpectrum";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateSpectrum);
  }
  EXPECT_NO_THROW(spectral_decompose(diag2(0.5, 0.5 + 1e-8)));
}

TEST(Propagator, ZeroTimeAndDiagonalPhase) {
  std::mt19937_64 gen(3);
  const auto h = spectral_decompose(random_hermitian(4, gen).matrix);
  EXPECT_LT(max_abs(propagator(h, 0.0) - ComplexMatrix::Identity(4, 4)), 1e-14);

  const auto d = spectral_decompose(diag2(-1.0, 1.0));
  EXPECT_LT(max_abs(propagator(d, std::numbers::pi) + ComplexMatrix::Identity(2, 2)), 1e-14);
}

TEST(Propagator, UnitaryCommutingAndGroupLaw) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> time(0.0, 10.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto h = spectral_decompose(random_hermitian(3, gen).matrix);
    const ComplexMatrix u = propagator(h, 0.7);
    EXPECT_LT(max_abs(u * u.adjoint() - ComplexMatrix::Identity(3, 3)), 1e-12);
    EXPECT_LT(max_abs(u * h.matrix() - h.matrix() * u), 1e-12);
    const double t = time(gen), s = time(gen);
    EXPECT_LT(max_abs(propagator(h, t) * propagator(h, s) - propagator(h, t + s)), 1e-12);
  }
}

TEST(ExpIuH, ClosedForms) {
  const auto d = spectral_decompose(diag2(-1.0, 1.0));
  EXPECT_LT(max_abs(exp_iu_h(d, 0.0) - ComplexMatrix::Identity(2, 2)), 1e-15);
  const ComplexMatrix thermal = exp_iu_h(d, Complex(0.0, 1.0));
  EXPECT_NEAR(std::abs(thermal(0, 0) - std::exp(1.0)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(thermal(1, 1) - std::exp(-1.0)), 0.0, 1e-14);
  EXPECT_LT(std::abs(thermal(0, 1)), 1e-15);
}

TEST(ExpIuH, MatchesTaylorOracle) {
  std::mt19937_64 gen(5);
  const Complex u(0.3, 0.2);
  for (int trial = 0; trial < 10; ++trial) {
    const auto known = random_hermitian(4, gen);
    const auto h = spectral_decompose(known.matrix);
    const ComplexMatrix oracle = qheat::testing::taylor_exp(Complex(0.0, 1.0) * u * known.matrix);
    EXPECT_LT(max_abs(exp_iu_h(h, u) - oracle), 1e-10);
    const ComplexMatrix real_u = exp_iu_h(h, 0.9);
    EXPECT_LT(max_abs(real_u * real_u.adjoint() - ComplexMatrix::Identity(4, 4)), 1e-12);
    const ComplexMatrix imag_u = exp_iu_h(h, Complex(0.0, 0.8));
    EXPECT_LT(hermiticity_defect(imag_u), 1e-12);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(imag_u);
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(MeasurementBasis, ProjectorInvariants) {
  std::mt19937_64 gen(9);
  const auto basis = random_basis(4, gen);
  ComplexMatrix sum = ComplexMatrix::Zero(4, 4);
  for (std::size_t k = 0; k < 4; ++k) {
    const ComplexMatrix pk = basis.projector(k);
    EXPECT_LT(hermiticity_defect(pk), 1e-12);
    EXPECT_LT(max_abs(pk * pk - pk), 1e-12);
    EXPECT_NEAR(pk.trace().real(), 1.0, 1e-12);
    for (std::size_t l = 0; l < 4; ++l)
      if (l != k) EXPECT_LT(max_abs(pk * basis.projector(l)), 1e-12);
    sum += pk;
  }
  EXPECT_LT(max_abs(sum - ComplexMatrix::Identity(4, 4)), 1e-12);

  std::vector<ComplexMatrix> projectors;
  for (std::size_t k = 0; k < 4; ++k) projectors.push_back(basis.projector(k));
  const auto rebuilt = MeasurementBasis::from_projectors(projectors, {1, 2, 3, 4});
  for (std::size_t k = 0; k < 4; ++k) EXPECT_LT(max_abs(rebuilt.projector(k) - projectors[k]), 1e-12);

  projectors[1] = projectors[0];
  EXPECT_THROW(MeasurementBasis::from_projectors(projectors), Error);
}

TEST(SequenceSuperop, TrivialCases) {
  std::mt19937_64 gen(13);
  const auto h = spectral_decompose(random_hermitian(3, gen).matrix);
  const auto basis = random_basis(3, gen);
  EXPECT_LT(max_abs(sequence_superop(basis, h, {{2}, {0.0}}) - basis.projector(2)), 1e-14);
  EXPECT_LT(max_abs(sequence_superop(basis, h, {{1, 1}, {0.0, 0.0}}) - basis.projector(1)), 1e-14);
  EXPECT_THROW(sequence_superop(basis, h, {{3}, {0.1}}), Error);
}

TEST(SequenceSuperop, ColumnwiseOracle) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> time(0.0, 3.0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto known = random_hermitian(2, gen);
    const auto h = spectral_decompose(known.matrix);
    const auto basis = random_basis(2, gen);
    OutcomeSequence seq{{0, 1, 1}, {time(gen), time(gen), time(gen)}};
    const ComplexMatrix v = sequence_superop(basis, h, seq);
    for (Eigen::Index col = 0; col < 2; ++col) {
      ComplexVector psi = ComplexVector::Unit(2, col);
      for (std::size_t i = 0; i < 3; ++i) {
        psi = qheat::testing::taylor_exp(Complex(0.0, -seq.taus[i]) * known.matrix) * psi;
        const ComplexVector w = basis.vector(seq.ks[i]);
        psi = w * w.dot(psi);
      }
      EXPECT_LT((v.col(col) - psi).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(TransitionProb, EnergyBasisMeasurementsHaveNoEffect) {
  std::mt19937_64 gen(19);
  const auto h = spectral_decompose(random_hermitian(3, gen).matrix);
  const auto basis = energy_basis(h);
  EXPECT_NEAR(conditioned_transition_prob(basis, h, {{1, 1, 1}, {0.0, 0.0, 0.0}}, 1, 1), 1.0, 1e-14);
  for (std::size_t n = 0; n < 3; ++n)
    for (std::size_t m = 0; m < 3; ++m)
      if (m != n) EXPECT_LT(conditioned_transition_prob(basis, h, {{n, n}, {0.3, 1.7}}, n, m), 1e-14);
}

TEST(TransitionProb, CompletenessOverOutcomesAndFinalStates) {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> time(0.0, 3.0);
  for (std::size_t d : {2u, 3u}) {
    const auto h = spectral_decompose(random_hermitian(d, gen).matrix);
    const auto basis = random_basis(d, gen);
    for (std::size_t m_len = 1; m_len <= 5; ++m_len) {
      std::vector<double> taus(m_len);
      for (auto& t : taus) t = time(gen);
      for (std::size_t n = 0; n < d; ++n) {
        double total = 0.0;
        qheat::testing::for_each_sequence(d, m_len, [&](const std::vector<std::size_t>& ks) {
          for (std::size_t m = 0; m < d; ++m) {
            const double p = conditioned_transition_prob(basis, h, {ks, taus}, n, m);
            EXPECT_GE(p, 0.0);
            EXPECT_LE(p, 1.0);
            total += p;
          }
        });
        EXPECT_NEAR(total, 1.0, 1e-10);
      }
    }
  }
}

TEST(Unitality, BruteForceSumOverOutcomes) {
  std::mt19937_64 gen(29);
  std::uniform_real_distribution<double> time(0.0, 3.0);
  for (std::size_t d : {2u, 3u, 4u}) {
    const auto h = spectral_decompose(random_hermitian(d, gen).matrix);
    const auto basis = random_basis(d, gen);
    const std::size_t m_len = d == 4 ? 4 : 6;
    std::vector<double> taus(m_len);
    for (auto& t : taus) t = time(gen);
    const auto n = static_cast<Eigen::Index>(d);
    ComplexMatrix sum = ComplexMatrix::Zero(n, n);
    qheat::testing::for_each_sequence(d, m_len, [&](const std::vector<std::size_t>& ks) {
      const ComplexMatrix v = sequence_superop(basis, h, {ks, taus});
      sum += v * v.adjoint();
    });
    EXPECT_LT((sum - ComplexMatrix::Identity(n, n)).norm(), 1e-10);
  }
}

TEST(FirstMeasurement, Probabilities) {
  const auto h = spectral_decompose(diag2(-1.0, 1.0));
  const auto ground = first_measurement_probs(DensityMatrix(h.energy_projector(0)), h);
  EXPECT_DOUBLE_EQ(ground[0], 1.0);
  EXPECT_DOUBLE_EQ(ground[1], 0.0);

  const auto mixed = first_measurement_probs(DensityMatrix(ComplexMatrix::Identity(2, 2) / 2.0), h);
  EXPECT_DOUBLE_EQ(mixed[0], 0.5);

  const auto thermal = first_measurement_probs(thermal_state(h, 1.0), h);
  const double z = std::exp(1.0) + std::exp(-1.0);
  EXPECT_NEAR(thermal[0], std::exp(1.0) / z, 1e-14);
  EXPECT_NEAR(thermal[1], std::exp(-1.0) / z, 1e-14);
  EXPECT_NEAR(thermal[0] + thermal[1], 1.0, 1e-12);
}

TEST(DensityMatrix, Validation) {
  ComplexMatrix not_normalized = ComplexMatrix::Identity(2, 2);
  EXPECT_THROW(DensityMatrix{not_normalized}, Error);
  ComplexMatrix negative = ComplexMatrix::Zero(2, 2);
  negative(0, 0) = 1.5;
  negative(1, 1) = -0.5;
  EXPECT_THROW(DensityMatrix{negative}, Error);
}
