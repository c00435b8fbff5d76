#include <gtest/gtest.h>

#include <cmath>

#include "bosonet/mpo.hpp"
#include "bosonet/mps.hpp"
#include "bosonet/oracle.hpp"

using namespace bosonet;

namespace {

CircuitPlan haar(int m, std::uint64_t seed) {
  Rng rng(seed);
  return sample_haar_circuit(m, rng);
}

std::vector<int> photons_first(int n, int m) {
  std::vector<int> occ(static_cast<std::size_t>(m), 0);
  for (int j = 0; j < n; ++j) occ[static_cast<std::size_t>(j)] = 1;
  return occ;
}

}  // namespace

TEST(LossSpec, Transmissivity) {
  EXPECT_DOUBLE_EQ(LossSpec::constant(0.3).transmissivity(5), 0.3);
  EXPECT_NEAR(LossSpec::power_law(1.0, 0.5).transmissivity(16), 0.25, 1e-15);
  EXPECT_THROW(LossSpec::constant(1.5).transmissivity(2), std::invalid_argument);
  EXPECT_THROW(LossSpec::power_law(3.0, 0.5).transmissivity(4), std::invalid_argument);
  EXPECT_THROW(MpoState::init_lossy(2, 4, LossSpec::constant(-0.1)), std::invalid_argument);
}

TEST(MpoInit, VacuumChannel) {
  const auto st = MpoState::init_lossy(3, 5, LossSpec::constant(0.0));
  EXPECT_NEAR(st.trace(), 1.0, 1e-12);
  EXPECT_NEAR(st.outcome_prob(std::vector<int>(5, 0)), 1.0, 1e-12);
  for (int k = 1; k < 5; ++k) EXPECT_EQ(st.renyi_entropy(k, 1.0), 0.0);
}

TEST(MpoInit, HalfTransmissionOnePhoton) {
  const auto st = MpoState::init_lossy(1, 2, LossSpec::constant(0.5));
  // |sigma>> = 0.5 |00>> + 0.5 |11>>, squared norm 0.5.
  EXPECT_NEAR(st.train().scale() * st.train().scale(), 0.5, 1e-15);
  EXPECT_NEAR(st.trace(), 1.0, 1e-12);
  EXPECT_NEAR(st.outcome_prob(std::vector<int>{1, 0}), 0.5, 1e-15);
  EXPECT_NEAR(st.outcome_prob(std::vector<int>{0, 0}), 0.5, 1e-15);
}

TEST(MpoInit, FreshTraceIsOne) {
  for (double mu : {0.1, 0.5, 0.9, 1.0}) {
    EXPECT_NEAR(MpoState::init_lossy(4, 6, LossSpec::constant(mu)).trace(), 1.0, 1e-12);
  }
}

TEST(MpoGate, ZeroAngleLeavesStateUnchanged) {
  auto st = MpoState::init_lossy(2, 3, LossSpec::constant(0.6));
  const auto before = st.spectrum(1).values();
  st.apply_gate({1, 0.0, 0.0});
  const auto after = st.spectrum(1).values();
  ASSERT_EQ(after.size(), before.size());
  for (std::size_t i = 0; i < after.size(); ++i) EXPECT_NEAR(after[i], before[i], 1e-14);
  EXPECT_NEAR(st.trace(), 1.0, 1e-12);
}

TEST(MpoGate, FullRankConservesWeightAndCharges) {
  auto st = MpoState::init_lossy(3, 6, LossSpec::constant(0.5));
  for (const auto& g : haar(6, 17).gates) {
    const auto r = st.apply_gate(g);
    EXPECT_LE(r.discarded_weight, 1e-24);
    EXPECT_NEAR(r.weight_after, r.weight_before, 1e-10);
    ASSERT_TRUE(st.train().integrity_report().empty()) << st.train().integrity_report();
  }
  EXPECT_NEAR(st.trace(), 1.0, 1e-10);
}

TEST(MpoProbability, MatchesLossyOracle) {
  const int m = 4, n = 2;
  const double mu = 0.7;
  const auto plan = haar(m, 4);
  auto st = MpoState::init_lossy(n, m, LossSpec::constant(mu));
  st.apply_circuit(plan);
  const auto exact = exact_lossy_distribution(circuit_to_unitary(plan), n, mu);
  double total = 0.0;
  for (std::size_t i = 0; i < exact.outcomes.size(); ++i) {
    const double p = st.outcome_prob_raw(exact.outcomes[i]);
    EXPECT_NEAR(p, exact.probabilities[i], 1e-8);
    total += p;
  }
  EXPECT_NEAR(total, st.trace(), 1e-8);
}

TEST(MpoProbability, LosslessMatchesMps) {
  const int m = 6, n = 3;
  const auto plan = haar(m, 8);
  auto mpo = MpoState::init_lossy(n, m, LossSpec::constant(1.0));
  auto mps = MpsState::init_fock(photons_first(n, m));
  mpo.apply_circuit(plan);
  mps.apply_circuit(plan);
  for (const auto& o : enumerate_occupations(m, n)) EXPECT_NEAR(mpo.outcome_prob(o), mps.probability(o), 1e-8);
  // Entropy doubling for a pure state.
  for (int k = 1; k < m; ++k)
    for (double a : {0.5, 1.0, 2.0}) EXPECT_NEAR(mpo.renyi_entropy(k, a), 2.0 * mps.renyi_entropy(k, a), 1e-8);
}

TEST(MpoDense, HermitianAndPositive) {
  auto st = MpoState::init_lossy(2, 4, LossSpec::constant(0.6));
  st.apply_circuit(haar(4, 2));
  const ComplexMatrix rho = st.density_matrix();
  EXPECT_LE((rho - rho.adjoint()).norm(), 1e-10);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(0.5 * (rho + rho.adjoint()));
  EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-8);
  EXPECT_NEAR(rho.trace().real(), 1.0, 1e-10);
}

TEST(MpoSpectrum, MatchesDenseVectorizedSpectrum) {
  const int m = 4, n = 2;
  const double mu = 0.5;
  const auto plan = haar(m, 6);
  auto st = MpoState::init_lossy(n, m, LossSpec::constant(mu));
  st.apply_circuit(plan);
  for (int cut = 1; cut < m; ++cut) {
    auto mine = st.spectrum(cut).values();
    double w = 0.0;
    for (double& x : mine) w += (x = x * x);
    for (double& x : mine) x /= w;
    std::sort(mine.begin(), mine.end(), std::greater<>());
    const auto dense = dense_lossy_vectorized_spectrum(n, m, plan, mu, cut, VectorizedConvention::kSectorResolved);
    for (std::size_t i = 0; i < dense.size(); ++i) {
      const double v = i < mine.size() ? mine[i] : 0.0;
      EXPECT_NEAR(v, dense[i], 1e-8) << "cut " << cut << " index " << i;
    }
  }
}

TEST(MpoTruncation, ErrorShrinksWithBondDimension) {
  // A single circuit can be non-monotone by a few percent; the ensemble mean is not.
  const int m = 8, n = 3, circuits = 10;
  std::vector<double> mean;
  for (std::size_t chi : {2u, 4u, 8u, 16u, 32u}) {
    double total = 0.0;
    for (int c = 0; c < circuits; ++c) {
      auto st = MpoState::init_lossy(n, m, LossSpec::constant(0.5));
      st.apply_circuit(haar(m, static_cast<std::uint64_t>(c)), TruncationPolicy::with_chi(chi));
      total += st.error();
    }
    mean.push_back(total / circuits);
  }
  EXPECT_GT(mean.front(), 0.0);
  for (std::size_t i = 1; i < mean.size(); ++i) EXPECT_LE(mean[i], mean[i - 1]);
  for (std::uint64_t seed : {7u, 10u}) {
    auto full = MpoState::init_lossy(n, m, LossSpec::constant(0.5));
    full.apply_circuit(haar(m, seed));
    EXPECT_LE(std::abs(full.error()), 1e-10) << "seed " << seed;
  }
}

TEST(MpoSectors, PerSectorTracesAreBinomialWeights) {
  const int m = 4, n = 3;
  const double mu = 0.4;
  const auto plan = haar(m, 13);
  double sum = 0.0;
  for (int s = 0; s <= n; ++s) {
    auto st = MpoState::init_lossy(n, m, LossSpec::constant(mu), s);
    st.apply_circuit(plan);
    const double binom = std::tgamma(n + 1) / (std::tgamma(s + 1) * std::tgamma(n - s + 1));
    EXPECT_NEAR(st.trace(), binom * std::pow(mu, s) * std::pow(1 - mu, n - s), 1e-12);
    // Post-selected on s photons: other totals have no weight.
    EXPECT_EQ(st.outcome_prob_raw(std::vector<int>(m, 0)) != 0.0, s == 0);
    sum += st.trace();
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
}
