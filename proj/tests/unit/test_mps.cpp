#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "bosonet/mps.hpp"
#include "bosonet/occupations.hpp"
#include "bosonet/oracle.hpp"

using namespace bosonet;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<int> photons_first(int n, int m) {
  std::vector<int> occ(static_cast<std::size_t>(m), 0);
  for (int j = 0; j < n; ++j) occ[static_cast<std::size_t>(j)] = 1;
  return occ;
}

CircuitPlan haar(int m, std::uint64_t seed) {
  Rng rng(seed);
  return sample_haar_circuit(m, rng);
}

// Max deviation from the left/right canonical conditions over all bonds.
double canonical_defect(const TensorTrain& tt) {
  double worst = 0.0;
  for (int site = 1; site <= tt.num_sites(); ++site) {
    std::map<DualCharge, ComplexMatrix> left, right;
    for (const auto& [key, g] : tt.gamma(site).blocks) {
      const auto& ll = tt.bond(site - 1).find(key.first)->lambda;
      const auto& lr = tt.bond(site).find(key.second)->lambda;
      ComplexMatrix a = g, b = g;
      for (Eigen::Index i = 0; i < a.rows(); ++i) a.row(i) *= ll[static_cast<std::size_t>(i)];
      for (Eigen::Index j = 0; j < b.cols(); ++j) b.col(j) *= lr[static_cast<std::size_t>(j)];
      ComplexMatrix l = a.adjoint() * a, r = b * b.adjoint();
      if (left.count(key.second)) left[key.second] += l; else left[key.second] = l;
      if (right.count(key.first)) right[key.first] += r; else right[key.first] = r;
    }
    for (auto& [q, m] : left) worst = std::max(worst, (m - ComplexMatrix::Identity(m.rows(), m.cols())).norm());
    for (auto& [q, m] : right) worst = std::max(worst, (m - ComplexMatrix::Identity(m.rows(), m.cols())).norm());
  }
  return worst;
}

}  // namespace

TEST(MpsInit, ChargesCountPhotonsToTheRight) {
  const std::vector<int> occ{1, 1, 0, 0};
  const auto st = MpsState::init_fock(occ);
  const std::vector<int> expected{2, 1, 0, 0, 0};
  for (int k = 0; k <= 4; ++k) EXPECT_EQ(st.charges(k), std::vector<int>{expected[static_cast<std::size_t>(k)]});
  EXPECT_EQ(st.local_dim(), 3);
  EXPECT_EQ(st.max_bond_dimension(), 1u);
}

TEST(MpsInit, VacuumHasNoEntanglement) {
  const std::vector<int> occ{0, 0};
  const auto st = MpsState::init_fock(occ);
  for (int k = 0; k <= 2; ++k) EXPECT_EQ(st.charges(k), std::vector<int>{0});
  EXPECT_EQ(st.renyi_entropy(1, 1.0), 0.0);
  EXPECT_EQ(st.max_entropy(1.0), (std::pair<int, double>{1, 0.0}));
}

TEST(MpsInit, SingleSiteFock) {
  const std::vector<int> occ{3, 0};
  const auto st = MpsState::init_fock(occ);
  EXPECT_EQ(st.charges(0), std::vector<int>{3});
  EXPECT_EQ(st.charges(1), std::vector<int>{0});
  EXPECT_EQ(st.max_bond_dimension(), 1u);
  EXPECT_NEAR(std::abs(st.amplitude(occ) - 1.0), 0.0, 1e-15);
}

TEST(MpsInit, GaugeIsRealNonnegative) {
  const std::vector<int> occ{1, 0, 2, 0};
  const auto st = MpsState::init_fock(occ);
  for (int s = 1; s <= 4; ++s)
    for (const auto& [key, g] : st.train().gamma(s).blocks)
      for (Eigen::Index i = 0; i < g.size(); ++i) {
        EXPECT_GE(g.data()[i].real(), 0.0);
        EXPECT_EQ(g.data()[i].imag(), 0.0);
      }
}

TEST(MpsInit, RejectsNegativeOccupation) {
  const std::vector<int> occ{1, -1};
  EXPECT_THROW(MpsState::init_fock(occ), std::invalid_argument);
}

TEST(MpsGate, ZeroAngleLeavesStateUnchanged) {
  auto st = MpsState::init_fock(std::vector<int>{1, 0, 1});
  const auto before = st.spectrum(1).values();
  st.apply_gate({1, 0.0, 0.0});
  EXPECT_EQ(st.spectrum(1).values(), before);
  EXPECT_EQ(st.charges(1), std::vector<int>{1});
  EXPECT_NEAR(std::abs(st.amplitude(std::vector<int>{1, 0, 1}) - 1.0), 0.0, 1e-15);
}

TEST(MpsGate, BalancedSplitterOnOnePhoton) {
  auto st = MpsState::init_fock(std::vector<int>{1, 0});
  const auto r = st.apply_gate({1, kPi / 4, 0.0});
  EXPECT_EQ(r.discarded_weight, 0.0);
  const auto& spec = st.spectrum(1);
  ASSERT_EQ(spec.sectors.size(), 2u);
  EXPECT_EQ(spec.sectors[0].charge.ket, 0);
  EXPECT_EQ(spec.sectors[1].charge.ket, 1);
  for (const auto& s : spec.sectors) EXPECT_NEAR(s.lambda[0], 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(st.renyi_entropy(1, 1.0), 1.0, 1e-14);
  const double p10 = st.probability(std::vector<int>{1, 0});
  const double p01 = st.probability(std::vector<int>{0, 1});
  EXPECT_NEAR(p10 + p01, 1.0, 1e-15);
}

TEST(MpsGate, FullRankConservesNormAndCanonicalForm) {
  const int m = 6, n = 3;
  auto st = MpsState::init_fock(photons_first(n, m));
  const auto plan = haar(m, 31);
  for (const auto& g : plan.gates) {
    const auto r = st.apply_gate(g);
    EXPECT_EQ(r.discarded_weight, 0.0);
    EXPECT_NEAR(r.weight_after, r.weight_before, 1e-10);
    EXPECT_NEAR(r.weight_after, 1.0, 1e-10);
    EXPECT_TRUE(st.train().integrity_report().empty()) << st.train().integrity_report();
  }
  EXPECT_LE(canonical_defect(st.train()), 1e-8);
  EXPECT_NEAR(st.norm_squared(), 1.0, 1e-10);
}

TEST(MpsAmplitude, MatchesDenseEvolution) {
  const int m = 4, n = 2;
  const auto plan = haar(m, 5);
  auto st = MpsState::init_fock(photons_first(n, m));
  st.apply_circuit(plan, TruncationPolicy::with_chi(1u << n));
  const auto dense = dense_evolve(photons_first(n, m), plan);
  double worst = 0.0;
  for (const auto& o : dense.basis) worst = std::max(worst, std::abs(st.amplitude(o) - dense.amplitude(o)));
  EXPECT_LE(worst, 1e-8);
}

TEST(MpsAmplitude, WrongPhotonNumberIsExactlyZero) {
  auto st = MpsState::init_fock(photons_first(2, 4));
  st.apply_circuit(haar(4, 3));
  EXPECT_EQ(st.amplitude(std::vector<int>{1, 0, 0, 0}), Complex(0.0));
  EXPECT_EQ(st.amplitude(std::vector<int>{1, 1, 1, 0}), Complex(0.0));
  EXPECT_EQ(st.amplitude(std::vector<int>{0, 0, 0, 7}), Complex(0.0));
}

TEST(MpsAmplitude, FullRankProbabilitiesMatchPermanents) {
  for (int m : {2, 4, 6}) {
    for (int n = 1; n <= std::min(3, m); ++n) {
      const auto plan = haar(m, static_cast<std::uint64_t>(100 * m + n));
      auto st = MpsState::init_fock(photons_first(n, m));
      st.apply_circuit(plan);
      const auto exact = exact_distribution(circuit_to_unitary(plan), photons_first(n, m));
      for (std::size_t i = 0; i < exact.outcomes.size(); ++i) {
        EXPECT_NEAR(st.probability(exact.outcomes[i]), exact.probabilities[i], 1e-8);
      }
    }
  }
}

TEST(MpsEntropy, SpectrumExamples) {
  const std::vector<double> product{1.0};
  const std::vector<double> flat{1 / std::sqrt(2.0), 1 / std::sqrt(2.0)};
  for (double a : {0.0, 0.5, 1.0, 2.0}) EXPECT_EQ(renyi_from_singular_values(product, a), 0.0);
  for (double a : {0.5, 1.0, 2.0}) EXPECT_NEAR(renyi_from_singular_values(flat, a), 1.0, 1e-14);
  const std::vector<double> skew{std::sqrt(0.75), 0.5};
  EXPECT_NEAR(renyi_from_singular_values(skew, 1.0), 0.811278, 1e-6);
  EXPECT_THROW(renyi_from_singular_values(skew, -0.5), std::invalid_argument);
}

TEST(MpsEntropy, SinglePhotonBound) {
  const int m = 12, n = 4;
  auto st = MpsState::init_fock(photons_first(n, m));
  st.apply_circuit(haar(m, 9));
  for (int k = 1; k < m; ++k) {
    EXPECT_LE(st.renyi_entropy(k, 0.0), n + 1e-12);
    EXPECT_LE(st.spectrum(k).dimension(), 1u << n);
  }
}

TEST(MpsEntropy, FockInputBondDimension) {
  const int m = 8, n = 4;
  std::vector<int> occ(m, 0);
  occ[0] = n;
  auto st = MpsState::init_fock(occ);
  const auto plan = haar(m, 12);
  for (const auto& g : plan.gates) {
    st.apply_gate(g);
    EXPECT_LE(st.max_bond_dimension(), static_cast<std::size_t>(n + 1));
  }
}

TEST(MpsTruncation, DiscardedWeightTracksNormLoss) {
  const int m = 8, n = 4;
  auto st = MpsState::init_fock(photons_first(n, m));
  const double lost = st.apply_circuit(haar(m, 21), TruncationPolicy::with_chi(4));
  EXPECT_GT(lost, 0.0);
  EXPECT_LE(st.max_bond_dimension(), 4u);
  EXPECT_NEAR(st.cumulative_discarded_weight(), lost, 1e-15);
  // Norm loss and discarded weight agree to first order in the truncation error.
  EXPECT_NEAR(1.0 - st.norm_squared(), lost, 0.25 * lost);
}

TEST(MpsTruncation, ReorthogonalizeRestoresCanonicalForm) {
  const int m = 8, n = 4;
  auto st = MpsState::init_fock(photons_first(n, m));
  TruncationPolicy p = TruncationPolicy::with_chi(4);
  p.reorthogonalize = true;
  st.apply_circuit(haar(m, 21), p);
  EXPECT_LE(canonical_defect(st.train()), 1e-8);
  for (int k = 1; k < m; ++k) EXPECT_NEAR(st.spectrum(k).weight(), 1.0, 1e-10);
  EXPECT_NEAR(st.norm_squared(), st.train().scale() * st.train().scale(), 1e-10);
}
