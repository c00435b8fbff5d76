#pragma once

#include <array>
#include <span>
#include <vector>

#include "bosonet/linalg.hpp"

namespace bosonet {

// Collision-free closed forms. Row j of U is input mode j; the cut keeps
// output modes 1..l on the left.
struct PartitionAngles {
  int cut = 0;
  std::vector<double> cos2;  // cos^2(theta_j) = sum_{k <= l} |U_jk|^2 / sum_k |U_jk|^2
};

PartitionAngles partition_angles(const ComplexMatrix& u, int cut);

// Binomial(n, p) probabilities.
std::vector<double> binomial_spectrum(int n, double p);

// Sum over input modes of the Renyi entropy of Binomial(N_j, cos^2 theta_j).
double lossless_ee(std::span<const int> occupations, const PartitionAngles& angles, double alpha);

// Normalized eigenvalues of the per-mode vectorized reduced operator of one
// lossy single photon.
std::array<double, 4> lossy_mode_spectrum(double cos2, double mu);

// Single photons on input modes 1..photons.
double lossy_mpo_ee(const PartitionAngles& angles, double mu, double alpha, int photons);

struct ScalingExponent {
  double exponent = 0.0;
  bool log_factor = false;  // growth carries an extra log2 N
};

ScalingExponent asymptotic_scaling(double gamma, double alpha);

// [1 + mu (c - 1)]^N
double naive_cost(int photons, double mu, double c);
// e^{(c - 1) N_out} with N_out = beta N^gamma.
double naive_cost_asymptote(double photons, double beta, double gamma, double c);

}  // namespace bosonet
