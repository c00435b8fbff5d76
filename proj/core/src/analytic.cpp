#include "bosonet/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bosonet/entropy.hpp"

namespace bosonet {

PartitionAngles partition_angles(const ComplexMatrix& u, int cut) {
  if (u.rows() != u.cols()) throw std::invalid_argument("partition_angles: U must be square");
  if (cut < 1 || cut > u.cols() - 1) throw std::invalid_argument("partition_angles: cut out of range");
  PartitionAngles a;
  a.cut = cut;
  for (Eigen::Index j = 0; j < u.rows(); ++j) {
    const double left = u.row(j).head(cut).squaredNorm();
    const double all = u.row(j).squaredNorm();
    a.cos2.push_back(all > 0.0 ? std::clamp(left / all, 0.0, 1.0) : 0.0);
  }
  return a;
}

std::vector<double> binomial_spectrum(int n, double p) {
  if (n < 0) throw std::invalid_argument("binomial_spectrum: negative photon number");
  std::vector<double> out(static_cast<std::size_t>(n + 1), 0.0);
  if (p <= 0.0 || p >= 1.0) {
    out[p <= 0.0 ? 0 : static_cast<std::size_t>(n)] = 1.0;
    return out;
  }
  // Log space keeps large n from underflowing.
  const double lp = std::log(p), lq = std::log1p(-p);
  for (int k = 0; k <= n; ++k) {
    const double log_coeff = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    out[static_cast<std::size_t>(k)] = std::exp(log_coeff + k * lp + (n - k) * lq);
  }
  return out;
}

double lossless_ee(std::span<const int> occupations, const PartitionAngles& angles, double alpha) {
  if (occupations.size() > angles.cos2.size()) throw std::invalid_argument("lossless_ee: more modes than angles");
  double total = 0.0;
  for (std::size_t j = 0; j < occupations.size(); ++j) {
    if (occupations[j] < 0) throw std::invalid_argument("lossless_ee: negative occupation");
    if (occupations[j] == 0) continue;
    total += renyi_from_probabilities(binomial_spectrum(occupations[j], angles.cos2[j]), alpha);
  }
  return total;
}

// Basis |0>> = |0><0|, |1>>, |2>> (coherences), |3>> = |1><1| after tracing the
// right partition. The operator is a 2x2 block on {|0>>, |3>>} plus a diagonal.
std::array<double, 4> lossy_mode_spectrum(double cos2, double mu) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("lossy_mode_spectrum: mu outside [0, 1]");
  const double c2 = cos2;
  const double s2 = 1.0 - cos2;
  const double a = (1.0 - mu) * (1.0 - mu) + mu * mu * s2 * s2;
  const double b = (1.0 - mu) * mu * c2;
  const double d = mu * mu * c2 * c2;
  const double off = mu * mu * s2 * c2;
  const double z = (1.0 - mu) * (1.0 - mu) + mu * mu;

  const double mean = 0.5 * (a + d);
  const double radius = std::sqrt(0.25 * (a - d) * (a - d) + b * b);
  std::array<double, 4> ev{mean + radius, std::max(mean - radius, 0.0), off, off};
  for (double& x : ev) x /= z;
  std::sort(ev.begin(), ev.end(), std::greater<>());
  return ev;
}

double lossy_mpo_ee(const PartitionAngles& angles, double mu, double alpha, int photons) {
  if (photons < 0 || photons > static_cast<int>(angles.cos2.size())) {
    throw std::invalid_argument("lossy_mpo_ee: photon count exceeds the mode count");
  }
  double total = 0.0;
  for (int j = 0; j < photons; ++j) {
    const auto ev = lossy_mode_spectrum(angles.cos2[static_cast<std::size_t>(j)], mu);
    total += renyi_from_probabilities(ev, alpha);
  }
  return total;
}

ScalingExponent asymptotic_scaling(double gamma, double alpha) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("asymptotic_scaling: gamma must lie in (0, 1]");
  if (!(alpha >= 0.0)) throw std::invalid_argument("asymptotic_scaling: alpha must be >= 0");
  if (alpha == 1.0) return {2.0 * gamma - 1.0, true};
  return {1.0 - 2.0 * (1.0 - gamma) * alpha, false};
}

double naive_cost(int photons, double mu, double c) {
  if (!(c > 1.0)) throw std::invalid_argument("naive_cost: c must exceed 1");
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("naive_cost: mu outside [0, 1]");
  if (photons < 0) throw std::invalid_argument("naive_cost: negative photon number");
  return std::pow(1.0 + mu * (c - 1.0), photons);
}

double naive_cost_asymptote(double photons, double beta, double gamma, double c) {
  return std::exp((c - 1.0) * beta * std::pow(photons, gamma));
}

}  // namespace bosonet
