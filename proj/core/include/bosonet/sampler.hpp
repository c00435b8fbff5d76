#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "bosonet/mpo.hpp"
#include "bosonet/mps.hpp"
#include "bosonet/occupations.hpp"
#include "bosonet/rng.hpp"

namespace bosonet {

struct SamplingResult {
  Occupation outcome;
  double joint_probability = 0.0;  // product of the sampled conditionals
  std::uint64_t seed = 0;
};

// Chain-rule sampler over a frozen MPS or MPO. Right environments are built
// once; each sample is a single left-to-right sweep.
class Sampler {
 public:
  explicit Sampler(const MpsState& state);
  explicit Sampler(const MpoState& state);

  // Probability of the first prefix.size() modes. Empty prefix gives the norm
  // (MPS) or the trace (MPO).
  double marginal_prob(std::span<const int> prefix) const;

  SamplingResult sample(Rng& rng) const;
  std::vector<SamplingResult> sample_many(std::uint64_t seed, std::size_t count) const;

  // Weight lost to clamped negative conditional mass over all draws so far.
  double clamped_mass() const { return clamped_; }
  double total_weight() const { return total_; }

 private:
  using Env = std::map<DualCharge, ComplexMatrix>;
  using Left = std::map<DualCharge, Eigen::RowVectorXcd>;

  void build_environments();
  Left step(const Left& v, int site, int occupation) const;
  double weigh(const Left& v, int bond) const;

  const TensorTrain* train_;
  bool vectorized_;
  int photons_;
  std::vector<Env> right_;  // right_[k] closes bonds k..M
  double total_ = 0.0;
  mutable double clamped_ = 0.0;
};

double marginal_prob(const MpsState& state, std::span<const int> prefix);
double marginal_prob(const MpoState& state, std::span<const int> prefix);

}  // namespace bosonet
