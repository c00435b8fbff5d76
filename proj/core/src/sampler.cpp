#include "bosonet/sampler.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "bosonet/errors.hpp"

namespace bosonet {

namespace {

constexpr double kMinWeight = 1e-6;
constexpr double kNegativeTolerance = 1e-8;

}  // namespace

Sampler::Sampler(const MpsState& state)
    : train_(&state.train()), vectorized_(false), photons_(state.photons()) {
  build_environments();
}

Sampler::Sampler(const MpoState& state)
    : train_(&state.train()), vectorized_(true), photons_(state.photons()) {
  build_environments();
}

// MPS: Gram environments G_{k-1}(q) = sum Gamma Lambda G_k Lambda Gamma^dagger.
// MPO: trace environments R_{k-1}(q) = sum_n Gamma[(q, q - (n,n))] Lambda R_k,
// stored as column vectors.
void Sampler::build_environments() {
  const int m = train_->num_sites();
  right_.assign(static_cast<std::size_t>(m + 1), {});
  right_[static_cast<std::size_t>(m)][DualCharge{0, 0}] = ComplexMatrix::Ones(1, 1);
  for (int site = m; site >= 1; --site) {
    const Env& outer = right_[static_cast<std::size_t>(site)];
    Env inner;
    const auto& lam = train_->bond(site);
    for (const auto& [key, block] : train_->gamma(site).blocks) {
      const DualCharge local = key.first - key.second;
      if (vectorized_ && local.ket != local.bra) continue;
      auto e = outer.find(key.second);
      if (e == outer.end()) continue;
      ComplexMatrix g = block;
      const auto& l = lam.find(key.second)->lambda;
      for (Eigen::Index j = 0; j < g.cols(); ++j) g.col(j) *= l[static_cast<std::size_t>(j)];
      ComplexMatrix term = vectorized_ ? ComplexMatrix(g * e->second) : ComplexMatrix(g * e->second * g.adjoint());
      auto slot = inner.find(key.first);
      if (slot == inner.end()) inner.emplace(key.first, std::move(term));
      else slot->second += term;
    }
    right_[static_cast<std::size_t>(site - 1)] = std::move(inner);
  }
  total_ = weigh(train_->left_boundary(), 0);
}

Sampler::Left Sampler::step(const Left& v, int site, int occupation) const {
  const DualCharge local = vectorized_ ? DualCharge{occupation, occupation} : DualCharge{occupation, 0};
  return train_->advance(v, site, local);
}

double Sampler::weigh(const Left& v, int bond) const {
  const Env& env = right_[static_cast<std::size_t>(bond)];
  const double s = train_->scale();
  Complex acc = 0.0;
  for (const auto& [q, row] : v) {
    auto e = env.find(q);
    if (e == env.end()) continue;
    if (vectorized_) acc += (row * e->second)(0, 0);
    else acc += (row * e->second * row.adjoint())(0, 0);
  }
  return vectorized_ ? s * acc.real() : s * s * acc.real();
}

double Sampler::marginal_prob(std::span<const int> prefix) const {
  const int m = train_->num_sites();
  if (static_cast<int>(prefix.size()) > m) throw std::invalid_argument("marginal_prob: prefix longer than the chain");
  if (total_ < kMinWeight) {
    throw DegradedStateError("marginal_prob: state weight " + std::to_string(total_) + " below 1e-6");
  }
  Left v = train_->left_boundary();
  for (std::size_t k = 0; k < prefix.size(); ++k) {
    const int n = prefix[k];
    if (n < 0 || n >= train_->space().dim) return 0.0;
    v = step(v, static_cast<int>(k) + 1, n);
    if (v.empty()) return 0.0;
  }
  return weigh(v, static_cast<int>(prefix.size()));
}

SamplingResult Sampler::sample(Rng& rng) const {
  if (total_ < kMinWeight) {
    throw DegradedStateError("sample: state weight " + std::to_string(total_) + " below 1e-6");
  }
  const int m = train_->num_sites();
  const int d = train_->space().dim;
  SamplingResult r;
  r.seed = rng.seed();
  r.outcome.reserve(static_cast<std::size_t>(m));
  Left v = train_->left_boundary();
  double running = total_;
  double joint = 1.0;
  int used = 0;
  for (int site = 1; site <= m; ++site) {
    std::vector<Left> candidates(static_cast<std::size_t>(d));
    std::vector<double> weights(static_cast<std::size_t>(d), 0.0);
    double sum = 0.0;
    for (int n = 0; n < d; ++n) {
      // Occupations beyond the remaining photon budget have no charge-consistent block.
      if (used + n > photons_) break;
      candidates[static_cast<std::size_t>(n)] = step(v, site, n);
      double w = candidates[static_cast<std::size_t>(n)].empty() ? 0.0 : weigh(candidates[static_cast<std::size_t>(n)], site);
      if (w < 0.0) {
        if (w < -kNegativeTolerance * running) {
          throw IntegrityError("sample: negative conditional mass " + std::to_string(w / running) + " at mode " +
                               std::to_string(site));
        }
        clamped_ -= w;
        w = 0.0;
      }
      weights[static_cast<std::size_t>(n)] = w;
      sum += w;
    }
    if (!(sum > 0.0)) throw IntegrityError("sample: conditional distribution has no mass at mode " + std::to_string(site));
    const double u = rng.uniform() * sum;
    double acc = 0.0;
    int pick = -1;
    for (int n = 0; n < d; ++n) {
      if (weights[static_cast<std::size_t>(n)] <= 0.0) continue;
      acc += weights[static_cast<std::size_t>(n)];
      pick = n;
      if (u < acc) break;
    }
    joint *= weights[static_cast<std::size_t>(pick)] / sum;
    running = weights[static_cast<std::size_t>(pick)];
    used += pick;
    r.outcome.push_back(pick);
    v = std::move(candidates[static_cast<std::size_t>(pick)]);
  }
  r.joint_probability = joint;
  return r;
}

std::vector<SamplingResult> Sampler::sample_many(std::uint64_t seed, std::size_t count) const {
  Rng rng(seed);
  std::vector<SamplingResult> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample(rng));
  return out;
}

double marginal_prob(const MpsState& state, std::span<const int> prefix) {
  return Sampler(state).marginal_prob(prefix);
}

double marginal_prob(const MpoState& state, std::span<const int> prefix) {
  return Sampler(state).marginal_prob(prefix);
}

}  // namespace bosonet
