#include "bosonet/mps.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace bosonet {

MpsState MpsState::init_fock(std::span<const int> occupations) {
  const int n = std::accumulate(occupations.begin(), occupations.end(), 0);
  return init_fock(occupations, n + 1);
}

MpsState MpsState::init_fock(std::span<const int> occupations, int local_dim) {
  if (occupations.empty()) throw std::invalid_argument("init_fock: need at least one mode");
  int n = 0;
  for (int o : occupations) {
    if (o < 0) throw std::invalid_argument("init_fock: negative occupation");
    if (o >= local_dim) throw std::invalid_argument("init_fock: occupation does not fit the local dimension");
    n += o;
  }
  std::vector<std::vector<TensorTrain::SiteTerm>> sites;
  for (int o : occupations) sites.push_back({{DualCharge{o, 0}, Complex(1.0)}});
  const DualCharge boundary[] = {{n, 0}};
  MpsState s;
  s.train_ = TensorTrain::product({local_dim, false}, boundary, sites);
  s.photons_ = n;
  return s;
}

MpsState::MpsState(TensorTrain train, int photons) : train_(std::move(train)), photons_(photons) {
  if (train_.space().vectorized) throw std::invalid_argument("MpsState: chain is vectorized");
  const auto& b0 = train_.bond(0).sectors;
  if (b0.size() != 1 || b0[0].charge != DualCharge{photons, 0}) {
    throw std::invalid_argument("MpsState: left boundary must carry the photon number");
  }
}

UpdateResult MpsState::apply_gate(const BeamSplitterGate& gate, const TruncationPolicy& policy) {
  return apply_gate(gate.site, fock_gate(gate, local_dim()), policy);
}

UpdateResult MpsState::apply_gate(int site, const ComplexMatrix& fock, const TruncationPolicy& policy) {
  return train_.apply(site, TwoSiteGate::from_fock(fock, local_dim()), policy);
}

double MpsState::apply_circuit(const CircuitPlan& plan, const TruncationPolicy& policy,
                               std::size_t begin, std::size_t end) {
  if (plan.num_modes != num_sites()) throw std::invalid_argument("apply_circuit: mode count mismatch");
  end = std::min(end, plan.gates.size());
  double discarded = 0.0;
  for (std::size_t i = begin; i < end; ++i) discarded += apply_gate(plan.gates[i], policy).discarded_weight;
  return discarded;
}

Complex MpsState::amplitude(std::span<const int> occupations) const {
  if (static_cast<int>(occupations.size()) != num_sites()) {
    throw std::invalid_argument("amplitude: occupation list length must equal the mode count");
  }
  std::vector<DualCharge> locals;
  for (int o : occupations) {
    if (o < 0 || o >= local_dim()) return Complex(0.0);
    locals.push_back({o, 0});
  }
  return train_.contract(locals);
}

double MpsState::probability(std::span<const int> occupations) const {
  return std::norm(amplitude(occupations));
}

double MpsState::norm_squared() const {
  // Left Gram environments E(q) = sum over paths of v^dagger v, carried per charge.
  std::map<DualCharge, ComplexMatrix> env;
  for (const auto& s : train_.bond(0).sectors) {
    const auto n = static_cast<Eigen::Index>(s.lambda.size());
    env[s.charge] = ComplexMatrix::Identity(n, n);
  }
  for (int site = 1; site <= num_sites(); ++site) {
    std::map<DualCharge, ComplexMatrix> next;
    const auto& lam = train_.bond(site);
    for (const auto& [key, block] : train_.gamma(site).blocks) {
      auto e = env.find(key.first);
      if (e == env.end()) continue;
      ComplexMatrix g = block;
      const auto& l = lam.find(key.second)->lambda;
      for (Eigen::Index j = 0; j < g.cols(); ++j) g.col(j) *= l[static_cast<std::size_t>(j)];
      ComplexMatrix term = g.adjoint() * e->second * g;
      auto slot = next.find(key.second);
      if (slot == next.end()) next.emplace(key.second, std::move(term));
      else slot->second += term;
    }
    env = std::move(next);
  }
  auto it = env.find(DualCharge{0, 0});
  const double s = train_.scale();
  return it == env.end() ? 0.0 : s * s * it->second(0, 0).real();
}

std::vector<int> MpsState::charges(int bond) const {
  std::vector<int> out;
  for (const auto& s : train_.bond(bond).sectors) out.insert(out.end(), s.lambda.size(), s.charge.ket);
  return out;
}

double MpsState::renyi_entropy(int bond, double alpha) const {
  if (bond < 1 || bond > num_sites() - 1) throw std::invalid_argument("renyi_entropy: bond out of range");
  return renyi_from_singular_values(train_.bond(bond).values(), alpha);
}

EntropyReport MpsState::entropies(double alpha) const {
  std::vector<double> per_bond;
  for (int k = 1; k < num_sites(); ++k) per_bond.push_back(renyi_entropy(k, alpha));
  if (per_bond.empty()) per_bond.push_back(0.0);
  return make_report(std::move(per_bond), alpha);
}

std::pair<int, double> MpsState::max_entropy(double alpha) const {
  const auto r = entropies(alpha);
  return {r.max_bond, r.max_value};
}

}  // namespace bosonet
