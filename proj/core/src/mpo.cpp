#include "bosonet/mpo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "bosonet/errors.hpp"

namespace bosonet {

LossSpec LossSpec::constant(double mu) {
  LossSpec s;
  s.kind = Kind::kConstant;
  s.mu = mu;
  return s;
}

LossSpec LossSpec::power_law(double beta, double gamma) {
  LossSpec s;
  s.kind = Kind::kPowerLaw;
  s.beta = beta;
  s.gamma = gamma;
  return s;
}

double LossSpec::transmissivity(int photons) const {
  double m = mu;
  if (kind == Kind::kPowerLaw) {
    if (!(beta > 0.0)) throw std::invalid_argument("loss: beta must be positive");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("loss: gamma must lie in (0, 1]");
    m = photons > 0 ? beta * std::pow(static_cast<double>(photons), gamma - 1.0) : 0.0;
  }
  if (!(m >= 0.0 && m <= 1.0)) {
    throw std::invalid_argument("loss: transmissivity " + std::to_string(m) + " outside [0, 1]");
  }
  return m;
}

MpoState MpoState::init_lossy(int photons, int modes, const LossSpec& loss, std::optional<int> sector) {
  if (photons < 0 || modes < 1 || photons > modes) {
    throw std::invalid_argument("init_lossy: need 0 <= N <= M and M >= 1");
  }
  const double mu = loss.transmissivity(photons);
  std::vector<std::vector<TensorTrain::SiteTerm>> sites;
  for (int j = 1; j <= modes; ++j) {
    if (j <= photons) {
      std::vector<TensorTrain::SiteTerm> t;
      if (mu < 1.0) t.push_back({DualCharge{0, 0}, Complex(1.0 - mu)});
      if (mu > 0.0) t.push_back({DualCharge{1, 1}, Complex(mu)});
      sites.push_back(std::move(t));
    } else {
      sites.push_back({{DualCharge{0, 0}, Complex(1.0)}});
    }
  }
  std::vector<DualCharge> boundary;
  if (sector) {
    if (*sector < 0 || *sector > photons) throw std::invalid_argument("init_lossy: sector outside 0..N");
    boundary.push_back({*sector, *sector});
  } else {
    for (int n = 0; n <= photons; ++n) boundary.push_back({n, n});
  }
  return MpoState(TensorTrain::product({photons + 1, true}, boundary, sites), photons, mu, sector);
}

MpoState::MpoState(TensorTrain train, int photons, double mu, std::optional<int> sector)
    : train_(std::move(train)), photons_(photons), mu_(mu), sector_(sector) {
  if (!train_.space().vectorized) throw std::invalid_argument("MpoState: chain is not vectorized");
  for (const auto& s : train_.bond(0).sectors) {
    if (s.charge.ket != s.charge.bra) throw std::invalid_argument("MpoState: boundary charges must be diagonal");
  }
}

UpdateResult MpoState::apply_gate(const BeamSplitterGate& gate, const TruncationPolicy& policy) {
  return apply_gate(gate.site, fock_gate(gate, local_dim()), policy);
}

UpdateResult MpoState::apply_gate(int site, const ComplexMatrix& fock, const TruncationPolicy& policy) {
  return train_.apply(site, TwoSiteGate::superoperator(fock, local_dim()), policy);
}

double MpoState::apply_circuit(const CircuitPlan& plan, const TruncationPolicy& policy,
                               std::size_t begin, std::size_t end) {
  if (plan.num_modes != num_sites()) throw std::invalid_argument("apply_circuit: mode count mismatch");
  end = std::min(end, plan.gates.size());
  // One superoperator table per gate; the Fock matrices are tiny.
  double discarded = 0.0;
  for (std::size_t i = begin; i < end; ++i) discarded += apply_gate(plan.gates[i], policy).discarded_weight;
  return discarded;
}

double MpoState::trace() const {
  TensorTrain::LeftVector v = train_.left_boundary();
  for (int site = 1; site <= num_sites(); ++site) {
    TensorTrain::LeftVector next;
    for (int n = 0; n < local_dim(); ++n) {
      for (auto& [q, row] : train_.advance(v, site, {n, n})) {
        auto slot = next.find(q);
        if (slot == next.end()) next.emplace(q, std::move(row));
        else slot->second += row;
      }
    }
    v = std::move(next);
  }
  auto it = v.find(DualCharge{0, 0});
  return it == v.end() ? 0.0 : train_.scale() * it->second(0).real();
}

Complex MpoState::element(std::span<const int> ket, std::span<const int> bra) const {
  if (static_cast<int>(ket.size()) != num_sites() || static_cast<int>(bra.size()) != num_sites()) {
    throw std::invalid_argument("element: occupation list length must equal the mode count");
  }
  std::vector<DualCharge> locals;
  for (std::size_t j = 0; j < ket.size(); ++j) {
    if (ket[j] < 0 || ket[j] >= local_dim() || bra[j] < 0 || bra[j] >= local_dim()) return Complex(0.0);
    locals.push_back({ket[j], bra[j]});
  }
  return train_.contract(locals);
}

double MpoState::outcome_prob_raw(std::span<const int> outcome) const {
  return element(outcome, outcome).real();
}

double MpoState::outcome_prob(std::span<const int> outcome) const {
  return std::clamp(outcome_prob_raw(outcome), 0.0, 1.0);
}

ComplexMatrix MpoState::density_matrix() const {
  if (count_occupations(num_sites() + 1, photons_) > 20000) {
    throw ResourceLimitError("density_matrix: basis too large for a dense reconstruction");
  }
  const auto basis = enumerate_occupations_up_to(num_sites(), photons_);
  const auto dim = static_cast<Eigen::Index>(basis.size());
  ComplexMatrix rho = ComplexMatrix::Zero(dim, dim);
  for (Eigen::Index a = 0; a < dim; ++a) {
    for (Eigen::Index b = 0; b < dim; ++b) {
      if (total_photons(basis[static_cast<std::size_t>(a)]) != total_photons(basis[static_cast<std::size_t>(b)])) continue;
      rho(a, b) = element(basis[static_cast<std::size_t>(a)], basis[static_cast<std::size_t>(b)]);
    }
  }
  return rho;
}

double MpoState::renyi_entropy(int bond, double alpha) const {
  if (bond < 1 || bond > num_sites() - 1) throw std::invalid_argument("renyi_entropy: bond out of range");
  return renyi_from_singular_values(train_.bond(bond).values(), alpha);
}

EntropyReport MpoState::entropies(double alpha) const {
  std::vector<double> per_bond;
  for (int k = 1; k < num_sites(); ++k) per_bond.push_back(renyi_entropy(k, alpha));
  if (per_bond.empty()) per_bond.push_back(0.0);
  return make_report(std::move(per_bond), alpha);
}

std::pair<int, double> MpoState::max_entropy(double alpha) const {
  const auto r = entropies(alpha);
  return {r.max_bond, r.max_value};
}

}  // namespace bosonet
