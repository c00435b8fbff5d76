#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "bosonet/circuit.hpp"
#include "bosonet/entropy.hpp"
#include "bosonet/occupations.hpp"
#include "bosonet/tensor_train.hpp"

namespace bosonet {

// Uniform photon loss. Either a fixed transmissivity mu, or N_out = beta N^gamma
// so that mu = beta N^(gamma - 1).
struct LossSpec {
  enum class Kind { kConstant, kPowerLaw };
  Kind kind = Kind::kConstant;
  double mu = 1.0;
  double beta = 1.0;
  double gamma = 1.0;

  static LossSpec constant(double mu);
  static LossSpec power_law(double beta, double gamma);

  // Throws std::invalid_argument unless the result lies in [0, 1].
  double transmissivity(int photons) const;
};

// Vectorized density matrix |rho>> with local states |i, ibar>> (bra second).
// The default combined boundary carries one dual charge (n, n) per photon
// sector, so the chain holds sum_n |n>_aux (x) |rho_n>>; Tr rho = scale times
// the contraction with the identity.
class MpoState {
 public:
  // sector: restrict to a single total-photon sector (post-selection).
  static MpoState init_lossy(int photons, int modes, const LossSpec& loss,
                             std::optional<int> sector = std::nullopt);

  MpoState(TensorTrain train, int photons, double mu, std::optional<int> sector);

  int num_sites() const { return train_.num_sites(); }
  int local_dim() const { return train_.space().dim; }
  int photons() const { return photons_; }
  double mu() const { return mu_; }
  std::optional<int> sector() const { return sector_; }

  UpdateResult apply_gate(const BeamSplitterGate& gate, const TruncationPolicy& policy = {});
  UpdateResult apply_gate(int site, const ComplexMatrix& fock, const TruncationPolicy& policy = {});
  double apply_circuit(const CircuitPlan& plan, const TruncationPolicy& policy = {},
                       std::size_t begin = 0, std::size_t end = static_cast<std::size_t>(-1));

  double trace() const;
  double error() const { return 1.0 - trace(); }

  // <n| rho |n>; raw value may be slightly negative after truncation.
  double outcome_prob_raw(std::span<const int> outcome) const;
  double outcome_prob(std::span<const int> outcome) const;
  // <a| rho |b>
  Complex element(std::span<const int> ket, std::span<const int> bra) const;

  // Dense rho over enumerate_occupations_up_to(M, N). Small instances only.
  ComplexMatrix density_matrix() const;

  const BondSpectrum& spectrum(int bond) const { return train_.bond(bond); }
  double renyi_entropy(int bond, double alpha) const;
  EntropyReport entropies(double alpha) const;
  std::pair<int, double> max_entropy(double alpha) const;

  double cumulative_discarded_weight() const { return train_.discarded_weight(); }
  std::size_t max_bond_dimension() const { return train_.max_bond_dimension(); }
  const TensorTrain& train() const { return train_; }

 private:
  TensorTrain train_;
  int photons_ = 0;
  double mu_ = 1.0;
  std::optional<int> sector_;
};

}  // namespace bosonet
