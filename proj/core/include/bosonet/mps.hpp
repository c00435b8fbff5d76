#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "bosonet/circuit.hpp"
#include "bosonet/entropy.hpp"
#include "bosonet/tensor_train.hpp"

namespace bosonet {

// Pure state of M modes with N photons, local dimension d = N + 1 by default.
// Bond charges count the photons strictly right of the cut.
class MpsState {
 public:
  static MpsState init_fock(std::span<const int> occupations);
  static MpsState init_fock(std::span<const int> occupations, int local_dim);

  // Wraps an existing chain (snapshot restore). Validates that it is a pure state.
  MpsState(TensorTrain train, int photons);

  int num_sites() const { return train_.num_sites(); }
  int local_dim() const { return train_.space().dim; }
  int photons() const { return photons_; }

  UpdateResult apply_gate(const BeamSplitterGate& gate, const TruncationPolicy& policy = {});
  UpdateResult apply_gate(int site, const ComplexMatrix& fock, const TruncationPolicy& policy = {});
  // Applies gates [begin, end) of the plan; returns the weight discarded by them.
  double apply_circuit(const CircuitPlan& plan, const TruncationPolicy& policy = {},
                       std::size_t begin = 0, std::size_t end = static_cast<std::size_t>(-1));

  Complex amplitude(std::span<const int> occupations) const;
  double probability(std::span<const int> occupations) const;
  double norm_squared() const;

  // Charge of every bond index at cut k (0..M), one entry per singular value.
  std::vector<int> charges(int bond) const;
  const BondSpectrum& spectrum(int bond) const { return train_.bond(bond); }
  double renyi_entropy(int bond, double alpha) const;
  EntropyReport entropies(double alpha) const;
  std::pair<int, double> max_entropy(double alpha) const;

  double cumulative_discarded_weight() const { return train_.discarded_weight(); }
  std::size_t max_bond_dimension() const { return train_.max_bond_dimension(); }
  const TensorTrain& train() const { return train_; }

 private:
  MpsState() = default;
  TensorTrain train_;
  int photons_ = 0;
};

}  // namespace bosonet
