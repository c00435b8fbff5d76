#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "bosonet/circuit.hpp"
#include "bosonet/linalg.hpp"
#include "bosonet/occupations.hpp"

namespace bosonet {

// Brute-force references for small instances.

// Glynn's formula with Gray-code ordering, O(2^(n-1) n).
Complex permanent(const ComplexMatrix& m);

// Repeat t_j copies of column j, then s_j copies of row j.
ComplexMatrix build_submatrix(const ComplexMatrix& u, std::span<const int> s, std::span<const int> t);

// |Per(U_{S,T})|^2 / (prod t_j! prod s_j!)
double exact_prob(const ComplexMatrix& u, std::span<const int> s, std::span<const int> t);

struct ExactDistribution {
  std::vector<Occupation> outcomes;  // total ascending, colexicographic within a total
  std::vector<double> probabilities;

  double probability(const Occupation& o) const;
  double total() const;
  std::string to_csv() const;
};

// Lossless output distribution for input occupations s.
ExactDistribution exact_distribution(const ComplexMatrix& u, std::span<const int> s);

// Single photons in modes 1..N, each surviving with probability mu.
ExactDistribution exact_lossy_distribution(const ComplexMatrix& u, int photons, double mu);

struct DenseFockState {
  int modes = 0;
  int photons = 0;
  std::vector<Occupation> basis;  // colexicographic
  ComplexVector amplitudes;

  std::size_t index_of(const Occupation& o) const;
  Complex amplitude(const Occupation& o) const;
};

DenseFockState dense_evolve(std::span<const int> occupations, const CircuitPlan& plan);

// Eigenvalues (descending) of the reduced density matrix of modes 1..cut.
std::vector<double> dense_reduced_spectrum(const DenseFockState& state, int cut);

enum class VectorizedConvention {
  // One auxiliary label per photon sector, as in the combined-boundary MPO.
  kSectorResolved,
  // Plain vectorization of rho.
  kMerged,
};

// Normalized squared Schmidt values of |rho>> across modes 1..cut.
std::vector<double> dense_lossy_vectorized_spectrum(int photons, int modes, const CircuitPlan& plan, double mu,
                                                    int cut, VectorizedConvention convention);

}  // namespace bosonet
