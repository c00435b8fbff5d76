#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bosonet/linalg.hpp"
#include "bosonet/rng.hpp"

namespace bosonet {

// Two-mode beam splitter on modes (site, site+1), 1-based. Acting on creation
// operators: a -> cos(theta) a - e^{i phi} sin(theta) b,
//            b -> e^{-i phi} sin(theta) a + cos(theta) b.
struct BeamSplitterGate {
  int site = 1;
  double theta = 0.0;  // [0, pi/2]
  double phi = 0.0;    // [0, 2 pi)

  bool operator==(const BeamSplitterGate&) const = default;
};

// Gates in application order. Blocks are the R_n groups of the Haar
// construction; each block splits further into layers of disjoint gates.
struct CircuitPlan {
  int num_modes = 0;
  std::vector<BeamSplitterGate> gates;
  std::vector<std::size_t> block_boundaries;  // start offsets, plus gates.size() at the end
  std::vector<std::size_t> layer_boundaries;  // same, for disjoint-gate layers

  int depth() const { return block_boundaries.empty() ? 0 : static_cast<int>(block_boundaries.size()) - 1; }
  int layer_count() const { return layer_boundaries.empty() ? 0 : static_cast<int>(layer_boundaries.size()) - 1; }

  bool operator==(const CircuitPlan&) const = default;
};

// Validates sites, angles and boundary lists. Throws std::invalid_argument.
void validate(const CircuitPlan& plan);

// Odd numbers below n in descending order, then even numbers below n ascending.
std::vector<int> gen_index_sequence(int n);

// Inverse-CDF draw from density e (1-r)^(e-1) on [0,1], e = n - s_i.
double sample_reflectivity(int n, int s_i, double u);

CircuitPlan sample_haar_circuit(int num_modes, Rng& rng);

// 2x2 matrix of a single gate.
ComplexMatrix gate_matrix(const BeamSplitterGate& gate);

// Product of embedded gate matrices in plan order (row index = input mode).
ComplexMatrix circuit_to_unitary(const CircuitPlan& plan);

// <j1, j2| B |i1, i2> on occupations below d, indexed row = j1*d + j2,
// column = i1*d + i2.
ComplexMatrix fock_gate(const BeamSplitterGate& gate, int local_dim);

std::string circuit_to_json(const CircuitPlan& plan);
CircuitPlan circuit_from_json(const std::string& text);

// FNV-1a over the JSON form; used to tag outputs with the circuit they came from.
std::uint64_t circuit_hash(const CircuitPlan& plan);

}  // namespace bosonet
