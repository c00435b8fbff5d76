#include "bosonet/circuit.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bosonet {

namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

bool disjoint(const std::vector<BeamSplitterGate>& gates, std::size_t begin, std::size_t end) {
  for (std::size_t a = begin; a < end; ++a)
    for (std::size_t b = a + 1; b < end; ++b)
      if (std::abs(gates[a].site - gates[b].site) < 2) return false;
  return true;
}

void check_boundaries(const std::vector<std::size_t>& bounds, std::size_t count, const char* what) {
  if (bounds.empty()) {
    if (count != 0) throw std::invalid_argument(std::string("circuit: missing ") + what);
    return;
  }
  if (bounds.front() != 0 || bounds.back() != count) {
    throw std::invalid_argument(std::string("circuit: ") + what + " must start at 0 and end at the gate count");
  }
  for (std::size_t i = 1; i < bounds.size(); ++i) {
    if (bounds[i] < bounds[i - 1]) throw std::invalid_argument(std::string("circuit: ") + what + " not sorted");
  }
}

}  // namespace

void validate(const CircuitPlan& plan) {
  if (plan.num_modes < 1) throw std::invalid_argument("circuit: num_modes must be positive");
  for (const auto& g : plan.gates) {
    if (g.site < 1 || g.site > plan.num_modes - 1) {
      throw std::invalid_argument("circuit: gate site " + std::to_string(g.site) + " out of range");
    }
    if (!(g.theta >= 0.0 && g.theta <= std::numbers::pi / 2 + 1e-15)) {
      throw std::invalid_argument("circuit: theta outside [0, pi/2]");
    }
    if (!(g.phi >= 0.0 && g.phi < 2 * std::numbers::pi)) {
      throw std::invalid_argument("circuit: phi outside [0, 2 pi)");
    }
  }
  check_boundaries(plan.block_boundaries, plan.gates.size(), "block boundaries");
  check_boundaries(plan.layer_boundaries, plan.gates.size(), "layer boundaries");
  for (std::size_t i = 1; i < plan.layer_boundaries.size(); ++i) {
    if (!disjoint(plan.gates, plan.layer_boundaries[i - 1], plan.layer_boundaries[i])) {
      throw std::invalid_argument("circuit: gates within a layer overlap");
    }
  }
}

std::vector<int> gen_index_sequence(int n) {
  if (n < 2) throw std::invalid_argument("gen_index_sequence: n must be >= 2");
  std::vector<int> seq;
  for (int k = n - 1; k >= 1; --k)
    if (k % 2 == 1) seq.push_back(k);
  for (int k = 2; k < n; k += 2) seq.push_back(k);
  return seq;
}

double sample_reflectivity(int n, int s_i, double u) {
  if (!(n > s_i && s_i >= 1)) throw std::invalid_argument("sample_reflectivity: need n > s_i >= 1");
  return 1.0 - std::pow(1.0 - u, 1.0 / static_cast<double>(n - s_i));
}

// Blocks R_1 R_3 ... R_{M-1} R_M R_{M-2} ... R_2, with R_n holding one gate on
// every site of gen_index_sequence(n). The gate on site s draws its
// transmissivity cos^2(theta) from the density s (1-t)^(s-1); that is the
// assignment under which the product reproduces Haar moments (see README).
CircuitPlan sample_haar_circuit(int num_modes, Rng& rng) {
  if (num_modes < 2 || num_modes % 2 != 0) {
    throw std::invalid_argument("sample_haar_circuit: M must be even and >= 2");
  }
  const int m = num_modes;
  std::vector<int> blocks;
  for (int j = 1; j <= m / 2; ++j) blocks.push_back(2 * j - 1);
  for (int i = 0; i < m / 2; ++i) blocks.push_back(m - 2 * i);

  CircuitPlan plan;
  plan.num_modes = m;
  for (int n : blocks) {
    if (n < 2) continue;
    plan.block_boundaries.push_back(plan.gates.size());
    plan.layer_boundaries.push_back(plan.gates.size());
    bool in_odd = true;
    for (int s : gen_index_sequence(n)) {
      if (in_odd && s % 2 == 0) {
        plan.layer_boundaries.push_back(plan.gates.size());
        in_odd = false;
      }
      const double t = 1.0 - std::pow(1.0 - rng.uniform(), 1.0 / s);
      const double phi = 2.0 * std::numbers::pi * rng.uniform();
      plan.gates.push_back({s, std::acos(std::sqrt(t)), phi});
    }
  }
  plan.block_boundaries.push_back(plan.gates.size());
  plan.layer_boundaries.push_back(plan.gates.size());
  return plan;
}

ComplexMatrix gate_matrix(const BeamSplitterGate& gate) {
  const double c = std::cos(gate.theta);
  const double s = std::sin(gate.theta);
  const Complex e = std::polar(1.0, gate.phi);
  ComplexMatrix b(2, 2);
  b << c, -e * s, std::conj(e) * s, c;
  return b;
}

ComplexMatrix circuit_to_unitary(const CircuitPlan& plan) {
  validate(plan);
  ComplexMatrix u = ComplexMatrix::Identity(plan.num_modes, plan.num_modes);
  for (const auto& g : plan.gates) {
    const ComplexMatrix b = gate_matrix(g);
    const Eigen::Index k = g.site - 1;
    u.middleCols(k, 2) = (u.middleCols(k, 2) * b).eval();
  }
  return u;
}

ComplexMatrix fock_gate(const BeamSplitterGate& gate, int local_dim) {
  if (local_dim < 1) throw std::invalid_argument("fock_gate: local_dim must be >= 1");
  const int d = local_dim;
  const double c = std::cos(gate.theta);
  const double s = std::sin(gate.theta);
  const Complex up = -std::polar(s, gate.phi);   // coefficient of b in the image of a
  const Complex down = std::polar(s, -gate.phi);  // coefficient of a in the image of b

  ComplexMatrix f = ComplexMatrix::Zero(d * d, d * d);
  for (int i1 = 0; i1 < d; ++i1) {
    for (int i2 = 0; i2 < d; ++i2) {
      const double in_norm = std::sqrt(factorial(i1) * factorial(i2));
      for (int p = 0; p <= i1; ++p) {
        for (int q = 0; q <= i2; ++q) {
          const int j1 = p + q;
          const int j2 = i1 + i2 - j1;
          if (j1 >= d || j2 >= d) continue;
          const Complex term = binomial(i1, p) * binomial(i2, q) *
                               std::pow(c, p + i2 - q) * std::pow(up, i1 - p) *
                               std::pow(down, q) *
                               std::sqrt(factorial(j1) * factorial(j2)) / in_norm;
          f(j1 * d + j2, i1 * d + i2) += term;
        }
      }
    }
  }
  return f;
}

}  // namespace bosonet
