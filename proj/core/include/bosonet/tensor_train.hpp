#pragma once

#include <compare>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bosonet/linalg.hpp"

namespace bosonet {

// U(1) label of a bond index: photons remaining to the right of the cut, for the
// ket and (in the vectorized MPO) the bra side separately. Pure states use bra = 0.
struct DualCharge {
  int ket = 0;
  int bra = 0;

  friend constexpr auto operator<=>(const DualCharge&, const DualCharge&) = default;
  friend constexpr DualCharge operator+(DualCharge a, DualCharge b) { return {a.ket + b.ket, a.bra + b.bra}; }
  friend constexpr DualCharge operator-(DualCharge a, DualCharge b) { return {a.ket - b.ket, a.bra - b.bra}; }
  constexpr bool nonnegative() const { return ket >= 0 && bra >= 0; }
};

// Local Hilbert space of one site: occupations 0..dim-1, squared when vectorized.
struct LocalSpace {
  int dim = 1;
  bool vectorized = false;

  int size() const { return vectorized ? dim * dim : dim; }
  int index(DualCharge s) const { return s.ket + dim * s.bra; }
  bool contains(DualCharge s) const {
    return s.ket >= 0 && s.ket < dim && (vectorized ? (s.bra >= 0 && s.bra < dim) : s.bra == 0);
  }
  bool operator==(const LocalSpace&) const = default;
};

struct BondSector {
  DualCharge charge;
  std::vector<double> lambda;  // descending within the sector
};

struct BondSpectrum {
  std::vector<BondSector> sectors;  // strictly ascending charges

  std::size_t dimension() const;
  double weight() const;  // sum of lambda^2
  std::vector<double> values() const;
  const BondSector* find(DualCharge q) const;
};

using BlockKey = std::pair<DualCharge, DualCharge>;

// Block-sparse site tensor. The block at (left, right) carries the local state
// left - right; local indices are never stored.
struct ChargedTensor {
  std::map<BlockKey, ComplexMatrix> blocks;
};

struct GateEntry {
  DualCharge out_left;
  DualCharge out_right;
  Complex amplitude;
};

// Sparse two-site operator: for each input pair of local states, the nonzero
// output pairs and amplitudes.
class TwoSiteGate {
 public:
  // Pure-state action of a Fock gate matrix (row = j1*d + j2, col = i1*d + i2).
  static TwoSiteGate from_fock(const ComplexMatrix& fock, int local_dim);
  // U (x) conj(U) acting on vectorized local states |i, ibar>>.
  static TwoSiteGate superoperator(const ComplexMatrix& fock, int local_dim);

  const LocalSpace& space() const { return space_; }
  const std::vector<GateEntry>& image(DualCharge in_left, DualCharge in_right) const {
    return table_[static_cast<std::size_t>(space_.index(in_left) * space_.size() + space_.index(in_right))];
  }

 private:
  LocalSpace space_;
  std::vector<std::vector<GateEntry>> table_;
};

struct UpdateResult {
  double discarded_weight = 0.0;
  double weight_before = 0.0;  // sum lambda^2 on the updated bond before the gate
  double weight_after = 0.0;   // same after truncation
};

// Charge-blocked tensor train in Vidal form:
//   psi = scale * Lambda_0 Gamma_1 Lambda_1 Gamma_2 ... Gamma_M Lambda_M
// Bond 0 holds the left boundary charges (lambda = 1 each), bond M the single
// charge (0, 0). Shared by the pure MPS and the vectorized MPO.
class TensorTrain {
 public:
  struct SiteTerm {
    DualCharge local;
    Complex coefficient;
  };

  TensorTrain() = default;
  TensorTrain(LocalSpace space, std::vector<BondSpectrum> bonds, std::vector<ChargedTensor> gammas,
              double scale, double discarded_weight);

  // Product state sum over boundary charges; only charge-consistent
  // configurations survive. Result is canonical.
  static TensorTrain product(LocalSpace space, std::span<const DualCharge> boundary,
                             const std::vector<std::vector<SiteTerm>>& sites);

  // Two-site update on sites (site, site+1), 1-based.
  UpdateResult apply(int site, const TwoSiteGate& gate, const TruncationPolicy& policy);

  // Full QR + SVD sweep; absorbs the norm into scale.
  void canonicalize();

  int num_sites() const { return static_cast<int>(gammas_.size()); }
  const LocalSpace& space() const { return space_; }
  double scale() const { return scale_; }
  double discarded_weight() const { return discarded_; }
  const BondSpectrum& bond(int k) const { return bonds_.at(static_cast<std::size_t>(k)); }
  const ChargedTensor& gamma(int site) const { return gammas_.at(static_cast<std::size_t>(site - 1)); }
  std::size_t max_bond_dimension() const;

  using LeftVector = std::map<DualCharge, Eigen::RowVectorXcd>;
  LeftVector left_boundary() const;
  // Multiplies by Gamma_site restricted to one local state, then Lambda_site.
  LeftVector advance(const LeftVector& v, int site, DualCharge local) const;
  // scale * full contraction for the given local states.
  Complex contract(std::span<const DualCharge> locals) const;

  // Structural check of charges, shapes and spectra. Empty string when sound.
  std::string integrity_report() const;

 private:
  void canonicalize_from_a_form();

  LocalSpace space_;
  std::vector<BondSpectrum> bonds_;   // M + 1 entries
  std::vector<ChargedTensor> gammas_;  // M entries
  double scale_ = 1.0;
  double discarded_ = 0.0;
};

}  // namespace bosonet
