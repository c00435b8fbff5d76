#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace bosonet {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

struct SvdResult {
  ComplexMatrix left;                  // columns orthonormal
  std::vector<double> singular_values;  // descending, nonnegative
  ComplexMatrix right_conj;            // rows orthonormal
};

struct QrResult {
  ComplexMatrix q;  // thin, orthonormal columns
  ComplexMatrix r;  // upper triangular with a real nonnegative diagonal
};

// Thin SVD. Throws NumericalError on non-finite input or solver failure.
// Gauge: the entry of largest modulus in each left singular vector is made
// real and positive, so results are reproducible across calls.
SvdResult svd(const ComplexMatrix& m);

QrResult qr(const ComplexMatrix& m);

struct TruncationPolicy {
  std::size_t chi_max = static_cast<std::size_t>(-1);
  // Drop the smallest values while their accumulated squared weight stays
  // below this threshold (applied after the chi cap).
  std::optional<double> weight_threshold;
  // Relative cutoff below which singular values count as exact zeros. Rounding
  // noise in the Vidal update reaches a few 1e-13, so 1e-14 is too tight.
  double zero_cutoff = 1e-12;
  // Re-canonicalize the whole chain (QR sweep + SVD sweep) after any update
  // that discarded weight.
  bool reorthogonalize = false;

  static TruncationPolicy full_rank() { return {}; }
  static TruncationPolicy with_chi(std::size_t chi) {
    TruncationPolicy p;
    p.chi_max = chi;
    return p;
  }
};

struct SingularValueGroup {
  int label = 0;
  std::vector<double> values;
};

struct KeptValue {
  int label = 0;
  std::size_t index = 0;  // position inside the group
  double value = 0.0;
};

struct TruncationOutcome {
  std::vector<KeptValue> kept;  // sorted by (value desc, label asc, index asc)
  double discarded_weight = 0.0;
};

// Keeps the chi largest singular values pooled over all groups.
TruncationOutcome truncate_global(std::span<const SingularValueGroup> groups,
                                  const TruncationPolicy& policy);

bool all_finite(const ComplexMatrix& m);

// Row-major flattening used by serialization.
std::vector<Complex> to_row_major(const ComplexMatrix& m);
ComplexMatrix from_row_major(Eigen::Index rows, Eigen::Index cols,
                             std::span<const Complex> entries);

}  // namespace bosonet
