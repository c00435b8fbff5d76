#include "bosonet/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bosonet/errors.hpp"

namespace bosonet {

bool all_finite(const ComplexMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const Complex z = m(i, j);
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    }
  }
  return true;
}

namespace {
constexpr double kSvdResidualTolerance = 1e-11;
}  // namespace

SvdResult svd(const ComplexMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) {
    throw std::invalid_argument("svd: matrix has a zero dimension");
  }
  if (!all_finite(m)) throw NumericalError("svd: non-finite input");

  SvdResult out;
  auto take = [&out](const auto& solver) {
    out.left = solver.matrixU();
    out.right_conj = solver.matrixV().adjoint();
    const auto& s = solver.singularValues();
    out.singular_values.assign(s.data(), s.data() + s.size());
  };
  // BDCSVD in Eigen 3.4.0 occasionally returns factors that do not reproduce
  // the input; check the residual and fall back to Jacobi when it is off.
  Eigen::BDCSVD<ComplexMatrix> fast(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  bool good = fast.info() == Eigen::Success;
  if (good) {
    take(fast);
    const Eigen::VectorXcd sv = fast.singularValues().cast<Complex>();
    const double residual = (out.left * sv.asDiagonal() * out.right_conj - m).norm();
    good = residual <= kSvdResidualTolerance * std::max(1.0, m.norm());
  }
  if (!good) {
    Eigen::JacobiSVD<ComplexMatrix> exact(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (exact.info() != Eigen::Success) throw NumericalError("svd: decomposition did not converge");
    take(exact);
  }

  for (Eigen::Index k = 0; k < out.left.cols(); ++k) {
    Eigen::Index arg = 0;
    out.left.col(k).cwiseAbs().maxCoeff(&arg);
    const Complex pivot = out.left(arg, k);
    const double mag = std::abs(pivot);
    if (mag == 0.0) continue;
    const Complex phase = pivot / mag;
    out.left.col(k) *= std::conj(phase);
    out.right_conj.row(k) *= phase;
  }

  if (!all_finite(out.left) || !all_finite(out.right_conj)) {
    throw NumericalError("svd: non-finite factors");
  }
  return out;
}

QrResult qr(const ComplexMatrix& m) {
  if (!all_finite(m)) throw NumericalError("qr: non-finite input");
  const Eigen::Index rows = m.rows();
  const Eigen::Index cols = m.cols();
  const Eigen::Index k = std::min(rows, cols);

  Eigen::HouseholderQR<ComplexMatrix> solver(m);
  QrResult out;
  out.q = solver.householderQ() * ComplexMatrix::Identity(rows, k);
  out.r = solver.matrixQR().topRows(k).triangularView<Eigen::Upper>();

  // Fix the gauge so that diag(R) is real and nonnegative.
  for (Eigen::Index i = 0; i < k; ++i) {
    const Complex d = out.r(i, i);
    const double mag = std::abs(d);
    if (mag == 0.0) continue;
    const Complex phase = d / mag;
    out.r.row(i) *= std::conj(phase);
    out.q.col(i) *= phase;
  }
  return out;
}

TruncationOutcome truncate_global(std::span<const SingularValueGroup> groups,
                                  const TruncationPolicy& policy) {
  if (policy.chi_max < 1) throw std::invalid_argument("truncate_global: chi_max must be >= 1");

  std::vector<KeptValue> all;
  double largest = 0.0;
  for (const auto& g : groups) {
    for (std::size_t i = 0; i < g.values.size(); ++i) {
      if (!(g.values[i] >= 0.0)) {
        throw std::invalid_argument("truncate_global: negative or NaN singular value");
      }
      all.push_back({g.label, i, g.values[i]});
      largest = std::max(largest, g.values[i]);
    }
  }
  std::sort(all.begin(), all.end(), [](const KeptValue& a, const KeptValue& b) {
    if (a.value != b.value) return a.value > b.value;
    if (a.label != b.label) return a.label < b.label;
    return a.index < b.index;
  });

  const double cutoff = policy.zero_cutoff * largest;
  std::size_t keep = 0;
  while (keep < all.size() && keep < policy.chi_max && all[keep].value > cutoff) ++keep;

  if (policy.weight_threshold) {
    double tail = 0.0;
    for (std::size_t i = keep; i < all.size(); ++i) tail += all[i].value * all[i].value;
    while (keep > 1) {
      const double w = all[keep - 1].value * all[keep - 1].value;
      if (tail + w >= *policy.weight_threshold) break;
      tail += w;
      --keep;
    }
  }

  TruncationOutcome out;
  for (std::size_t i = keep; i < all.size(); ++i) {
    out.discarded_weight += all[i].value * all[i].value;
  }
  all.resize(keep);
  out.kept = std::move(all);
  return out;
}

std::vector<Complex> to_row_major(const ComplexMatrix& m) {
  std::vector<Complex> out;
  out.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  return out;
}

ComplexMatrix from_row_major(Eigen::Index rows, Eigen::Index cols,
                             std::span<const Complex> entries) {
  if (rows < 0 || cols < 0 || entries.size() != static_cast<std::size_t>(rows * cols)) {
    throw std::invalid_argument("from_row_major: entry count does not match shape");
  }
  ComplexMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      m(i, j) = entries[static_cast<std::size_t>(i * cols + j)];
  return m;
}

}  // namespace bosonet
