#include "bosonet/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "bosonet/errors.hpp"

namespace bosonet {

namespace {

constexpr int kMaxPermanentSize = 24;
constexpr int kMaxLossyPhotons = 12;
constexpr std::uint64_t kMaxOutcomes = 2'000'000;
constexpr std::uint64_t kMaxDenseDim = 200'000;

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

using Index = std::map<Occupation, std::size_t>;

Index index_map(const std::vector<Occupation>& list) {
  Index idx;
  for (std::size_t i = 0; i < list.size(); ++i) idx.emplace(list[i], i);
  return idx;
}

std::vector<double> hermitian_spectrum(const ComplexMatrix& h) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("oracle: eigensolver failed");
  std::vector<double> ev(solver.eigenvalues().data(), solver.eigenvalues().data() + solver.eigenvalues().size());
  std::sort(ev.begin(), ev.end(), std::greater<>());
  double total = 0.0;
  for (double& x : ev) {
    x = std::max(x, 0.0);
    total += x;
  }
  if (total > 0.0)
    for (double& x : ev) x /= total;
  return ev;
}

}  // namespace

Complex permanent(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("permanent: matrix must be square");
  const int n = static_cast<int>(m.rows());
  if (n == 0) return Complex(1.0);
  if (n > kMaxPermanentSize) throw ResourceLimitError("permanent: matrix too large");

  // delta_0 stays +1; rows 1..n-1 flip in Gray-code order.
  Eigen::RowVectorXcd sums = m.colwise().sum();
  std::vector<int> delta(static_cast<std::size_t>(n), 1);
  int sign = 1;
  Complex total = sums.prod();
  const std::uint64_t steps = std::uint64_t{1} << (n - 1);
  for (std::uint64_t k = 1; k < steps; ++k) {
    const int row = std::countr_zero(k) + 1;
    auto& d = delta[static_cast<std::size_t>(row)];
    sums -= (2.0 * d) * m.row(row);
    d = -d;
    sign = -sign;
    total += static_cast<double>(sign) * sums.prod();
  }
  return total / static_cast<double>(steps);
}

ComplexMatrix build_submatrix(const ComplexMatrix& u, std::span<const int> s, std::span<const int> t) {
  if (static_cast<Eigen::Index>(s.size()) != u.rows() || static_cast<Eigen::Index>(t.size()) != u.cols()) {
    throw std::invalid_argument("build_submatrix: occupation lengths must match the unitary");
  }
  int ns = 0, nt = 0;
  for (int x : s) {
    if (x < 0) throw std::invalid_argument("build_submatrix: negative occupation");
    ns += x;
  }
  for (int x : t) {
    if (x < 0) throw std::invalid_argument("build_submatrix: negative occupation");
    nt += x;
  }
  if (ns != nt) throw std::invalid_argument("build_submatrix: photon numbers differ");

  ComplexMatrix cols(u.rows(), nt);
  Eigen::Index c = 0;
  for (std::size_t j = 0; j < t.size(); ++j)
    for (int r = 0; r < t[j]; ++r) cols.col(c++) = u.col(static_cast<Eigen::Index>(j));
  ComplexMatrix out(ns, nt);
  Eigen::Index r = 0;
  for (std::size_t j = 0; j < s.size(); ++j)
    for (int k = 0; k < s[j]; ++k) out.row(r++) = cols.row(static_cast<Eigen::Index>(j));
  return out;
}

double exact_prob(const ComplexMatrix& u, std::span<const int> s, std::span<const int> t) {
  const Complex per = permanent(build_submatrix(u, s, t));
  double denom = 1.0;
  for (int x : s) denom *= factorial(x);
  for (int x : t) denom *= factorial(x);
  return std::norm(per) / denom;
}

double ExactDistribution::probability(const Occupation& o) const {
  for (std::size_t i = 0; i < outcomes.size(); ++i)
    if (outcomes[i] == o) return probabilities[i];
  return 0.0;
}

double ExactDistribution::total() const {
  double s = 0.0;
  for (double p : probabilities) s += p;
  return s;
}

std::string ExactDistribution::to_csv() const {
  std::ostringstream os;
  os << "outcome,probability\n" << std::setprecision(17);
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    for (std::size_t j = 0; j < outcomes[i].size(); ++j) os << (j ? " " : "") << outcomes[i][j];
    os << "," << probabilities[i] << "\n";
  }
  return os.str();
}

ExactDistribution exact_distribution(const ComplexMatrix& u, std::span<const int> s) {
  int n = 0;
  for (int x : s) n += x;
  const int m = static_cast<int>(u.cols());
  if (count_occupations(m, n) > kMaxOutcomes) throw ResourceLimitError("exact_distribution: too many outcomes");
  ExactDistribution d;
  d.outcomes = enumerate_occupations(m, n);
  for (const auto& t : d.outcomes) d.probabilities.push_back(exact_prob(u, s, t));
  return d;
}

ExactDistribution exact_lossy_distribution(const ComplexMatrix& u, int photons, double mu) {
  const int m = static_cast<int>(u.cols());
  if (photons < 0 || photons > m) throw std::invalid_argument("exact_lossy_distribution: need 0 <= N <= M");
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("exact_lossy_distribution: mu outside [0, 1]");
  if (photons > kMaxLossyPhotons || count_occupations(m + 1, photons) > kMaxOutcomes) {
    throw ResourceLimitError("exact_lossy_distribution: instance too large");
  }

  ExactDistribution d;
  std::vector<std::size_t> offsets;
  for (int n = 0; n <= photons; ++n) {
    offsets.push_back(d.outcomes.size());
    auto block = enumerate_occupations(m, n);
    d.outcomes.insert(d.outcomes.end(), block.begin(), block.end());
  }
  d.probabilities.assign(d.outcomes.size(), 0.0);

  for (std::uint64_t subset = 0; subset < (std::uint64_t{1} << photons); ++subset) {
    const int k = std::popcount(subset);
    const double w = std::pow(mu, k) * std::pow(1.0 - mu, photons - k);
    if (w == 0.0) continue;
    std::vector<int> s(static_cast<std::size_t>(m), 0);
    for (int j = 0; j < photons; ++j)
      if (subset >> j & 1U) s[static_cast<std::size_t>(j)] = 1;
    const std::size_t base = offsets[static_cast<std::size_t>(k)];
    const std::size_t count = count_occupations(m, k);
    for (std::size_t i = 0; i < count; ++i) d.probabilities[base + i] += w * exact_prob(u, s, d.outcomes[base + i]);
  }
  return d;
}

std::size_t DenseFockState::index_of(const Occupation& o) const {
  auto it = std::lower_bound(basis.begin(), basis.end(), o, [](const Occupation& a, const Occupation& b) {
    return std::lexicographical_compare(a.rbegin(), a.rend(), b.rbegin(), b.rend());
  });
  if (it == basis.end() || *it != o) throw std::invalid_argument("DenseFockState: occupation not in basis");
  return static_cast<std::size_t>(it - basis.begin());
}

Complex DenseFockState::amplitude(const Occupation& o) const {
  if (static_cast<int>(o.size()) != modes || total_photons(o) != photons) return Complex(0.0);
  for (int x : o)
    if (x < 0) return Complex(0.0);
  return amplitudes(static_cast<Eigen::Index>(index_of(o)));
}

DenseFockState dense_evolve(std::span<const int> occupations, const CircuitPlan& plan) {
  if (static_cast<int>(occupations.size()) != plan.num_modes) {
    throw std::invalid_argument("dense_evolve: occupation length must equal the mode count");
  }
  DenseFockState st;
  st.modes = plan.num_modes;
  for (int x : occupations) {
    if (x < 0) throw std::invalid_argument("dense_evolve: negative occupation");
    st.photons += x;
  }
  if (count_occupations(st.modes, st.photons) > kMaxDenseDim) throw ResourceLimitError("dense_evolve: dimension too large");
  st.basis = enumerate_occupations(st.modes, st.photons);
  st.amplitudes = ComplexVector::Zero(static_cast<Eigen::Index>(st.basis.size()));
  st.amplitudes(static_cast<Eigen::Index>(st.index_of(Occupation(occupations.begin(), occupations.end())))) = 1.0;

  const int d = st.photons + 1;
  for (const auto& g : plan.gates) {
    const ComplexMatrix f = fock_gate(g, d);
    const auto k = static_cast<std::size_t>(g.site - 1);
    ComplexVector next = ComplexVector::Zero(st.amplitudes.size());
    for (std::size_t i = 0; i < st.basis.size(); ++i) {
      const Complex a = st.amplitudes(static_cast<Eigen::Index>(i));
      if (a == Complex(0.0)) continue;
      const int i1 = st.basis[i][k], i2 = st.basis[i][k + 1];
      Occupation out = st.basis[i];
      for (int j1 = 0; j1 <= i1 + i2; ++j1) {
        const int j2 = i1 + i2 - j1;
        const Complex amp = f(j1 * d + j2, i1 * d + i2);
        if (amp == Complex(0.0)) continue;
        out[k] = j1;
        out[k + 1] = j2;
        next(static_cast<Eigen::Index>(st.index_of(out))) += amp * a;
      }
    }
    st.amplitudes = std::move(next);
  }
  return st;
}

std::vector<double> dense_reduced_spectrum(const DenseFockState& state, int cut) {
  if (cut < 1 || cut > state.modes - 1) throw std::invalid_argument("dense_reduced_spectrum: cut out of range");
  const auto left = enumerate_occupations_up_to(cut, state.photons);
  const auto right = enumerate_occupations_up_to(state.modes - cut, state.photons);
  const Index li = index_map(left), ri = index_map(right);
  ComplexMatrix psi = ComplexMatrix::Zero(static_cast<Eigen::Index>(left.size()), static_cast<Eigen::Index>(right.size()));
  for (std::size_t i = 0; i < state.basis.size(); ++i) {
    const auto& o = state.basis[i];
    const Occupation l(o.begin(), o.begin() + cut), r(o.begin() + cut, o.end());
    psi(static_cast<Eigen::Index>(li.at(l)), static_cast<Eigen::Index>(ri.at(r))) = state.amplitudes(static_cast<Eigen::Index>(i));
  }
  // Reduced density matrix of the left modes, traced over the right explicitly.
  return hermitian_spectrum(psi * psi.adjoint());
}

std::vector<double> dense_lossy_vectorized_spectrum(int photons, int modes, const CircuitPlan& plan, double mu,
                                                    int cut, VectorizedConvention convention) {
  if (cut < 1 || cut > modes - 1) throw std::invalid_argument("dense_lossy_vectorized_spectrum: cut out of range");
  if (photons < 0 || photons > modes) throw std::invalid_argument("dense_lossy_vectorized_spectrum: need 0 <= N <= M");
  const auto left = enumerate_occupations_up_to(cut, photons);
  const auto right = enumerate_occupations_up_to(modes - cut, photons);
  const Index li = index_map(left), ri = index_map(right);
  const auto nl = static_cast<Eigen::Index>(left.size());
  const auto nr = static_cast<Eigen::Index>(right.size());
  const int blocks = convention == VectorizedConvention::kSectorResolved ? photons + 1 : 1;
  if (static_cast<std::uint64_t>(nl * nl) * static_cast<std::uint64_t>(nr * nr) * blocks > 50'000'000ULL) {
    throw ResourceLimitError("dense_lossy_vectorized_spectrum: instance too large");
  }
  ComplexMatrix x = ComplexMatrix::Zero(nl * nl * blocks, nr * nr);

  for (int n = 0; n <= photons; ++n) {
    const auto basis = enumerate_occupations(modes, n);
    ComplexMatrix rho = ComplexMatrix::Zero(static_cast<Eigen::Index>(basis.size()), static_cast<Eigen::Index>(basis.size()));
    bool any = false;
    for (std::uint64_t subset = 0; subset < (std::uint64_t{1} << photons); ++subset) {
      if (std::popcount(subset) != n) continue;
      const double w = std::pow(mu, n) * std::pow(1.0 - mu, photons - n);
      if (w == 0.0) continue;
      std::vector<int> s(static_cast<std::size_t>(modes), 0);
      for (int j = 0; j < photons; ++j)
        if (subset >> j & 1U) s[static_cast<std::size_t>(j)] = 1;
      const ComplexVector psi = dense_evolve(s, plan).amplitudes;
      rho += w * psi * psi.adjoint();
      any = true;
    }
    if (!any) continue;
    const Eigen::Index offset = convention == VectorizedConvention::kSectorResolved ? n * nl * nl : 0;
    for (std::size_t a = 0; a < basis.size(); ++a) {
      const Occupation al(basis[a].begin(), basis[a].begin() + cut), ar(basis[a].begin() + cut, basis[a].end());
      for (std::size_t b = 0; b < basis.size(); ++b) {
        const Complex v = rho(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        if (v == Complex(0.0)) continue;
        const Occupation bl(basis[b].begin(), basis[b].begin() + cut), br(basis[b].begin() + cut, basis[b].end());
        const auto row = offset + static_cast<Eigen::Index>(li.at(al)) * nl + static_cast<Eigen::Index>(li.at(bl));
        const auto col = static_cast<Eigen::Index>(ri.at(ar)) * nr + static_cast<Eigen::Index>(ri.at(br));
        x(row, col) += v;
      }
    }
  }
  // Partial trace of |rho>><<rho| over the right half.
  return x.rows() <= x.cols() ? hermitian_spectrum(x * x.adjoint()) : hermitian_spectrum(x.adjoint() * x);
}

}  // namespace bosonet
