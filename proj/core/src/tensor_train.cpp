#include "bosonet/tensor_train.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "bosonet/errors.hpp"

namespace bosonet {

namespace {

constexpr double kInverseCutoff = 1e-12;

void scale_columns(ComplexMatrix& m, const std::vector<double>& s) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) m.col(j) *= s[static_cast<std::size_t>(j)];
}

void scale_rows(ComplexMatrix& m, const std::vector<double>& s) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) m.row(i) *= s[static_cast<std::size_t>(i)];
}

// 1/lambda with entries below kInverseCutoff * max(lambda) mapped to zero.
std::vector<double> regularized_inverse(const std::vector<double>& lambda, double largest) {
  std::vector<double> inv(lambda.size(), 0.0);
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    if (lambda[i] >= kInverseCutoff * largest && lambda[i] > 0.0) inv[i] = 1.0 / lambda[i];
  }
  return inv;
}

double max_lambda(const BondSpectrum& b) {
  double m = 0.0;
  for (const auto& s : b.sectors)
    for (double x : s.lambda) m = std::max(m, x);
  return m;
}

std::string describe(DualCharge q) {
  std::ostringstream os;
  os << "(" << q.ket << "," << q.bra << ")";
  return os.str();
}

}  // namespace

std::size_t BondSpectrum::dimension() const {
  std::size_t n = 0;
  for (const auto& s : sectors) n += s.lambda.size();
  return n;
}

double BondSpectrum::weight() const {
  double w = 0.0;
  for (const auto& s : sectors)
    for (double x : s.lambda) w += x * x;
  return w;
}

std::vector<double> BondSpectrum::values() const {
  std::vector<double> v;
  for (const auto& s : sectors) v.insert(v.end(), s.lambda.begin(), s.lambda.end());
  return v;
}

const BondSector* BondSpectrum::find(DualCharge q) const {
  auto it = std::lower_bound(sectors.begin(), sectors.end(), q,
                             [](const BondSector& s, DualCharge c) { return s.charge < c; });
  if (it == sectors.end() || it->charge != q) return nullptr;
  return &*it;
}

TwoSiteGate TwoSiteGate::from_fock(const ComplexMatrix& fock, int d) {
  if (fock.rows() != d * d || fock.cols() != d * d) {
    throw std::invalid_argument("TwoSiteGate: fock matrix does not match local dimension");
  }
  TwoSiteGate g;
  g.space_ = {d, false};
  g.table_.resize(static_cast<std::size_t>(d * d));
  for (int i1 = 0; i1 < d; ++i1) {
    for (int i2 = 0; i2 < d; ++i2) {
      auto& out = g.table_[static_cast<std::size_t>(i1 * d + i2)];
      for (int j1 = 0; j1 < d; ++j1) {
        const int j2 = i1 + i2 - j1;
        if (j2 < 0 || j2 >= d) continue;
        const Complex a = fock(j1 * d + j2, i1 * d + i2);
        if (a != Complex(0.0)) out.push_back({{j1, 0}, {j2, 0}, a});
      }
    }
  }
  return g;
}

TwoSiteGate TwoSiteGate::superoperator(const ComplexMatrix& fock, int d) {
  const TwoSiteGate pure = from_fock(fock, d);
  TwoSiteGate g;
  g.space_ = {d, true};
  const int n = d * d;
  g.table_.resize(static_cast<std::size_t>(n * n));
  for (int i1 = 0; i1 < d; ++i1) {
    for (int b1 = 0; b1 < d; ++b1) {
      for (int i2 = 0; i2 < d; ++i2) {
        for (int b2 = 0; b2 < d; ++b2) {
          const DualCharge in1{i1, b1};
          const DualCharge in2{i2, b2};
          auto& out = g.table_[static_cast<std::size_t>(g.space_.index(in1) * n + g.space_.index(in2))];
          for (const auto& k : pure.image({i1, 0}, {i2, 0})) {
            for (const auto& b : pure.image({b1, 0}, {b2, 0})) {
              out.push_back({{k.out_left.ket, b.out_left.ket},
                             {k.out_right.ket, b.out_right.ket},
                             k.amplitude * std::conj(b.amplitude)});
            }
          }
        }
      }
    }
  }
  return g;
}

TensorTrain::TensorTrain(LocalSpace space, std::vector<BondSpectrum> bonds,
                         std::vector<ChargedTensor> gammas, double scale, double discarded_weight)
    : space_(space), bonds_(std::move(bonds)), gammas_(std::move(gammas)),
      scale_(scale), discarded_(discarded_weight) {
  if (gammas_.empty() || bonds_.size() != gammas_.size() + 1) {
    throw std::invalid_argument("TensorTrain: need M >= 1 site tensors and M + 1 bonds");
  }
  if (const auto why = integrity_report(); !why.empty()) throw IntegrityError("TensorTrain: " + why);
}

TensorTrain TensorTrain::product(LocalSpace space, std::span<const DualCharge> boundary,
                                 const std::vector<std::vector<SiteTerm>>& sites) {
  const std::size_t m = sites.size();
  if (m == 0) throw std::invalid_argument("TensorTrain::product: no sites");
  for (const auto& site : sites) {
    for (const auto& t : site) {
      if (!space.contains(t.local)) throw std::invalid_argument("TensorTrain::product: local state outside space");
    }
  }

  // Charges reachable from the left boundary and from the right end.
  std::vector<std::set<DualCharge>> forward(m + 1), backward(m + 1);
  forward[0].insert(boundary.begin(), boundary.end());
  for (std::size_t k = 1; k <= m; ++k) {
    for (DualCharge q : forward[k - 1])
      for (const auto& t : sites[k - 1])
        if (t.coefficient != Complex(0.0) && (q - t.local).nonnegative()) forward[k].insert(q - t.local);
  }
  backward[m].insert(DualCharge{0, 0});
  for (std::size_t k = m; k >= 1; --k) {
    for (DualCharge q : backward[k])
      for (const auto& t : sites[k - 1])
        if (t.coefficient != Complex(0.0)) backward[k - 1].insert(q + t.local);
  }

  TensorTrain tt;
  tt.space_ = space;
  tt.bonds_.resize(m + 1);
  tt.gammas_.resize(m);
  for (std::size_t k = 0; k <= m; ++k) {
    for (DualCharge q : forward[k]) {
      if (backward[k].count(q)) tt.bonds_[k].sectors.push_back({q, {1.0}});
    }
    if (tt.bonds_[k].sectors.empty()) {
      throw std::invalid_argument("TensorTrain::product: no configuration is consistent with the boundary charges");
    }
  }
  for (std::size_t k = 1; k <= m; ++k) {
    for (const auto& left : tt.bonds_[k - 1].sectors) {
      for (const auto& t : sites[k - 1]) {
        if (t.coefficient == Complex(0.0)) continue;
        const DualCharge right = left.charge - t.local;
        if (!tt.bonds_[k].find(right)) continue;
        ComplexMatrix block(1, 1);
        block(0, 0) = t.coefficient;
        tt.gammas_[k - 1].blocks[{left.charge, right}] = block;
      }
    }
  }
  tt.scale_ = 1.0;
  tt.canonicalize_from_a_form();
  return tt;
}

void TensorTrain::canonicalize() {
  // Back to left-to-right A-form: A_k = Gamma_k Lambda_k, with Lambda_0 folded into A_1.
  const std::size_t m = gammas_.size();
  for (std::size_t k = 1; k <= m; ++k) {
    for (auto& [key, block] : gammas_[k - 1].blocks) {
      if (k == 1) {
        if (const auto* s = bonds_[0].find(key.first)) scale_rows(block, s->lambda);
      }
      if (const auto* s = bonds_[k].find(key.second)) scale_columns(block, s->lambda);
    }
  }
  canonicalize_from_a_form();
}

// Input: gammas_ hold an A-form chain (no lambdas), bonds_[0] the boundary
// charges. Output: Vidal form with scale_ multiplied by the chain norm.
void TensorTrain::canonicalize_from_a_form() {
  const std::size_t m = gammas_.size();

  // Left sweep: QR per right charge, pushing R into the next site.
  for (std::size_t k = 1; k <= m; ++k) {
    auto& tensor = gammas_[k - 1].blocks;
    std::map<DualCharge, std::vector<std::pair<DualCharge, ComplexMatrix*>>> by_right;
    for (auto& [key, block] : tensor) by_right[key.second].push_back({key.first, &block});

    std::map<DualCharge, ComplexMatrix> r_factors;
    std::map<BlockKey, ComplexMatrix> next;
    for (auto& [right, parts] : by_right) {
      Eigen::Index rows = 0;
      const Eigen::Index cols = parts.front().second->cols();
      for (auto& p : parts) rows += p.second->rows();
      ComplexMatrix stacked(rows, cols);
      Eigen::Index offset = 0;
      for (auto& p : parts) {
        stacked.middleRows(offset, p.second->rows()) = *p.second;
        offset += p.second->rows();
      }
      QrResult f = qr(stacked);
      offset = 0;
      for (auto& p : parts) {
        next[{p.first, right}] = f.q.middleRows(offset, p.second->rows());
        offset += p.second->rows();
      }
      r_factors[right] = std::move(f.r);
    }
    tensor = std::move(next);

    if (k < m) {
      auto& following = gammas_[k].blocks;
      for (auto it = following.begin(); it != following.end();) {
        auto r = r_factors.find(it->first.first);
        if (r == r_factors.end()) {
          it = following.erase(it);
        } else {
          it->second = (r->second * it->second).eval();
          ++it;
        }
      }
    } else {
      auto r = r_factors.find(DualCharge{0, 0});
      const double norm = (r == r_factors.end()) ? 0.0 : std::abs(r->second(0, 0));
      if (!(norm > 0.0) || !std::isfinite(norm)) throw IntegrityError("canonicalize: state has zero norm");
      scale_ *= norm;
      // R is 1x1, real and positive: dividing Q by it is a no-op, so A_M = Q.
    }
  }

  // Right sweep: SVD per left charge of G_k Lambda_k.
  std::map<DualCharge, std::vector<double>> lam_right{{DualCharge{0, 0}, {1.0}}};
  bonds_[m].sectors = {{DualCharge{0, 0}, {1.0}}};
  for (std::size_t k = m; k >= 1; --k) {
    auto& tensor = gammas_[k - 1].blocks;
    for (auto it = tensor.begin(); it != tensor.end();) {
      if (!lam_right.count(it->first.second)) it = tensor.erase(it);
      else ++it;
    }
    if (k == 1) break;

    std::map<DualCharge, std::vector<std::pair<DualCharge, const ComplexMatrix*>>> by_left;
    for (const auto& [key, block] : tensor) by_left[key.first].push_back({key.second, &block});

    std::map<DualCharge, SvdResult> factors;
    std::map<DualCharge, std::vector<std::pair<DualCharge, Eigen::Index>>> layouts;
    double largest = 0.0;
    for (const auto& [left, parts] : by_left) {
      Eigen::Index cols = 0;
      const Eigen::Index rows = parts.front().second->rows();
      for (const auto& p : parts) cols += p.second->cols();
      ComplexMatrix y(rows, cols);
      Eigen::Index offset = 0;
      for (const auto& p : parts) {
        ComplexMatrix b = *p.second;
        scale_columns(b, lam_right.at(p.first));
        y.middleCols(offset, b.cols()) = b;
        layouts[left].push_back({p.first, b.cols()});
        offset += b.cols();
      }
      factors[left] = svd(y);
      if (!factors[left].singular_values.empty()) {
        largest = std::max(largest, factors[left].singular_values.front());
      }
    }

    double right_max = 0.0;
    for (const auto& [q, l] : lam_right) right_max = std::max(right_max, l.front());
    std::map<DualCharge, std::vector<double>> lam_left;
    std::map<DualCharge, ComplexMatrix> u_kept;
    std::map<BlockKey, ComplexMatrix> rebuilt;
    const double cutoff = TruncationPolicy{}.zero_cutoff * largest;
    for (auto& [left, f] : factors) {
      std::size_t rank = 0;
      while (rank < f.singular_values.size() && f.singular_values[rank] > cutoff) ++rank;
      if (rank == 0) continue;
      const auto r = static_cast<Eigen::Index>(rank);
      Eigen::Index offset = 0;
      for (const auto& [right, width] : layouts[left]) {
        const auto& lr = lam_right.at(right);
        ComplexMatrix g = f.right_conj.topRows(r).middleCols(offset, width);
        scale_columns(g, regularized_inverse(lr, right_max));
        rebuilt[{left, right}] = std::move(g);
        offset += width;
      }
      lam_left[left].assign(f.singular_values.begin(), f.singular_values.begin() + r);
      u_kept[left] = f.left.leftCols(r);
    }
    tensor = std::move(rebuilt);

    auto& previous = gammas_[k - 2].blocks;
    for (auto it = previous.begin(); it != previous.end();) {
      auto u = u_kept.find(it->first.second);
      if (u == u_kept.end()) {
        it = previous.erase(it);
      } else {
        it->second = (it->second * u->second).eval();
        ++it;
      }
    }

    bonds_[k - 1].sectors.clear();
    for (auto& [q, l] : lam_left) bonds_[k - 1].sectors.push_back({q, std::move(l)});
    lam_right.clear();
    for (const auto& s : bonds_[k - 1].sectors) lam_right[s.charge] = s.lambda;
  }

  // Boundary: keep charges that still connect, each with lambda = 1.
  std::set<DualCharge> used;
  for (const auto& [key, block] : gammas_[0].blocks) used.insert(key.first);
  bonds_[0].sectors.clear();
  for (DualCharge q : used) bonds_[0].sectors.push_back({q, {1.0}});
}

UpdateResult TensorTrain::apply(int site, const TwoSiteGate& gate, const TruncationPolicy& policy) {
  const int m = num_sites();
  if (site < 1 || site > m - 1) throw std::invalid_argument("apply: site out of range");
  if (!(gate.space() == space_)) throw std::invalid_argument("apply: gate local space does not match the state");

  const auto k = static_cast<std::size_t>(site);
  const BondSpectrum& left_bond = bonds_[k - 1];
  const BondSpectrum& mid_bond = bonds_[k];
  const BondSpectrum& right_bond = bonds_[k + 1];
  auto& g1 = gammas_[k - 1].blocks;
  auto& g2 = gammas_[k].blocks;

  UpdateResult result;
  result.weight_before = mid_bond.weight();

  std::map<DualCharge, std::vector<std::pair<DualCharge, const ComplexMatrix*>>> g2_by_left;
  for (const auto& [key, block] : g2) g2_by_left[key.first].push_back({key.second, &block});

  // Theta blocks grouped by the new middle charge.
  std::map<DualCharge, std::map<BlockKey, ComplexMatrix>> theta;
  for (const auto& [key1, a] : g1) {
    const DualCharge ql = key1.first;
    const DualCharge p = key1.second;
    const auto* lam_p = mid_bond.find(p);
    auto partners = g2_by_left.find(p);
    if (!lam_p || partners == g2_by_left.end()) continue;
    ComplexMatrix a_lam = a;
    scale_columns(a_lam, lam_p->lambda);
    for (const auto& [qr, b] : partners->second) {
      const ComplexMatrix t = a_lam * (*b);
      for (const auto& e : gate.image(ql - p, p - qr)) {
        const DualCharge qm = ql - e.out_left;
        auto& slot = theta[qm][{ql, qr}];
        if (slot.size() == 0) slot = ComplexMatrix::Zero(t.rows(), t.cols());
        slot += e.amplitude * t;
      }
    }
  }

  struct Sector {
    DualCharge charge;
    std::vector<std::pair<DualCharge, Eigen::Index>> rows;  // (ql, offset)
    std::vector<std::pair<DualCharge, Eigen::Index>> cols;  // (qr, offset)
    SvdResult factors;
  };
  std::vector<Sector> sectors;
  std::vector<SingularValueGroup> groups;
  for (auto& [qm, blocks] : theta) {
    Sector s;
    s.charge = qm;
    std::map<DualCharge, Eigen::Index> row_dims, col_dims;
    for (const auto& [key, block] : blocks) {
      row_dims[key.first] = block.rows();
      col_dims[key.second] = block.cols();
    }
    Eigen::Index nrows = 0, ncols = 0;
    for (const auto& [q, n] : row_dims) { s.rows.push_back({q, nrows}); nrows += n; }
    for (const auto& [q, n] : col_dims) { s.cols.push_back({q, ncols}); ncols += n; }
    auto offset_of = [](const auto& list, DualCharge q) {
      return std::lower_bound(list.begin(), list.end(), q,
                              [](const auto& e, DualCharge c) { return e.first < c; })->second;
    };
    ComplexMatrix big = ComplexMatrix::Zero(nrows, ncols);
    for (auto& [key, block] : blocks) {
      scale_rows(block, left_bond.find(key.first)->lambda);
      scale_columns(block, right_bond.find(key.second)->lambda);
      big.block(offset_of(s.rows, key.first), offset_of(s.cols, key.second), block.rows(), block.cols()) = block;
    }
    s.factors = svd(big);
    groups.push_back({static_cast<int>(sectors.size()), s.factors.singular_values});
    sectors.push_back(std::move(s));
  }

  const TruncationOutcome kept = truncate_global(groups, policy);
  std::vector<std::size_t> keep_count(sectors.size(), 0);
  for (const auto& kv : kept.kept) {
    auto& c = keep_count[static_cast<std::size_t>(kv.label)];
    c = std::max(c, kv.index + 1);
  }
  // The tie-break on index makes the kept set a prefix of every group.
  double discarded = 0.0;
  for (std::size_t i = 0; i < sectors.size(); ++i) {
    const auto& sv = sectors[i].factors.singular_values;
    for (std::size_t j = keep_count[i]; j < sv.size(); ++j) discarded += sv[j] * sv[j];
  }

  const double left_max = max_lambda(left_bond);
  const double right_max = max_lambda(right_bond);
  std::map<BlockKey, ComplexMatrix> new_g1, new_g2;
  BondSpectrum new_mid;
  for (std::size_t i = 0; i < sectors.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(keep_count[i]);
    if (r == 0) continue;
    const Sector& s = sectors[i];
    const auto& sv = s.factors.singular_values;
    new_mid.sectors.push_back({s.charge, std::vector<double>(sv.begin(), sv.begin() + r)});
    for (const auto& [ql, off] : s.rows) {
      const auto& lam = left_bond.find(ql)->lambda;
      ComplexMatrix u = s.factors.left.block(off, 0, static_cast<Eigen::Index>(lam.size()), r);
      scale_rows(u, regularized_inverse(lam, left_max));
      new_g1[{ql, s.charge}] = std::move(u);
    }
    for (const auto& [qr, off] : s.cols) {
      const auto& lam = right_bond.find(qr)->lambda;
      ComplexMatrix v = s.factors.right_conj.block(0, off, r, static_cast<Eigen::Index>(lam.size()));
      scale_columns(v, regularized_inverse(lam, right_max));
      new_g2[{s.charge, qr}] = std::move(v);
    }
  }
  if (new_mid.sectors.empty()) throw DegradedStateError("apply: update removed every singular value");

  g1 = std::move(new_g1);
  g2 = std::move(new_g2);
  bonds_[k] = std::move(new_mid);

  result.discarded_weight = discarded;
  result.weight_after = bonds_[k].weight();
  discarded_ += discarded;

  if (policy.reorthogonalize && discarded > 0.0) canonicalize();
  return result;
}

std::size_t TensorTrain::max_bond_dimension() const {
  std::size_t d = 0;
  for (const auto& b : bonds_) d = std::max(d, b.dimension());
  return d;
}

TensorTrain::LeftVector TensorTrain::left_boundary() const {
  LeftVector v;
  for (const auto& s : bonds_[0].sectors) {
    Eigen::RowVectorXcd row(static_cast<Eigen::Index>(s.lambda.size()));
    for (std::size_t i = 0; i < s.lambda.size(); ++i) row(static_cast<Eigen::Index>(i)) = s.lambda[i];
    v[s.charge] = row;
  }
  return v;
}

TensorTrain::LeftVector TensorTrain::advance(const LeftVector& v, int site, DualCharge local) const {
  LeftVector out;
  const auto& blocks = gamma(site).blocks;
  const auto& lam = bonds_[static_cast<std::size_t>(site)];
  for (const auto& [q, row] : v) {
    const DualCharge right = q - local;
    auto it = blocks.find({q, right});
    if (it == blocks.end()) continue;
    Eigen::RowVectorXcd next = row * it->second;
    const auto* s = lam.find(right);
    for (Eigen::Index j = 0; j < next.size(); ++j) next(j) *= s->lambda[static_cast<std::size_t>(j)];
    auto slot = out.find(right);
    if (slot == out.end()) out.emplace(right, std::move(next));
    else slot->second += next;
  }
  return out;
}

Complex TensorTrain::contract(std::span<const DualCharge> locals) const {
  if (static_cast<int>(locals.size()) != num_sites()) {
    throw std::invalid_argument("contract: need one local state per site");
  }
  LeftVector v = left_boundary();
  for (int s = 1; s <= num_sites() && !v.empty(); ++s) v = advance(v, s, locals[static_cast<std::size_t>(s - 1)]);
  auto it = v.find(DualCharge{0, 0});
  if (it == v.end()) return Complex(0.0);
  return scale_ * it->second(0);
}

std::string TensorTrain::integrity_report() const {
  std::ostringstream why;
  for (std::size_t k = 0; k < bonds_.size(); ++k) {
    const auto& secs = bonds_[k].sectors;
    for (std::size_t i = 0; i < secs.size(); ++i) {
      if (!secs[i].charge.nonnegative()) why << "bond " << k << " has negative charge; ";
      if (i > 0 && !(secs[i - 1].charge < secs[i].charge)) why << "bond " << k << " sectors unsorted; ";
      if (secs[i].lambda.empty()) why << "bond " << k << " has an empty sector; ";
      for (double x : secs[i].lambda)
        if (!(x > 0.0) || !std::isfinite(x)) why << "bond " << k << " has a non-positive lambda; ";
    }
  }
  if (bonds_.back().sectors.size() != 1 || bonds_.back().sectors[0].charge != DualCharge{0, 0}) {
    why << "right boundary must be the single charge (0,0); ";
  }
  for (std::size_t k = 1; k <= gammas_.size(); ++k) {
    for (const auto& [key, block] : gammas_[k - 1].blocks) {
      const DualCharge local = key.first - key.second;
      if (!space_.contains(local)) {
        why << "site " << k << " block " << describe(key.first) << "->" << describe(key.second)
            << " carries an invalid local state; ";
        continue;
      }
      const auto* l = bonds_[k - 1].find(key.first);
      const auto* r = bonds_[k].find(key.second);
      if (!l || !r) {
        why << "site " << k << " block references a missing bond sector; ";
        continue;
      }
      if (block.rows() != static_cast<Eigen::Index>(l->lambda.size()) ||
          block.cols() != static_cast<Eigen::Index>(r->lambda.size())) {
        why << "site " << k << " block shape mismatch; ";
      }
      if (!all_finite(block)) why << "site " << k << " block has non-finite entries; ";
    }
  }
  return why.str();
}

}  // namespace bosonet
