// Acceptance suite: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "bosonet/analytic.hpp"
#include "bosonet/mpo.hpp"
#include "bosonet/mps.hpp"
#include "bosonet/oracle.hpp"
#include "bosonet/sampler.hpp"

using namespace bosonet;

namespace {

constexpr std::uint64_t kMasterSeed = 20240611;

CircuitPlan haar(int criterion, int modes, int index) {
  Rng rng(derive_seed(derive_seed(derive_seed(kMasterSeed, static_cast<std::uint64_t>(criterion)),
                                  static_cast<std::uint64_t>(modes)),
                      static_cast<std::uint64_t>(index)));
  return sample_haar_circuit(modes, rng);
}

std::vector<int> first_modes(int modes, int photons) {
  std::vector<int> occ(static_cast<std::size_t>(modes), 0);
  for (int j = 0; j < photons; ++j) occ[static_cast<std::size_t>(j)] = 1;
  return occ;
}

double mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const double mx = mean(lx), my = mean(ly);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    num += (lx[i] - mx) * (ly[i] - my);
    den += (lx[i] - mx) * (lx[i] - mx);
  }
  return num / den;
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string join(const std::vector<double>& xs, const char* f = "%.4g") {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? " " : "") + fmt(f, xs[i]);
  return out;
}

// Invariants checked on every update made by criteria 1 to 7.
struct Conservation {
  std::size_t updates = 0;
  std::size_t weight_checked = 0;
  double weight_defect = 0.0;  // |sum lambda^2 after - before| on untruncated runs
  std::size_t charge_violations = 0;
  std::string first_violation;
  double doubling_defect = 0.0;  // |S(MPO, mu = 1) - 2 S(MPS)|
  std::size_t doubling_checked = 0;
  double chain_defect = 0.0;  // |joint - P(outcome) / P()|
  std::size_t chain_checked = 0;

  template <class State>
  void record(const State& st, const UpdateResult& r) {
    ++updates;
    if (st.cumulative_discarded_weight() <= 1e-20) {
      ++weight_checked;
      weight_defect = std::max(weight_defect, std::abs(r.weight_after - r.weight_before));
    }
    const std::string why = st.train().integrity_report();
    if (!why.empty()) {
      if (charge_violations == 0) first_violation = why;
      ++charge_violations;
    }
  }
};

Conservation conservation;

template <class State>
void evolve(State& st, const CircuitPlan& plan, const TruncationPolicy& policy = {},
            const std::function<void(const State&)>& after_gate = {}) {
  for (const auto& g : plan.gates) {
    conservation.record(st, st.apply_gate(g, policy));
    if (after_gate) after_gate(st);
  }
}

template <class State>
void check_chain_rule(const State& st, std::uint64_t seed, std::size_t count) {
  const Sampler s(st);
  const double total = s.marginal_prob(std::vector<int>{});
  for (const auto& r : s.sample_many(seed, count)) {
    conservation.chain_defect =
        std::max(conservation.chain_defect, std::abs(r.joint_probability - s.marginal_prob(r.outcome) / total));
    ++conservation.chain_checked;
  }
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

// Criterion 1: full-rank probabilities against the permanent oracle.
Verdict oracle_equivalence() {
  double worst = 0.0;
  int instances = 0;
  for (int m : {2, 4, 6}) {
    for (int n = 1; n <= std::min(3, m); ++n) {
      for (int c = 0; c < 10; ++c) {
        const CircuitPlan plan = haar(1, m, 100 * n + c);
        const ComplexMatrix u = circuit_to_unitary(plan);
        const auto input = first_modes(m, n);

        auto mps = MpsState::init_fock(input);
        evolve(mps, plan);
        const auto pure = exact_distribution(u, input);
        for (std::size_t i = 0; i < pure.outcomes.size(); ++i)
          worst = std::max(worst, std::abs(mps.probability(pure.outcomes[i]) - pure.probabilities[i]));
        check_chain_rule(mps, static_cast<std::uint64_t>(c), 20);

        for (double mu : {1.0, 0.7, 0.3}) {
          auto mpo = MpoState::init_lossy(n, m, LossSpec::constant(mu));
          evolve(mpo, plan);
          const auto lossy = exact_lossy_distribution(u, n, mu);
          for (std::size_t i = 0; i < lossy.outcomes.size(); ++i)
            worst = std::max(worst, std::abs(mpo.outcome_prob_raw(lossy.outcomes[i]) - lossy.probabilities[i]));
          if (mu == 1.0) {
            for (int b = 1; b < m; ++b) {
              conservation.doubling_defect = std::max(
                  conservation.doubling_defect, std::abs(mpo.renyi_entropy(b, 1.0) - 2 * mps.renyi_entropy(b, 1.0)));
              ++conservation.doubling_checked;
            }
          }
          check_chain_rule(mpo, static_cast<std::uint64_t>(c), 20);
          ++instances;
        }
      }
    }
  }
  return {worst <= 1e-8, "max |p_tn - p_oracle| = " + fmt("%.3e", worst) + " over " + std::to_string(instances) +
                             " lossy instances plus their lossless MPS runs"};
}

// Criterion 2: Hong-Ou-Mandel on a 50:50 splitter.
Verdict hong_ou_mandel() {
  CircuitPlan plan;
  plan.num_modes = 2;
  plan.gates = {{1, std::numbers::pi / 4, 0.0}};
  plan.block_boundaries = {0, 1};
  plan.layer_boundaries = {0, 1};
  const ComplexMatrix u = circuit_to_unitary(plan);
  const std::vector<int> in{1, 1}, coincidence{1, 1}, left{2, 0}, right{0, 2};

  auto mps = MpsState::init_fock(in);
  evolve(mps, plan);
  auto mpo = MpoState::init_lossy(2, 2, LossSpec::constant(1.0));
  evolve(mpo, plan);

  const double c_worst = std::max({exact_prob(u, in, coincidence), mps.probability(coincidence),
                                   mpo.outcome_prob_raw(coincidence)});
  double b_worst = 0.0;
  for (const auto& o : {left, right}) {
    for (double p : {exact_prob(u, in, o), mps.probability(o), mpo.outcome_prob_raw(o)})
      b_worst = std::max(b_worst, std::abs(p - 0.5));
  }
  return {c_worst <= 1e-12 && b_worst <= 1e-10,
          "coincidence " + fmt("%.3e", c_worst) + ", max |bunching - 1/2| " + fmt("%.3e", b_worst) +
              " (oracle, MPS, MPO)"};
}

// Criterion 3: lossless entanglement grows linearly with photon number.
Verdict lossless_growth() {
  const int m = 16, circuits = 50;
  std::vector<double> means;
  double worst_s0_excess = -1e300;
  for (int n = 1; n <= 5; ++n) {
    std::vector<double> s1;
    for (int c = 0; c < circuits; ++c) {
      auto mps = MpsState::init_fock(first_modes(m, n));
      evolve(mps, haar(3, m, 100 * n + c));
      s1.push_back(mps.max_entropy(1.0).second);
      worst_s0_excess = std::max(worst_s0_excess, mps.max_entropy(0.0).second - n);
    }
    means.push_back(mean(s1));
  }
  bool ok = worst_s0_excess <= 1e-9;
  std::vector<double> gaps;
  for (std::size_t i = 1; i < means.size(); ++i) {
    gaps.push_back(means[i] - means[i - 1]);
    ok = ok && gaps.back() >= 0.5 && gaps.back() <= 1.1;
  }
  return {ok, "mean max S1 for N=1..5: " + join(means) + "; gaps " + join(gaps) + "; max(S0 - N) " +
                  fmt("%.3g", worst_s0_excess)};
}

// Criterion 4: single-mode Fock input follows the binomial spectrum.
Verdict fock_logarithmic() {
  const int m = 16, circuits = 10;
  double worst = 0.0;
  std::size_t worst_excess = 0;
  bool bond_ok = true;
  std::vector<double> means;
  for (int n : {2, 4, 8}) {
    std::vector<double> s;
    for (int c = 0; c < circuits; ++c) {
      const CircuitPlan plan = haar(4, m, 100 * n + c);
      std::vector<int> input(static_cast<std::size_t>(m), 0);
      input[0] = n;
      auto mps = MpsState::init_fock(input);
      evolve<MpsState>(mps, plan, {}, [&](const MpsState& st) {
        if (st.max_bond_dimension() > static_cast<std::size_t>(n + 1)) {
          bond_ok = false;
          worst_excess = std::max(worst_excess, st.max_bond_dimension());
        }
      });
      const double sim = mps.renyi_entropy(m / 2, 1.0);
      const double ana = lossless_ee(input, partition_angles(circuit_to_unitary(plan), m / 2), 1.0);
      worst = std::max(worst, std::abs(sim - ana));
      s.push_back(sim);
    }
    means.push_back(mean(s));
  }
  return {worst <= 0.05 && bond_ok,
          "max |S1_sim - S1_binomial| " + fmt("%.3e", worst) + "; mean central S1 for N=2,4,8: " + join(means) +
              (bond_ok ? "; bond dimension <= N+1 throughout" : "; bond dimension reached " +
                                                                     std::to_string(worst_excess))};
}

// Criterion 5: entanglement saturates towards N as modes are added.
Verdict mode_convergence() {
  const int n = 3, circuits = 50;
  std::vector<double> means;
  for (int m : {6, 12, 24}) {
    std::vector<double> s1;
    for (int c = 0; c < circuits; ++c) {
      auto mps = MpsState::init_fock(first_modes(m, n));
      evolve(mps, haar(5, m, c));
      s1.push_back(mps.max_entropy(1.0).second);
    }
    means.push_back(mean(s1));
  }
  const bool ok = means[1] >= means[0] && means[2] >= means[1] && std::abs(means[2] - n) <= 0.4;
  return {ok, "mean max S1 for M=6,12,24: " + join(means)};
}

// Criterion 6: MPO entanglement under loss, simulated and analytic.
Verdict loss_scaling() {
  std::string detail;
  bool ok = true;

  {
    const int m = 16, circuits = 10;
    std::vector<double> means;
    for (int n = 1; n <= 4; ++n) {
      std::vector<double> s1;
      for (int c = 0; c < circuits; ++c) {
        auto mpo = MpoState::init_lossy(n, m, LossSpec::constant(0.5));
        evolve(mpo, haar(6, m, 100 * n + c));
        s1.push_back(mpo.max_entropy(1.0).second);
      }
      means.push_back(mean(s1));
    }
    for (std::size_t i = 1; i < means.size(); ++i) ok = ok && means[i] > means[i - 1];
    detail += "simulated mean max S1 (M=16, mu=0.5) for N=1..4: " + join(means);
  }

  const int m = 128, unitaries = 100;
  const std::vector<double> photons{4, 8, 16, 32};
  std::vector<PartitionAngles> angles;
  for (int c = 0; c < unitaries; ++c) angles.push_back(partition_angles(circuit_to_unitary(haar(6, m, c)), m / 2));
  struct Case {
    double gamma, beta;
  };
  for (const Case k : {Case{0.25, 0.6}, Case{1.0, 0.3}}) {
    std::vector<double> means;
    for (double n : photons) {
      const LossSpec loss = LossSpec::power_law(k.beta, k.gamma);
      const double mu = loss.transmissivity(static_cast<int>(n));
      std::vector<double> s;
      for (const auto& a : angles) s.push_back(lossy_mpo_ee(a, mu, 1.0, static_cast<int>(n)));
      means.push_back(mean(s));
    }
    const double slope = loglog_slope(photons, means);
    const double predicted = asymptotic_scaling(k.gamma, 1.0).exponent;
    bool trend = true;
    for (std::size_t i = 1; i < means.size(); ++i)
      trend = trend && (k.gamma < 0.5 ? means[i] < means[i - 1] : means[i] > means[i - 1]);
    const bool sign = (slope > 0) == (predicted > 0);
    ok = ok && trend && sign && std::abs(slope - predicted) <= 0.25;
    detail += "; analytic gamma=" + fmt("%g", k.gamma) + " beta=" + fmt("%g", k.beta) + " mean S1 for N=4..32: " +
              join(means) + ", slope " + fmt("%.3f", slope) + " vs " + fmt("%.3f", predicted);
  }
  return {ok, detail};
}

// Criterion 7: truncation error falls with chi; singular values decay faster than any power.
Verdict truncation_control() {
  const int m = 8, n = 3, circuits = 10;
  const double mu = 0.5;
  std::vector<double> errors;
  for (std::size_t chi : {std::size_t{2}, std::size_t{4}, std::size_t{8}, std::size_t{16}, std::size_t{32}}) {
    std::vector<double> e;
    for (int c = 0; c < circuits; ++c) {
      auto mpo = MpoState::init_lossy(n, m, LossSpec::constant(mu));
      evolve(mpo, haar(7, m, c), TruncationPolicy::with_chi(chi));
      e.push_back(mpo.error());
    }
    errors.push_back(mean(e));
  }
  bool ok = true;
  for (std::size_t i = 1; i < errors.size(); ++i) ok = ok && errors[i] <= errors[i - 1];

  double worst_full = 0.0;
  std::vector<double> spectrum;
  for (int c = 0; c < circuits; ++c) {
    auto mpo = MpoState::init_lossy(n, m, LossSpec::constant(mu));
    evolve(mpo, haar(7, m, c));
    worst_full = std::max(worst_full, std::abs(mpo.error()));
    auto v = mpo.spectrum(m / 2).values();
    std::sort(v.begin(), v.end(), std::greater<>());
    if (spectrum.size() < v.size()) spectrum.resize(v.size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) spectrum[i] += v[i] / circuits;
  }
  ok = ok && worst_full <= 1e-10;

  // Decay rate per decade of index: -d log10(lambda) / d log10(i) over [10^k, 10^(k+1)],
  // the last window ending at the largest index.
  std::vector<double> rates;
  for (std::size_t lo = 1; lo < spectrum.size(); lo *= 10) {
    const std::size_t hi = std::min(lo * 10, spectrum.size());
    rates.push_back(-(std::log10(spectrum[hi - 1]) - std::log10(spectrum[lo - 1])) /
                    (std::log10(static_cast<double>(hi)) - std::log10(static_cast<double>(lo))));
  }
  bool steepening = rates.size() >= 2;
  for (std::size_t i = 1; i < rates.size(); ++i) steepening = steepening && rates[i] > rates[i - 1];
  ok = ok && steepening;
  return {ok, "mean 1 - Tr for chi=2..32: " + join(errors) + "; full-rank max |1 - Tr| " + fmt("%.3e", worst_full) +
                  "; central-bond decay rate per index decade " + join(rates, "%.3f") + " over " +
                  std::to_string(spectrum.size()) + " values"};
}

// Criterion 8: invariants accumulated over criteria 1 to 7 and the sampler runs.
Verdict conservation_suite() {
  const auto& c = conservation;
  const bool ok = c.updates > 0 && c.weight_defect <= 1e-10 && c.charge_violations == 0 &&
                  c.doubling_defect <= 1e-8 && c.chain_defect <= 1e-8 && c.doubling_checked > 0 && c.chain_checked > 0;
  std::string d = std::to_string(c.updates) + " updates; sum lambda^2 defect " + fmt("%.3e", c.weight_defect) +
                  " on " + std::to_string(c.weight_checked) + " untruncated updates; " +
                  std::to_string(c.charge_violations) + " charge violations; MPO vs 2x MPS entropy " +
                  fmt("%.3e", c.doubling_defect) + " on " + std::to_string(c.doubling_checked) +
                  " bonds; chain rule " + fmt("%.3e", c.chain_defect) + " on " + std::to_string(c.chain_checked) +
                  " samples";
  if (!c.first_violation.empty()) d += "; first violation: " + c.first_violation;
  return {ok, d};
}

// Criterion 9: sampler statistics against the oracle.
Verdict sampling_statistics() {
  const int m = 4, n = 2;
  const double mu = 0.7;
  const std::size_t draws = 100000;
  const CircuitPlan plan = haar(9, m, 0);
  auto mpo = MpoState::init_lossy(n, m, LossSpec::constant(mu));
  evolve(mpo, plan);
  check_chain_rule(mpo, 1, 200);
  const auto exact = exact_lossy_distribution(circuit_to_unitary(plan), n, mu);
  std::map<Occupation, std::size_t> counts;
  for (const auto& r : Sampler(mpo).sample_many(derive_seed(kMasterSeed, 9), draws)) ++counts[r.outcome];
  double tvd = 0.0;
  std::size_t seen = 0;
  for (std::size_t i = 0; i < exact.outcomes.size(); ++i) {
    const auto it = counts.find(exact.outcomes[i]);
    const std::size_t k = it == counts.end() ? 0 : it->second;
    seen += k;
    tvd += std::abs(static_cast<double>(k) / draws - exact.probabilities[i]);
  }
  tvd = 0.5 * (tvd + static_cast<double>(draws - seen) / draws);
  return {tvd <= 0.02, "TVD " + fmt("%.4f", tvd) + " over " + std::to_string(draws) + " samples, " +
                           std::to_string(exact.outcomes.size()) + " outcomes"};
}

// Criterion 10: naive cost and its power-law asymptote.
Verdict naive_cost_formula() {
  const double value = naive_cost(10, 0.5, 2.0);
  const double rel = std::abs(value / std::pow(1.5, 10) - 1.0);
  const double beta = 1.0, gamma = 0.5, c = 1.69;
  std::string ratios;
  double ratio = 0.0;
  for (int n : {100, 1000, 10000}) {
    const double mu = LossSpec::power_law(beta, gamma).transmissivity(n);
    const double log_t = n * std::log1p(mu * (c - 1.0));
    const double n_out = beta * std::pow(n, gamma);
    ratio = std::exp(log_t - (c - 1.0) * n_out);
    ratios += (ratios.empty() ? "" : " ") + std::string("N=") + std::to_string(n) + ":" + fmt("%.4f", ratio) +
              " (ln T / ((c-1) N_out) = " + fmt("%.4f", log_t / ((c - 1.0) * n_out)) + ")";
  }
  const bool ok = rel <= 1e-9 && std::abs(ratio - 1.0) <= 0.05;
  return {ok, "naive_cost(10, 0.5, 2) relative error " + fmt("%.2e", rel) + "; T / e^((c-1) N_out) at " + ratios +
                  "; limit exp(-beta^2 (c-1)^2 / 2) = " + fmt("%.4f", std::exp(-beta * beta * (c - 1) * (c - 1) / 2))};
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* name;
    Verdict (*run)();
  };
  const std::vector<Entry> suite{
      {1, "oracle equivalence", oracle_equivalence},
      {2, "Hong-Ou-Mandel", hong_ou_mandel},
      {3, "lossless EE linear growth", lossless_growth},
      {4, "Fock-input logarithmic EE", fock_logarithmic},
      {5, "mode convergence", mode_convergence},
      {6, "MPO loss scaling", loss_scaling},
      {7, "truncation error control", truncation_control},
      {8, "conservation suite", conservation_suite},
      {9, "sampling statistics", sampling_statistics},
      {10, "naive cost formula", naive_cost_formula},
  };
  // The ratio in criterion 10 tends to exp(-beta^2 (c-1)^2 / 2), not 1, so it cannot pass.
  const std::set<int> known_unattainable{10};

  // Criterion 8 reads invariants gathered by the others, including 9, so it runs last.
  std::vector<std::pair<int, Verdict>> results;
  std::map<int, double> seconds;
  for (const auto& e : suite) {
    if (e.id == 8) continue;
    const auto t0 = std::chrono::steady_clock::now();
    results.push_back({e.id, e.run()});
    seconds[e.id] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  results.push_back({8, conservation_suite()});
  seconds[8] = 0.0;
  std::sort(results.begin(), results.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  int unexpected = 0;
  for (const auto& [id, v] : results) {
    const auto& e = *std::find_if(suite.begin(), suite.end(), [id = id](const Entry& x) { return x.id == id; });
    const bool expected_fail = known_unattainable.count(id) > 0;
    if (!v.pass && !expected_fail) ++unexpected;
    std::printf("criterion %2d %s: %s%s [%.1f s] %s\n", id, v.pass ? "PASS" : "FAIL", e.name,
                !v.pass && expected_fail ? " (known unattainable)" : "", seconds[id], v.detail.c_str());
  }
  std::fflush(stdout);
  return unexpected == 0 ? 0 : 1;
}
