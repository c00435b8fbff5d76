#include "bosonet/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "bosonet/analytic.hpp"
#include "bosonet/circuit.hpp"
#include "bosonet/errors.hpp"
#include "bosonet/mps.hpp"
#include "bosonet/oracle.hpp"
#include "bosonet/sampler.hpp"
#include "bosonet/snapshot.hpp"
#include "json.hpp"

#ifndef BOSONET_VERSION
#define BOSONET_VERSION "0.0.0"
#endif

namespace bosonet {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

const std::pair<ExperimentKind, const char*> kKindNames[] = {
    {ExperimentKind::kLosslessEe, "lossless-ee"}, {ExperimentKind::kFockEe, "fock-ee"},
    {ExperimentKind::kLossyEe, "lossy-ee"},       {ExperimentKind::kAnalyticEe, "analytic-ee"},
    {ExperimentKind::kTruncError, "trunc-error"}, {ExperimentKind::kSample, "sample"},
    {ExperimentKind::kProb, "prob"},              {ExperimentKind::kOracleCheck, "oracle-check"},
};

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string hex(std::uint64_t x) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

std::string join(const std::vector<int>& v, const char* sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + std::to_string(v[i]);
  return s;
}

using Row = std::vector<std::string>;

struct Table {
  Row header;
  std::vector<Row> rows;

  void write(const fs::path& path, const std::vector<std::string>& preamble = {}) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (const auto& line : preamble) out << "# " << line << "\n";
    auto emit = [&out](const Row& r) {
      for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
      out << "\n";
    };
    emit(header);
    for (const auto& r : rows) emit(r);
  }
};

// Bounded worker pool. Work items are indexed, so results do not depend on
// scheduling; the first exception is rethrown after all workers stop.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex guard;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        {
          std::lock_guard<std::mutex> lock(guard);
          if (failure) return;
        }
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(guard);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

struct Stats {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
};

Stats stats(const std::vector<double>& xs) {
  Stats s;
  s.n = xs.size();
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double v = 0.0;
    for (double x : xs) v += (x - s.mean) * (x - s.mean);
    s.stderr_ = std::sqrt(v / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  }
  return s;
}

std::uint64_t circuit_seed(std::uint64_t master, int modes, int index) {
  return derive_seed(derive_seed(master, static_cast<std::uint64_t>(modes)), static_cast<std::uint64_t>(index));
}

CircuitPlan make_circuit(const ExperimentConfig& c, int modes, int index) {
  Rng rng(circuit_seed(*c.seed, modes, index));
  return sample_haar_circuit(modes, rng);
}

TruncationPolicy policy_for(const ExperimentConfig& c, std::optional<std::size_t> chi) {
  TruncationPolicy p;
  if (chi) p.chi_max = *chi;
  else if (c.chi_max) p.chi_max = *c.chi_max;
  p.weight_threshold = c.weight_threshold;
  p.reorthogonalize = c.reorthogonalize;
  return p;
}

std::string chi_label(const TruncationPolicy& p) {
  return p.chi_max == static_cast<std::size_t>(-1) ? "full" : std::to_string(p.chi_max);
}

std::vector<int> single_photons(int n, int m) {
  std::vector<int> occ(static_cast<std::size_t>(m), 0);
  for (int j = 0; j < n; ++j) occ[static_cast<std::size_t>(j)] = 1;
  return occ;
}

// One loss setting as seen by a recipe: N_out = beta N^gamma, mu derived.
struct LossPoint {
  double beta;
  double gamma;
};

std::vector<LossPoint> loss_points(const ExperimentConfig& c) {
  std::vector<LossPoint> pts;
  if (c.loss_kind == LossSpec::Kind::kConstant) {
    for (double mu : c.mus) pts.push_back({mu, 1.0});
  } else {
    for (double g : c.gammas)
      for (double b : c.betas) pts.push_back({b, g});
  }
  return pts;
}

LossSpec loss_spec(const LossPoint& p) {
  return p.gamma == 1.0 ? LossSpec::constant(p.beta) : LossSpec::power_law(p.beta, p.gamma);
}

void check_resources(const ExperimentConfig& c, std::size_t bond_dim) {
  if (c.max_bond_dimension && bond_dim > *c.max_bond_dimension) {
    throw ResourceLimitError("bond dimension " + std::to_string(bond_dim) + " exceeds max_bond_dimension " +
                             std::to_string(*c.max_bond_dimension));
  }
}

// Evolves an MPO block by block, writing a snapshot every K blocks and before a
// resource abort. With resume, continues from the last snapshot for this tag.
void evolve_mpo(MpoState& state, const CircuitPlan& plan, const TruncationPolicy& policy, const ExperimentConfig& c,
                const RunOptions& opts, const std::string& tag) {
  const fs::path dir = fs::path(c.output) / "checkpoints";
  const fs::path file = dir / (tag + ".json");
  int start = 0;
  if (opts.resume && fs::exists(file)) {
    std::ifstream in(file);
    const json j = json::parse(in);
    if (j.at("circuit_hash").get<std::string>() != hex(circuit_hash(plan))) {
      throw IntegrityError("checkpoint " + file.string() + " belongs to a different circuit");
    }
    state = mpo_from_snapshot(j.at("state").get<std::string>());
    start = j.at("block").get<int>();
  }
  auto save = [&](int block) {
    fs::create_directories(dir);
    const json j = {{"block", block}, {"circuit_hash", hex(circuit_hash(plan))}, {"state", snapshot_to_json(state)}};
    std::ofstream out(file, std::ios::binary);
    out << j.dump();
  };
  for (int b = start; b < plan.depth(); ++b) {
    state.apply_circuit(plan, policy, plan.block_boundaries[static_cast<std::size_t>(b)],
                        plan.block_boundaries[static_cast<std::size_t>(b + 1)]);
    try {
      check_resources(c, state.max_bond_dimension());
    } catch (const ResourceLimitError&) {
      save(b + 1);
      throw;
    }
    if (c.checkpoint_every > 0 && (b + 1) % c.checkpoint_every == 0) save(b + 1);
  }
}

struct Output {
  Table results;
  Table summary;
  Table timing{{"task", "wall_seconds"}, {}};
  bool failed = false;
  std::string message = "ok";
};

// Collects per-task rows and timings in task order.
struct TaskRows {
  std::vector<Row> rows;
  double seconds = 0.0;
};

template <class Fn>
std::vector<TaskRows> run_tasks(std::size_t count, int threads, Fn&& fn) {
  std::vector<TaskRows> out(count);
  parallel_for(count, threads, [&](std::size_t i) {
    const auto t0 = Clock::now();
    out[i].rows = fn(i);
    out[i].seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  });
  return out;
}

void gather(Output& o, const std::vector<TaskRows>& tasks) {
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    for (const auto& r : tasks[i].rows) o.results.rows.push_back(r);
    o.timing.rows.push_back({std::to_string(i), num(tasks[i].seconds)});
  }
}

const Row kSummaryHeader{"config_hash", "N", "M", "gamma", "beta", "alpha", "mean_ee", "stderr", "n_samples"};

void run_lossless_ee(const ExperimentConfig& c, const std::string& h, Output& o) {
  struct Task { int m, n, circuit; };
  std::vector<Task> tasks;
  for (int m : c.modes)
    for (int n : c.photons)
      for (int i = 0; i < c.n_circuits; ++i) tasks.push_back({m, n, i});
  const auto policy = policy_for(c, std::nullopt);
  o.results.header = {"config_hash", "circuit", "M", "N", "depth", "alpha", "max_entropy", "argmax_bond",
                      "max_bond_dimension", "discarded_weight", "chi"};
  const auto done = run_tasks(tasks.size(), c.threads, [&](std::size_t t) {
    const Task& k = tasks[t];
    const CircuitPlan plan = make_circuit(c, k.m, k.circuit);
    MpsState st = MpsState::init_fock(single_photons(k.n, k.m));
    std::vector<Row> rows;
    for (int b = 0; b < plan.depth(); ++b) {
      st.apply_circuit(plan, policy, plan.block_boundaries[static_cast<std::size_t>(b)],
                       plan.block_boundaries[static_cast<std::size_t>(b + 1)]);
      check_resources(c, st.max_bond_dimension());
      for (double a : c.alphas) {
        const auto [bond, value] = st.max_entropy(a);
        rows.push_back({h, std::to_string(k.circuit), std::to_string(k.m), std::to_string(k.n), std::to_string(b + 1),
                        num(a), num(value), std::to_string(bond), std::to_string(st.max_bond_dimension()),
                        num(st.cumulative_discarded_weight()), chi_label(policy)});
      }
    }
    return rows;
  });
  gather(o, done);

  o.summary.header = kSummaryHeader;
  for (int m : c.modes) {
    const int final_depth = m - 1;
    for (int n : c.photons) {
      for (double a : c.alphas) {
        std::vector<double> xs;
        for (const auto& r : o.results.rows)
          if (r[2] == std::to_string(m) && r[3] == std::to_string(n) && r[4] == std::to_string(final_depth) && r[5] == num(a))
            xs.push_back(std::stod(r[6]));
        const Stats s = stats(xs);
        o.summary.rows.push_back({h, std::to_string(n), std::to_string(m), "1", "1", num(a), num(s.mean), num(s.stderr_),
                                  std::to_string(s.n)});
      }
    }
  }
}

void run_fock_ee(const ExperimentConfig& c, const std::string& h, Output& o) {
  struct Task { int m, n, circuit; };
  std::vector<Task> tasks;
  for (int m : c.modes)
    for (int n : c.photons)
      for (int i = 0; i < c.n_circuits; ++i) tasks.push_back({m, n, i});
  const auto policy = policy_for(c, std::nullopt);
  o.results.header = {"config_hash", "circuit", "M", "N", "alpha", "bond", "simulated", "analytic", "abs_diff",
                      "max_bond_dimension", "chi"};
  const auto done = run_tasks(tasks.size(), c.threads, [&](std::size_t t) {
    const Task& k = tasks[t];
    const CircuitPlan plan = make_circuit(c, k.m, k.circuit);
    std::vector<int> occ(static_cast<std::size_t>(k.m), 0);
    occ[0] = k.n;
    MpsState st = MpsState::init_fock(occ);
    st.apply_circuit(plan, policy);
    check_resources(c, st.max_bond_dimension());
    const int cut = k.m / 2;
    const auto angles = partition_angles(circuit_to_unitary(plan), cut);
    std::vector<Row> rows;
    for (double a : c.alphas) {
      const double sim = st.renyi_entropy(cut, a);
      const double ana = lossless_ee(occ, angles, a);
      rows.push_back({h, std::to_string(k.circuit), std::to_string(k.m), std::to_string(k.n), num(a),
                      std::to_string(cut), num(sim), num(ana), num(std::abs(sim - ana)),
                      std::to_string(st.max_bond_dimension()), chi_label(policy)});
    }
    return rows;
  });
  gather(o, done);
  o.summary.header = kSummaryHeader;
  for (int m : c.modes)
    for (int n : c.photons)
      for (double a : c.alphas) {
        std::vector<double> xs;
        for (const auto& r : o.results.rows)
          if (r[2] == std::to_string(m) && r[3] == std::to_string(n) && r[4] == num(a)) xs.push_back(std::stod(r[6]));
        const Stats s = stats(xs);
        o.summary.rows.push_back({h, std::to_string(n), std::to_string(m), "1", "1", num(a), num(s.mean),
                                  num(s.stderr_), std::to_string(s.n)});
      }
}

void run_lossy_ee(const ExperimentConfig& c, const RunOptions& opts, const std::string& h, Output& o) {
  struct Task { int m, n; LossPoint loss; int circuit; };
  std::vector<Task> tasks;
  for (int m : c.modes)
    for (int n : c.photons)
      for (const auto& lp : loss_points(c))
        for (int i = 0; i < c.n_circuits; ++i) tasks.push_back({m, n, lp, i});
  const auto policy = policy_for(c, std::nullopt);
  o.results.header = {"config_hash", "circuit", "M", "N", "gamma", "beta", "mu", "sector", "alpha", "max_entropy",
                      "argmax_bond", "trace", "discarded_weight", "max_bond_dimension", "chi"};
  const auto done = run_tasks(tasks.size(), c.threads, [&](std::size_t t) {
    const Task& k = tasks[t];
    const CircuitPlan plan = make_circuit(c, k.m, k.circuit);
    const LossSpec loss = loss_spec(k.loss);
    std::vector<std::optional<int>> sectors;
    if (c.per_sector) {
      for (int s = 0; s <= k.n; ++s) sectors.push_back(s);
    } else {
      sectors.push_back(std::nullopt);
    }
    std::vector<Row> rows;
    for (const auto& sector : sectors) {
      MpoState st = MpoState::init_lossy(k.n, k.m, loss, sector);
      const std::string tag = "lossy-M" + std::to_string(k.m) + "-N" + std::to_string(k.n) + "-g" + num(k.loss.gamma) +
                              "-b" + num(k.loss.beta) + "-c" + std::to_string(k.circuit) +
                              (sector ? "-s" + std::to_string(*sector) : std::string());
      evolve_mpo(st, plan, policy, c, opts, tag);
      for (double a : c.alphas) {
        const auto [bond, value] = st.max_entropy(a);
        rows.push_back({h, std::to_string(k.circuit), std::to_string(k.m), std::to_string(k.n), num(k.loss.gamma),
                        num(k.loss.beta), num(st.mu()), sector ? std::to_string(*sector) : "all", num(a), num(value),
                        std::to_string(bond), num(st.trace()), num(st.cumulative_discarded_weight()),
                        std::to_string(st.max_bond_dimension()), chi_label(policy)});
      }
    }
    return rows;
  });
  gather(o, done);
  if (c.per_sector) return;
  o.summary.header = kSummaryHeader;
  for (int m : c.modes)
    for (int n : c.photons)
      for (const auto& lp : loss_points(c))
        for (double a : c.alphas) {
          std::vector<double> xs;
          for (const auto& r : o.results.rows)
            if (r[2] == std::to_string(m) && r[3] == std::to_string(n) && r[4] == num(lp.gamma) && r[5] == num(lp.beta) &&
                r[8] == num(a))
              xs.push_back(std::stod(r[9]));
          const Stats s = stats(xs);
          o.summary.rows.push_back({h, std::to_string(n), std::to_string(m), num(lp.gamma), num(lp.beta), num(a),
                                    num(s.mean), num(s.stderr_), std::to_string(s.n)});
        }
}

void run_analytic_ee(const ExperimentConfig& c, const std::string& h, Output& o) {
  struct Task { int m, circuit; };
  std::vector<Task> tasks;
  for (int m : c.modes)
    for (int i = 0; i < c.n_circuits; ++i) tasks.push_back({m, i});
  const auto points = loss_points(c);
  o.results.header = {"config_hash", "circuit", "M", "N", "gamma", "beta", "mu", "alpha", "cut", "entropy"};
  const auto done = run_tasks(tasks.size(), c.threads, [&](std::size_t t) {
    const Task& k = tasks[t];
    const auto angles = partition_angles(circuit_to_unitary(make_circuit(c, k.m, k.circuit)), k.m / 2);
    std::vector<Row> rows;
    for (int n : c.photons)
      for (const auto& lp : points) {
        const double mu = loss_spec(lp).transmissivity(n);
        for (double a : c.alphas) {
          rows.push_back({h, std::to_string(k.circuit), std::to_string(k.m), std::to_string(n), num(lp.gamma),
                          num(lp.beta), num(mu), num(a), std::to_string(k.m / 2), num(lossy_mpo_ee(angles, mu, a, n))});
        }
      }
    return rows;
  });
  gather(o, done);
  o.summary.header = kSummaryHeader;
  for (int m : c.modes)
    for (int n : c.photons)
      for (const auto& lp : points)
        for (double a : c.alphas) {
          std::vector<double> xs;
          for (const auto& r : o.results.rows)
            if (r[2] == std::to_string(m) && r[3] == std::to_string(n) && r[4] == num(lp.gamma) && r[5] == num(lp.beta) &&
                r[7] == num(a))
              xs.push_back(std::stod(r[9]));
          const Stats s = stats(xs);
          o.summary.rows.push_back({h, std::to_string(n), std::to_string(m), num(lp.gamma), num(lp.beta), num(a),
                                    num(s.mean), num(s.stderr_), std::to_string(s.n)});
        }
}

void run_trunc_error(const ExperimentConfig& c, const RunOptions& opts, const std::string& h, Output& o) {
  struct Task { int m, n; LossPoint loss; int circuit; std::optional<std::size_t> chi; };
  std::vector<std::optional<std::size_t>> chis(c.chi_values.begin(), c.chi_values.end());
  if (chis.empty()) chis.push_back(c.chi_max);
  std::vector<Task> tasks;
  for (int m : c.modes)
    for (int n : c.photons)
      for (const auto& lp : loss_points(c))
        for (int i = 0; i < c.n_circuits; ++i)
          for (const auto& chi : chis) tasks.push_back({m, n, lp, i, chi});
  o.results.header = {"config_hash", "circuit", "M", "N", "gamma", "beta", "mu", "chi", "error", "discarded_weight",
                      "max_bond_dimension"};
  const auto done = run_tasks(tasks.size(), c.threads, [&](std::size_t t) {
    const Task& k = tasks[t];
    const auto policy = policy_for(c, k.chi);
    const CircuitPlan plan = make_circuit(c, k.m, k.circuit);
    MpoState st = MpoState::init_lossy(k.n, k.m, loss_spec(k.loss));
    const std::string tag = "trunc-M" + std::to_string(k.m) + "-N" + std::to_string(k.n) + "-g" + num(k.loss.gamma) +
                            "-b" + num(k.loss.beta) + "-c" + std::to_string(k.circuit) + "-chi" + chi_label(policy);
    evolve_mpo(st, plan, policy, c, opts, tag);
    return std::vector<Row>{{h, std::to_string(k.circuit), std::to_string(k.m), std::to_string(k.n), num(k.loss.gamma),
                             num(k.loss.beta), num(st.mu()), chi_label(policy), num(st.error()),
                             num(st.cumulative_discarded_weight()), std::to_string(st.max_bond_dimension())}};
  });
  gather(o, done);
  o.timing.header = {"task", "wall_seconds", "chi"};
  for (std::size_t i = 0; i < tasks.size(); ++i) o.timing.rows[i].push_back(o.results.rows[i][7]);
}

void run_sample(const ExperimentConfig& c, const std::string& h, Output& o) {
  const int m = c.modes.front();
  const int n = c.photons.front();
  const LossPoint lp = loss_points(c).front();
  const auto policy = policy_for(c, std::nullopt);
  o.results.header = {"config_hash", "circuit", "M", "N", "mu", "weight", "clamped_mass", "n_samples", "sample_seed",
                      "circuit_hash"};
  Table samples;
  samples.header = {"circuit"};
  for (int j = 1; j <= m; ++j) samples.header.push_back("n" + std::to_string(j));
  samples.header.push_back("joint_probability");
  std::vector<std::string> preamble{"config_hash=" + h, "chi=" + chi_label(policy), "seed=" + std::to_string(*c.seed)};

  struct Drawn { Row result; std::vector<Row> samples; std::string circuit_line; };
  std::vector<Drawn> drawn(static_cast<std::size_t>(c.n_circuits));
  parallel_for(drawn.size(), c.threads, [&](std::size_t i) {
    const int ci = static_cast<int>(i);
    const CircuitPlan plan = make_circuit(c, m, ci);
    const std::uint64_t sample_seed = derive_seed(circuit_seed(*c.seed, m, ci), 0x5a3d1e);
    const double mu = loss_spec(lp).transmissivity(n);
    std::vector<SamplingResult> res;
    double weight = 0.0, clamped = 0.0;
    if (mu == 1.0) {
      MpsState st = MpsState::init_fock(single_photons(n, m));
      st.apply_circuit(plan, policy);
      const Sampler s(st);
      res = s.sample_many(sample_seed, c.n_samples);
      weight = s.total_weight();
      clamped = s.clamped_mass();
    } else {
      MpoState st = MpoState::init_lossy(n, m, loss_spec(lp));
      st.apply_circuit(plan, policy);
      const Sampler s(st);
      res = s.sample_many(sample_seed, c.n_samples);
      weight = s.total_weight();
      clamped = s.clamped_mass();
    }
    Drawn& d = drawn[i];
    d.result = {h, std::to_string(ci), std::to_string(m), std::to_string(n), num(mu), num(weight), num(clamped),
                std::to_string(c.n_samples), std::to_string(sample_seed), hex(circuit_hash(plan))};
    d.circuit_line = "circuit " + std::to_string(ci) + " hash=" + hex(circuit_hash(plan)) +
                     " sample_seed=" + std::to_string(sample_seed);
    for (const auto& r : res) {
      Row row{std::to_string(ci)};
      for (int x : r.outcome) row.push_back(std::to_string(x));
      row.push_back(num(r.joint_probability));
      d.samples.push_back(std::move(row));
    }
  });
  for (auto& d : drawn) {
    o.results.rows.push_back(d.result);
    preamble.push_back(d.circuit_line);
    for (auto& r : d.samples) samples.rows.push_back(std::move(r));
  }
  samples.write(fs::path(c.output) / "samples.csv", preamble);
}

void run_prob(const ExperimentConfig& c, const std::string& h, Output& o) {
  const int m = c.modes.front();
  const int n = c.photons.front();
  const LossPoint lp = loss_points(c).front();
  const auto policy = policy_for(c, std::nullopt);
  if (!c.outcome.empty() && static_cast<int>(c.outcome.size()) != m) {
    throw ConfigError("outcome", "length must equal M");
  }
  o.results.header = {"config_hash", "circuit", "M", "N", "mu", "outcome", "probability", "oracle_probability",
                      "abs_diff"};
  const auto done = run_tasks(static_cast<std::size_t>(c.n_circuits), c.threads, [&](std::size_t i) {
    const int ci = static_cast<int>(i);
    const CircuitPlan plan = make_circuit(c, m, ci);
    const double mu = loss_spec(lp).transmissivity(n);
    std::vector<Occupation> outcomes;
    if (!c.outcome.empty()) outcomes.push_back(c.outcome);
    else outcomes = mu == 1.0 ? enumerate_occupations(m, n) : enumerate_occupations_up_to(m, n);

    std::optional<ExactDistribution> oracle;
    if (n <= 8 && count_occupations(m + 1, n) <= 200000) {
      oracle = exact_lossy_distribution(circuit_to_unitary(plan), n, mu);
    }
    std::function<double(const Occupation&)> prob;
    std::optional<MpsState> mps;
    std::optional<MpoState> mpo;
    if (mu == 1.0) {
      mps = MpsState::init_fock(single_photons(n, m));
      mps->apply_circuit(plan, policy);
      prob = [&](const Occupation& x) { return mps->probability(x); };
    } else {
      mpo = MpoState::init_lossy(n, m, loss_spec(lp));
      mpo->apply_circuit(plan, policy);
      prob = [&](const Occupation& x) { return mpo->outcome_prob(x); };
    }
    std::vector<Row> rows;
    for (const auto& x : outcomes) {
      const double p = prob(x);
      Row r{h, std::to_string(ci), std::to_string(m), std::to_string(n), num(mu), join(x, " "), num(p)};
      if (oracle) {
        const double q = oracle->probability(x);
        r.push_back(num(q));
        r.push_back(num(std::abs(p - q)));
      } else {
        r.push_back("");
        r.push_back("");
      }
      rows.push_back(std::move(r));
    }
    return rows;
  });
  gather(o, done);
}

void run_oracle_check(const ExperimentConfig& c, const std::string& h, Output& o) {
  struct Task { int m, n; double mu; int circuit; };
  std::vector<Task> tasks;
  for (int m : c.modes)
    for (int n : c.photons)
      for (double mu : c.mus)
        for (int i = 0; i < c.n_circuits; ++i) tasks.push_back({m, n, mu, i});
  o.results.header = {"config_hash", "circuit", "M", "N", "mu", "pipeline", "max_deviation", "tn_total"};
  const auto done = run_tasks(tasks.size(), c.threads, [&](std::size_t t) {
    const Task& k = tasks[t];
    const CircuitPlan plan = make_circuit(c, k.m, k.circuit);
    const ComplexMatrix u = circuit_to_unitary(plan);
    const ExactDistribution exact = exact_lossy_distribution(u, k.n, k.mu);
    std::vector<Row> rows;
    auto record = [&](const std::string& pipeline, const std::function<double(const Occupation&)>& p) {
      double dev = 0.0, total = 0.0;
      for (std::size_t i = 0; i < exact.outcomes.size(); ++i) {
        const double v = p(exact.outcomes[i]);
        total += v;
        dev = std::max(dev, std::abs(v - exact.probabilities[i]));
      }
      rows.push_back({h, std::to_string(k.circuit), std::to_string(k.m), std::to_string(k.n), num(k.mu), pipeline,
                      num(dev), num(total)});
    };
    if (k.mu == 1.0) {
      MpsState st = MpsState::init_fock(single_photons(k.n, k.m));
      st.apply_circuit(plan);
      record("mps", [&](const Occupation& x) { return total_photons(x) == k.n ? st.probability(x) : 0.0; });
    }
    MpoState st = MpoState::init_lossy(k.n, k.m, LossSpec::constant(k.mu));
    st.apply_circuit(plan);
    record("mpo", [&](const Occupation& x) { return st.outcome_prob_raw(x); });
    return rows;
  });
  gather(o, done);
  double worst = 0.0;
  for (const auto& r : o.results.rows) worst = std::max(worst, std::stod(r[6]));
  char buf[96];
  if (worst <= c.oracle_tolerance) {
    std::snprintf(buf, sizeof buf, "max deviation %.3g <= %.3g", worst, c.oracle_tolerance);
  } else {
    std::snprintf(buf, sizeof buf, "max deviation %.3g exceeds %.3g", worst, c.oracle_tolerance);
    o.failed = true;
  }
  o.message = buf;
}

std::vector<int> int_list(const json& j, const std::string& field) {
  try {
    if (j.is_number_integer()) return {j.get<int>()};
    if (j.is_array()) return j.get<std::vector<int>>();
    if (j.is_object()) {
      const int from = j.at("from").get<int>();
      const int to = j.at("to").get<int>();
      const int step = j.value("step", 1);
      if (step <= 0) throw ConfigError(field, "step must be positive");
      std::vector<int> v;
      for (int x = from; x <= to; x += step) v.push_back(x);
      return v;
    }
  } catch (const json::exception& e) {
    throw ConfigError(field, e.what());
  }
  throw ConfigError(field, "expected an integer, a list, or {from, to[, step]}");
}

std::vector<double> real_list(const json& j, const std::string& field) {
  try {
    if (j.is_number()) return {j.get<double>()};
    if (j.is_array()) return j.get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ConfigError(field, e.what());
  }
  throw ConfigError(field, "expected a number or a list of numbers");
}

}  // namespace

const char* software_version() { return BOSONET_VERSION; }

std::string to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "unknown";
}

std::optional<ExperimentKind> parse_experiment_kind(const std::string& name) {
  for (const auto& [k, n] : kKindNames)
    if (name == n) return k;
  return std::nullopt;
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("config", e.what());
  }
  if (!j.is_object()) throw ConfigError("config", "top level must be an object");

  static const std::vector<std::string> known{
      "experiment", "M", "N", "loss", "alpha", "chi_max", "chi", "weight_threshold", "reorthogonalize", "boundary",
      "n_circuits", "seed", "output", "threads", "checkpoint_every", "n_samples", "outcome", "max_bond_dimension",
      "oracle_tolerance"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError(key, "unknown key");
  }

  ExperimentConfig c;
  auto get = [&](const char* key, auto& dst) {
    if (!j.contains(key) || j[key].is_null()) return;
    try {
      j[key].get_to(dst);
    } catch (const json::exception& e) {
      throw ConfigError(key, e.what());
    }
  };

  if (j.contains("experiment")) {
    const auto k = parse_experiment_kind(j["experiment"].is_string() ? j["experiment"].get<std::string>() : "");
    if (!k) throw ConfigError("experiment", "unknown experiment");
    c.experiment = *k;
  }
  if (j.contains("M")) c.modes = int_list(j["M"], "M");
  if (j.contains("N")) c.photons = int_list(j["N"], "N");
  if (j.contains("alpha")) c.alphas = real_list(j["alpha"], "alpha");
  if (j.contains("loss")) {
    const json& l = j["loss"];
    if (!l.is_object()) throw ConfigError("loss", "expected an object");
    const std::string mode = l.value("mode", "constant");
    if (mode == "constant") {
      c.loss_kind = LossSpec::Kind::kConstant;
      if (l.contains("mu")) c.mus = real_list(l["mu"], "loss.mu");
    } else if (mode == "power-law") {
      c.loss_kind = LossSpec::Kind::kPowerLaw;
      if (l.contains("beta")) c.betas = real_list(l["beta"], "loss.beta");
      if (l.contains("gamma")) c.gammas = real_list(l["gamma"], "loss.gamma");
    } else {
      throw ConfigError("loss.mode", "expected constant or power-law");
    }
  }
  if (j.contains("chi_max") && !j["chi_max"].is_null()) {
    std::size_t v = 0;
    get("chi_max", v);
    c.chi_max = v;
  }
  if (j.contains("chi")) {
    for (int x : int_list(j["chi"], "chi")) {
      if (x < 1) throw ConfigError("chi", "values must be >= 1");
      c.chi_values.push_back(static_cast<std::size_t>(x));
    }
  }
  if (j.contains("weight_threshold") && !j["weight_threshold"].is_null()) {
    double v = 0.0;
    get("weight_threshold", v);
    c.weight_threshold = v;
  }
  get("reorthogonalize", c.reorthogonalize);
  if (j.contains("boundary")) {
    const std::string b = j["boundary"].is_string() ? j["boundary"].get<std::string>() : "";
    if (b == "combined") c.per_sector = false;
    else if (b == "per-sector") c.per_sector = true;
    else throw ConfigError("boundary", "expected combined or per-sector");
  }
  get("n_circuits", c.n_circuits);
  if (j.contains("seed") && !j["seed"].is_null()) {
    std::uint64_t s = 0;
    get("seed", s);
    c.seed = s;
  }
  get("output", c.output);
  get("threads", c.threads);
  get("checkpoint_every", c.checkpoint_every);
  get("n_samples", c.n_samples);
  get("outcome", c.outcome);
  if (j.contains("max_bond_dimension") && !j["max_bond_dimension"].is_null()) {
    std::size_t v = 0;
    get("max_bond_dimension", v);
    c.max_bond_dimension = v;
  }
  get("oracle_tolerance", c.oracle_tolerance);
  return c;
}

void validate(const ExperimentConfig& c) {
  if (!c.seed) throw ConfigError("seed", "required (pass it in the config or with --seed)");
  if (c.modes.empty()) throw ConfigError("M", "must not be empty");
  if (c.photons.empty()) throw ConfigError("N", "must not be empty");
  if (c.alphas.empty()) throw ConfigError("alpha", "must not be empty");
  for (int m : c.modes)
    if (m < 2 || m % 2 != 0) throw ConfigError("M", "Haar circuits need an even mode count >= 2");
  for (int n : c.photons) {
    if (n < 0) throw ConfigError("N", "must be nonnegative");
    for (int m : c.modes)
      if (n > m && c.experiment != ExperimentKind::kFockEe) throw ConfigError("N", "must not exceed M");
  }
  for (double a : c.alphas)
    if (!(a >= 0.0)) throw ConfigError("alpha", "must be >= 0");
  if (c.loss_kind == LossSpec::Kind::kConstant) {
    if (c.mus.empty()) throw ConfigError("loss.mu", "must not be empty");
    for (double mu : c.mus)
      if (!(mu >= 0.0 && mu <= 1.0)) throw ConfigError("loss.mu", "must lie in [0, 1]");
  } else {
    if (c.betas.empty() || c.gammas.empty()) throw ConfigError("loss", "power-law needs beta and gamma");
    for (double b : c.betas)
      if (!(b > 0.0)) throw ConfigError("loss.beta", "must be positive");
    for (double g : c.gammas)
      if (!(g > 0.0 && g <= 1.0)) throw ConfigError("loss.gamma", "must lie in (0, 1]");
    for (int n : c.photons)
      for (double b : c.betas)
        for (double g : c.gammas) {
          const double mu = n > 0 ? b * std::pow(n, g - 1.0) : 0.0;
          if (mu > 1.0) throw ConfigError("loss.beta", "beta N^(gamma-1) exceeds 1 for N = " + std::to_string(n));
        }
  }
  if (c.chi_max && *c.chi_max < 1) throw ConfigError("chi_max", "must be >= 1");
  if (c.weight_threshold && !(*c.weight_threshold >= 0.0)) throw ConfigError("weight_threshold", "must be >= 0");
  if (c.n_circuits < 1) throw ConfigError("n_circuits", "must be >= 1");
  if (c.threads < 1) throw ConfigError("threads", "must be >= 1");
  if (c.checkpoint_every < 0) throw ConfigError("checkpoint_every", "must be >= 0");
  if (c.output.empty()) throw ConfigError("output", "must not be empty");
  if (c.experiment == ExperimentKind::kOracleCheck && c.loss_kind != LossSpec::Kind::kConstant) {
    throw ConfigError("loss", "oracle-check uses constant loss");
  }
  if (c.experiment == ExperimentKind::kOracleCheck) {
    for (int m : c.modes)
      for (int n : c.photons)
        if (n > 10 || count_occupations(m + 1, n) > 100000) throw ConfigError("N", "oracle-check instance too large");
  }
}

std::string canonical_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = to_string(c.experiment);
  j["M"] = c.modes;
  j["N"] = c.photons;
  if (c.loss_kind == LossSpec::Kind::kConstant) {
    j["loss"] = {{"mode", "constant"}, {"mu", c.mus}};
  } else {
    j["loss"] = {{"mode", "power-law"}, {"beta", c.betas}, {"gamma", c.gammas}};
  }
  j["alpha"] = c.alphas;
  j["chi_max"] = c.chi_max ? json(*c.chi_max) : json(nullptr);
  j["chi"] = c.chi_values;
  j["weight_threshold"] = c.weight_threshold ? json(*c.weight_threshold) : json(nullptr);
  j["reorthogonalize"] = c.reorthogonalize;
  j["boundary"] = c.per_sector ? "per-sector" : "combined";
  j["n_circuits"] = c.n_circuits;
  j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
  j["n_samples"] = c.n_samples;
  j["outcome"] = c.outcome;
  j["max_bond_dimension"] = c.max_bond_dimension ? json(*c.max_bond_dimension) : json(nullptr);
  j["oracle_tolerance"] = c.oracle_tolerance;
  // output, threads and checkpoint cadence do not change results.
  return j.dump();
}

std::uint64_t config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_json(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RunSummary run_experiment(const ExperimentConfig& c, const RunOptions& opts, std::ostream& log) {
  validate(c);
  const auto t0 = Clock::now();
  RunSummary summary;
  summary.config_hash = config_hash(c);
  const std::string h = hex(summary.config_hash);
  fs::create_directories(c.output);

  Output o;
  try {
    switch (c.experiment) {
      case ExperimentKind::kLosslessEe: run_lossless_ee(c, h, o); break;
      case ExperimentKind::kFockEe: run_fock_ee(c, h, o); break;
      case ExperimentKind::kLossyEe: run_lossy_ee(c, opts, h, o); break;
      case ExperimentKind::kAnalyticEe: run_analytic_ee(c, h, o); break;
      case ExperimentKind::kTruncError: run_trunc_error(c, opts, h, o); break;
      case ExperimentKind::kSample: run_sample(c, h, o); break;
      case ExperimentKind::kProb: run_prob(c, h, o); break;
      case ExperimentKind::kOracleCheck: run_oracle_check(c, h, o); break;
    }
    summary.exit_code = o.failed ? 2 : 0;
    summary.message = o.message;
  } catch (const ConfigError&) {
    throw;
  } catch (const ResourceLimitError& e) {
    summary.exit_code = 3;
    summary.message = std::string("resource limit: ") + e.what();
  } catch (const NumericalError& e) {
    summary.exit_code = 2;
    summary.message = std::string("numerical failure: ") + e.what();
  } catch (const IntegrityError& e) {
    summary.exit_code = 2;
    summary.message = std::string("integrity failure: ") + e.what();
  } catch (const DegradedStateError& e) {
    summary.exit_code = 2;
    summary.message = std::string("degraded state: ") + e.what();
  }
  summary.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();

  const fs::path dir(c.output);
  if (summary.exit_code == 0 || summary.exit_code == 2) {
    o.results.write(dir / "results.csv");
    if (!o.summary.header.empty()) o.summary.write(dir / "summary.csv");
    o.timing.write(dir / "timing.csv");
  }
  json meta;
  meta["experiment"] = to_string(c.experiment);
  meta["config_hash"] = h;
  meta["config"] = json::parse(canonical_json(c));
  meta["software_version"] = software_version();
  meta["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION);
  meta["wall_seconds"] = summary.wall_seconds;
  meta["exit_code"] = summary.exit_code;
  meta["message"] = summary.message;
  std::ofstream(dir / "meta.json", std::ios::binary) << meta.dump(2) << "\n";

  log << to_string(c.experiment) << ": " << summary.message << " (config " << h << ", " << num(summary.wall_seconds)
      << " s)\n";
  return summary;
}

}  // namespace bosonet
