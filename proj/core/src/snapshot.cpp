#include "bosonet/snapshot.hpp"

#include <stdexcept>

#include "json.hpp"

namespace bosonet {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "bosonet-snapshot";
constexpr int kVersion = 1;

json charge_json(DualCharge q) { return json::array({q.ket, q.bra}); }

DualCharge charge_from(const json& j) { return {j.at(0).get<int>(), j.at(1).get<int>()}; }

json train_json(const TensorTrain& tt) {
  json j;
  j["num_sites"] = tt.num_sites();
  j["local_dim"] = tt.space().dim;
  j["scale"] = tt.scale();
  j["cumulative_discarded_weight"] = tt.discarded_weight();
  json bonds = json::array();
  for (int k = 0; k <= tt.num_sites(); ++k) {
    json sectors = json::array();
    for (const auto& s : tt.bond(k).sectors) sectors.push_back({{"charge", charge_json(s.charge)}, {"lambda", s.lambda}});
    bonds.push_back(std::move(sectors));
  }
  j["bonds"] = std::move(bonds);
  json gammas = json::array();
  for (int site = 1; site <= tt.num_sites(); ++site) {
    json blocks = json::array();
    for (const auto& [key, m] : tt.gamma(site).blocks) {
      std::vector<double> re, im;
      for (const Complex z : to_row_major(m)) {
        re.push_back(z.real());
        im.push_back(z.imag());
      }
      blocks.push_back({{"left", charge_json(key.first)},
                        {"right", charge_json(key.second)},
                        {"rows", m.rows()},
                        {"cols", m.cols()},
                        {"re", re},
                        {"im", im}});
    }
    gammas.push_back(std::move(blocks));
  }
  j["gammas"] = std::move(gammas);
  return j;
}

TensorTrain train_from(const json& j, bool vectorized) {
  const LocalSpace space{j.at("local_dim").get<int>(), vectorized};
  std::vector<BondSpectrum> bonds;
  for (const auto& b : j.at("bonds")) {
    BondSpectrum spec;
    for (const auto& s : b) spec.sectors.push_back({charge_from(s.at("charge")), s.at("lambda").get<std::vector<double>>()});
    bonds.push_back(std::move(spec));
  }
  std::vector<ChargedTensor> gammas;
  for (const auto& g : j.at("gammas")) {
    ChargedTensor t;
    for (const auto& b : g) {
      const auto re = b.at("re").get<std::vector<double>>();
      const auto im = b.at("im").get<std::vector<double>>();
      if (re.size() != im.size()) throw std::invalid_argument("snapshot: re/im length mismatch");
      std::vector<Complex> entries;
      for (std::size_t i = 0; i < re.size(); ++i) entries.emplace_back(re[i], im[i]);
      t.blocks[{charge_from(b.at("left")), charge_from(b.at("right"))}] =
          from_row_major(b.at("rows").get<Eigen::Index>(), b.at("cols").get<Eigen::Index>(), entries);
    }
    gammas.push_back(std::move(t));
  }
  return TensorTrain(space, std::move(bonds), std::move(gammas), j.at("scale").get<double>(),
                     j.at("cumulative_discarded_weight").get<double>());
}

json parse_checked(const std::string& text, const char* kind) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("snapshot: ") + e.what());
  }
  if (j.value("format", "") != kFormat) throw std::invalid_argument("snapshot: unknown format tag");
  if (j.value("version", 0) != kVersion) throw std::invalid_argument("snapshot: unsupported version");
  if (kind && j.value("kind", "") != kind) throw std::invalid_argument(std::string("snapshot: expected kind ") + kind);
  return j;
}

}  // namespace

std::string snapshot_to_json(const MpsState& state) {
  json j = train_json(state.train());
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["kind"] = "mps";
  j["photons"] = state.photons();
  return j.dump();
}

std::string snapshot_to_json(const MpoState& state) {
  json j = train_json(state.train());
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["kind"] = "mpo";
  j["photons"] = state.photons();
  j["loss"] = {{"mu", state.mu()}, {"sector", state.sector() ? json(*state.sector()) : json(nullptr)}};
  return j.dump();
}

std::string snapshot_kind(const std::string& text) {
  const json j = parse_checked(text, nullptr);
  const std::string kind = j.value("kind", "");
  if (kind != "mps" && kind != "mpo") throw std::invalid_argument("snapshot: unknown kind");
  return kind;
}

MpsState mps_from_snapshot(const std::string& text) {
  const json j = parse_checked(text, "mps");
  try {
    return MpsState(train_from(j, false), j.at("photons").get<int>());
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("snapshot: ") + e.what());
  }
}

MpoState mpo_from_snapshot(const std::string& text) {
  const json j = parse_checked(text, "mpo");
  try {
    const auto& loss = j.at("loss");
    std::optional<int> sector;
    if (!loss.at("sector").is_null()) sector = loss.at("sector").get<int>();
    return MpoState(train_from(j, true), j.at("photons").get<int>(), loss.at("mu").get<double>(), sector);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("snapshot: ") + e.what());
  }
}

}  // namespace bosonet
