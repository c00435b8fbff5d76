#pragma once

#include <string>

#include "bosonet/mpo.hpp"
#include "bosonet/mps.hpp"

namespace bosonet {

// Versioned JSON container: charges, lambdas and row-major blocks. Doubles are
// written with round-trip precision, so restore is exact.
std::string snapshot_to_json(const MpsState& state);
std::string snapshot_to_json(const MpoState& state);

// "mps" or "mpo". Throws std::invalid_argument for anything else.
std::string snapshot_kind(const std::string& text);

MpsState mps_from_snapshot(const std::string& text);
MpoState mpo_from_snapshot(const std::string& text);

}  // namespace bosonet
