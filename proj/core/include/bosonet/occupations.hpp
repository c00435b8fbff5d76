#pragma once

#include <cstdint>
#include <vector>

namespace bosonet {

using Occupation = std::vector<int>;

// All occupation lists of `total` photons over `modes` modes in colexicographic
// order: compared from the last mode backwards, smaller first.
std::vector<Occupation> enumerate_occupations(int modes, int total);

// Totals 0..max_total in ascending order, each block colexicographic.
std::vector<Occupation> enumerate_occupations_up_to(int modes, int max_total);

// C(total + modes - 1, modes - 1), saturating at UINT64_MAX.
std::uint64_t count_occupations(int modes, int total);

int total_photons(const Occupation& occ);

}  // namespace bosonet
