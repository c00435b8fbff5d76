#include "bosonet/occupations.hpp"

#include <limits>
#include <numeric>
#include <stdexcept>

namespace bosonet {

namespace {

void fill(int modes, int total, Occupation& current, std::vector<Occupation>& out) {
  if (modes == 1) {
    current[0] = total;
    out.push_back(current);
    return;
  }
  for (int v = 0; v <= total; ++v) {
    current[static_cast<std::size_t>(modes - 1)] = v;
    fill(modes - 1, total - v, current, out);
  }
}

}  // namespace

std::vector<Occupation> enumerate_occupations(int modes, int total) {
  if (modes < 1 || total < 0) throw std::invalid_argument("enumerate_occupations: need modes >= 1, total >= 0");
  std::vector<Occupation> out;
  Occupation current(static_cast<std::size_t>(modes), 0);
  fill(modes, total, current, out);
  return out;
}

std::vector<Occupation> enumerate_occupations_up_to(int modes, int max_total) {
  std::vector<Occupation> out;
  for (int n = 0; n <= max_total; ++n) {
    auto block = enumerate_occupations(modes, n);
    out.insert(out.end(), block.begin(), block.end());
  }
  return out;
}

std::uint64_t count_occupations(int modes, int total) {
  if (modes < 1 || total < 0) return 0;
  // C(total + modes - 1, k) built incrementally; each partial product is an integer.
  const std::uint64_t k = static_cast<std::uint64_t>(std::min(modes - 1, total));
  const std::uint64_t n = static_cast<std::uint64_t>(total + modes - 1);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    const std::uint64_t num = n - k + i;
    if (r > std::numeric_limits<std::uint64_t>::max() / num) return std::numeric_limits<std::uint64_t>::max();
    r = r * num / i;
  }
  return r;
}

int total_photons(const Occupation& occ) { return std::accumulate(occ.begin(), occ.end(), 0); }

}  // namespace bosonet
