#include "bosonet/entropy.hpp"

#include <cmath>
#include <stdexcept>

namespace bosonet {

double renyi_from_probabilities(std::span<const double> p, double alpha) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("renyi entropy: alpha must be >= 0");
  double total = 0.0;
  for (double x : p) {
    if (x < 0.0) throw std::invalid_argument("renyi entropy: negative probability");
    total += x;
  }
  if (total <= 0.0) return 0.0;

  if (alpha == 0.0) {
    std::size_t support = 0;
    for (double x : p) support += (x > 0.0);
    return std::log2(static_cast<double>(support));
  }
  if (alpha == 1.0) {
    double h = 0.0;
    for (double x : p) {
      const double q = x / total;
      if (q > 0.0) h -= q * std::log2(q);
    }
    return h < 0.0 ? 0.0 : h;
  }
  double sum = 0.0;
  for (double x : p) {
    const double q = x / total;
    if (q > 0.0) sum += std::pow(q, alpha);
  }
  const double h = std::log2(sum) / (1.0 - alpha);
  return h < 0.0 ? 0.0 : h;
}

double renyi_from_singular_values(std::span<const double> lambda, double alpha) {
  std::vector<double> p;
  p.reserve(lambda.size());
  for (double l : lambda) p.push_back(l * l);
  return renyi_from_probabilities(p, alpha);
}

EntropyReport make_report(std::vector<double> per_bond, double alpha) {
  EntropyReport r;
  r.alpha = alpha;
  r.per_bond = std::move(per_bond);
  for (std::size_t i = 0; i < r.per_bond.size(); ++i) {
    if (i == 0 || r.per_bond[i] > r.max_value) {
      r.max_value = r.per_bond[i];
      r.max_bond = static_cast<int>(i) + 1;
    }
  }
  return r;
}

}  // namespace bosonet
