#pragma once

#include <span>
#include <vector>

namespace bosonet {

// Renyi-alpha entropy in bits of a probability vector. The vector is
// renormalized first; zero entries are ignored; alpha = 1 is von Neumann.
double renyi_from_probabilities(std::span<const double> p, double alpha);

// Same, from singular values (probabilities are lambda^2).
double renyi_from_singular_values(std::span<const double> lambda, double alpha);

struct EntropyReport {
  double alpha = 1.0;
  std::vector<double> per_bond;  // index 0 is bond 1
  int max_bond = 1;              // smallest bond attaining the maximum
  double max_value = 0.0;
};

EntropyReport make_report(std::vector<double> per_bond, double alpha);

}  // namespace bosonet
