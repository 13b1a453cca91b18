#pragma once

#include <cmath>
#include <vector>

#include "morphlab/numerics/rng.hpp"
#include "morphlab/phonology.hpp"

namespace morph::testing {

struct ToySet {
  std::vector<phon::WickelfeatureVector> xs;
  std::vector<phon::WickelfeatureVector> ys;
};

/// Labels come from a random linear teacher, so every output coordinate is
/// linearly separable. Inputs whose teacher scores fall too close to zero are
/// redrawn to keep a margin.
inline ToySet separable_toy_set(std::uint64_t seed, std::size_t items = 8, std::size_t dim = 16) {
  nn::Rng rng(seed);
  std::vector<std::vector<double>> w(dim, std::vector<double>(dim));
  std::vector<double> b(dim);
  for (auto& row : w) {
    for (double& v : row) v = rng.uniform(-1.0, 1.0);
  }
  for (double& v : b) v = rng.uniform(-1.0, 1.0);

  ToySet out;
  while (out.xs.size() < items) {
    std::vector<std::int8_t> x(dim), y(dim);
    for (auto& v : x) v = rng.bernoulli(0.5) ? 1 : -1;
    bool ok = true;
    for (std::size_t j = 0; j < dim && ok; ++j) {
      double s = b[j];
      for (std::size_t i = 0; i < dim; ++i) s += w[j][i] * x[i];
      if (std::abs(s) < 0.25) ok = false;
      y[j] = s > 0 ? 1 : -1;
    }
    if (!ok) continue;
    out.xs.push_back(phon::WickelfeatureVector::from_bits(std::move(x)));
    out.ys.push_back(phon::WickelfeatureVector::from_bits(std::move(y)));
  }
  return out;
}

}  // namespace morph::testing
