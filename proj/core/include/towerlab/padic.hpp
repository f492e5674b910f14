#pragma once

// Growth-rate fitting for Betti sequences along towers whose indices
// eventually follow w * p^(d*i).

#include <optional>
#include <vector>

#include "towerlab/numeric.hpp"

namespace towerlab {

struct PadicTowerMeta {
  long p = 2;
  int d = 1;                   // tower dimension
  std::optional<Rat> w_hint;   // expected index constant, checked when present
  std::vector<long> indices;
};

struct IndexPattern {
  Rat w;
  int first_regular_level = 0;  // 0-based start of the regular suffix
};

// Finds the largest suffix with index ratios exactly p^d and solves
// indices[i] = w * p^(d*(i+1)) on it (levels are numbered from 1).
IndexPattern index_pattern_check(const std::vector<long>& indices, long p, int d);

struct PadicReport {
  Rat beta_estimate;            // last normalized value
  std::vector<Rat> residuals;   // |b_i - beta * index_i|, exact
  double fitted_exponent = 0;   // log_p residual vs log_p index slope; -inf if fewer than 2 nonzero residuals
  bool all_zero_residuals = false;
  double bound = 0;             // 1 - 1/d
  bool bound_ok = false;
};

struct LevelRanks {
  long domain_dim = 0;
  long im = 0;
  long ker = 0;
};

PadicReport padic_fit(const std::vector<long>& betti_sequence, const PadicTowerMeta& meta,
                      double tolerance, const std::vector<LevelRanks>& rank_data = {});

}  // namespace towerlab
