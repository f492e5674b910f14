#include "towerlab/padic.hpp"

#include <cmath>
#include <limits>

namespace towerlab {

IndexPattern index_pattern_check(const std::vector<long>& indices, long p, int d) {
  if (indices.size() < 2) throw InputError("index pattern check needs at least 2 levels");
  if (p < 2) throw InputError("p must be at least 2");
  if (d < 1) throw InputError("tower dimension must be positive");
  Int step = 1;
  for (int k = 0; k < d; ++k) step *= p;

  int start = static_cast<int>(indices.size()) - 1;
  while (start > 0 && Int(indices[start - 1]) * step == Int(indices[start])) --start;
  if (static_cast<int>(indices.size()) - start < 2) throw InputError("no regular index suffix of length 2");

  Int denom = 1;
  for (int k = 0; k < d * (start + 1); ++k) denom *= p;
  IndexPattern pat;
  pat.first_regular_level = start;
  pat.w = make_rat(Int(indices[start]), denom);
  return pat;
}

PadicReport padic_fit(const std::vector<long>& betti_sequence, const PadicTowerMeta& meta,
                      double tolerance, const std::vector<LevelRanks>& rank_data) {
  const std::size_t n = betti_sequence.size();
  if (n < 3) throw InputError("padic fit needs at least 3 levels");
  if (meta.indices.size() != n) throw InputError("betti sequence and index list differ in length");
  IndexPattern pat = index_pattern_check(meta.indices, meta.p, meta.d);
  if (meta.w_hint && *meta.w_hint != pat.w)
    throw InputError("index constant " + rat_str(pat.w) + " does not match hint " + rat_str(*meta.w_hint));
  if (!rank_data.empty()) {
    if (rank_data.size() != n) throw InputError("rank data length mismatch");
    for (std::size_t i = 0; i < n; ++i)
      if (rank_data[i].im + rank_data[i].ker != rank_data[i].domain_dim)
        throw InvariantError("im + ker != domain dimension at level " + std::to_string(i + 1));
  }

  PadicReport rep;
  rep.beta_estimate = make_rat(Int(betti_sequence[n - 1]), Int(meta.indices[n - 1]));
  for (std::size_t i = 0; i < n; ++i) {
    Rat r = Rat(betti_sequence[i]) - rep.beta_estimate * Rat(meta.indices[i]);
    rep.residuals.push_back(abs(r));
  }

  const double logp = std::log(static_cast<double>(meta.p));
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < n; ++i) {
    if (rep.residuals[i] == 0) continue;
    xs.push_back(std::log(static_cast<double>(meta.indices[i])) / logp);
    ys.push_back((log_abs(rep.residuals[i].get_num()) - log_abs(rep.residuals[i].get_den())) / logp);
  }
  rep.all_zero_residuals = xs.empty();
  rep.bound = 1.0 - 1.0 / meta.d;
  if (xs.size() < 2) {
    rep.fitted_exponent = -std::numeric_limits<double>::infinity();
    rep.bound_ok = true;
    return rep;
  }
  double xbar = 0, ybar = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xbar += xs[i];
    ybar += ys[i];
  }
  xbar /= xs.size();
  ybar /= ys.size();
  double num = 0, den = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    num += (xs[i] - xbar) * (ys[i] - ybar);
    den += (xs[i] - xbar) * (xs[i] - xbar);
  }
  if (den == 0) {
    rep.fitted_exponent = -std::numeric_limits<double>::infinity();
    rep.bound_ok = true;
    return rep;
  }
  rep.fitted_exponent = num / den;
  rep.bound_ok = rep.fitted_exponent <= rep.bound + tolerance;
  return rep;
}

}  // namespace towerlab
