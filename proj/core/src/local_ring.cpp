#include "towerlab/local_ring.hpp"

#include <algorithm>

namespace towerlab {

LocalPoly LocalPoly::tau_power(int p, int k) {
  if (k < 0 || k >= p) throw std::invalid_argument("tau power out of range");
  LocalPoly r(p);
  r.c_[k] = 1;
  return r;
}

LocalPoly LocalPoly::constant(int p, long v) {
  LocalPoly r(p);
  r.set_coeff(0, v);
  return r;
}

void LocalPoly::set_coeff(int i, long v) {
  long m = v % p_;
  if (m < 0) m += p_;
  c_.at(i) = static_cast<int>(m);
}

bool LocalPoly::is_zero() const {
  return std::all_of(c_.begin(), c_.end(), [](int v) { return v == 0; });
}

int LocalPoly::valuation() const {
  for (int i = 0; i < p_; ++i)
    if (c_[i] != 0) return i;
  return p_;
}

LocalPoly LocalPoly::operator+(const LocalPoly& o) const {
  LocalPoly r(p_);
  for (int i = 0; i < p_; ++i) r.c_[i] = (c_[i] + o.c_[i]) % p_;
  return r;
}

LocalPoly LocalPoly::operator-(const LocalPoly& o) const {
  LocalPoly r(p_);
  for (int i = 0; i < p_; ++i) r.c_[i] = (c_[i] - o.c_[i] + p_) % p_;
  return r;
}

LocalPoly LocalPoly::operator*(const LocalPoly& o) const {
  LocalPoly r(p_);
  for (int i = 0; i < p_; ++i) {
    if (c_[i] == 0) continue;
    for (int j = 0; i + j < p_; ++j) {
      if (o.c_[j] == 0) continue;
      r.c_[i + j] = (r.c_[i + j] + c_[i] * o.c_[j]) % p_;
    }
  }
  return r;
}

LocalPoly LocalPoly::inverse() const {
  if (!is_unit()) throw std::invalid_argument("inverse of a non-unit");
  // Triangular solve for x with (this) * x = 1.
  LocalPoly x(p_);
  long c0inv = 1;
  for (long t = 1; t < p_; ++t)
    if (t * c_[0] % p_ == 1) {
      c0inv = t;
      break;
    }
  x.c_[0] = static_cast<int>(c0inv);
  for (int k = 1; k < p_; ++k) {
    long s = 0;
    for (int i = 1; i <= k; ++i) s += static_cast<long>(c_[i]) * x.c_[k - i];
    x.c_[k] = static_cast<int>((p_ - (c0inv * (s % p_)) % p_) % p_);
  }
  return x;
}

LocalPoly LocalPoly::shifted_down(int k) const {
  if (valuation() < k) throw std::invalid_argument("inexact division by tau^k");
  LocalPoly r(p_);
  for (int i = k; i < p_; ++i) r.c_[i - k] = c_[i];
  return r;
}

LocalMat LocalMat::zero(int p, long rows, long cols) {
  LocalMat m;
  m.p = p;
  m.rows = rows;
  m.cols = cols;
  m.a.assign(static_cast<std::size_t>(rows) * cols, LocalPoly(p));
  return m;
}

LocalMat LocalMat::identity(int p, long n) {
  LocalMat m = zero(p, n, n);
  for (long i = 0; i < n; ++i) m.at(i, i) = LocalPoly::constant(p, 1);
  return m;
}

bool LocalMat::operator==(const LocalMat& o) const {
  return p == o.p && rows == o.rows && cols == o.cols && a == o.a;
}

LocalMat local_mul(const LocalMat& x, const LocalMat& y) {
  if (x.p != y.p || x.cols != y.rows) throw std::invalid_argument("local matrix shape mismatch");
  LocalMat out = LocalMat::zero(x.p, x.rows, y.cols);
  for (long r = 0; r < x.rows; ++r)
    for (long k = 0; k < x.cols; ++k) {
      if (x.at(r, k).is_zero()) continue;
      for (long c = 0; c < y.cols; ++c) {
        if (y.at(k, c).is_zero()) continue;
        out.at(r, c) = out.at(r, c) + x.at(r, k) * y.at(k, c);
      }
    }
  return out;
}

LocalMat LocalDiagonalForm::diagonal() const {
  LocalMat d = LocalMat::zero(p, rows, cols);
  for (std::size_t i = 0; i < exponents.size(); ++i)
    if (exponents[i] < p) d.at(static_cast<long>(i), static_cast<long>(i)) = LocalPoly::tau_power(p, exponents[i]);
  return d;
}

LocalDiagonalForm local_diagonalize(const LocalMat& m) {
  const int p = m.p;
  LocalDiagonalForm form;
  form.p = p;
  form.rows = m.rows;
  form.cols = m.cols;
  form.U = LocalMat::identity(p, m.rows);
  form.V = LocalMat::identity(p, m.cols);
  LocalMat w = m;

  const long steps = std::min(m.rows, m.cols);
  long t = 0;
  for (; t < steps; ++t) {
    // Global minimum valuation in the remaining block; ties row-major.
    long br = -1, bc = -1;
    int bv = p;
    for (long i = t; i < w.rows; ++i)
      for (long j = t; j < w.cols; ++j) {
        int v = w.at(i, j).valuation();
        if (v < bv) {
          bv = v;
          br = i;
          bc = j;
        }
      }
    if (br < 0) break;
    if (br != t) {
      for (long j = 0; j < w.cols; ++j) std::swap(w.at(t, j), w.at(br, j));
      for (long j = 0; j < form.U.cols; ++j) std::swap(form.U.at(t, j), form.U.at(br, j));
    }
    if (bc != t) {
      for (long i = 0; i < w.rows; ++i) std::swap(w.at(i, t), w.at(i, bc));
      for (long i = 0; i < form.V.rows; ++i) std::swap(form.V.at(i, t), form.V.at(i, bc));
    }
    // Scale the pivot row so the pivot becomes exactly tau^bv.
    LocalPoly unit_inv = w.at(t, t).shifted_down(bv).inverse();
    for (long j = 0; j < w.cols; ++j) w.at(t, j) = unit_inv * w.at(t, j);
    for (long j = 0; j < form.U.cols; ++j) form.U.at(t, j) = unit_inv * form.U.at(t, j);
    // All entries in the pivot row/column have valuation >= bv, so the
    // quotients below are exact.
    for (long i = t + 1; i < w.rows; ++i) {
      if (w.at(i, t).is_zero()) continue;
      LocalPoly f = w.at(i, t).shifted_down(bv);
      for (long j = 0; j < w.cols; ++j) w.at(i, j) = w.at(i, j) - f * w.at(t, j);
      for (long j = 0; j < form.U.cols; ++j) form.U.at(i, j) = form.U.at(i, j) - f * form.U.at(t, j);
    }
    for (long j = t + 1; j < w.cols; ++j) {
      if (w.at(t, j).is_zero()) continue;
      LocalPoly f = w.at(t, j).shifted_down(bv);
      for (long i = 0; i < w.rows; ++i) w.at(i, j) = w.at(i, j) - w.at(i, t) * f;
      for (long i = 0; i < form.V.rows; ++i) form.V.at(i, j) = form.V.at(i, j) - form.V.at(i, t) * f;
    }
    form.exponents.push_back(bv);
  }
  for (; t < steps; ++t) form.exponents.push_back(p);

  for (std::size_t i = 1; i < form.exponents.size(); ++i)
    if (form.exponents[i] < form.exponents[i - 1]) throw std::logic_error("diagonal exponents not sorted");
  if (!(local_mul(local_mul(form.U, m), form.V) == form.diagonal()))
    throw InvariantError("local diagonalization failed re-multiplication");
  return form;
}

LocalDims local_dims(const LocalDiagonalForm& form) {
  LocalDims d;
  const int p = form.p;
  for (int k : form.exponents) {
    d.im += p - k;
    d.ker += k;
    if (k == 0) ++d.im_bar;
  }
  d.ker += (form.rows - static_cast<long>(form.exponents.size())) * p;
  d.ker_bar = form.rows - d.im_bar;
  if (d.im < p * d.im_bar) throw InvariantError("image dimension bound violated");
  if (d.ker > p * d.ker_bar) throw InvariantError("kernel dimension bound violated");
  return d;
}

namespace {

struct OrbitData {
  long count = 0;
  std::vector<long> reps;
  std::vector<long> orbit_of;
  std::vector<int> pos_in_orbit;  // x = sigma^pos(rep)
};

OrbitData sigma_orbits(const Perm& sigma, int p) {
  const long m = static_cast<long>(sigma.size());
  OrbitData d;
  d.orbit_of.assign(m, -1);
  d.pos_in_orbit.assign(m, 0);
  for (long x = 0; x < m; ++x) {
    if (d.orbit_of[x] >= 0) continue;
    long id = d.count++;
    d.reps.push_back(x);
    long y = x;
    for (int j = 0; j < p; ++j) {
      if (d.orbit_of[y] >= 0) throw InvariantError("sigma orbit shorter than p");
      d.orbit_of[y] = id;
      d.pos_in_orbit[y] = j;
      y = sigma[y];
    }
    if (y != x) throw InvariantError("sigma orbit longer than p");
  }
  return d;
}

}  // namespace

LocalComplex regroup_as_local(const FlatComplex& fc, const Perm& sigma) {
  if (fc.ring.kind != CoefficientRing::Kind::prime_field)
    throw std::invalid_argument("regroup needs prime field coefficients");
  const int p = static_cast<int>(fc.ring.p);
  const long m = fc.index;
  if (static_cast<long>(sigma.size()) != m || !perm_is_valid(sigma))
    throw std::invalid_argument("sigma is not a permutation of the level points");
  if (perm_is_identity(sigma)) throw std::invalid_argument("sigma must be nontrivial");
  if (!perm_is_identity(perm_power(sigma, p))) throw InvariantError("sigma order does not divide p");
  for (long x = 0; x < m; ++x)
    if (sigma[x] == x) throw InvariantError("sigma has a fixed point");
  if (m % p != 0) throw InvariantError("level size not divisible by p");

  OrbitData od = sigma_orbits(sigma, p);
  LocalComplex lc;
  lc.p = p;
  lc.orbit_count = od.count;
  lc.orbit_reps = od.reps;
  for (long flat_rank : fc.ranks) lc.ranks.push_back(flat_rank / m * od.count);

  // Precompute sigma^j(rep) tables.
  std::vector<std::vector<long>> rep_pow(od.count, std::vector<long>(p));
  for (long o = 0; o < od.count; ++o) {
    long y = od.reps[o];
    for (int j = 0; j < p; ++j) {
      rep_pow[o][j] = y;
      y = sigma[y];
    }
  }

  for (std::size_t d = 0; d < fc.boundaries.size(); ++d) {
    const FlatMatrix& M = fc.boundaries[d];
    const long gr_rows = M.rows / m, gr_cols = M.cols / m;
    // T-basis coefficients first: cell (u,o),(v,o2) gets
    // coeff of T^j = M[(u, rep_o)][(v, sigma^j rep_o2)].
    std::vector<std::vector<int>> tcoeff(
        static_cast<std::size_t>(gr_rows * od.count) * (gr_cols * od.count), std::vector<int>());
    LocalMat R = LocalMat::zero(p, gr_rows * od.count, gr_cols * od.count);
    auto cell_index = [&](long rr, long cc) { return static_cast<std::size_t>(rr) * (gr_cols * od.count) + cc; };
    for (long u = 0; u < gr_rows; ++u) {
      for (long o = 0; o < od.count; ++o) {
        long flat_row = u * m + od.reps[o];
        for (const auto& [col, val] : M.row_data[flat_row]) {
          long v = col / m, y = col % m;
          long o2 = od.orbit_of[y];
          int j = od.pos_in_orbit[y];
          auto& cell = tcoeff[cell_index(u * od.count + o, v * od.count + o2)];
          if (cell.empty()) cell.assign(p, 0);
          long num = val.get_num().get_si() % p;
          if (num < 0) num += p;
          cell[j] = static_cast<int>(num);
        }
      }
    }
    // Equivariance: the cell data must reproduce every flat entry, including
    // the rows not built from orbit representatives.
    FlatMatrix expanded = FlatMatrix::zero(fc.ring, M.rows, M.cols);
    for (long u = 0; u < gr_rows; ++u)
      for (long o = 0; o < od.count; ++o)
        for (long v = 0; v < gr_cols; ++v)
          for (long o2 = 0; o2 < od.count; ++o2) {
            const auto& cell = tcoeff[cell_index(u * od.count + o, v * od.count + o2)];
            if (cell.empty()) continue;
            for (int a = 0; a < p; ++a)
              for (int b = 0; b < p; ++b) {
                int cval = cell[((b - a) % p + p) % p];
                if (cval != 0) expanded.set(u * m + rep_pow[o][a], v * m + rep_pow[o2][b], Rat(cval));
              }
          }
    if (!(expanded == M)) throw InvariantError("boundary is not sigma-equivariant");

    // Basis change T^j = (1 + tau)^j.
    std::vector<std::vector<int>> binom(p, std::vector<int>(p, 0));
    for (int i = 0; i < p; ++i) {
      binom[i][0] = 1;
      for (int j = 1; j <= i; ++j)
        binom[i][j] = ((j <= i - 1 ? binom[i - 1][j] : 0) + binom[i - 1][j - 1]) % p;
    }
    for (long rr = 0; rr < R.rows; ++rr)
      for (long cc = 0; cc < R.cols; ++cc) {
        const auto& cell = tcoeff[cell_index(rr, cc)];
        if (cell.empty()) continue;
        LocalPoly poly(p);
        for (int j = 0; j < p; ++j) {
          if (cell[j] == 0) continue;
          for (int l = 0; l <= j; ++l)
            poly.set_coeff(l, poly.coeff(l) + static_cast<long>(cell[j]) * binom[j][l]);
        }
        R.at(rr, cc) = poly;
      }
    lc.boundaries.push_back(std::move(R));
  }

  for (std::size_t d = 0; d < lc.boundaries.size(); ++d) {
    LocalDiagonalForm form = local_diagonalize(lc.boundaries[d]);
    LocalDims dims = local_dims(form);
    long flat_rank = rank_mod_prime(fc.boundaries[d], static_cast<std::uint64_t>(p));
    if (dims.im != flat_rank)
      throw InvariantError("local form rank disagrees with flat rank at boundary " + std::to_string(d + 1));
    lc.forms.push_back(std::move(form));
  }
  return lc;
}

MonotoneReport monotone_harness(const ChainComplexSpec& c, const Tower& tower, int degree, long p,
                                std::mt19937_64& rng) {
  (void)rng;
  if (degree < 0 || degree > c.top_degree()) throw InputError("degree out of range");
  if (!is_small_prime(p)) throw InputError("monotone harness needs prime p");
  MonotoneReport report;

  std::vector<FlatComplex> flats;
  std::vector<std::vector<long>> betti;
  for (const FiniteQuotient& quo : tower.levels) {
    FlatComplex fc = reduce_complex(c, quo, CoefficientRing::Fp(p));
    std::vector<long> b(fc.top_degree() + 2, 0);
    std::vector<long> rk(fc.top_degree() + 2, 0);
    for (int q = 1; q <= fc.top_degree(); ++q)
      rk[q] = rank_mod_prime(fc.boundaries[q - 1], static_cast<std::uint64_t>(p));
    for (int q = 0; q <= fc.top_degree(); ++q) b[q] = fc.ranks[q] - rk[q] - rk[q + 1];
    betti.push_back(b);
    flats.push_back(std::move(fc));
  }

  for (std::size_t i = 0; i < tower.levels.size(); ++i) {
    MonotoneReport::Row row;
    row.level = static_cast<int>(i) + 1;
    row.label = tower.levels[i].label;
    row.index = tower.levels[i].order;
    row.betti = betti[i][degree];
    row.normalized = make_rat(Int(row.betti), Int(row.index));
    if (i > 0) {
      long ratio_rem = tower.levels[i].order % tower.levels[i - 1].order;
      long ratio = tower.levels[i].order / tower.levels[i - 1].order;
      if (ratio_rem != 0) throw InputError("tower indices do not divide at level " + std::to_string(i + 1));
      long r = ratio;
      while (r % p == 0) r /= p;
      if (r != 1) throw InputError("non-p-power index ratio at level " + std::to_string(i + 1));
      Rat diff = row.normalized - report.rows.back().normalized;
      row.delta_sign = diff > 0 ? 1 : (diff < 0 ? -1 : 0);
      if (row.delta_sign > 0) report.monotone_ok = false;
      row.ratio_p_step = ratio == p;
    }
    report.rows.push_back(std::move(row));
  }

  if (tower.has_maps()) {
    for (std::size_t i = 0; i + 1 < tower.levels.size(); ++i) {
      if (!report.rows[i + 1].ratio_p_step) continue;
      const std::vector<int>& f = tower.maps[i];
      long x0 = -1;
      for (std::size_t x = 1; x < f.size(); ++x)
        if (f[x] == 0) {
          x0 = static_cast<long>(x);
          break;
        }
      try {
        if (x0 < 0) throw InvariantError("ratio-p step has trivial kernel");
        std::vector<Perm> elems = enumerate_elements(tower.levels[i + 1]);
        LocalComplex lc = regroup_as_local(flats[i + 1], elems[x0]);
        // Betti numbers of both neighbouring levels from the R-form alone.
        auto dims_at = [&](int q) -> LocalDims {
          return local_dims(lc.forms[q - 1]);
        };
        int top = flats[i + 1].top_degree();
        auto check_level = [&](bool coarse) {
          for (int q = 0; q <= top; ++q) {
            long ker_q, im_q1;
            if (coarse) {
              ker_q = q >= 1 ? dims_at(q).ker_bar : lc.ranks[0];
              im_q1 = q + 1 <= top ? dims_at(q + 1).im_bar : 0;
            } else {
              ker_q = q >= 1 ? dims_at(q).ker : lc.ranks[0] * p;
              im_q1 = q + 1 <= top ? dims_at(q + 1).im : 0;
            }
            long expect = coarse ? betti[i][q] : betti[i + 1][q];
            if (ker_q - im_q1 != expect)
              throw InvariantError("local form Betti mismatch at degree " + std::to_string(q));
          }
        };
        check_level(false);
        check_level(true);
        if (betti[i + 1][degree] > p * betti[i][degree])
          throw InvariantError("betti exceeded p times the coarser level");
        report.rows[i + 1].regroup_checked = true;
      } catch (const InvariantError&) {
        report.regroup_ok = false;
      }
    }
  }
  return report;
}

}  // namespace towerlab
