#include "towerlab/reduction.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace towerlab {

FlatMatrix FlatMatrix::zero(const CoefficientRing& ring, long rows, long cols) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("negative matrix shape");
  FlatMatrix m;
  m.ring = ring;
  m.rows = rows;
  m.cols = cols;
  m.row_data.assign(rows, {});
  return m;
}

FlatMatrix FlatMatrix::identity(const CoefficientRing& ring, long n) {
  FlatMatrix m = zero(ring, n, n);
  for (long i = 0; i < n; ++i) m.row_data[i].emplace_back(i, Rat(1));
  return m;
}

void FlatMatrix::set(long r, long c, const Rat& v) {
  if (r < 0 || r >= rows || c < 0 || c >= cols) throw std::invalid_argument("flat index out of range");
  auto& row = row_data[r];
  auto it = std::lower_bound(row.begin(), row.end(), c,
                             [](const std::pair<long, Rat>& e, long col) { return e.first < col; });
  if (it != row.end() && it->first == c) {
    if (v == 0)
      row.erase(it);
    else
      it->second = v;
  } else if (v != 0) {
    row.insert(it, {c, v});
  }
}

Rat FlatMatrix::get(long r, long c) const {
  const auto& row = row_data.at(r);
  auto it = std::lower_bound(row.begin(), row.end(), c,
                             [](const std::pair<long, Rat>& e, long col) { return e.first < col; });
  return it != row.end() && it->first == c ? it->second : Rat(0);
}

long FlatMatrix::nnz() const {
  long n = 0;
  for (const auto& row : row_data) n += static_cast<long>(row.size());
  return n;
}

bool FlatMatrix::operator==(const FlatMatrix& o) const {
  return ring == o.ring && rows == o.rows && cols == o.cols && row_data == o.row_data;
}

FlatMatrix flat_transpose(const FlatMatrix& a) {
  FlatMatrix t = FlatMatrix::zero(a.ring, a.cols, a.rows);
  for (long r = 0; r < a.rows; ++r)
    for (const auto& [c, v] : a.row_data[r]) t.row_data[c].emplace_back(r, v);
  return t;  // column order within rows is already sorted by construction
}

namespace {

Rat field_normalize(const Rat& v, const CoefficientRing& ring) {
  if (ring.kind != CoefficientRing::Kind::prime_field) return v;
  if (v.get_den() % ring.p == 0) throw InputError("denominator not invertible mod " + std::to_string(ring.p));
  Int num = v.get_num() % ring.p;
  if (num < 0) num += ring.p;
  if (v.get_den() == 1) return Rat(num);
  Int den = v.get_den() % ring.p;
  Int dinv = 1, base = den, e = ring.p - 2;
  while (e > 0) {
    if (mpz_tstbit(e.get_mpz_t(), 0)) dinv = dinv * base % ring.p;
    base = base * base % ring.p;
    e >>= 1;
  }
  return Rat(num * dinv % ring.p);
}

}  // namespace

FlatMatrix flat_mul(const FlatMatrix& a, const FlatMatrix& b) {
  if (!(a.ring == b.ring)) throw std::invalid_argument("flat ring mismatch");
  if (a.cols != b.rows) throw std::invalid_argument("flat shape mismatch");
  FlatMatrix out = FlatMatrix::zero(a.ring, a.rows, b.cols);
  for (long r = 0; r < a.rows; ++r) {
    std::map<long, Rat> acc;
    for (const auto& [k, v] : a.row_data[r])
      for (const auto& [c, w] : b.row_data[k]) acc[c] += v * w;
    auto& row = out.row_data[r];
    for (auto& [c, v] : acc) {
      Rat nv = field_normalize(v, a.ring);
      if (nv != 0) row.emplace_back(c, nv);
    }
  }
  return out;
}

FlatMatrix flat_add(const FlatMatrix& a, const FlatMatrix& b) {
  if (!(a.ring == b.ring) || a.rows != b.rows || a.cols != b.cols)
    throw std::invalid_argument("flat shape mismatch");
  FlatMatrix out = FlatMatrix::zero(a.ring, a.rows, a.cols);
  for (long r = 0; r < a.rows; ++r) {
    std::map<long, Rat> acc;
    for (const auto& [c, v] : a.row_data[r]) acc[c] += v;
    for (const auto& [c, v] : b.row_data[r]) acc[c] += v;
    for (auto& [c, v] : acc) {
      Rat nv = field_normalize(v, a.ring);
      if (nv != 0) out.row_data[r].emplace_back(c, nv);
    }
  }
  return out;
}

Rat flat_trace(const FlatMatrix& a) {
  if (a.rows != a.cols) throw std::invalid_argument("trace of non-square matrix");
  Rat sum = 0;
  for (long i = 0; i < a.rows; ++i) sum += a.get(i, i);
  return field_normalize(sum, a.ring);
}

Rat map_coefficient(const Rat& v, const CoefficientRing& from, const CoefficientRing& to) {
  using K = CoefficientRing::Kind;
  switch (to.kind) {
    case K::integers:
      if (from.kind != K::integers) throw InputError("no coefficient map " + from.str() + " -> Z");
      return v;
    case K::rationals:
      if (from.kind == K::prime_field) throw InputError("no coefficient map " + from.str() + " -> Q");
      return v;
    case K::prime_field:
      if (from.kind == K::prime_field && from.p != to.p)
        throw InputError("no coefficient map " + from.str() + " -> " + to.str());
      return field_normalize(v, to);
  }
  throw std::logic_error("unreachable");
}

FlatMatrix reduce_matrix(const GroupRingMatrix& a, const FiniteQuotient& q, const CoefficientRing& target) {
  const long m = q.order;
  FlatMatrix out = FlatMatrix::zero(target, a.rows() * m, a.cols() * m);
  std::vector<std::map<long, Rat>> acc(out.rows);
  for (long r = 0; r < a.rows(); ++r) {
    for (long c = 0; c < a.cols(); ++c) {
      for (const auto& [g, coeff] : a.at(r, c).terms()) {
        Rat mapped = map_coefficient(coeff, a.ring(), target);
        Perm perm = quotient_image(g, q);
        for (long j = 0; j < m; ++j) acc[r * m + perm[j]][c * m + j] += mapped;
      }
    }
  }
  for (long i = 0; i < out.rows; ++i) {
    for (auto& [c, v] : acc[i]) {
      Rat nv = field_normalize(v, target);
      if (nv != 0) out.row_data[i].emplace_back(c, nv);
    }
  }
  return out;
}

FlatComplex reduce_complex(const ChainComplexSpec& c, const FiniteQuotient& q, const CoefficientRing& target) {
  FlatComplex fc;
  fc.ring = target;
  fc.index = q.order;
  for (long n : c.ranks) fc.ranks.push_back(n * q.order);
  for (int d = 1; d <= c.top_degree(); ++d) fc.boundaries.push_back(reduce_matrix(c.boundary(d), q, target));
  return fc;
}

namespace {

struct PrimeDividesDenominator : std::runtime_error {
  PrimeDividesDenominator() : std::runtime_error("prime divides a denominator") {}
};

std::uint64_t residue_mod(const Rat& v, std::uint64_t p) {
  Int num = v.get_num() % static_cast<unsigned long>(p);
  if (num < 0) num += static_cast<unsigned long>(p);
  std::uint64_t n = num.get_ui();
  if (v.get_den() == 1) return n;
  std::uint64_t d = mpz_fdiv_ui(v.get_den().get_mpz_t(), static_cast<unsigned long>(p));
  if (d == 0) throw PrimeDividesDenominator();
  return mulmod_u64(n, invmod_u64(d, p), p);
}

// Sparse Gaussian elimination mod p with a Markowitz-flavored pivot rule:
// pivot row of minimal length, pivot column of minimal occupancy within it.
struct SparseEliminator {
  std::uint64_t p;
  long cols;
  std::vector<std::vector<std::pair<long, std::uint64_t>>> rows;
  std::vector<char> active;
  std::vector<long> col_count;
  std::vector<std::vector<int>> col_rows;  // candidate lists, lazily cleaned

  explicit SparseEliminator(const FlatMatrix& a, std::uint64_t p_) : p(p_), cols(a.cols) {
    rows.reserve(a.rows);
    col_count.assign(cols, 0);
    col_rows.assign(cols, {});
    for (long r = 0; r < a.rows; ++r) {
      std::vector<std::pair<long, std::uint64_t>> row;
      for (const auto& [c, v] : a.row_data[r]) {
        std::uint64_t res = residue_mod(v, p);
        if (res != 0) row.emplace_back(c, res);
      }
      for (const auto& [c, v] : row) {
        ++col_count[c];
        col_rows[c].push_back(static_cast<int>(rows.size()));
      }
      rows.push_back(std::move(row));
    }
    active.assign(rows.size(), 1);
  }

  bool row_has(int rid, long c, std::uint64_t* val) const {
    const auto& row = rows[rid];
    auto it = std::lower_bound(row.begin(), row.end(), c,
                               [](const std::pair<long, std::uint64_t>& e, long col) { return e.first < col; });
    if (it == row.end() || it->first != c) return false;
    *val = it->second;
    return true;
  }

  // target -= f * pivot_row (mod p), maintaining column bookkeeping.
  void axpy(int target, const std::vector<std::pair<long, std::uint64_t>>& pivot_row, std::uint64_t f) {
    std::vector<std::pair<long, std::uint64_t>> merged;
    merged.reserve(rows[target].size() + pivot_row.size());
    auto a = rows[target].begin(), ae = rows[target].end();
    auto b = pivot_row.begin(), be = pivot_row.end();
    while (a != ae || b != be) {
      if (b == be || (a != ae && a->first < b->first)) {
        merged.push_back(*a++);
      } else if (a == ae || b->first < a->first) {
        std::uint64_t nv = p - mulmod_u64(f, b->second, p);
        if (nv == p) nv = 0;
        if (nv != 0) {
          merged.emplace_back(b->first, nv);
          ++col_count[b->first];
          col_rows[b->first].push_back(target);
        }
        ++b;
      } else {
        std::uint64_t sub = mulmod_u64(f, b->second, p);
        std::uint64_t nv = a->second >= sub ? a->second - sub : a->second + p - sub;
        if (nv != 0) {
          merged.emplace_back(a->first, nv);
        } else {
          --col_count[a->first];
        }
        ++a;
        ++b;
      }
    }
    rows[target] = std::move(merged);
  }

  long run() {
    long rank = 0;
    for (;;) {
      int best = -1;
      std::size_t best_len = 0;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (!active[r]) continue;
        if (rows[r].empty()) {
          active[r] = 0;
          continue;
        }
        if (best < 0 || rows[r].size() < best_len) {
          best = static_cast<int>(r);
          best_len = rows[r].size();
          if (best_len == 1) break;
        }
      }
      if (best < 0) return rank;
      long pivot_col = -1;
      long occupancy = 0;
      std::uint64_t pivot_val = 0;
      for (const auto& [c, v] : rows[best]) {
        if (pivot_col < 0 || col_count[c] < occupancy) {
          pivot_col = c;
          occupancy = col_count[c];
          pivot_val = v;
        }
      }
      std::uint64_t pinv = invmod_u64(pivot_val, p);
      std::vector<int> candidates;
      candidates.swap(col_rows[pivot_col]);
      std::vector<std::pair<long, std::uint64_t>> pivot_row = rows[best];
      for (int rid : candidates) {
        if (rid == best || !active[rid]) continue;
        std::uint64_t v;
        if (!row_has(rid, pivot_col, &v)) continue;  // stale candidate
        axpy(rid, pivot_row, mulmod_u64(v, pinv, p));
      }
      active[best] = 0;
      for (const auto& [c, v] : pivot_row) --col_count[c];
      ++rank;
    }
  }
};

}  // namespace

long rank_mod_prime(const FlatMatrix& a, std::uint64_t p) {
  if (p < 2 || p >= (1ull << 62)) throw std::invalid_argument("rank_mod_prime needs 2 <= p < 2^62");
  if (a.rows == 0 || a.cols == 0) return 0;
  try {
    SparseEliminator e(a, p);
    return e.run();
  } catch (const PrimeDividesDenominator&) {
    throw InputError("denominator not invertible mod " + std::to_string(p));
  }
}

long rank_bareiss(const FlatMatrix& a) {
  if (a.rows == 0 || a.cols == 0) return 0;
  // Clear denominators rowwise (does not change the rank), then fraction-free
  // elimination: all divisions below are exact.
  std::vector<std::vector<Int>> m(a.rows, std::vector<Int>(a.cols, Int(0)));
  for (long r = 0; r < a.rows; ++r) {
    Int l = 1;
    for (const auto& [c, v] : a.row_data[r]) l = lcm(l, v.get_den());
    for (const auto& [c, v] : a.row_data[r]) m[r][c] = v.get_num() * (l / v.get_den());
  }
  long rank = 0;
  Int prev = 1;
  long rows = a.rows, cols = a.cols;
  std::vector<long> col_of(cols);
  for (long i = 0; i < cols; ++i) col_of[i] = i;
  for (long k = 0; k < std::min(rows, cols); ++k) {
    long pr = -1, pc = -1;
    for (long i = k; i < rows && pr < 0; ++i)
      for (long j = k; j < cols; ++j)
        if (m[i][col_of[j]] != 0) {
          pr = i;
          pc = j;
          break;
        }
    if (pr < 0) break;
    std::swap(m[k], m[pr]);
    std::swap(col_of[k], col_of[pc]);
    for (long i = k + 1; i < rows; ++i) {
      for (long j = k + 1; j < cols; ++j) {
        Int num = m[i][col_of[j]] * m[k][col_of[k]] - m[i][col_of[k]] * m[k][col_of[j]];
        mpz_divexact(m[i][col_of[j]].get_mpz_t(), num.get_mpz_t(), prev.get_mpz_t());
      }
      m[i][col_of[k]] = 0;
    }
    prev = m[k][col_of[k]];
    ++rank;
  }
  return rank;
}

long rank_over_Q(const FlatMatrix& a, std::mt19937_64& rng) {
  if (a.rows == 0 || a.cols == 0) return 0;
  for (int attempt = 0; attempt < 4; ++attempt) {
    std::uint64_t p1 = random_prime_60bit(rng);
    std::uint64_t p2 = random_prime_60bit(rng);
    while (p2 == p1) p2 = random_prime_60bit(rng);
    try {
      long r1 = rank_mod_prime(a, p1);
      long r2 = rank_mod_prime(a, p2);
      if (r1 == r2) return r1;
    } catch (const InputError&) {
      continue;  // a denominator hit one of the primes; redraw
    }
  }
  return rank_bareiss(a);
}

long rank_over_field(const FlatMatrix& a, const CoefficientRing& field, std::mt19937_64& rng) {
  switch (field.kind) {
    case CoefficientRing::Kind::rationals:
      return rank_over_Q(a, rng);
    case CoefficientRing::Kind::prime_field:
      return rank_mod_prime(a, static_cast<std::uint64_t>(field.p));
    case CoefficientRing::Kind::integers:
      break;
  }
  throw std::invalid_argument("rank_over_field needs Q or F_p");
}

std::vector<long> flat_betti(const FlatComplex& fc, std::mt19937_64& rng) {
  if (!fc.ring.is_field()) throw std::invalid_argument("flat_betti needs field coefficients");
  int top = fc.top_degree();
  std::vector<long> rk(top + 2, 0);
  for (int q = 1; q <= top; ++q) rk[q] = rank_over_field(fc.boundaries[q - 1], fc.ring, rng);
  std::vector<long> b(top + 1);
  for (int q = 0; q <= top; ++q) b[q] = fc.ranks[q] - rk[q] - rk[q + 1];
  return b;
}

std::vector<long> betti_numbers(const ChainComplexSpec& c, const FiniteQuotient& q, const CoefficientRing& field,
                                std::mt19937_64& rng) {
  FlatComplex fc = reduce_complex(c, q, field);
  return flat_betti(fc, rng);
}

std::vector<Int> smith_normal_form(const FlatMatrix& a) {
  std::vector<std::vector<Int>> m(a.rows, std::vector<Int>(a.cols, Int(0)));
  for (long r = 0; r < a.rows; ++r) {
    for (const auto& [c, v] : a.row_data[r]) {
      if (v.get_den() != 1) throw std::invalid_argument("smith_normal_form needs integer entries");
      m[r][c] = v.get_num();
    }
  }
  long rows = a.rows, cols = a.cols;
  long t = 0;
  while (t < rows && t < cols) {
    // Smallest |entry| in the remaining block as pivot.
    long pr = -1, pc = -1;
    for (long i = t; i < rows; ++i)
      for (long j = t; j < cols; ++j)
        if (m[i][j] != 0 && (pr < 0 || mpz_cmpabs(m[i][j].get_mpz_t(), m[pr][pc].get_mpz_t()) < 0)) {
          pr = i;
          pc = j;
        }
    if (pr < 0) break;
    std::swap(m[t], m[pr]);
    for (long i = 0; i < rows; ++i) std::swap(m[i][t], m[i][pc]);
    for (;;) {
      if (m[t][t] < 0)
        for (long j = t; j < cols; ++j) m[t][j] = -m[t][j];
      bool touched = false;
      for (long i = t + 1; i < rows; ++i) {
        if (m[i][t] == 0) continue;
        Int q = m[i][t] / m[t][t];  // truncated; remainder strictly smaller in abs
        if (q != 0)
          for (long j = t; j < cols; ++j) m[i][j] -= q * m[t][j];
        if (m[i][t] != 0) {
          std::swap(m[t], m[i]);
          touched = true;
          break;
        }
      }
      if (touched) continue;
      for (long j = t + 1; j < cols; ++j) {
        if (m[t][j] == 0) continue;
        Int q = m[t][j] / m[t][t];
        if (q != 0)
          for (long i = t; i < rows; ++i) m[i][j] -= q * m[i][t];
        if (m[t][j] != 0) {
          for (long i = t; i < rows; ++i) std::swap(m[i][t], m[i][j]);
          touched = true;
          break;
        }
      }
      if (touched) continue;
      // Row and column are clear; enforce divisibility into the rest.
      bool fixed = false;
      for (long i = t + 1; i < rows && !fixed; ++i)
        for (long j = t + 1; j < cols && !fixed; ++j)
          if (m[i][j] % m[t][t] != 0) {
            for (long jj = t; jj < cols; ++jj) m[t][jj] += m[i][jj];
            fixed = true;
          }
      if (!fixed) break;
    }
    ++t;
  }
  std::vector<Int> divisors;
  for (long k = 0; k < t; ++k) divisors.push_back(abs(m[k][k]));
  for (std::size_t k = 1; k < divisors.size(); ++k)
    if (divisors[k] % divisors[k - 1] != 0) throw std::logic_error("smith_normal_form: broken divisor chain");
  return divisors;
}

TraceResult finite_trace(const GroupRingMatrix& a, const FiniteQuotient& q) {
  if (a.rows() != a.cols()) throw std::invalid_argument("finite_trace needs a square matrix");
  TraceResult t;
  t.via_reduction = flat_trace(reduce_matrix(a, q, a.ring()));
  Rat kernel_sum = 0;
  for (long i = 0; i < a.rows(); ++i)
    for (const auto& [g, c] : a.at(i, i).terms())
      if (perm_is_identity(quotient_image(g, q))) kernel_sum += c;
  t.via_formula = map_coefficient(kernel_sum * q.order, a.ring(), a.ring());
  return t;
}

BettiTable build_betti_table(const ChainComplexSpec& c, const Tower& tower, const std::vector<int>& degrees,
                             bool with_Q, const std::vector<long>& primes, std::mt19937_64& rng) {
  BettiTable t;
  t.degrees = degrees;
  t.primes = primes;
  t.with_Q = with_Q;
  for (int q : degrees)
    if (q < 0 || q > c.top_degree()) throw InputError("betti degree " + std::to_string(q) + " out of range");
  for (std::size_t i = 0; i < tower.levels.size(); ++i) {
    const FiniteQuotient& quo = tower.levels[i];
    BettiTable::Row row;
    row.level = static_cast<int>(i) + 1;
    row.label = quo.label;
    row.index = quo.order;
    if (with_Q) {
      std::vector<long> b = betti_numbers(c, quo, CoefficientRing::Q(), rng);
      for (int q : degrees) {
        row.b_Q.push_back(b[q]);
        row.norm_Q.push_back(make_rat(Int(b[q]), Int(quo.order)));
      }
    }
    for (long p : primes) {
      std::vector<long> b = betti_numbers(c, quo, CoefficientRing::Fp(p), rng);
      std::vector<long> bq;
      std::vector<Rat> nq;
      for (int q : degrees) {
        bq.push_back(b[q]);
        nq.push_back(make_rat(Int(b[q]), Int(quo.order)));
      }
      row.b_Fp.push_back(std::move(bq));
      row.norm_Fp.push_back(std::move(nq));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string betti_table_csv(const BettiTable& t) {
  std::ostringstream out;
  out << "level,index";
  if (t.with_Q)
    for (int q : t.degrees) out << ",b" << q << "_Q";
  for (long p : t.primes)
    for (int q : t.degrees) out << ",b" << q << "_F" << p;
  if (t.with_Q)
    for (int q : t.degrees) out << ",norm_b" << q << "_Q";
  for (long p : t.primes)
    for (int q : t.degrees) out << ",norm_b" << q << "_F" << p;
  out << "\n";
  for (const auto& row : t.rows) {
    out << row.level << "," << row.index;
    if (t.with_Q)
      for (long b : row.b_Q) out << "," << b;
    for (const auto& bp : row.b_Fp)
      for (long b : bp) out << "," << b;
    if (t.with_Q)
      for (const Rat& r : row.norm_Q) out << "," << rat_str(r);
    for (const auto& np : row.norm_Fp)
      for (const Rat& r : np) out << "," << rat_str(r);
    out << "\n";
  }
  return out.str();
}

}  // namespace towerlab
