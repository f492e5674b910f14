#pragma once

#include <random>
#include <string>
#include <vector>

#include "towerlab/chain_complex.hpp"
#include "towerlab/group.hpp"

namespace towerlab {

// Sparse matrix over Z, Q, or F_p (canonical residues). Row-major adjacency,
// each row sorted by column, no explicit zeros.
struct FlatMatrix {
  CoefficientRing ring;
  long rows = 0, cols = 0;
  std::vector<std::vector<std::pair<long, Rat>>> row_data;

  static FlatMatrix zero(const CoefficientRing& ring, long rows, long cols);
  static FlatMatrix identity(const CoefficientRing& ring, long n);

  void set(long r, long c, const Rat& v);  // overwrite one entry
  Rat get(long r, long c) const;
  long nnz() const;
  bool operator==(const FlatMatrix& o) const;
};

FlatMatrix flat_transpose(const FlatMatrix& a);
FlatMatrix flat_mul(const FlatMatrix& a, const FlatMatrix& b);
FlatMatrix flat_add(const FlatMatrix& a, const FlatMatrix& b);
Rat flat_trace(const FlatMatrix& a);

// Ring maps allowed for reduction targets: Z -> Z/Q/F_p, Q -> Q, Q -> F_p when
// every denominator is prime to p, F_p -> F_p.
Rat map_coefficient(const Rat& v, const CoefficientRing& from, const CoefficientRing& to);

// Right multiplication on C[Q]^cols: each term c * g of each entry contributes
// c times the permutation matrix of quotient_image(g) (column convention,
// P[i][j] = 1 iff i = g.j). Block (r, c) occupies rows r*m.., cols c*m..;
// multiplicative in the matrix and star becomes transpose.
FlatMatrix reduce_matrix(const GroupRingMatrix& a, const FiniteQuotient& q, const CoefficientRing& target);

// A whole complex pushed through one quotient.
struct FlatComplex {
  CoefficientRing ring;
  long index = 1;  // [G : G_i] = quotient order
  std::vector<long> ranks;  // flat ranks n_q * index
  std::vector<FlatMatrix> boundaries;

  int top_degree() const { return static_cast<int>(ranks.size()) - 1; }
};

FlatComplex reduce_complex(const ChainComplexSpec& c, const FiniteQuotient& q, const CoefficientRing& target);

// Exact rank over F_p by sparse elimination with a fill-reducing pivot rule.
// p may be any prime fitting in 62 bits; denominators must be prime to p.
long rank_mod_prime(const FlatMatrix& a, std::uint64_t p);

// Rank over Q: computed modulo two independently drawn random primes > 2^60
// and accepted when they agree; disagreement redraws, then falls back to the
// exact fraction-free engine.
long rank_over_Q(const FlatMatrix& a, std::mt19937_64& rng);

// Exact rank by Bareiss fraction-free elimination over Z (rows pre-scaled to
// clear denominators). Slow; used as an independent oracle.
long rank_bareiss(const FlatMatrix& a);

// field must be Q or F_p.
long rank_over_field(const FlatMatrix& a, const CoefficientRing& field, std::mt19937_64& rng);

// b_q = n_q * [G:G_i] - rank A_q - rank A_(q+1) for all degrees at once.
std::vector<long> flat_betti(const FlatComplex& fc, std::mt19937_64& rng);

std::vector<long> betti_numbers(const ChainComplexSpec& c, const FiniteQuotient& q, const CoefficientRing& field,
                                std::mt19937_64& rng);

// Elementary divisors d_1 | d_2 | ... | d_r (positive, including 1s) of an
// integer matrix. Dense; intended for the torsion oracle, not the hot path.
std::vector<Int> smith_normal_form(const FlatMatrix& a);

// Both evaluation routes for the trace of the reduced matrix: literal trace
// of reduce_matrix(a), and [G:G_i] * (sum over diagonal entries of the
// coefficients of quotient-kernel elements). They must agree.
struct TraceResult {
  Rat via_reduction;
  Rat via_formula;
};

TraceResult finite_trace(const GroupRingMatrix& a, const FiniteQuotient& q);

// Betti numbers across a tower, over Q and/or several prime fields, with
// exact normalized values.
struct BettiTable {
  struct Row {
    int level = 0;  // 1-based position in the tower
    std::string label;
    long index = 0;
    std::vector<long> b_Q;                           // per requested degree; empty if Q not requested
    std::vector<std::vector<long>> b_Fp;             // [prime][degree]
    std::vector<Rat> norm_Q;
    std::vector<std::vector<Rat>> norm_Fp;
  };
  std::vector<int> degrees;
  std::vector<long> primes;
  bool with_Q = true;
  std::vector<Row> rows;
};

BettiTable build_betti_table(const ChainComplexSpec& c, const Tower& tower, const std::vector<int>& degrees,
                             bool with_Q, const std::vector<long>& primes, std::mt19937_64& rng);

std::string betti_table_csv(const BettiTable& t);

}  // namespace towerlab
