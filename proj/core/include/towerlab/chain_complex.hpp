#pragma once

#include <string>
#include <vector>

#include "towerlab/group_ring.hpp"

namespace towerlab {

// Finite free chain complex over the group ring. Chains are row vectors;
// boundary q maps degree q to q-1 via v -> v * A_q, so A_q has shape
// n_q x n_(q-1) and the chain condition reads A_(q+1) * A_q = 0.
struct ChainComplexSpec {
  GroupModelSpec model;
  CoefficientRing ring;
  std::vector<long> ranks;                 // n_0 .. n_Q
  std::vector<GroupRingMatrix> boundaries;  // A_1 .. A_Q

  int top_degree() const { return static_cast<int>(ranks.size()) - 1; }
  const GroupRingMatrix& boundary(int q) const;  // A_q, 1 <= q <= top_degree
  GroupRingMatrix& boundary(int q);
};

struct ComplexValidation {
  bool ok = false;
  int degree = -1;      // first degree q with A_(q+1) * A_q != 0, if any
  std::string message;
};

// Checks shapes and that all composites vanish.
ComplexValidation validate_complex(const ChainComplexSpec& c);

// S^1 as a Z-CW structure on the circle: ranks (1, 1), A_1 = (t - 1).
ChainComplexSpec circle_complex();

// Wedge of d circles, universal cover of the rose: ranks (1, d),
// A_1 = column of (x_j - 1).
ChainComplexSpec wedge_complex(int d);

// n-torus via the Koszul complex on t_1..t_n: rank C(n, q) in degree q,
// boundary e_S -> sum_j (-1)^(j+1) (t_(s_j) - 1) e_(S \ s_j).
ChainComplexSpec torus_complex(int n);

// Rank-1 cells in degrees 0, 1, d, d+1 over Z[t]: A_1 = (t - 1),
// middle boundaries zero, A_(d+1) = (p). Its degree-d homology has p-torsion
// visible over F_p but not over Q.
ChainComplexSpec lls_complex(int d, long p);

// Dispatch by name for config files: circle | wedge_of_circles | wedge |
// torus | lls_example | lls, with numeric params.
ChainComplexSpec builtin_complex(const std::string& name, const std::vector<long>& params);

// Degree-q Laplacian A_q star(A_q) + star(A_(q+1)) A_(q+1); edge degrees drop
// the absent term. Always n_q x n_q, star-invariant.
GroupRingMatrix complex_laplacian(const ChainComplexSpec& c, int q);

}  // namespace towerlab
