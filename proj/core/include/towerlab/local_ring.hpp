#pragma once

#include <string>
#include <vector>

#include "towerlab/reduction.hpp"

namespace towerlab {

// Element of R = F_p[tau] / (tau^p), the group algebra F_p[Z/p] with
// tau = T - 1 for a generator T. Coefficients are canonical residues.
class LocalPoly {
 public:
  LocalPoly() = default;
  explicit LocalPoly(int p) : p_(p), c_(p, 0) {}
  static LocalPoly tau_power(int p, int k);  // tau^k, k in [0, p)
  static LocalPoly constant(int p, long v);

  int p() const { return p_; }
  const std::vector<int>& coeffs() const { return c_; }
  int coeff(int i) const { return c_[i]; }
  void set_coeff(int i, long v);

  bool is_zero() const;
  // Index of the lowest nonzero tau power; p for the zero element.
  int valuation() const;
  bool is_unit() const { return !c_.empty() && c_[0] != 0; }

  LocalPoly operator+(const LocalPoly& o) const;
  LocalPoly operator-(const LocalPoly& o) const;
  LocalPoly operator*(const LocalPoly& o) const;
  bool operator==(const LocalPoly& o) const { return p_ == o.p_ && c_ == o.c_; }

  LocalPoly inverse() const;              // units only
  LocalPoly shifted_down(int k) const;    // exact division by tau^k

 private:
  int p_ = 0;
  std::vector<int> c_;
};

struct LocalMat {
  int p = 0;
  long rows = 0, cols = 0;
  std::vector<LocalPoly> a;

  static LocalMat zero(int p, long rows, long cols);
  static LocalMat identity(int p, long n);
  LocalPoly& at(long r, long c) { return a[static_cast<std::size_t>(r) * cols + c]; }
  const LocalPoly& at(long r, long c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
  bool operator==(const LocalMat& o) const;
};

LocalMat local_mul(const LocalMat& x, const LocalMat& y);

// U * M * V = D with D diagonal of tau powers, exponents non-decreasing;
// k = p encodes a zero diagonal entry. U, V are products of elementary
// operations, hence invertible. Verified by re-multiplication on return.
struct LocalDiagonalForm {
  int p = 0;
  long rows = 0, cols = 0;
  std::vector<int> exponents;  // length min(rows, cols)
  LocalMat U, V;

  LocalMat diagonal() const;
};

LocalDiagonalForm local_diagonalize(const LocalMat& m);

// F_p dimensions of the map R^rows -> R^cols (row convention) and of its
// reduction mod tau. The containments dim im >= p * dim im_bar and
// dim ker <= p * dim ker_bar always hold and are asserted.
struct LocalDims {
  long im = 0, ker = 0;
  long im_bar = 0, ker_bar = 0;
};

LocalDims local_dims(const LocalDiagonalForm& form);

// A flat F_p complex at a level whose deck group contains a central order-p
// element sigma, rewritten as a complex of R-modules: sigma-orbits of points
// become free R-summands. Boundary entries are checked to be sigma-equivariant
// by exact re-expansion, and the F_p rank of each original boundary must match
// the diagonal form of its R-matrix.
struct LocalComplex {
  int p = 0;
  long orbit_count = 0;
  std::vector<long> ranks;  // R-ranks per degree
  std::vector<LocalMat> boundaries;
  std::vector<long> orbit_reps;
  std::vector<LocalDiagonalForm> forms;  // one per boundary
};

LocalComplex regroup_as_local(const FlatComplex& fc, const Perm& sigma);

// Normalized mod-p Betti numbers along a tower, with the non-increase
// assertion and, on index-ratio-p steps with compatibility maps, the
// local-ring cross-checks.
struct MonotoneReport {
  struct Row {
    int level;
    std::string label;
    long index;
    long betti;
    Rat normalized;
    int delta_sign = 0;        // sign of normalized change vs previous level; 0 at level 1
    bool ratio_p_step = false;  // this level is a ratio-p refinement of the previous
    bool regroup_checked = false;
  };
  std::vector<Row> rows;
  bool monotone_ok = true;
  bool regroup_ok = true;
};

MonotoneReport monotone_harness(const ChainComplexSpec& c, const Tower& tower, int degree, long p,
                                std::mt19937_64& rng);

}  // namespace towerlab
