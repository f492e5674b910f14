#pragma once

#include <optional>
#include <string>
#include <vector>

#include "towerlab/reduction.hpp"

namespace towerlab {

// Eigenvalue-counting measure of one reduced Laplacian. Positive atoms carry
// float eigenvalues with integer cluster counts; the atom at zero is exact and
// comes from rank data, never from float thresholds.
struct SpectralMeasure {
  std::vector<std::pair<double, long>> atoms;  // (eigenvalue, count), ascending, eigenvalue > 0
  Rat zero_multiplicity;                        // exact kernel dimension
  Rat normalization;                            // typically 1/[G:G_i]
  Rat support_bound;                            // kappa bound; all atoms lie in [0, bound]

  long dimension() const;  // total count including the kernel
};

// Symmetric PSD flat matrix -> measure. exact_kernel_dim must come from an
// exact rank computation. Float eigenvalues below the splitting threshold in
// excess of the exact kernel count are snapped to the smallest positive
// cluster. Throws InvariantError if mass or support checks fail, InputError if
// the matrix is visibly asymmetric.
SpectralMeasure spectral_measure(const FlatMatrix& m, long exact_kernel_dim, const Rat& normalization,
                                 const Rat& support_bound);

// Histogram of a measure over [0, support_bound] with uniform bins; masses are
// normalized counts. The zero atom lands in the first bin.
struct HistogramBin {
  double left, right;
  Rat mass;
};
std::vector<HistogramBin> measure_histogram(const SpectralMeasure& m, int bins);

// tr(reduce(delta)^k) / [G:G_i], exactly.
Rat exact_moment(const GroupRingMatrix& delta, const FiniteQuotient& q, int k);

// vn_trace(delta^k) in the group ring, exactly.
Rat l2_moment(const GroupRingMatrix& delta, int k);

// Side-by-side moments along a tower. flag_level is the first level (1-based)
// whose quotient is injective on the supports of delta^k for all k <= k_max
// (identity included); from that level on the two columns agree exactly.
struct MomentReport {
  struct Row {
    int level;
    long index;
    int k;
    Rat exact;
    Rat l2;
    bool equal;
  };
  std::vector<Row> rows;
  std::optional<int> flag_level;
};

MomentReport moment_convergence_report(const GroupRingMatrix& delta, const Tower& tower, int k_max);

// Exact characteristic polynomial det(xI - M), coefficients c_0..c_n.
// Two independent routes; they must agree (tested, not cross-called).
std::vector<Int> char_poly_hessenberg(const FlatMatrix& m);
std::vector<Int> char_poly_interpolation(const FlatMatrix& m);

// Scaled determinant data extracted from the characteristic polynomial of the
// reduced Laplacian: c is the lowest-degree nonzero coefficient, a nonzero
// integer whose absolute value is the product of the nonzero eigenvalues;
// log_normalized_det = log|c| / [G:G_i] >= 0.
struct FKCertificate {
  Int low_coeff;
  long kernel_dim = 0;
  long index = 1;
  double log_normalized_det = 0.0;
  bool degenerate = false;  // zero matrix: empty product, |c| = 1
};

FKCertificate fk_certificate(const GroupRingMatrix& delta, const FiniteQuotient& q);

// Normalized Betti numbers along a tower with an optional reference limit
// value; flags whether each level sits (weakly) above the reference.
struct KazhdanReport {
  struct Row {
    int level;
    std::string label;
    long index;
    long betti;
    Rat normalized;
    std::optional<Rat> gap;  // normalized - reference
    bool above_reference = true;
  };
  std::vector<Row> rows;
  std::optional<Rat> reference;
};

KazhdanReport kazhdan_report(const ChainComplexSpec& c, const Tower& tower, int degree,
                             const std::optional<Rat>& reference, std::mt19937_64& rng);

}  // namespace towerlab
