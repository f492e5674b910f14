#include "towerlab/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>

namespace towerlab {

long SpectralMeasure::dimension() const {
  long n = static_cast<long>(zero_multiplicity.get_num().get_si());
  for (const auto& [v, c] : atoms) n += c;
  return n;
}

SpectralMeasure spectral_measure(const FlatMatrix& m, long exact_kernel_dim, const Rat& normalization,
                                 const Rat& support_bound) {
  if (m.rows != m.cols) throw std::invalid_argument("spectral_measure needs a square matrix");
  const long n = m.rows;
  if (exact_kernel_dim < 0 || exact_kernel_dim > n) throw std::invalid_argument("bad exact kernel dimension");

  SpectralMeasure out;
  out.zero_multiplicity = Rat(exact_kernel_dim);
  out.normalization = normalization;
  out.support_bound = support_bound;
  if (n == 0) return out;

  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
  double max_abs = 0.0;
  for (long r = 0; r < n; ++r) {
    for (const auto& [c, v] : m.row_data[r]) {
      dense(r, c) = to_double(v);
      max_abs = std::max(max_abs, std::fabs(dense(r, c)));
    }
  }
  double sym_tol = 1e-9 * (1.0 + max_abs);
  for (long r = 0; r < n; ++r)
    for (long c = r + 1; c < n; ++c)
      if (std::fabs(dense(r, c) - dense(c, r)) > sym_tol) throw InputError("matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
  if (solver.info() != Eigen::Success) throw InvariantError("eigenvalue solver failed");
  std::vector<double> ev(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
  std::sort(ev.begin(), ev.end());

  double bound_d = to_double(support_bound);
  double scale = std::max(1.0, bound_d);
  double split = 1e-9 * scale;

  // The lowest exact_kernel_dim values are the kernel; the exact count wins
  // over any float reading of them.
  std::vector<double> pos(ev.begin() + exact_kernel_dim, ev.end());
  double floor_val = 0.0;
  bool have_floor = false;
  for (double v : pos) {
    if (v >= split) {
      floor_val = v;
      have_floor = true;
      break;
    }
  }
  for (double& v : pos) {
    if (v < split) v = have_floor ? floor_val : std::fabs(v);
  }
  std::sort(pos.begin(), pos.end());

  for (double v : pos) {
    if (!out.atoms.empty() && v - out.atoms.back().first <= split) {
      ++out.atoms.back().second;
    } else {
      out.atoms.emplace_back(v, 1);
    }
  }

  if (out.dimension() != n) throw InvariantError("spectral measure lost mass");
  if (!out.atoms.empty() && out.atoms.back().first > bound_d * (1.0 + 1e-9) + 1e-12)
    throw InvariantError("eigenvalue exceeds the support bound");
  return out;
}

std::vector<HistogramBin> measure_histogram(const SpectralMeasure& m, int bins) {
  if (bins < 1) throw std::invalid_argument("histogram needs >= 1 bin");
  double bound = to_double(m.support_bound);
  double width = bound > 0 ? bound / bins : 1.0;
  std::vector<HistogramBin> out;
  out.reserve(bins);
  for (int i = 0; i < bins; ++i) out.push_back({i * width, (i + 1) * width, Rat(0)});
  out[0].mass += m.zero_multiplicity * m.normalization;
  for (const auto& [v, c] : m.atoms) {
    // Atoms sitting on a bin edge up to solver noise go to the upper bin, so
    // the assignment does not depend on the sign of the rounding error.
    double pos = v / width;
    double edge = std::round(pos);
    if (std::fabs(pos - edge) < 1e-9) pos = edge;
    int idx = std::min(bins - 1, static_cast<int>(pos));
    out[idx].mass += Rat(c) * m.normalization;
  }
  return out;
}

Rat exact_moment(const GroupRingMatrix& delta, const FiniteQuotient& q, int k) {
  if (k < 0) throw std::invalid_argument("negative moment");
  if (delta.ring().kind == CoefficientRing::Kind::prime_field)
    throw std::invalid_argument("moments need coefficients in Z or Q");
  FlatMatrix f = reduce_matrix(delta, q, delta.ring());
  FlatMatrix power = FlatMatrix::identity(f.ring, f.rows);
  for (int i = 0; i < k; ++i) power = flat_mul(power, f);
  return flat_trace(power) / Rat(q.order);
}

Rat l2_moment(const GroupRingMatrix& delta, int k) {
  if (k < 0) throw std::invalid_argument("negative moment");
  if (delta.rows() != delta.cols()) throw std::invalid_argument("l2_moment needs a square matrix");
  if (delta.ring().kind == CoefficientRing::Kind::prime_field)
    throw std::invalid_argument("moments need coefficients in Z or Q");
  GroupRingMatrix power(delta.model(), delta.ring(), delta.rows(), delta.rows());
  for (long i = 0; i < delta.rows(); ++i)
    power.at(i, i) = GroupRingElement::scalar(delta.model(), delta.ring(), Rat(1));
  for (int i = 0; i < k; ++i) power = mat_mul(power, delta);
  return vn_trace(power);
}

MomentReport moment_convergence_report(const GroupRingMatrix& delta, const Tower& tower, int k_max) {
  if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  MomentReport report;

  // Union of supports of delta^k, k <= k_max, plus the identity. If a level is
  // injective on this set, the trace formula sees only the identity term and
  // the two moment columns agree there.
  std::set<GroupElement> support;
  support.insert(GroupElement::identity(delta.model()));
  std::vector<GroupRingMatrix> powers;
  GroupRingMatrix power(delta.model(), delta.ring(), delta.rows(), delta.rows());
  for (long i = 0; i < delta.rows(); ++i)
    power.at(i, i) = GroupRingElement::scalar(delta.model(), delta.ring(), Rat(1));
  for (int k = 1; k <= k_max; ++k) {
    power = mat_mul(power, delta);
    powers.push_back(power);
    for (long r = 0; r < power.rows(); ++r)
      for (long c = 0; c < power.cols(); ++c)
        for (const auto& [g, coeff] : power.at(r, c).terms()) support.insert(g);
  }

  std::vector<char> injective(tower.levels.size(), 0);
  for (std::size_t i = 0; i < tower.levels.size(); ++i) {
    std::set<int> images;
    bool inj = true;
    for (const GroupElement& g : support) {
      if (!images.insert(quotient_image(g, tower.levels[i])[0]).second) {
        inj = false;
        break;
      }
    }
    injective[i] = inj;
  }
  for (std::size_t i = 0; i < tower.levels.size(); ++i) {
    bool suffix = true;
    for (std::size_t j = i; j < tower.levels.size(); ++j) suffix = suffix && injective[j];
    if (suffix) {
      report.flag_level = static_cast<int>(i) + 1;
      break;
    }
  }

  for (std::size_t i = 0; i < tower.levels.size(); ++i) {
    for (int k = 1; k <= k_max; ++k) {
      MomentReport::Row row;
      row.level = static_cast<int>(i) + 1;
      row.index = tower.levels[i].order;
      row.k = k;
      row.exact = exact_moment(delta, tower.levels[i], k);
      row.l2 = vn_trace(powers[k - 1]);
      row.equal = row.exact == row.l2;
      if (injective[i] && !row.equal)
        throw InvariantError("moments disagree at a support-injective level");
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

namespace {

std::vector<std::vector<Int>> dense_int(const FlatMatrix& m) {
  if (m.rows != m.cols) throw std::invalid_argument("char poly needs a square matrix");
  if (m.rows > 2048) throw std::invalid_argument("matrix too large for exact char poly");
  std::vector<std::vector<Int>> d(m.rows, std::vector<Int>(m.cols, Int(0)));
  for (long r = 0; r < m.rows; ++r) {
    for (const auto& [c, v] : m.row_data[r]) {
      if (v.get_den() != 1) throw std::invalid_argument("char poly needs integer entries");
      d[r][c] = v.get_num();
    }
  }
  return d;
}

Int bareiss_det(std::vector<std::vector<Int>> m) {
  const long n = static_cast<long>(m.size());
  if (n == 0) return Int(1);
  Int prev = 1;
  int sign = 1;
  for (long k = 0; k < n; ++k) {
    long piv = -1;
    for (long i = k; i < n; ++i)
      if (m[i][k] != 0) {
        piv = i;
        break;
      }
    if (piv < 0) return Int(0);
    if (piv != k) {
      std::swap(m[piv], m[k]);
      sign = -sign;
    }
    for (long i = k + 1; i < n; ++i) {
      for (long j = k + 1; j < n; ++j) {
        Int num = m[i][j] * m[k][k] - m[i][k] * m[k][j];
        mpz_divexact(m[i][j].get_mpz_t(), num.get_mpz_t(), prev.get_mpz_t());
      }
      m[i][k] = 0;
    }
    prev = m[k][k];
  }
  return sign > 0 ? m[n - 1][n - 1] : -m[n - 1][n - 1];
}

}  // namespace

std::vector<Int> char_poly_hessenberg(const FlatMatrix& mat) {
  std::vector<std::vector<Int>> di = dense_int(mat);
  const long n = mat.rows;
  std::vector<std::vector<Rat>> a(n, std::vector<Rat>(n));
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) a[i][j] = Rat(di[i][j]);

  // Similarity reduction to upper Hessenberg form with exact arithmetic.
  for (long k = 0; k + 2 < n; ++k) {
    long piv = -1;
    for (long r = k + 1; r < n; ++r)
      if (a[r][k] != 0) {
        piv = r;
        break;
      }
    if (piv < 0) continue;
    if (piv != k + 1) {
      std::swap(a[piv], a[k + 1]);
      for (long r = 0; r < n; ++r) std::swap(a[r][piv], a[r][k + 1]);
    }
    for (long i = k + 2; i < n; ++i) {
      if (a[i][k] == 0) continue;
      Rat f = a[i][k] / a[k + 1][k];
      for (long c = 0; c < n; ++c) a[i][c] -= f * a[k + 1][c];
      for (long r = 0; r < n; ++r) a[r][k + 1] += f * a[r][i];
    }
  }

  // p_k(x) = (x - h[k-1][k-1]) p_(k-1)(x)
  //          - sum_i h[i][k-1] (prod_(j=i+1..k-1) h[j][j-1]) p_i(x).
  std::vector<std::vector<Rat>> polys;
  polys.push_back({Rat(1)});
  for (long k = 1; k <= n; ++k) {
    std::vector<Rat> pk(k + 1, Rat(0));
    const auto& prev = polys[k - 1];
    for (std::size_t idx = 0; idx < prev.size(); ++idx) {
      pk[idx + 1] += prev[idx];
      pk[idx] -= a[k - 1][k - 1] * prev[idx];
    }
    Rat prod = 1;
    for (long i = k - 2; i >= 0; --i) {
      prod *= a[i + 1][i];
      if (prod == 0) break;
      Rat term = a[i][k - 1] * prod;
      if (term == 0) continue;
      for (std::size_t idx = 0; idx < polys[i].size(); ++idx) pk[idx] -= term * polys[i][idx];
    }
    polys.push_back(std::move(pk));
  }

  std::vector<Int> out;
  out.reserve(n + 1);
  for (const Rat& c : polys[n]) {
    if (c.get_den() != 1) throw InvariantError("char poly coefficient is not an integer");
    out.push_back(c.get_num());
  }
  return out;
}

std::vector<Int> char_poly_interpolation(const FlatMatrix& mat) {
  std::vector<std::vector<Int>> base = dense_int(mat);
  const long n = mat.rows;

  // Evaluate det(xI - M) at x = 0..n, then Lagrange-interpolate exactly.
  std::vector<Int> ys;
  for (long x = 0; x <= n; ++x) {
    std::vector<std::vector<Int>> m(n, std::vector<Int>(n));
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < n; ++j) m[i][j] = (i == j ? Int(x) : Int(0)) - base[i][j];
    ys.push_back(bareiss_det(std::move(m)));
  }

  std::vector<Rat> coeffs(n + 1, Rat(0));
  for (long i = 0; i <= n; ++i) {
    std::vector<Rat> basis = {Rat(1)};
    Rat denom = 1;
    for (long j = 0; j <= n; ++j) {
      if (j == i) continue;
      std::vector<Rat> next(basis.size() + 1, Rat(0));
      for (std::size_t k = 0; k < basis.size(); ++k) {
        next[k] -= basis[k] * Rat(j);
        next[k + 1] += basis[k];
      }
      basis = std::move(next);
      denom *= Rat(i - j);
    }
    Rat w = Rat(ys[i]) / denom;
    for (std::size_t k = 0; k < basis.size(); ++k) coeffs[k] += w * basis[k];
  }

  std::vector<Int> out;
  out.reserve(n + 1);
  for (const Rat& c : coeffs) {
    if (c.get_den() != 1) throw InvariantError("char poly coefficient is not an integer");
    out.push_back(c.get_num());
  }
  return out;
}

FKCertificate fk_certificate(const GroupRingMatrix& delta, const FiniteQuotient& q) {
  if (delta.rows() != delta.cols()) throw std::invalid_argument("fk_certificate needs a square matrix");
  if (!(delta.ring() == CoefficientRing::Z()))
    throw std::invalid_argument("fk_certificate needs integer coefficients");
  FKCertificate cert;
  cert.index = q.order;
  FlatMatrix f = reduce_matrix(delta, q, CoefficientRing::Z());
  if (f.rows == 0) {
    cert.low_coeff = 1;
    cert.degenerate = true;
    return cert;
  }
  std::vector<Int> coeffs = char_poly_hessenberg(f);
  long k = 0;
  while (k < static_cast<long>(coeffs.size()) && coeffs[k] == 0) ++k;
  if (k == static_cast<long>(coeffs.size())) throw InvariantError("characteristic polynomial vanished");
  cert.low_coeff = coeffs[k];
  cert.kernel_dim = k;
  cert.degenerate = k == f.rows;
  if (cert.low_coeff == 0) throw InvariantError("zero low coefficient");
  if (mpz_cmpabs_ui(cert.low_coeff.get_mpz_t(), 1) == 0) {
    cert.log_normalized_det = 0.0;
  } else {
    cert.log_normalized_det = log_abs(cert.low_coeff) / static_cast<double>(q.order);
  }
  if (cert.log_normalized_det < -1e-9) throw InvariantError("negative log determinant");
  if (cert.log_normalized_det < 0) cert.log_normalized_det = 0.0;
  return cert;
}

KazhdanReport kazhdan_report(const ChainComplexSpec& c, const Tower& tower, int degree,
                             const std::optional<Rat>& reference, std::mt19937_64& rng) {
  if (degree < 0 || degree > c.top_degree()) throw InputError("degree out of range");
  KazhdanReport report;
  report.reference = reference;
  for (std::size_t i = 0; i < tower.levels.size(); ++i) {
    const FiniteQuotient& quo = tower.levels[i];
    std::vector<long> b = betti_numbers(c, quo, CoefficientRing::Q(), rng);
    KazhdanReport::Row row;
    row.level = static_cast<int>(i) + 1;
    row.label = quo.label;
    row.index = quo.order;
    row.betti = b[degree];
    row.normalized = make_rat(Int(b[degree]), Int(quo.order));
    if (reference) {
      row.gap = row.normalized - *reference;
      row.above_reference = row.normalized >= *reference;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace towerlab
