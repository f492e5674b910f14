#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "towerlab/chain_complex.hpp"
#include "towerlab/spectral.hpp"

using namespace towerlab;

namespace {

// Z -> Z/m for free_abelian(1), any m >= 1.
FiniteQuotient z_mod(long m) {
  FiniteQuotient q;
  q.order = m;
  Perm shift(m);
  for (long i = 0; i < m; ++i) shift[i] = static_cast<int>((i + 1) % m);
  q.generator_images = {shift};
  q.label = "Z/" + std::to_string(m);
  return q;
}

SpectralMeasure circle_measure(long m, std::mt19937_64& rng) {
  ChainComplexSpec c = circle_complex();
  GroupRingMatrix delta = complex_laplacian(c, 1);
  FiniteQuotient q = z_mod(m);
  FlatMatrix flat = reduce_matrix(delta, q, CoefficientRing::Q());
  long kernel = flat.rows - rank_over_Q(flat, rng);
  return spectral_measure(flat, kernel, Rat(1, m), kappa_bound(delta));
}

double measure_moment(const SpectralMeasure& m, int k) {
  double s = 0.0;
  for (const auto& [ev, count] : m.atoms) s += static_cast<double>(count) * std::pow(ev, k);
  return s * to_double(m.normalization);
}

FlatMatrix random_symmetric_int(long n, std::mt19937_64& rng) {
  FlatMatrix m = FlatMatrix::zero(CoefficientRing::Z(), n, n);
  std::uniform_int_distribution<int> entry(-3, 3);
  for (long r = 0; r < n; ++r)
    for (long c = r; c < n; ++c) {
      int v = entry(rng);
      if (v != 0) {
        m.set(r, c, v);
        if (c != r) m.set(c, r, v);
      }
    }
  return m;
}

}  // namespace

TEST_CASE("circle laplacian spectra at small cyclic quotients") {
  std::mt19937_64 rng(3);

  SUBCASE("order 4: eigenvalues 0, 2, 2, 4") {
    SpectralMeasure m = circle_measure(4, rng);
    CHECK(m.zero_multiplicity == 1);
    REQUIRE(m.atoms.size() == 2);
    CHECK(m.atoms[0].first == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(m.atoms[0].second == 2);
    CHECK(m.atoms[1].first == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(m.atoms[1].second == 1);
    CHECK(m.dimension() == 4);
    CHECK(m.support_bound == 4);
  }

  SUBCASE("order 3: eigenvalues 0, 3, 3") {
    SpectralMeasure m = circle_measure(3, rng);
    CHECK(m.zero_multiplicity == 1);
    REQUIRE(m.atoms.size() == 1);
    CHECK(m.atoms[0].first == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(m.atoms[0].second == 2);
  }
}

TEST_CASE("zero matrix spectrum is a pure kernel") {
  FlatMatrix z = FlatMatrix::zero(CoefficientRing::Q(), 3, 3);
  SpectralMeasure m = spectral_measure(z, 3, Rat(1, 3), Rat(0));
  CHECK(m.atoms.empty());
  CHECK(m.zero_multiplicity == 3);
  CHECK(m.dimension() == 3);
}

TEST_CASE("measures conserve mass and respect the support bound") {
  std::mt19937_64 rng(5);
  for (long m_order : {2L, 4L, 8L, 16L}) {
    SpectralMeasure m = circle_measure(m_order, rng);
    long total = 0;
    for (const auto& [ev, count] : m.atoms) {
      CHECK(count > 0);
      CHECK(ev > 0.0);
      CHECK(ev <= to_double(m.support_bound) + 1e-9);
      total += count;
    }
    CHECK(Rat(total) + m.zero_multiplicity == m_order);
    for (size_t i = 1; i < m.atoms.size(); ++i) CHECK(m.atoms[i - 1].first < m.atoms[i].first);
    // Kernel mass is 1/m at every finite level, never the limit value 0.
    Rat kernel_mass = m.zero_multiplicity * m.normalization;
    CHECK(kernel_mass == Rat(1, m_order));
    CHECK(kernel_mass > 0);
  }
}

TEST_CASE("float moments of the measure match the exact trace moments") {
  std::mt19937_64 rng(7);
  ChainComplexSpec c = circle_complex();
  GroupRingMatrix delta = complex_laplacian(c, 1);
  FiniteQuotient q = z_mod(8);
  SpectralMeasure m = circle_measure(8, rng);
  for (int k = 1; k <= 4; ++k) {
    double exact = to_double(exact_moment(delta, q, k));
    CHECK(measure_moment(m, k) == doctest::Approx(exact).epsilon(1e-6));
  }
}

TEST_CASE("visibly asymmetric input is rejected") {
  FlatMatrix m = FlatMatrix::zero(CoefficientRing::Q(), 2, 2);
  m.set(0, 1, 1);
  CHECK_THROWS_AS(spectral_measure(m, 0, Rat(1), Rat(10)), InputError);
  FlatMatrix ok = FlatMatrix::identity(CoefficientRing::Q(), 2);
  CHECK_THROWS_AS(spectral_measure(ok, 3, Rat(1), Rat(10)), std::invalid_argument);
}

TEST_CASE("histogram splits the circle order-4 spectrum into quarters") {
  std::mt19937_64 rng(9);
  SpectralMeasure m = circle_measure(4, rng);
  std::vector<HistogramBin> h = measure_histogram(m, 4);
  REQUIRE(h.size() == 4);
  Rat total = 0;
  for (const auto& bin : h) total += bin.mass;
  CHECK(total == 1);
  CHECK(h[0].left == doctest::Approx(0.0));
  CHECK(h[3].right == doctest::Approx(4.0));
  CHECK(h[0].mass == Rat(1, 4));  // the kernel atom
  CHECK(h[1].mass == 0);
  CHECK(h[2].mass == Rat(1, 2));  // eigenvalue 2, multiplicity 2
  CHECK(h[3].mass == Rat(1, 4));  // eigenvalue 4 lands in the closed last bin
}

TEST_CASE("trace moments of the circle laplacian are central binomials") {
  ChainComplexSpec c = circle_complex();
  GroupRingMatrix delta = complex_laplacian(c, 1);
  std::vector<long> central = {2, 6, 20, 70, 252, 924};
  for (int k = 1; k <= 6; ++k) CHECK(l2_moment(delta, k) == central[k - 1]);
  CHECK(l2_moment(delta, 0) == 1);

  CHECK(exact_moment(delta, z_mod(2), 2) == 8);
  CHECK(exact_moment(delta, z_mod(5), 2) == 6);
  CHECK(exact_moment(delta, z_mod(13), 6) == 924);
}

TEST_CASE("moment tables flag the level where supports inject") {
  ChainComplexSpec c = circle_complex();
  GroupRingMatrix delta = complex_laplacian(c, 1);

  SUBCASE("orders 2, 4, 8 with k up to 3") {
    Tower tower = make_builtin_tower(GroupModelSpec::free_abelian(1), TowerFamily::congruence, 2, 3);
    MomentReport rep = moment_convergence_report(delta, tower, 3);
    REQUIRE(rep.flag_level.has_value());
    CHECK(*rep.flag_level == 3);
    bool saw_mismatch = false;
    for (const auto& row : rep.rows) {
      CHECK(row.equal == (row.exact == row.l2));
      if (row.level == 1 && row.k == 2) {
        CHECK(row.exact == 8);
        CHECK(row.l2 == 6);
        saw_mismatch = true;
      }
      if (row.level >= *rep.flag_level) CHECK(row.equal);
    }
    CHECK(saw_mismatch);
  }

  SUBCASE("k up to 6 needs order at least 13") {
    Tower tower = make_builtin_tower(GroupModelSpec::free_abelian(1), TowerFamily::congruence, 2, 4);
    MomentReport rep = moment_convergence_report(delta, tower, 6);
    REQUIRE(rep.flag_level.has_value());
    // Order 8 still folds t^6 onto t^-2; order 16 separates all |j| <= 6.
    CHECK(*rep.flag_level == 4);
  }

  SUBCASE("a too-shallow tower reports no flag level") {
    Tower tower = make_builtin_tower(GroupModelSpec::free_abelian(1), TowerFamily::congruence, 2, 1);
    MomentReport rep = moment_convergence_report(delta, tower, 6);
    CHECK(!rep.flag_level.has_value());
  }
}

TEST_CASE("characteristic polynomial routes agree") {
  SUBCASE("pinned 2x2") {
    FlatMatrix m = FlatMatrix::zero(CoefficientRing::Z(), 2, 2);
    m.set(0, 0, 2);
    m.set(0, 1, 1);
    m.set(1, 0, 1);
    m.set(1, 1, 2);
    std::vector<Int> expect = {3, -4, 1};  // (x-1)(x-3)
    CHECK(char_poly_hessenberg(m) == expect);
    CHECK(char_poly_interpolation(m) == expect);
  }

  SUBCASE("empty matrix has the constant polynomial 1") {
    FlatMatrix m = FlatMatrix::zero(CoefficientRing::Z(), 0, 0);
    CHECK(char_poly_hessenberg(m) == std::vector<Int>{1});
    CHECK(char_poly_interpolation(m) == std::vector<Int>{1});
  }

  SUBCASE("random integer matrices up to 6x6") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 50; ++trial) {
      long n = 1 + static_cast<long>(rng() % 6);
      FlatMatrix m = random_symmetric_int(n, rng);
      std::vector<Int> a = char_poly_hessenberg(m);
      std::vector<Int> b = char_poly_interpolation(m);
      CHECK(a == b);
      REQUIRE(a.size() == static_cast<size_t>(n) + 1);
      CHECK(a.back() == 1);
    }
  }
}

TEST_CASE("determinant certificates for circle quotients") {
  ChainComplexSpec c = circle_complex();
  GroupRingMatrix delta = complex_laplacian(c, 1);
  for (long m = 2; m <= 12; ++m) {
    FKCertificate cert = fk_certificate(delta, z_mod(m));
    CHECK(!cert.degenerate);
    CHECK(cert.kernel_dim == 1);
    CHECK(cert.index == m);
    Int expect = Int(m) * Int(m);
    CHECK(abs(cert.low_coeff) == expect);
    double logval = 2.0 * std::log(static_cast<double>(m)) / static_cast<double>(m);
    CHECK(cert.log_normalized_det == doctest::Approx(logval).epsilon(1e-12));
    CHECK(cert.log_normalized_det >= 0.0);
  }
}

TEST_CASE("determinant certificate edge cases") {
  GroupModelSpec model = GroupModelSpec::free_abelian(1);
  CoefficientRing Z = CoefficientRing::Z();

  SUBCASE("identity matrix certifies |c| = 1") {
    GroupRingMatrix eye(model, Z, 2, 2);
    for (long i = 0; i < 2; ++i) eye.at(i, i) = GroupRingElement::scalar(model, Z, 1);
    FKCertificate cert = fk_certificate(eye, z_mod(3));
    CHECK(!cert.degenerate);
    CHECK(cert.kernel_dim == 0);
    CHECK(abs(cert.low_coeff) == 1);
    CHECK(cert.log_normalized_det == doctest::Approx(0.0));
  }

  SUBCASE("scalar p^2 from the torsion example gives log 2 ln p") {
    ChainComplexSpec c = lls_complex(2, 2);
    GroupRingMatrix delta = complex_laplacian(c, 2);
    for (long m : {2L, 4L}) {
      FKCertificate cert = fk_certificate(delta, z_mod(m));
      Int expect = 1;
      mpz_mul_2exp(expect.get_mpz_t(), expect.get_mpz_t(), 2 * m);
      CHECK(abs(cert.low_coeff) == expect);
      CHECK(cert.log_normalized_det == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
      CHECK(cert.kernel_dim == 0);
    }
  }

  SUBCASE("zero matrix is degenerate with determinant 1") {
    GroupRingMatrix zero(model, Z, 2, 2);
    FKCertificate cert = fk_certificate(zero, z_mod(3));
    CHECK(cert.degenerate);
    CHECK(cert.kernel_dim == 6);
    CHECK(abs(cert.low_coeff) == 1);
    CHECK(cert.log_normalized_det == doctest::Approx(0.0));
  }
}

TEST_CASE("normalized betti gaps against a reference value") {
  std::mt19937_64 rng(19);

  SUBCASE("wedge towers sit above the limit 1 with gap 1/index") {
    ChainComplexSpec c = wedge_complex(2);
    Tower tower = make_builtin_tower(GroupModelSpec::free_group(2), TowerFamily::abelianized, 2, 3);
    KazhdanReport rep = kazhdan_report(c, tower, 1, Rat(1), rng);
    REQUIRE(rep.rows.size() == 3);
    std::vector<long> indices = {4, 16, 64};
    for (size_t i = 0; i < rep.rows.size(); ++i) {
      const auto& row = rep.rows[i];
      CHECK(row.index == indices[i]);
      CHECK(row.betti == indices[i] + 1);
      CHECK(row.normalized == Rat(indices[i] + 1, indices[i]));
      REQUIRE(row.gap.has_value());
      CHECK(*row.gap == Rat(1, indices[i]));
      CHECK(row.above_reference);
    }
  }

  SUBCASE("torus towers sit above the limit 0") {
    ChainComplexSpec c = torus_complex(2);
    Tower tower = make_builtin_tower(GroupModelSpec::free_abelian(2), TowerFamily::congruence, 2, 2);
    KazhdanReport rep = kazhdan_report(c, tower, 1, Rat(0), rng);
    REQUIRE(rep.rows.size() == 2);
    CHECK(rep.rows[0].normalized == Rat(1, 2));
    CHECK(rep.rows[1].normalized == Rat(1, 8));
    for (const auto& row : rep.rows) CHECK(row.above_reference);
  }

  SUBCASE("no reference means no gaps") {
    ChainComplexSpec c = circle_complex();
    Tower tower = make_builtin_tower(GroupModelSpec::free_abelian(1), TowerFamily::congruence, 2, 2);
    KazhdanReport rep = kazhdan_report(c, tower, 1, std::nullopt, rng);
    CHECK(!rep.reference.has_value());
    for (const auto& row : rep.rows) CHECK(!row.gap.has_value());
  }
}
