#include <doctest.h>

#include "towerlab/chain_complex.hpp"

using namespace towerlab;

TEST_CASE("builtin complexes validate and have the expected shapes") {
  for (const ChainComplexSpec& c :
       {circle_complex(), wedge_complex(2), wedge_complex(3), torus_complex(1), torus_complex(2),
        torus_complex(3), lls_complex(2, 2), lls_complex(3, 3)}) {
    ComplexValidation v = validate_complex(c);
    CHECK(v.ok);
  }

  ChainComplexSpec t2 = torus_complex(2);
  CHECK(t2.ranks == std::vector<long>{1, 2, 1});
  ChainComplexSpec t3 = torus_complex(3);
  CHECK(t3.ranks == std::vector<long>{1, 3, 3, 1});

  ChainComplexSpec circle = circle_complex();
  CHECK(circle.ranks == std::vector<long>{1, 1});
  GroupRingElement t_minus_1(circle.model, circle.ring);
  t_minus_1.add_term(GroupElement::generator(circle.model, 0), Rat(1));
  t_minus_1.add_term(GroupElement::identity(circle.model), Rat(-1));
  CHECK(circle.boundary(1).at(0, 0) == t_minus_1);

  ChainComplexSpec w2 = wedge_complex(2);
  CHECK(w2.ranks == std::vector<long>{1, 2});
  CHECK(w2.boundary(1).rows() == 2);
  CHECK(w2.boundary(1).cols() == 1);
}

TEST_CASE("degree-p attachment complex") {
  ChainComplexSpec l = lls_complex(2, 3);
  CHECK(l.ranks == std::vector<long>{1, 1, 1, 1});
  // top boundary is the constant 3
  GroupRingElement three(l.model, l.ring);
  three.add_term(GroupElement::identity(l.model), Rat(3));
  CHECK(l.boundary(3).at(0, 0) == three);
  // middle boundary is identically zero
  CHECK(l.boundary(2).at(0, 0).is_zero());

  ChainComplexSpec l3 = lls_complex(3, 2);
  CHECK(l3.ranks == std::vector<long>{1, 1, 0, 1, 1});
  CHECK(l3.boundary(2).rows() == 0);
  CHECK(l3.boundary(3).cols() == 0);
  CHECK(validate_complex(l3).ok);

  CHECK_THROWS_AS(lls_complex(1, 2), InputError);
  CHECK_THROWS_AS(torus_complex(0), InputError);
  CHECK_THROWS_AS(wedge_complex(0), InputError);
}

TEST_CASE("builtin dispatch accepts CLI names") {
  CHECK(builtin_complex("circle", {}).ranks == std::vector<long>{1, 1});
  CHECK(builtin_complex("wedge", {2}).ranks == std::vector<long>{1, 2});
  CHECK(builtin_complex("wedge_of_circles", {3}).ranks == std::vector<long>{1, 3});
  CHECK(builtin_complex("torus", {2}).ranks == std::vector<long>{1, 2, 1});
  CHECK(builtin_complex("lls", {2, 2}).ranks == std::vector<long>{1, 1, 1, 1});
  CHECK(builtin_complex("lls_example", {2, 2}).ranks == std::vector<long>{1, 1, 1, 1});
  CHECK_THROWS_AS(builtin_complex("sphere", {}), InputError);
  CHECK_THROWS_AS(builtin_complex("wedge", {}), InputError);
}

TEST_CASE("validation pinpoints a corrupted boundary") {
  ChainComplexSpec t2 = torus_complex(2);
  // flip one sign in the degree-2 boundary
  GroupRingElement e = t2.boundary(2).at(0, 0);
  t2.boundary(2).at(0, 0) = e.scaled(Rat(-1));
  ComplexValidation v = validate_complex(t2);
  CHECK(!v.ok);
  CHECK(v.degree == 1);  // composite A_2 A_1 fails
  CHECK(v.message.find("A_2 A_1") != std::string::npos);
}

TEST_CASE("laplacians per degree") {
  ChainComplexSpec circle = circle_complex();
  GroupRingMatrix d1 = complex_laplacian(circle, 1);
  GroupRingElement expect(circle.model, circle.ring);
  expect.add_term(GroupElement::identity(circle.model), Rat(2));
  expect.add_term(GroupElement::generator(circle.model, 0), Rat(-1));
  expect.add_term(GroupElement::generator(circle.model, 0, -1), Rat(-1));
  CHECK(d1.at(0, 0) == expect);

  ChainComplexSpec t2 = torus_complex(2);
  GroupRingMatrix d0 = complex_laplacian(t2, 0);
  GroupRingElement sum(t2.model, t2.ring);
  for (int j = 0; j < 2; ++j) {
    sum.add_term(GroupElement::identity(t2.model), Rat(2));
    sum.add_term(GroupElement::generator(t2.model, j), Rat(-1));
    sum.add_term(GroupElement::generator(t2.model, j, -1), Rat(-1));
  }
  CHECK(d0.at(0, 0) == sum);

  ChainComplexSpec l = lls_complex(2, 3);
  GroupRingMatrix d2 = complex_laplacian(l, 2);
  GroupRingElement nine(l.model, l.ring);
  nine.add_term(GroupElement::identity(l.model), Rat(9));
  CHECK(d2.at(0, 0) == nine);

  CHECK_THROWS_AS(complex_laplacian(circle, 2), InputError);
  CHECK_THROWS_AS(complex_laplacian(circle, -1), InputError);
}

TEST_CASE("laplacian invariants on builtins") {
  for (const ChainComplexSpec& c : {circle_complex(), wedge_complex(2), torus_complex(2),
                                    lls_complex(2, 2)}) {
    for (int q = 0; q <= c.top_degree(); ++q) {
      GroupRingMatrix d = complex_laplacian(c, q);
      CHECK(star(d) == d);
      Rat bound = 0;
      if (q >= 1) {
        Rat k = kappa_bound(c.boundary(q));
        bound += k * k;
      }
      if (q + 1 <= c.top_degree()) {
        Rat k = kappa_bound(c.boundary(q + 1));
        bound += k * k;
      }
      CHECK(kappa_bound(d) <= bound);
    }
  }
}

TEST_CASE("torus ranks have zero alternating sum") {
  for (int n = 1; n <= 4; ++n) {
    ChainComplexSpec t = torus_complex(n);
    long sum = 0;
    for (int q = 0; q <= t.top_degree(); ++q) sum += (q % 2 == 0 ? 1 : -1) * t.ranks[q];
    CHECK(sum == 0);
  }
}
