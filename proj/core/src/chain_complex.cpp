#include "towerlab/chain_complex.hpp"

#include <algorithm>
#include <map>

namespace towerlab {

const GroupRingMatrix& ChainComplexSpec::boundary(int q) const {
  if (q < 1 || q > top_degree()) throw std::invalid_argument("boundary degree out of range");
  return boundaries[q - 1];
}

GroupRingMatrix& ChainComplexSpec::boundary(int q) {
  if (q < 1 || q > top_degree()) throw std::invalid_argument("boundary degree out of range");
  return boundaries[q - 1];
}

ComplexValidation validate_complex(const ChainComplexSpec& c) {
  ComplexValidation v;
  if (c.ranks.empty()) {
    v.message = "complex has no degrees";
    return v;
  }
  for (long n : c.ranks) {
    if (n < 0) {
      v.message = "negative rank";
      return v;
    }
  }
  if (static_cast<int>(c.boundaries.size()) != c.top_degree()) {
    v.message = "boundary count does not match degree count";
    return v;
  }
  for (int q = 1; q <= c.top_degree(); ++q) {
    const GroupRingMatrix& a = c.boundary(q);
    if (!(a.model() == c.model) || !(a.ring() == c.ring)) {
      v.message = "boundary " + std::to_string(q) + " has mismatched model or ring";
      return v;
    }
    if (a.rows() != c.ranks[q] || a.cols() != c.ranks[q - 1]) {
      v.message = "boundary " + std::to_string(q) + " has shape " + std::to_string(a.rows()) + "x" +
                  std::to_string(a.cols()) + ", expected " + std::to_string(c.ranks[q]) + "x" +
                  std::to_string(c.ranks[q - 1]);
      return v;
    }
  }
  for (int q = 1; q + 1 <= c.top_degree(); ++q) {
    GroupRingMatrix comp = mat_mul(c.boundary(q + 1), c.boundary(q));
    for (long r = 0; r < comp.rows(); ++r) {
      for (long cc = 0; cc < comp.cols(); ++cc) {
        if (!comp.at(r, cc).is_zero()) {
          v.degree = q;
          v.message = "composite A_" + std::to_string(q + 1) + " A_" + std::to_string(q) +
                      " is nonzero at entry (" + std::to_string(r) + "," + std::to_string(cc) + ")";
          return v;
        }
      }
    }
  }
  v.ok = true;
  return v;
}

namespace {

GroupRingElement gen_minus_one(const GroupModelSpec& model, const CoefficientRing& ring, int gen) {
  GroupRingElement e(model, ring);
  e.add_term(GroupElement::generator(model, gen), Rat(1));
  e.add_term(GroupElement::identity(model), Rat(-1));
  return e;
}

}  // namespace

ChainComplexSpec circle_complex() {
  GroupModelSpec model = GroupModelSpec::free_abelian(1);
  CoefficientRing ring = CoefficientRing::Z();
  ChainComplexSpec c{model, ring, {1, 1}, {}};
  GroupRingMatrix a1(model, ring, 1, 1);
  a1.at(0, 0) = gen_minus_one(model, ring, 0);
  c.boundaries.push_back(std::move(a1));
  return c;
}

ChainComplexSpec wedge_complex(int d) {
  if (d < 1) throw InputError("wedge_of_circles needs d >= 1");
  GroupModelSpec model = GroupModelSpec::free_group(d);
  CoefficientRing ring = CoefficientRing::Z();
  ChainComplexSpec c{model, ring, {1, d}, {}};
  GroupRingMatrix a1(model, ring, d, 1);
  for (int j = 0; j < d; ++j) a1.at(j, 0) = gen_minus_one(model, ring, j);
  c.boundaries.push_back(std::move(a1));
  return c;
}

ChainComplexSpec torus_complex(int n) {
  if (n < 1) throw InputError("torus needs n >= 1");
  if (n > 12) throw InputError("torus dimension too large");
  GroupModelSpec model = GroupModelSpec::free_abelian(n);
  CoefficientRing ring = CoefficientRing::Z();

  // Degree-q basis: q-subsets of {0..n-1} in lexicographic order.
  std::vector<std::vector<std::vector<int>>> basis(n + 1);
  std::vector<std::map<std::vector<int>, long>> index(n + 1);
  for (int mask = 0; mask < (1 << n); ++mask) {
    std::vector<int> s;
    for (int b = 0; b < n; ++b)
      if (mask & (1 << b)) s.push_back(b);
    basis[s.size()].push_back(s);
  }
  for (int q = 0; q <= n; ++q) {
    std::sort(basis[q].begin(), basis[q].end());
    for (long i = 0; i < static_cast<long>(basis[q].size()); ++i) index[q][basis[q][i]] = i;
  }

  ChainComplexSpec c{model, ring, {}, {}};
  for (int q = 0; q <= n; ++q) c.ranks.push_back(static_cast<long>(basis[q].size()));
  for (int q = 1; q <= n; ++q) {
    GroupRingMatrix a(model, ring, c.ranks[q], c.ranks[q - 1]);
    for (long row = 0; row < c.ranks[q]; ++row) {
      const std::vector<int>& s = basis[q][row];
      for (int j = 0; j < q; ++j) {
        std::vector<int> face = s;
        face.erase(face.begin() + j);
        long col = index[q - 1][face];
        GroupRingElement term = gen_minus_one(model, ring, s[j]);
        if (j % 2 == 1) term = term.scaled(Rat(-1));
        a.at(row, col) = a.at(row, col) + term;
      }
    }
    c.boundaries.push_back(std::move(a));
  }
  return c;
}

ChainComplexSpec lls_complex(int d, long p) {
  if (d < 2) throw InputError("lls_example needs d >= 2");
  if (p < 2) throw InputError("lls_example needs p >= 2");
  GroupModelSpec model = GroupModelSpec::free_abelian(1);
  CoefficientRing ring = CoefficientRing::Z();
  ChainComplexSpec c{model, ring, {}, {}};
  c.ranks.assign(d + 2, 0);
  c.ranks[0] = c.ranks[1] = c.ranks[d] = c.ranks[d + 1] = 1;
  for (int q = 1; q <= d + 1; ++q) {
    GroupRingMatrix a(model, ring, c.ranks[q], c.ranks[q - 1]);
    if (q == 1) a.at(0, 0) = gen_minus_one(model, ring, 0);
    if (q == d + 1) a.at(0, 0) = GroupRingElement::scalar(model, ring, Rat(p));
    c.boundaries.push_back(std::move(a));
  }
  return c;
}

ChainComplexSpec builtin_complex(const std::string& name, const std::vector<long>& params) {
  auto need = [&](std::size_t n) {
    if (params.size() != n)
      throw InputError("builtin complex '" + name + "' expects " + std::to_string(n) + " parameter(s)");
  };
  if (name == "circle") {
    need(0);
    return circle_complex();
  }
  if (name == "wedge_of_circles" || name == "wedge") {
    need(1);
    return wedge_complex(static_cast<int>(params[0]));
  }
  if (name == "torus") {
    need(1);
    return torus_complex(static_cast<int>(params[0]));
  }
  if (name == "lls_example" || name == "lls") {
    need(2);
    return lls_complex(static_cast<int>(params[0]), params[1]);
  }
  throw InputError("unknown builtin complex: '" + name + "'");
}

GroupRingMatrix complex_laplacian(const ChainComplexSpec& c, int q) {
  if (q < 0 || q > c.top_degree()) throw InputError("laplacian degree out of range");
  const GroupRingMatrix* a_q = q >= 1 ? &c.boundary(q) : nullptr;
  const GroupRingMatrix* a_q1 = q + 1 <= c.top_degree() ? &c.boundary(q + 1) : nullptr;
  if (!a_q && !a_q1) {
    // Single-degree complex: the Laplacian is the zero endomorphism.
    return GroupRingMatrix(c.model, c.ring, c.ranks[q], c.ranks[q]);
  }
  return laplacian(a_q, a_q1);
}

}  // namespace towerlab
