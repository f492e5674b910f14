#pragma once

#include <map>
#include <string>
#include <vector>

#include "towerlab/group.hpp"
#include "towerlab/numeric.hpp"

namespace towerlab {

struct CoefficientRing {
  enum class Kind { integers, rationals, prime_field };
  Kind kind = Kind::integers;
  long p = 0;  // prime_field only

  static CoefficientRing Z() { return {Kind::integers, 0}; }
  static CoefficientRing Q() { return {Kind::rationals, 0}; }
  static CoefficientRing Fp(long p);

  bool operator==(const CoefficientRing& o) const { return kind == o.kind && p == o.p; }
  bool is_field() const { return kind != Kind::integers; }
  std::string str() const;
};

CoefficientRing parse_ring(const std::string& s);

// Finitely supported sum of c_g * g. Coefficients live in `ring`: Z keeps unit
// denominators, F_p keeps canonical residues in [0, p).
class GroupRingElement {
 public:
  GroupRingElement(const GroupModelSpec& model, const CoefficientRing& ring)
      : model_(model), ring_(ring) {}

  const GroupModelSpec& model() const { return model_; }
  const CoefficientRing& ring() const { return ring_; }
  const std::map<GroupElement, Rat>& terms() const { return terms_; }

  bool is_zero() const { return terms_.empty(); }
  void add_term(const GroupElement& g, const Rat& coeff);
  Rat coefficient(const GroupElement& g) const;
  Rat identity_coefficient() const;

  // Sum of absolute coefficient values; an upper bound for the operator norm
  // in every quotient. Needs an archimedean absolute value, so Z or Q only.
  Rat kappa() const;

  // The involution: sum c_g g  ->  sum c_g g^-1.
  GroupRingElement star() const;

  GroupRingElement operator+(const GroupRingElement& rhs) const;
  GroupRingElement operator-(const GroupRingElement& rhs) const;
  GroupRingElement operator*(const GroupRingElement& rhs) const;
  GroupRingElement scaled(const Rat& c) const;
  bool operator==(const GroupRingElement& rhs) const;

  static GroupRingElement scalar(const GroupModelSpec& model, const CoefficientRing& ring, const Rat& c);

 private:
  GroupModelSpec model_;
  CoefficientRing ring_;
  std::map<GroupElement, Rat> terms_;  // no explicit zeros
};

class GroupRingMatrix {
 public:
  GroupRingMatrix(const GroupModelSpec& model, const CoefficientRing& ring, long rows, long cols);

  const GroupModelSpec& model() const { return model_; }
  const CoefficientRing& ring() const { return ring_; }
  long rows() const { return rows_; }
  long cols() const { return cols_; }

  GroupRingElement& at(long r, long c);
  const GroupRingElement& at(long r, long c) const;

  bool operator==(const GroupRingMatrix& rhs) const;

 private:
  GroupModelSpec model_;
  CoefficientRing ring_;
  long rows_, cols_;
  std::vector<GroupRingElement> entries_;
};

// Entrywise star of the transpose; an anti-homomorphism.
GroupRingMatrix star(const GroupRingMatrix& a);

GroupRingMatrix mat_mul(const GroupRingMatrix& a, const GroupRingMatrix& b);

GroupRingMatrix mat_add(const GroupRingMatrix& a, const GroupRingMatrix& b);

// Sum of entrywise kappa values; submultiplicative and star-invariant.
Rat kappa_bound(const GroupRingMatrix& a);

// Normalized trace: sum of identity coefficients down the diagonal.
Rat vn_trace(const GroupRingMatrix& a);

// a_q * star(a_q) + star(a_q1) * a_q1 with either term optional (degree edges).
// a_q is the boundary leaving the degree, a_q1 the one entering it.
GroupRingMatrix laplacian(const GroupRingMatrix* a_q, const GroupRingMatrix* a_q1);

}  // namespace towerlab
