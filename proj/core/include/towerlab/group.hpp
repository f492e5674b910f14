#pragma once

#include <compare>
#include <string>
#include <utility>
#include <vector>

#include "towerlab/numeric.hpp"

namespace towerlab {

enum class GroupKind { free, free_abelian, heisenberg };

// One of the three supported ambient groups: F_d, Z^n, or the integer
// Heisenberg group H3 with fixed generators x, y, z = [x,y] (z central).
struct GroupModelSpec {
  GroupKind kind = GroupKind::free;
  int rank = 1;  // generator count for free / free_abelian; ignored for heisenberg

  int generators() const { return kind == GroupKind::heisenberg ? 3 : rank; }
  bool operator==(const GroupModelSpec& o) const {
    return kind == o.kind && generators() == o.generators();
  }

  static GroupModelSpec free_group(int d) { return {GroupKind::free, d}; }
  static GroupModelSpec free_abelian(int n) { return {GroupKind::free_abelian, n}; }
  static GroupModelSpec heisenberg() { return {GroupKind::heisenberg, 3}; }

  std::string str() const;
};

GroupModelSpec make_model(const std::string& kind, int rank);

// Element in canonical form. free: reduced word stored as runs (gen, exp) with
// nonzero exponents and distinct adjacent generators. free_abelian: exponent
// vector. heisenberg: normal form (a, b, c) with
// (a,b,c)(a',b',c') = (a+a', b+b', c+c'+a*b').
class GroupElement {
 public:
  static GroupElement identity(const GroupModelSpec& model);
  static GroupElement generator(const GroupModelSpec& model, int index, const Int& exp = 1);
  static GroupElement heisenberg_triple(const Int& a, const Int& b, const Int& c);

  const GroupModelSpec& model() const { return model_; }
  bool is_identity() const;
  GroupElement inverse() const;
  GroupElement operator*(const GroupElement& rhs) const;

  // Factorization g = prod_i gen[i]^exp[i], left to right. Canonical per model;
  // empty for the identity.
  std::vector<std::pair<int, Int>> generator_word() const;

  // Word syntax used by data files: "g0 g2^-3", "" for the identity.
  std::string word() const;

  bool operator==(const GroupElement& o) const;
  bool operator<(const GroupElement& o) const;  // arbitrary but deterministic total order

  const std::vector<Int>& abelian_vec() const { return vec_; }

 private:
  explicit GroupElement(const GroupModelSpec& model) : model_(model) {}
  GroupModelSpec model_;
  std::vector<std::pair<int, Int>> runs_;  // free only
  std::vector<Int> vec_;                   // free_abelian: length rank; heisenberg: (a, b, c)
};

// "g0 g1^-2" -> element; validates token syntax and generator range.
GroupElement parse_word(const GroupModelSpec& model, const std::string& text);

using Perm = std::vector<int>;

Perm perm_identity(int n);
bool perm_is_valid(const Perm& p);
bool perm_is_identity(const Perm& p);
// (a o b)(x) = a[b[x]].
Perm perm_compose(const Perm& a, const Perm& b);
Perm perm_inverse(const Perm& p);
Perm perm_power(const Perm& p, const Int& e);

// Finite quotient G -> Sym(order) given by generator images; valid quotients
// are regular: transitive, free, and |image| == order, so points are the
// elements of the quotient group with 0 the identity coset.
struct FiniteQuotient {
  std::vector<Perm> generator_images;
  long order = 1;
  std::string label;
};

struct QuotientValidation {
  bool ok = false;
  bool shapes_ok = false;
  bool transitive = false;
  bool free_action = false;
  bool order_ok = false;
  long closure_size = 0;  // capped at order + 1
  std::string message;    // names the first violated condition
};

QuotientValidation validate_quotient(const FiniteQuotient& q);

// Multiplicative: image(g*h) = image(g) o image(h). Exponents are reduced mod
// the permutation order, so huge word exponents are fine.
Perm quotient_image(const GroupElement& g, const FiniteQuotient& q);

// All elements of a valid regular quotient, indexed by their image of point 0
// (elems[x](0) == x). Throws InvariantError if the quotient is not regular.
std::vector<Perm> enumerate_elements(const FiniteQuotient& q);

// Increasing chain of finite quotients. maps, when present, has one entry per
// consecutive pair: maps[i] sends level-(i+1) points onto level-i points and
// commutes with all generator images.
struct Tower {
  std::vector<FiniteQuotient> levels;
  std::vector<std::vector<int>> maps;

  bool has_maps() const { return !maps.empty(); }
};

struct TowerValidation {
  bool ok = false;
  std::string message;
};

TowerValidation validate_tower(const Tower& t, const GroupModelSpec& model);

enum class TowerFamily { congruence, abelianized };

TowerFamily parse_tower_family(const std::string& name);
std::string tower_family_str(TowerFamily f);

// Built-in p-power towers with compatibility maps:
//   congruence + free_abelian: (Z/p^k)^n, k = 1..depth
//   congruence + heisenberg:   H3(Z/p^k), order p^(3k)
//   abelianized + free:        F_d -> (Z/p^k)^d
//   abelianized + free_abelian: same as congruence
// Other pairs throw InputError, as do non-prime p and absurd level sizes.
Tower make_builtin_tower(const GroupModelSpec& model, TowerFamily family, long p, int depth);

}  // namespace towerlab
