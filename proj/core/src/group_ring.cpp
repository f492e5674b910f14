#include "towerlab/group_ring.hpp"

#include <cstdlib>

namespace towerlab {

CoefficientRing CoefficientRing::Fp(long p) {
  if (!is_small_prime(p)) throw InputError("F_p requires prime p, got " + std::to_string(p));
  return {Kind::prime_field, p};
}

std::string CoefficientRing::str() const {
  switch (kind) {
    case Kind::integers:
      return "Z";
    case Kind::rationals:
      return "Q";
    case Kind::prime_field:
      return "F" + std::to_string(p);
  }
  return "?";
}

CoefficientRing parse_ring(const std::string& s) {
  if (s == "Z") return CoefficientRing::Z();
  if (s == "Q") return CoefficientRing::Q();
  if (s.size() >= 2 && s[0] == 'F') {
    long p = std::strtol(s.c_str() + 1, nullptr, 10);
    return CoefficientRing::Fp(p);
  }
  throw InputError("unknown coefficient ring: '" + s + "'");
}

namespace {

// Canonical representative of v in the ring: residue in [0, p) for F_p,
// unchanged otherwise. Z-membership is enforced where values enter the ring.
Rat ring_normalize(const Rat& v, const CoefficientRing& ring) {
  if (ring.kind != CoefficientRing::Kind::prime_field) return v;
  if (v.get_den() % ring.p == 0) throw InputError("denominator not invertible in " + ring.str());
  Int num = v.get_num() % ring.p;
  Int den = v.get_den() % ring.p;
  if (num < 0) num += ring.p;
  // num * den^-1 mod p via Fermat.
  Int dinv = 1, base = den, e = ring.p - 2;
  while (e > 0) {
    if (mpz_tstbit(e.get_mpz_t(), 0)) dinv = dinv * base % ring.p;
    base = base * base % ring.p;
    e >>= 1;
  }
  return Rat(num * dinv % ring.p);
}

void check_value_in_ring(const Rat& v, const CoefficientRing& ring) {
  if (ring.kind == CoefficientRing::Kind::integers && v.get_den() != 1)
    throw InputError("non-integer coefficient in ring Z");
}

}  // namespace

void GroupRingElement::add_term(const GroupElement& g, const Rat& coeff) {
  if (!(g.model() == model_)) throw std::invalid_argument("term model mismatch");
  check_value_in_ring(coeff, ring_);
  Rat c = ring_normalize(coeff, ring_);
  auto it = terms_.find(g);
  if (it == terms_.end()) {
    if (c != 0) terms_.emplace(g, c);
    return;
  }
  it->second = ring_normalize(it->second + c, ring_);
  if (it->second == 0) terms_.erase(it);
}

Rat GroupRingElement::coefficient(const GroupElement& g) const {
  auto it = terms_.find(g);
  return it == terms_.end() ? Rat(0) : it->second;
}

Rat GroupRingElement::identity_coefficient() const {
  return coefficient(GroupElement::identity(model_));
}

Rat GroupRingElement::kappa() const {
  if (ring_.kind == CoefficientRing::Kind::prime_field)
    throw InputError("kappa needs coefficients in Z or Q");
  Rat sum = 0;
  for (const auto& [g, c] : terms_) sum += abs(c);
  return sum;
}

GroupRingElement GroupRingElement::star() const {
  GroupRingElement out(model_, ring_);
  for (const auto& [g, c] : terms_) out.add_term(g.inverse(), c);
  return out;
}

GroupRingElement GroupRingElement::operator+(const GroupRingElement& rhs) const {
  if (!(model_ == rhs.model_) || !(ring_ == rhs.ring_)) throw std::invalid_argument("ring/model mismatch");
  GroupRingElement out = *this;
  for (const auto& [g, c] : rhs.terms_) out.add_term(g, c);
  return out;
}

GroupRingElement GroupRingElement::operator-(const GroupRingElement& rhs) const {
  return *this + rhs.scaled(Rat(-1));
}

GroupRingElement GroupRingElement::operator*(const GroupRingElement& rhs) const {
  if (!(model_ == rhs.model_) || !(ring_ == rhs.ring_)) throw std::invalid_argument("ring/model mismatch");
  GroupRingElement out(model_, ring_);
  for (const auto& [g, cg] : terms_)
    for (const auto& [h, ch] : rhs.terms_) out.add_term(g * h, cg * ch);
  return out;
}

GroupRingElement GroupRingElement::scaled(const Rat& c) const {
  GroupRingElement out(model_, ring_);
  for (const auto& [g, cg] : terms_) out.add_term(g, cg * c);
  return out;
}

bool GroupRingElement::operator==(const GroupRingElement& rhs) const {
  return model_ == rhs.model_ && ring_ == rhs.ring_ && terms_ == rhs.terms_;
}

GroupRingElement GroupRingElement::scalar(const GroupModelSpec& model, const CoefficientRing& ring, const Rat& c) {
  GroupRingElement out(model, ring);
  out.add_term(GroupElement::identity(model), c);
  return out;
}

GroupRingMatrix::GroupRingMatrix(const GroupModelSpec& model, const CoefficientRing& ring, long rows, long cols)
    : model_(model), ring_(ring), rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("negative matrix shape");
  entries_.assign(static_cast<std::size_t>(rows) * cols, GroupRingElement(model, ring));
}

GroupRingElement& GroupRingMatrix::at(long r, long c) {
  return entries_.at(static_cast<std::size_t>(r) * cols_ + c);
}

const GroupRingElement& GroupRingMatrix::at(long r, long c) const {
  return entries_.at(static_cast<std::size_t>(r) * cols_ + c);
}

bool GroupRingMatrix::operator==(const GroupRingMatrix& rhs) const {
  return model_ == rhs.model_ && ring_ == rhs.ring_ && rows_ == rhs.rows_ && cols_ == rhs.cols_ &&
         entries_ == rhs.entries_;
}

GroupRingMatrix star(const GroupRingMatrix& a) {
  GroupRingMatrix out(a.model(), a.ring(), a.cols(), a.rows());
  for (long r = 0; r < a.rows(); ++r)
    for (long c = 0; c < a.cols(); ++c) out.at(c, r) = a.at(r, c).star();
  return out;
}

GroupRingMatrix mat_mul(const GroupRingMatrix& a, const GroupRingMatrix& b) {
  if (!(a.model() == b.model()) || !(a.ring() == b.ring())) throw std::invalid_argument("ring/model mismatch");
  if (a.cols() != b.rows()) throw std::invalid_argument("matrix shape mismatch");
  GroupRingMatrix out(a.model(), a.ring(), a.rows(), b.cols());
  for (long r = 0; r < a.rows(); ++r) {
    for (long k = 0; k < a.cols(); ++k) {
      if (a.at(r, k).is_zero()) continue;
      for (long c = 0; c < b.cols(); ++c) {
        if (b.at(k, c).is_zero()) continue;
        out.at(r, c) = out.at(r, c) + a.at(r, k) * b.at(k, c);
      }
    }
  }
  return out;
}

GroupRingMatrix mat_add(const GroupRingMatrix& a, const GroupRingMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("matrix shape mismatch");
  GroupRingMatrix out(a.model(), a.ring(), a.rows(), a.cols());
  for (long r = 0; r < a.rows(); ++r)
    for (long c = 0; c < a.cols(); ++c) out.at(r, c) = a.at(r, c) + b.at(r, c);
  return out;
}

Rat kappa_bound(const GroupRingMatrix& a) {
  Rat sum = 0;
  for (long r = 0; r < a.rows(); ++r)
    for (long c = 0; c < a.cols(); ++c) sum += a.at(r, c).kappa();
  return sum;
}

Rat vn_trace(const GroupRingMatrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("vn_trace needs a square matrix");
  Rat sum = 0;
  for (long i = 0; i < a.rows(); ++i) sum += a.at(i, i).identity_coefficient();
  return sum;
}

GroupRingMatrix laplacian(const GroupRingMatrix* a_q, const GroupRingMatrix* a_q1) {
  if (!a_q && !a_q1) throw std::invalid_argument("laplacian needs at least one boundary");
  if (a_q && a_q1 && a_q1->cols() != a_q->rows()) throw std::invalid_argument("boundary shapes do not compose");
  if (a_q) {
    GroupRingMatrix out = mat_mul(*a_q, star(*a_q));
    if (a_q1) out = mat_add(out, mat_mul(star(*a_q1), *a_q1));
    return out;
  }
  return mat_mul(star(*a_q1), *a_q1);
}

}  // namespace towerlab
