#include "towerlab/group.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace towerlab {

std::string GroupModelSpec::str() const {
  switch (kind) {
    case GroupKind::free:
      return "free(" + std::to_string(rank) + ")";
    case GroupKind::free_abelian:
      return "free_abelian(" + std::to_string(rank) + ")";
    case GroupKind::heisenberg:
      return "heisenberg";
  }
  return "?";
}

GroupModelSpec make_model(const std::string& kind, int rank) {
  if (kind == "free") {
    if (rank < 1) throw InputError("free group rank must be >= 1");
    return GroupModelSpec::free_group(rank);
  }
  if (kind == "free_abelian") {
    if (rank < 1) throw InputError("free_abelian rank must be >= 1");
    return GroupModelSpec::free_abelian(rank);
  }
  if (kind == "heisenberg") return GroupModelSpec::heisenberg();
  throw InputError("unknown group kind: '" + kind + "'");
}

GroupElement GroupElement::identity(const GroupModelSpec& model) {
  GroupElement g(model);
  if (model.kind != GroupKind::free) g.vec_.assign(model.generators(), Int(0));
  return g;
}

GroupElement GroupElement::generator(const GroupModelSpec& model, int index, const Int& exp) {
  if (index < 0 || index >= model.generators())
    throw InputError("generator index " + std::to_string(index) + " out of range for " + model.str());
  GroupElement g = identity(model);
  if (exp == 0) return g;
  switch (model.kind) {
    case GroupKind::free:
      g.runs_.emplace_back(index, exp);
      break;
    case GroupKind::free_abelian:
      g.vec_[index] = exp;
      break;
    case GroupKind::heisenberg:
      g.vec_[index] = exp;
      break;
  }
  return g;
}

GroupElement GroupElement::heisenberg_triple(const Int& a, const Int& b, const Int& c) {
  GroupElement g = identity(GroupModelSpec::heisenberg());
  g.vec_ = {a, b, c};
  return g;
}

bool GroupElement::is_identity() const {
  if (model_.kind == GroupKind::free) return runs_.empty();
  return std::all_of(vec_.begin(), vec_.end(), [](const Int& v) { return v == 0; });
}

GroupElement GroupElement::inverse() const {
  GroupElement g(model_);
  switch (model_.kind) {
    case GroupKind::free:
      g.runs_.reserve(runs_.size());
      for (auto it = runs_.rbegin(); it != runs_.rend(); ++it) g.runs_.emplace_back(it->first, -it->second);
      break;
    case GroupKind::free_abelian:
      g.vec_.reserve(vec_.size());
      for (const Int& v : vec_) g.vec_.push_back(-v);
      break;
    case GroupKind::heisenberg:
      // (a,b,c)^-1 = (-a, -b, a*b - c)
      g.vec_ = {-vec_[0], -vec_[1], vec_[0] * vec_[1] - vec_[2]};
      break;
  }
  return g;
}

GroupElement GroupElement::operator*(const GroupElement& rhs) const {
  if (!(model_ == rhs.model_)) throw std::invalid_argument("group element model mismatch");
  GroupElement g(model_);
  switch (model_.kind) {
    case GroupKind::free: {
      g.runs_ = runs_;
      for (const auto& run : rhs.runs_) {
        if (!g.runs_.empty() && g.runs_.back().first == run.first) {
          g.runs_.back().second += run.second;
          if (g.runs_.back().second == 0) g.runs_.pop_back();
        } else {
          g.runs_.push_back(run);
        }
      }
      break;
    }
    case GroupKind::free_abelian: {
      g.vec_.reserve(vec_.size());
      for (std::size_t i = 0; i < vec_.size(); ++i) g.vec_.push_back(vec_[i] + rhs.vec_[i]);
      break;
    }
    case GroupKind::heisenberg: {
      g.vec_ = {vec_[0] + rhs.vec_[0], vec_[1] + rhs.vec_[1], vec_[2] + rhs.vec_[2] + vec_[0] * rhs.vec_[1]};
      break;
    }
  }
  return g;
}

std::vector<std::pair<int, Int>> GroupElement::generator_word() const {
  std::vector<std::pair<int, Int>> w;
  switch (model_.kind) {
    case GroupKind::free:
      w = runs_;
      break;
    case GroupKind::free_abelian:
      for (std::size_t i = 0; i < vec_.size(); ++i)
        if (vec_[i] != 0) w.emplace_back(static_cast<int>(i), vec_[i]);
      break;
    case GroupKind::heisenberg: {
      // (a,b,c) = x^a y^b z^(c - a*b)
      Int zexp = vec_[2] - vec_[0] * vec_[1];
      if (vec_[0] != 0) w.emplace_back(0, vec_[0]);
      if (vec_[1] != 0) w.emplace_back(1, vec_[1]);
      if (zexp != 0) w.emplace_back(2, zexp);
      break;
    }
  }
  return w;
}

std::string GroupElement::word() const {
  std::ostringstream out;
  bool first = true;
  for (const auto& [gen, exp] : generator_word()) {
    if (!first) out << ' ';
    first = false;
    out << 'g' << gen;
    if (exp != 1) out << '^' << exp.get_str();
  }
  return out.str();
}

bool GroupElement::operator==(const GroupElement& o) const {
  return model_ == o.model_ && runs_ == o.runs_ && vec_ == o.vec_;
}

bool GroupElement::operator<(const GroupElement& o) const {
  if (model_.kind == GroupKind::free) {
    if (runs_.size() != o.runs_.size()) return runs_.size() < o.runs_.size();
    for (std::size_t i = 0; i < runs_.size(); ++i) {
      if (runs_[i].first != o.runs_[i].first) return runs_[i].first < o.runs_[i].first;
      int c = cmp(runs_[i].second, o.runs_[i].second);
      if (c != 0) return c < 0;
    }
    return false;
  }
  for (std::size_t i = 0; i < vec_.size(); ++i) {
    int c = cmp(vec_[i], o.vec_[i]);
    if (c != 0) return c < 0;
  }
  return false;
}

GroupElement parse_word(const GroupModelSpec& model, const std::string& text) {
  GroupElement g = GroupElement::identity(model);
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    if (tok.size() < 2 || tok[0] != 'g') throw InputError("malformed word token: '" + tok + "'");
    auto caret = tok.find('^');
    std::string idx_part = tok.substr(1, caret == std::string::npos ? std::string::npos : caret - 1);
    Int idx = parse_int(idx_part);
    if (idx < 0 || idx >= model.generators()) throw InputError("word token out of range: '" + tok + "'");
    Int exp = 1;
    if (caret != std::string::npos) {
      if (caret + 1 >= tok.size()) throw InputError("malformed word token: '" + tok + "'");
      exp = parse_int(tok.substr(caret + 1));
    }
    g = g * GroupElement::generator(model, static_cast<int>(idx.get_si()), exp);
  }
  return g;
}

Perm perm_identity(int n) {
  Perm p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  return p;
}

bool perm_is_valid(const Perm& p) {
  std::vector<char> seen(p.size(), 0);
  for (int v : p) {
    if (v < 0 || static_cast<std::size_t>(v) >= p.size() || seen[v]) return false;
    seen[v] = 1;
  }
  return true;
}

bool perm_is_identity(const Perm& p) {
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] != static_cast<int>(i)) return false;
  return true;
}

Perm perm_compose(const Perm& a, const Perm& b) {
  if (a.size() != b.size()) throw std::invalid_argument("perm size mismatch");
  Perm r(a.size());
  for (std::size_t i = 0; i < b.size(); ++i) r[i] = a[b[i]];
  return r;
}

Perm perm_inverse(const Perm& p) {
  Perm r(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) r[p[i]] = static_cast<int>(i);
  return r;
}

Perm perm_power(const Perm& p, const Int& e) {
  Perm base = e < 0 ? perm_inverse(p) : p;
  Int n = abs(e);
  Perm acc = perm_identity(static_cast<int>(p.size()));
  std::size_t bits = mpz_sizeinbase(n.get_mpz_t(), 2);
  if (n == 0) return acc;
  // Square-and-multiply over the bits of |e|; no order reduction needed.
  for (std::size_t i = bits; i-- > 0;) {
    acc = perm_compose(acc, acc);
    if (mpz_tstbit(n.get_mpz_t(), i)) acc = perm_compose(acc, base);
  }
  return acc;
}

QuotientValidation validate_quotient(const FiniteQuotient& q) {
  QuotientValidation v;
  if (q.order < 1) {
    v.message = "order must be >= 1";
    return v;
  }
  for (const Perm& g : q.generator_images) {
    if (static_cast<long>(g.size()) != q.order || !perm_is_valid(g)) {
      v.message = "generator image is not a permutation of the stated order";
      return v;
    }
  }
  v.shapes_ok = true;

  // Transitivity: orbit of 0 under the generated group (forward edges suffice
  // since every permutation has finite order).
  std::vector<char> reach(q.order, 0);
  std::vector<int> stack = {0};
  reach[0] = 1;
  long reached = 1;
  while (!stack.empty()) {
    int x = stack.back();
    stack.pop_back();
    for (const Perm& g : q.generator_images) {
      if (!reach[g[x]]) {
        reach[g[x]] = 1;
        ++reached;
        stack.push_back(g[x]);
      }
    }
  }
  v.transitive = reached == q.order;

  // Closure under composition, capped at order + 1 elements.
  std::set<Perm> closure;
  std::vector<Perm> frontier;
  closure.insert(perm_identity(static_cast<int>(q.order)));
  frontier.push_back(*closure.begin());
  bool fixed_point = false;
  while (!frontier.empty() && static_cast<long>(closure.size()) <= q.order) {
    Perm cur = std::move(frontier.back());
    frontier.pop_back();
    for (const Perm& g : q.generator_images) {
      Perm next = perm_compose(cur, g);
      if (closure.insert(next).second) {
        if (!perm_is_identity(next)) {
          for (std::size_t i = 0; i < next.size(); ++i) {
            if (next[i] == static_cast<int>(i)) {
              fixed_point = true;
              break;
            }
          }
        }
        frontier.push_back(std::move(next));
        if (static_cast<long>(closure.size()) > q.order) break;
      }
    }
  }
  v.closure_size = static_cast<long>(closure.size());
  v.free_action = !fixed_point;
  v.order_ok = v.closure_size == q.order;
  v.ok = v.transitive && v.free_action && v.order_ok;
  if (!v.transitive)
    v.message = "action is not transitive";
  else if (!v.free_action)
    v.message = "non-identity element fixes a point";
  else if (!v.order_ok)
    v.message = "closure size does not match the stated order";
  return v;
}

Perm quotient_image(const GroupElement& g, const FiniteQuotient& q) {
  Perm acc = perm_identity(static_cast<int>(q.order));
  for (const auto& [gen, exp] : g.generator_word()) {
    if (gen < 0 || static_cast<std::size_t>(gen) >= q.generator_images.size())
      throw InputError("element uses generator missing from quotient");
    acc = perm_compose(acc, perm_power(q.generator_images[gen], exp));
  }
  return acc;
}

std::vector<Perm> enumerate_elements(const FiniteQuotient& q) {
  if (q.order > 8192) throw InputError("quotient too large to enumerate (order > 8192)");
  QuotientValidation v = validate_quotient(q);
  if (!v.ok) throw InvariantError("enumerate_elements on invalid quotient: " + v.message);
  std::vector<Perm> elems(q.order);
  std::vector<char> have(q.order, 0);
  std::vector<Perm> frontier;
  elems[0] = perm_identity(static_cast<int>(q.order));
  have[0] = 1;
  frontier.push_back(elems[0]);
  while (!frontier.empty()) {
    Perm cur = std::move(frontier.back());
    frontier.pop_back();
    for (const Perm& g : q.generator_images) {
      Perm next = perm_compose(cur, g);
      int pt = next[0];
      if (!have[pt]) {
        have[pt] = 1;
        elems[pt] = next;
        frontier.push_back(std::move(next));
      }
    }
  }
  return elems;
}

TowerValidation validate_tower(const Tower& t, const GroupModelSpec& model) {
  TowerValidation r;
  if (t.levels.empty()) {
    r.message = "tower has no levels";
    return r;
  }
  for (std::size_t i = 0; i < t.levels.size(); ++i) {
    const FiniteQuotient& q = t.levels[i];
    if (static_cast<int>(q.generator_images.size()) != model.generators()) {
      r.message = "level " + std::to_string(i + 1) + ": generator count does not match " + model.str();
      return r;
    }
    QuotientValidation v = validate_quotient(q);
    if (!v.ok) {
      r.message = "level " + std::to_string(i + 1) + ": " + v.message;
      return r;
    }
    if (i > 0 && t.levels[i].order <= t.levels[i - 1].order) {
      r.message = "orders are not strictly increasing at level " + std::to_string(i + 1);
      return r;
    }
  }
  if (t.has_maps()) {
    if (t.maps.size() != t.levels.size() - 1) {
      r.message = "maps must have one entry per consecutive level pair";
      return r;
    }
    for (std::size_t i = 0; i < t.maps.size(); ++i) {
      const auto& f = t.maps[i];
      const FiniteQuotient& hi = t.levels[i + 1];
      const FiniteQuotient& lo = t.levels[i];
      if (hi.order % lo.order != 0) {
        r.message = "level " + std::to_string(i + 2) + " order is not a multiple of level " + std::to_string(i + 1);
        return r;
      }
      if (static_cast<long>(f.size()) != hi.order) {
        r.message = "map " + std::to_string(i + 1) + " has wrong domain size";
        return r;
      }
      for (int y : f) {
        if (y < 0 || y >= lo.order) {
          r.message = "map " + std::to_string(i + 1) + " has out-of-range values";
          return r;
        }
      }
      if (f[0] != 0) {
        r.message = "map " + std::to_string(i + 1) + " does not fix the identity coset";
        return r;
      }
      for (std::size_t k = 0; k < hi.generator_images.size(); ++k) {
        for (long x = 0; x < hi.order; ++x) {
          if (f[hi.generator_images[k][x]] != lo.generator_images[k][f[x]]) {
            r.message = "map " + std::to_string(i + 1) + " does not commute with generator " + std::to_string(k);
            return r;
          }
        }
      }
    }
  }
  r.ok = true;
  return r;
}

TowerFamily parse_tower_family(const std::string& name) {
  if (name == "congruence") return TowerFamily::congruence;
  if (name == "abelianized") return TowerFamily::abelianized;
  throw InputError("unknown tower family: '" + name + "'");
}

std::string tower_family_str(TowerFamily f) {
  return f == TowerFamily::congruence ? "congruence" : "abelianized";
}

namespace {

constexpr long kMaxLevelOrder = 2'000'000;

long checked_pow(long p, int k) {
  Int v = 1;
  for (int i = 0; i < k; ++i) v *= p;
  if (!v.fits_slong_p() || v.get_si() > kMaxLevelOrder) throw InputError("builtin tower level too large");
  return v.get_si();
}

// (Z/q)^n with points encoded little-endian mixed radix.
FiniteQuotient abelian_level(int n, long q, const std::string& label) {
  Int total = 1;
  for (int i = 0; i < n; ++i) total *= q;
  if (!total.fits_slong_p() || total.get_si() > kMaxLevelOrder) throw InputError("builtin tower level too large");
  long m = total.get_si();
  FiniteQuotient quo;
  quo.order = m;
  quo.label = label;
  std::vector<long> stride(n);
  long s = 1;
  for (int i = 0; i < n; ++i) {
    stride[i] = s;
    s *= q;
  }
  for (int gen = 0; gen < n; ++gen) {
    Perm perm(m);
    for (long x = 0; x < m; ++x) {
      long coord = (x / stride[gen]) % q;
      perm[x] = coord + 1 < q ? x + stride[gen] : x + stride[gen] - stride[gen] * q;
    }
    quo.generator_images.push_back(std::move(perm));
  }
  return quo;
}

// H3(Z/q): triples (a, b, c) encoded a + q*b + q^2*c, generators acting by
// left translation: x.(a,b,c) = (a+1, b, c+b), y.(a,b,c) = (a, b+1, c),
// z.(a,b,c) = (a, b, c+1).
FiniteQuotient heisenberg_level(long q, const std::string& label) {
  Int total = Int(q) * q * q;
  if (!total.fits_slong_p() || total.get_si() > kMaxLevelOrder) throw InputError("builtin tower level too large");
  long m = total.get_si();
  FiniteQuotient quo;
  quo.order = m;
  quo.label = label;
  auto enc = [q](long a, long b, long c) { return a + q * b + q * q * c; };
  Perm px(m), py(m), pz(m);
  for (long a = 0; a < q; ++a) {
    for (long b = 0; b < q; ++b) {
      for (long c = 0; c < q; ++c) {
        long x = enc(a, b, c);
        px[x] = enc((a + 1) % q, b, (c + b) % q);
        py[x] = enc(a, (b + 1) % q, c);
        pz[x] = enc(a, b, (c + 1) % q);
      }
    }
  }
  quo.generator_images = {std::move(px), std::move(py), std::move(pz)};
  return quo;
}

std::vector<int> abelian_map(int n, long q_hi, long q_lo) {
  long m_hi = 1, m_lo = 1;
  for (int i = 0; i < n; ++i) {
    m_hi *= q_hi;
    m_lo *= q_lo;
  }
  std::vector<int> f(m_hi);
  for (long x = 0; x < m_hi; ++x) {
    long rest = x, out = 0, s = 1;
    for (int i = 0; i < n; ++i) {
      long coord = rest % q_hi;
      rest /= q_hi;
      out += (coord % q_lo) * s;
      s *= q_lo;
    }
    f[x] = static_cast<int>(out);
  }
  return f;
}

std::vector<int> heisenberg_map(long q_hi, long q_lo) {
  long m_hi = q_hi * q_hi * q_hi;
  std::vector<int> f(m_hi);
  for (long x = 0; x < m_hi; ++x) {
    long a = x % q_hi, b = (x / q_hi) % q_hi, c = x / (q_hi * q_hi);
    f[x] = static_cast<int>((a % q_lo) + q_lo * (b % q_lo) + q_lo * q_lo * (c % q_lo));
  }
  return f;
}

}  // namespace

Tower make_builtin_tower(const GroupModelSpec& model, TowerFamily family, long p, int depth) {
  if (!is_small_prime(p)) throw InputError("tower parameter p = " + std::to_string(p) + " is not prime");
  if (depth < 1) throw InputError("tower depth must be >= 1");
  bool supported = (model.kind == GroupKind::free_abelian) ||
                   (model.kind == GroupKind::heisenberg && family == TowerFamily::congruence) ||
                   (model.kind == GroupKind::free && family == TowerFamily::abelianized);
  if (!supported)
    throw InputError("unsupported tower family '" + tower_family_str(family) + "' for model " + model.str());

  Tower t;
  int n = model.generators();
  for (int k = 1; k <= depth; ++k) {
    long q = checked_pow(p, k);
    std::string base = "Z/" + std::to_string(p) + "^" + std::to_string(k);
    if (model.kind == GroupKind::heisenberg) {
      t.levels.push_back(heisenberg_level(q, "H3(" + base + ")"));
    } else {
      t.levels.push_back(abelian_level(n, q, "(" + base + ")^" + std::to_string(n)));
    }
    if (k > 1) {
      long q_lo = checked_pow(p, k - 1);
      if (model.kind == GroupKind::heisenberg)
        t.maps.push_back(heisenberg_map(q, q_lo));
      else
        t.maps.push_back(abelian_map(n, q, q_lo));
    }
  }
  return t;
}

}  // namespace towerlab
