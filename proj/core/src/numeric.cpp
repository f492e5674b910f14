#include "towerlab/numeric.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>

namespace towerlab {

Rat make_rat(const Int& num, const Int& den) {
  if (den == 0) throw InputError("rational with zero denominator");
  Rat r(num, den);
  r.canonicalize();
  return r;
}

std::string rat_str(const Rat& v) {
  return v.get_num().get_str() + "/" + v.get_den().get_str();
}

namespace {

bool is_decimal(const std::string& s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

}  // namespace

Int parse_int(const std::string& s) {
  if (!is_decimal(s)) throw InputError("malformed integer: '" + s + "'");
  return Int(s, 10);
}

Rat parse_rat(const std::string& s) {
  auto slash = s.find('/');
  if (slash == std::string::npos) return Rat(parse_int(s));
  Int num = parse_int(s.substr(0, slash));
  Int den = parse_int(s.substr(slash + 1));
  return make_rat(num, den);
}

std::string float_str(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double log_abs(const Int& v) {
  if (v == 0) throw std::invalid_argument("log_abs(0)");
  long exp2 = 0;
  double mant = mpz_get_d_2exp(&exp2, v.get_mpz_t());
  return std::log(std::fabs(mant)) + static_cast<double>(exp2) * std::log(2.0);
}

double to_double(const Rat& v) { return mpq_get_d(v.get_mpq_t()); }

std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

std::uint64_t powmod_u64(std::uint64_t b, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  b %= m;
  while (e) {
    if (e & 1) r = mulmod_u64(r, b, m);
    b = mulmod_u64(b, b, m);
    e >>= 1;
  }
  return r;
}

std::uint64_t invmod_u64(std::uint64_t a, std::uint64_t m) {
  // Extended Euclid; requires gcd(a, m) = 1.
  std::int64_t t = 0, newt = 1;
  std::uint64_t r = m, newr = a % m;
  while (newr != 0) {
    std::uint64_t q = r / newr;
    std::int64_t t2 = t - static_cast<std::int64_t>(q) * newt;
    t = newt;
    newt = t2;
    std::uint64_t r2 = r - q * newr;
    r = newr;
    newr = r2;
  }
  if (r != 1) throw InputError("invmod: not invertible");
  return t < 0 ? static_cast<std::uint64_t>(t + static_cast<std::int64_t>(m)) : static_cast<std::uint64_t>(t);
}

bool is_prime_u64(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // These witnesses are a complete deterministic Miller-Rabin base set for 64-bit inputs.
  for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    std::uint64_t x = powmod_u64(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool witness = true;
    for (int i = 1; i < s; ++i) {
      x = mulmod_u64(x, x, n);
      if (x == n - 1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

bool is_small_prime(long p) {
  if (p < 2) return false;
  for (long d = 2; d * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

std::uint64_t random_prime_60bit(std::mt19937_64& rng) {
  const std::uint64_t lo = 1ull << 60, hi = 1ull << 61;
  std::uniform_int_distribution<std::uint64_t> dist(lo, hi - 1);
  for (;;) {
    std::uint64_t c = dist(rng) | 1;
    if (is_prime_u64(c)) return c;
  }
}

}  // namespace towerlab
