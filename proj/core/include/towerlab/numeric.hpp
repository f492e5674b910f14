#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace towerlab {

using Int = mpz_class;
using Rat = mpq_class;

// Bad user input (malformed files, unsupported parameter combinations). CLI exit code 1.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A mathematical invariant the library promises to uphold failed. CLI exit code 2.
struct InvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Canonicalized rational from a possibly non-reduced num/den pair.
Rat make_rat(const Int& num, const Int& den);

// "num/den" with an explicit denominator, e.g. "5/4", "1/1", "-3/2".
std::string rat_str(const Rat& v);

// Parses "n" or "n/d" (optional sign, decimal digits). Throws InputError.
Rat parse_rat(const std::string& s);

// Parses a decimal integer string. Throws InputError.
Int parse_int(const std::string& s);

// Fixed float formatting for data files: 12 significant digits.
std::string float_str(double v);

// log|v| for a nonzero integer of any magnitude.
double log_abs(const Int& v);

double to_double(const Rat& v);

bool is_prime_u64(std::uint64_t n);

// Trial-division primality for small tower/field parameters.
bool is_small_prime(long p);

// Uniform probable prime in [2^60, 2^61). Used by the randomized rank engine.
std::uint64_t random_prime_60bit(std::mt19937_64& rng);

std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t m);
std::uint64_t powmod_u64(std::uint64_t b, std::uint64_t e, std::uint64_t m);
std::uint64_t invmod_u64(std::uint64_t a, std::uint64_t m);

}  // namespace towerlab
