#include <doctest.h>

#include <cmath>
#include <random>

#include "towerlab/numeric.hpp"

using namespace towerlab;

TEST_CASE("rationals are canonical and printed as num/den") {
  CHECK(rat_str(make_rat(1, 1)) == "1/1");
  CHECK(rat_str(make_rat(2, 4)) == "1/2");
  CHECK(rat_str(make_rat(-2, 4)) == "-1/2");
  CHECK(rat_str(make_rat(3, -6)) == "-1/2");
  CHECK(rat_str(make_rat(0, 7)) == "0/1");
  CHECK_THROWS_AS(make_rat(1, 0), InputError);
}

TEST_CASE("integer and rational parsing is strict") {
  CHECK(parse_int("42") == 42);
  CHECK(parse_int("-7") == -7);
  CHECK(parse_int("0") == 0);
  CHECK_THROWS_AS(parse_int(""), InputError);
  CHECK_THROWS_AS(parse_int("4 2"), InputError);
  CHECK_THROWS_AS(parse_int("0x10"), InputError);
  CHECK_THROWS_AS(parse_int("1.5"), InputError);

  CHECK(parse_rat("3") == Rat(3));
  CHECK(parse_rat("-3/6") == make_rat(-1, 2));
  CHECK_THROWS_AS(parse_rat("1/0"), InputError);
  CHECK_THROWS_AS(parse_rat("1/"), InputError);
  CHECK_THROWS_AS(parse_rat("/2"), InputError);
}

TEST_CASE("floats print with 12 significant digits") {
  CHECK(float_str(0.0) == "0");
  CHECK(float_str(1.0) == "1");
  CHECK(float_str(0.5) == "0.5");
  CHECK(float_str(2.0 / 3.0) == "0.666666666667");
}

TEST_CASE("log_abs matches double log for representable values") {
  for (long v : {1L, 2L, 10L, 999983L}) {
    CHECK(std::abs(log_abs(Int(v)) - std::log(static_cast<double>(v))) < 1e-12);
    CHECK(std::abs(log_abs(Int(-v)) - std::log(static_cast<double>(v))) < 1e-12);
  }
  // 2^200: far beyond double range for the value itself, fine for its log.
  Int big = 1;
  for (int i = 0; i < 200; ++i) big *= 2;
  CHECK(std::abs(log_abs(big) - 200 * std::log(2.0)) < 1e-9);
}

TEST_CASE("64-bit primality and modular arithmetic") {
  CHECK(is_prime_u64(2));
  CHECK(is_prime_u64(3));
  CHECK(!is_prime_u64(1));
  CHECK(!is_prime_u64(561));  // Carmichael
  CHECK(is_prime_u64(1000003));
  CHECK(is_prime_u64((1ull << 61) - 1));  // Mersenne
  CHECK(!is_prime_u64((1ull << 62) - 1));

  CHECK(is_small_prime(2));
  CHECK(is_small_prime(97));
  CHECK(!is_small_prime(1));
  CHECK(!is_small_prime(91));

  const std::uint64_t p = 1000003;
  CHECK(mulmod_u64(p - 1, p - 1, p) == 1);  // (-1)^2
  CHECK(powmod_u64(5, p - 1, p) == 1);      // Fermat
  CHECK(mulmod_u64(invmod_u64(7, p), 7, p) == 1);
  CHECK_THROWS_AS(invmod_u64(6, 9), InputError);
}

TEST_CASE("random 60-bit primes are prime, odd, and in range") {
  std::mt19937_64 rng(12345);
  for (int i = 0; i < 5; ++i) {
    std::uint64_t p = random_prime_60bit(rng);
    CHECK(p >= (1ull << 60));
    CHECK(p < (1ull << 61));
    CHECK(is_prime_u64(p));
  }
  // Same seed, same sequence.
  std::mt19937_64 a(7), b(7);
  CHECK(random_prime_60bit(a) == random_prime_60bit(b));
}
