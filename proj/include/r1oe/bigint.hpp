#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <vector>

namespace r1oe {

using BigInt = mpz_class;
using Rational = mpq_class;

std::string to_dec(const BigInt& x);
std::string to_dec(const Rational& x);

// Parses an optionally signed decimal integer; throws std::invalid_argument.
BigInt parse_dec(const std::string& s);

bool fits_i64(const BigInt& x);
std::int64_t to_i64(const BigInt& x);

// Product that strips trailing zero bits first. Scheduled cutting values are
// a few hundred significant bits followed by a very long run of zeros.
BigInt mul_sparse(const BigInt& a, const BigInt& b);

// floor(a / b) for b > 0.
BigInt floor_div(const BigInt& a, const BigInt& b);

Rational make_rational(const BigInt& num, const BigInt& den);

BigInt pow2(unsigned long e);

// Prime factorization by trial division up to `limit`; the last entry may be
// an unfactored cofactor (reported with multiplicity 0).
std::vector<std::pair<BigInt, unsigned>> trial_factor(BigInt n, unsigned long limit = 1000000);

bool is_prime_u64(std::uint64_t n);

}  // namespace r1oe
