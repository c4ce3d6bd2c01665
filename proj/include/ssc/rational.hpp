#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace ssc {

using BigInt = mpz_class;
using Rational = mpq_class;

BigInt binomial(std::uint64_t n, std::uint64_t k);
Rational pow2(long exponent);
Rational make_rational(long num, long den);
std::string to_string(const Rational& q);
double to_double(const Rational& q);

}  // namespace ssc
