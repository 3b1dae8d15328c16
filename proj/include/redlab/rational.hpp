#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace redlab {

using BigInt = boost::multiprecision::cpp_int;

// Exact scalar type for edge selection probabilities and coverage
// polynomials. Analytic routines are templated on double vs Rational.
using Rational = boost::multiprecision::cpp_rational;

// Accepts "3/4", "0.75", "7.5e-1" or "2"; decimals parse exactly.
Rational parse_rational(const std::string& text);

// Exact rational of the shortest decimal that round-trips to the given
// double, so 0.7 maps to 7/10 rather than its dyadic expansion.
Rational rational_from_double(double value);

double to_double(const Rational& r);
std::string to_string(const Rational& r);

Rational pow_rational(const Rational& base, int exponent);

BigInt binomial(int n, int k);

}  // namespace redlab
