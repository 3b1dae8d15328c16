#include "redlab/rational.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>

#include "redlab/errors.hpp"

namespace redlab {

namespace {

BigInt pow10(unsigned k) {
  BigInt r(1);
  for (unsigned i = 0; i < k; ++i) r *= 10;
  return r;
}

// Parses a plain decimal like "-12.345e-2" into an exact rational.
Rational parse_decimal(const std::string& text) {
  std::size_t pos = 0;
  const std::size_t n = text.size();
  bool negative = false;
  if (pos < n && (text[pos] == '+' || text[pos] == '-')) {
    negative = (text[pos] == '-');
    ++pos;
  }
  std::string digits;
  long frac_digits = 0;
  bool seen_digit = false;
  bool seen_dot = false;
  for (; pos < n; ++pos) {
    const char c = text[pos];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      if (seen_dot) ++frac_digits;
      seen_digit = true;
    } else if (c == '.' && !seen_dot) {
      seen_dot = true;
    } else {
      break;
    }
  }
  if (!seen_digit) throw invalid_parameter("not a number: '" + text + "'");
  long exponent = 0;
  if (pos < n && (text[pos] == 'e' || text[pos] == 'E')) {
    ++pos;
    bool exp_neg = false;
    if (pos < n && (text[pos] == '+' || text[pos] == '-')) {
      exp_neg = (text[pos] == '-');
      ++pos;
    }
    if (pos >= n || !std::isdigit(static_cast<unsigned char>(text[pos])))
      throw invalid_parameter("malformed exponent in '" + text + "'");
    long e = 0;
    for (; pos < n && std::isdigit(static_cast<unsigned char>(text[pos])); ++pos) {
      e = e * 10 + (text[pos] - '0');
      if (e > 100000) throw invalid_parameter("exponent out of range in '" + text + "'");
    }
    exponent = exp_neg ? -e : e;
  }
  if (pos != n) throw invalid_parameter("trailing characters in number '" + text + "'");

  // cpp_int reads a leading zero as an octal prefix; trim to plain decimal.
  const std::size_t first_nonzero = digits.find_first_not_of('0');
  digits = (first_nonzero == std::string::npos) ? "0" : digits.substr(first_nonzero);
  BigInt mantissa(digits);
  if (negative) mantissa = -mantissa;
  const long shift = exponent - frac_digits;
  Rational value(mantissa);
  if (shift > 0)
    value *= Rational(pow10(static_cast<unsigned>(shift)));
  else if (shift < 0)
    value /= Rational(pow10(static_cast<unsigned>(-shift)));
  return value;
}

}  // namespace

Rational parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) return parse_decimal(text);
  const std::string num = text.substr(0, slash);
  const std::string den = text.substr(slash + 1);
  if (num.empty() || den.empty())
    throw invalid_parameter("malformed fraction '" + text + "'");
  try {
    BigInt n(num);
    BigInt d(den);
    if (d == 0) throw invalid_parameter("zero denominator in '" + text + "'");
    return Rational(n, d);
  } catch (const std::runtime_error&) {
    throw invalid_parameter("malformed fraction '" + text + "'");
  }
}

Rational rational_from_double(double value) {
  if (!std::isfinite(value))
    throw invalid_parameter("cannot convert non-finite double to rational");
  char buffer[64];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buffer, sizeof(buffer), "%.*g", precision, value);
    if (std::strtod(buffer, nullptr) == value) return parse_decimal(buffer);
  }
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return parse_decimal(buffer);
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

std::string to_string(const Rational& r) {
  if (boost::multiprecision::denominator(r) == 1)
    return boost::multiprecision::numerator(r).str();
  return boost::multiprecision::numerator(r).str() + "/" +
         boost::multiprecision::denominator(r).str();
}

Rational pow_rational(const Rational& base, int exponent) {
  if (exponent < 0) {
    if (base == 0) throw invalid_parameter("negative power of zero");
    return Rational(1) / pow_rational(base, -exponent);
  }
  Rational result(1);
  Rational b = base;
  int e = exponent;
  while (e > 0) {
    if (e & 1) result *= b;
    b *= b;
    e >>= 1;
  }
  return result;
}

BigInt binomial(int n, int k) {
  if (k < 0 || k > n) return BigInt(0);
  k = std::min(k, n - k);
  BigInt result(1);
  for (int i = 1; i <= k; ++i) {
    result *= (n - k + i);
    result /= i;
  }
  return result;
}

}  // namespace redlab
