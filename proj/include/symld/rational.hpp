#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <string>

namespace symld {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

BigInt factorial(unsigned n);
BigInt binomial(unsigned n, unsigned k);

inline double to_double(const Rational& r) { return r.convert_to<double>(); }
inline std::string to_string(const BigInt& v) { return v.str(); }
inline std::string to_string(const Rational& r) {
  return boost::multiprecision::numerator(r).str() + "/" + boost::multiprecision::denominator(r).str();
}

// log(n!) by direct summation of logs, tabulated. Valid for n <= 100000.
double log_factorial(unsigned n);

}  // namespace symld
