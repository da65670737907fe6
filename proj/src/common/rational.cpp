// Copyright 2026 The dpstore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpstore/rational.hpp"

#include <cmath>
#include <sstream>

#include "dpstore/common.hpp"

namespace dpstore {

Rational parse_rational(std::string_view text) {
  auto slash = text.find('/');
  try {
    if (auto dot = text.find('.'); dot != std::string_view::npos && slash == std::string_view::npos) {
      std::string digits(text.substr(0, dot));
      std::string frac(text.substr(dot + 1));
      if (frac.empty() || frac.find_first_not_of("0123456789") != std::string::npos) {
        throw ParameterError("not a rational number: " + std::string(text));
      }
      const bool negative = !digits.empty() && digits[0] == '-';
      BigInt whole(digits.empty() || digits == "-" ? std::string("0") : digits);
      BigInt scale = power(BigInt(10), static_cast<unsigned>(frac.size()));
      Rational r(BigInt(frac), scale);
      return negative ? Rational(whole) - r : Rational(whole) + r;
    }
    if (slash == std::string_view::npos) {
      return Rational(BigInt(std::string(text)));
    }
    BigInt num(std::string(text.substr(0, slash)));
    BigInt den(std::string(text.substr(slash + 1)));
    if (den == 0) throw ParameterError("zero denominator in " + std::string(text));
    return Rational(num, den);
  } catch (const std::runtime_error&) {
    throw ParameterError("not a rational number: " + std::string(text));
  }
}

Rational rational_from_double(double value) {
  if (!std::isfinite(value)) throw ParameterError("non-finite value");
  int exponent = 0;
  double mantissa = std::frexp(value, &exponent);
  // 53-bit integer mantissa times a power of two.
  auto scaled = static_cast<std::int64_t>(std::ldexp(mantissa, 53));
  exponent -= 53;
  Rational r{BigInt(scaled)};
  if (exponent > 0) {
    r *= Rational(power(BigInt(2), static_cast<unsigned>(exponent)));
  } else if (exponent < 0) {
    r /= Rational(power(BigInt(2), static_cast<unsigned>(-exponent)));
  }
  return r;
}

double to_double(const Rational& value) { return value.convert_to<double>(); }

std::string to_string(const Rational& value) {
  std::ostringstream os;
  os << numerator(value);
  if (denominator(value) != 1) os << '/' << denominator(value);
  return os.str();
}

BigInt binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  BigInt r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r *= (n - k + i);
    r /= i;
  }
  return r;
}

BigInt power(const BigInt& base, unsigned exponent) {
  return boost::multiprecision::pow(base, exponent);
}

}  // namespace dpstore
