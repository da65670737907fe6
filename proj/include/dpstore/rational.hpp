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

#ifndef DPSTORE_RATIONAL_HPP_
#define DPSTORE_RATIONAL_HPP_

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <string>
#include <string_view>

namespace dpstore {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Rational make_rational(const BigInt& num, const BigInt& den) {
  return Rational(num, den);
}

// Parses "3", "1/2", "-7/4" or a decimal such as "0.25".
Rational parse_rational(std::string_view text);

// Exact value of a finite double.
Rational rational_from_double(double value);

double to_double(const Rational& value);
std::string to_string(const Rational& value);

BigInt binomial(std::uint64_t n, std::uint64_t k);
BigInt power(const BigInt& base, unsigned exponent);

}  // namespace dpstore

#endif  // DPSTORE_RATIONAL_HPP_
