// Copyright 2026 The sebeu Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SEBEU_RATIONAL_HPP_
#define SEBEU_RATIONAL_HPP_

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>

namespace sebeu {

__extension__ using WideInt = __int128;

// Exact rational number with 64-bit numerator and denominator. Arithmetic is
// carried out in 128 bits and reduced; results that do not fit throw
// Error(kInvalidArgument).
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num);  // NOLINT: implicit from integers is intended.
  Rational(std::int64_t num, std::int64_t den);

  // Accepts "3", "-7/4", "0.125", "1e-3" style text. Decimal input is
  // converted exactly.
  static Rational Parse(std::string_view text);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double ToDouble() const;
  // "n" when the denominator is one, "n/d" otherwise.
  std::string ToString() const;

  Rational operator-() const;
  Rational& operator+=(const Rational& o);
  Rational& operator-=(const Rational& o);
  Rational& operator*=(const Rational& o);
  Rational& operator/=(const Rational& o);

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) {
    return !(a == b);
  }
  friend bool operator<(const Rational& a, const Rational& b);
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator<=(const Rational& a, const Rational& b) {
    return !(b < a);
  }
  friend bool operator>=(const Rational& a, const Rational& b) {
    return !(a < b);
  }

 private:
  static Rational FromWide(WideInt num, WideInt den);

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

std::ostream& operator<<(std::ostream& os, const Rational& r);

}  // namespace sebeu

#endif  // SEBEU_RATIONAL_HPP_
