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

#include "sebeu/rational.hpp"

#include <cctype>
#include <limits>
#include <string>

#include "sebeu/error.hpp"

namespace sebeu {
namespace {

WideInt Gcd(WideInt a, WideInt b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    WideInt t = a % b;
    a = b;
    b = t;
  }
  return a;
}

[[noreturn]] void Overflow() {
  throw Error(ErrorKind::kInvalidArgument, "rational arithmetic overflow");
}

[[noreturn]] void BadText(std::string_view text) {
  throw Error(ErrorKind::kParse,
              "not a rational number: '" + std::string(text) + "'");
}

WideInt Pow10(int e) {
  WideInt r = 1;
  for (int i = 0; i < e; ++i) {
    r *= 10;
    if (r > std::numeric_limits<std::int64_t>::max()) Overflow();
  }
  return r;
}

// Parses an optionally signed decimal with optional fraction and exponent.
Rational ParseDecimal(std::string_view s) {
  std::size_t i = 0;
  bool neg = false;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = s[i++] == '-';
  WideInt mant = 0;
  int frac_digits = 0;
  bool any = false;
  bool in_frac = false;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '.' && !in_frac) {
      in_frac = true;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(c))) break;
    any = true;
    mant = mant * 10 + (c - '0');
    if (mant > std::numeric_limits<std::int64_t>::max()) Overflow();
    if (in_frac) ++frac_digits;
  }
  if (!any) BadText(s);
  int exp10 = 0;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    bool eneg = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) eneg = s[i++] == '-';
    bool edig = false;
    int e = 0;
    for (; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]));
         ++i) {
      edig = true;
      e = e * 10 + (s[i] - '0');
      if (e > 40) Overflow();
    }
    if (!edig) BadText(s);
    exp10 = eneg ? -e : e;
  }
  if (i != s.size()) BadText(s);
  const int scale = exp10 - frac_digits;
  WideInt num = neg ? -mant : mant;
  WideInt den = 1;
  if (scale >= 0) {
    num *= Pow10(scale);
  } else {
    den = Pow10(-scale);
  }
  if (num > std::numeric_limits<std::int64_t>::max() ||
      num < std::numeric_limits<std::int64_t>::min())
    Overflow();
  return Rational(static_cast<std::int64_t>(num),
                  static_cast<std::int64_t>(den));
}

}  // namespace

Rational::Rational(std::int64_t num) : num_(num), den_(1) {}

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) {
    throw Error(ErrorKind::kInvalidArgument, "rational with zero denominator");
  }
  *this = FromWide(num, den);
}

Rational Rational::FromWide(WideInt num, WideInt den) {
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const WideInt g = Gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  constexpr WideInt kMax = std::numeric_limits<std::int64_t>::max();
  constexpr WideInt kMin = std::numeric_limits<std::int64_t>::min();
  if (num > kMax || num < kMin || den > kMax) Overflow();
  Rational r;
  r.num_ = static_cast<std::int64_t>(num);
  r.den_ = static_cast<std::int64_t>(den);
  return r;
}

Rational Rational::Parse(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
    text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
    text.remove_suffix(1);
  if (text.empty()) BadText(text);
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return ParseDecimal(text);
  const Rational n = ParseDecimal(text.substr(0, slash));
  const Rational d = ParseDecimal(text.substr(slash + 1));
  if (d.num_ == 0) BadText(text);
  return n / d;
}

double Rational::ToDouble() const {
  return static_cast<double>(num_) / static_cast<double>(den_);
}

std::string Rational::ToString() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::operator-() const {
  return FromWide(-static_cast<WideInt>(num_), den_);
}

Rational& Rational::operator+=(const Rational& o) {
  *this = FromWide(static_cast<WideInt>(num_) * o.den_ +
                       static_cast<WideInt>(o.num_) * den_,
                   static_cast<WideInt>(den_) * o.den_);
  return *this;
}

Rational& Rational::operator-=(const Rational& o) { return *this += -o; }

Rational& Rational::operator*=(const Rational& o) {
  *this = FromWide(static_cast<WideInt>(num_) * o.num_,
                   static_cast<WideInt>(den_) * o.den_);
  return *this;
}

Rational& Rational::operator/=(const Rational& o) {
  if (o.num_ == 0) {
    throw Error(ErrorKind::kInvalidArgument, "rational division by zero");
  }
  *this = FromWide(static_cast<WideInt>(num_) * o.den_,
                   static_cast<WideInt>(den_) * o.num_);
  return *this;
}

bool operator<(const Rational& a, const Rational& b) {
  return static_cast<WideInt>(a.num_) * b.den_ <
         static_cast<WideInt>(b.num_) * a.den_;
}

std::ostream& operator<<(std::ostream& os, const Rational& r) {
  return os << r.ToString();
}

}  // namespace sebeu
