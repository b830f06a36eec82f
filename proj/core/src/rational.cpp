/* Copyright 2026 The NCS Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "ncs/rational.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <ostream>

#include "ncs/errors.hpp"

namespace ncs {
namespace {

__extension__ typedef __int128 Wide;

Rational make_checked(Wide num, Wide den) {
  if (den == 0) throw DomainError("rational: division by zero");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  Wide a = num < 0 ? -num : num;
  Wide b = den;
  while (b != 0) {
    Wide t = a % b;
    a = b;
    b = t;
  }
  if (a > 1) {
    num /= a;
    den /= a;
  }
  constexpr Wide kMax = std::numeric_limits<std::int64_t>::max();
  if (num > kMax || num < -kMax || den > kMax) {
    throw InvariantError("rational: 64-bit overflow");
  }
  return Rational(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw DomainError("rational: zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  num_ = g > 1 ? num / g : num;
  den_ = g > 1 ? den / g : den;
}

Rational Rational::from_double(double value, std::int64_t max_den) {
  if (!std::isfinite(value)) throw DomainError("rational: non-finite value");
  // Convergents h/k of the continued fraction expansion.
  std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double x = value;
  for (int iter = 0; iter < 64; ++iter) {
    const double a_real = std::floor(x);
    if (std::fabs(a_real) > 9.0e15) break;
    const auto a = static_cast<std::int64_t>(a_real);
    const Wide k2 = static_cast<Wide>(a) * k1 + k0;
    if (k2 > max_den) break;
    const Wide h2 = static_cast<Wide>(a) * h1 + h0;
    h0 = h1;
    h1 = static_cast<std::int64_t>(h2);
    k0 = k1;
    k1 = static_cast<std::int64_t>(k2);
    const double frac = x - a_real;
    if (frac < 1e-15 || std::fabs(static_cast<double>(h1) / static_cast<double>(k1) - value) <
                            std::fabs(value) * 1e-16) {
      break;
    }
    x = 1.0 / frac;
  }
  if (k1 == 0) throw DomainError("rational: cannot approximate value");
  return Rational(h1, k1);
}

std::int64_t Rational::floor() const noexcept {
  std::int64_t q = num_ / den_;
  if (num_ % den_ != 0 && num_ < 0) --q;
  return q;
}

std::int64_t Rational::ceil() const noexcept {
  std::int64_t q = num_ / den_;
  if (num_ % den_ != 0 && num_ > 0) ++q;
  return q;
}

std::string Rational::to_string(int decimals) const {
  Wide scale = 1;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  Wide n = static_cast<Wide>(num_) * scale;
  const bool negative = n < 0;
  if (negative) n = -n;
  Wide q = (2 * n + den_) / (2 * static_cast<Wide>(den_));
  const Wide int_part = q / scale;
  Wide frac_part = q % scale;
  std::string out = negative && q != 0 ? "-" : "";
  out += std::to_string(static_cast<long long>(int_part));
  if (decimals > 0) {
    std::string frac = std::to_string(static_cast<long long>(frac_part));
    out += '.';
    out.append(static_cast<std::size_t>(decimals) - frac.size(), '0');
    out += frac;
  }
  return out;
}

Rational operator+(const Rational& a, const Rational& b) {
  return make_checked(static_cast<Wide>(a.num_) * b.den_ + static_cast<Wide>(b.num_) * a.den_,
                      static_cast<Wide>(a.den_) * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) {
  return make_checked(static_cast<Wide>(a.num_) * b.den_ - static_cast<Wide>(b.num_) * a.den_,
                      static_cast<Wide>(a.den_) * b.den_);
}

Rational operator*(const Rational& a, const Rational& b) {
  return make_checked(static_cast<Wide>(a.num_) * b.num_, static_cast<Wide>(a.den_) * b.den_);
}

Rational operator/(const Rational& a, const Rational& b) {
  return make_checked(static_cast<Wide>(a.num_) * b.den_, static_cast<Wide>(a.den_) * b.num_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) noexcept {
  const Wide lhs = static_cast<Wide>(a.num_) * b.den_;
  const Wide rhs = static_cast<Wide>(b.num_) * a.den_;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::ostream& operator<<(std::ostream& os, const Rational& r) {
  return os << r.num() << '/' << r.den();
}

}  // namespace ncs
