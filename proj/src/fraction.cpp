#include "cexgen/fraction.hpp"

#include <fmt/format.h>

#include <cctype>
#include <numeric>
#include <stdexcept>

namespace cexgen {

namespace {

std::int64_t narrow(__int128 v) {
  if (v > INT64_MAX || v < INT64_MIN) throw std::overflow_error("fraction overflow");
  return static_cast<std::int64_t>(v);
}

Fraction make(__int128 num, __int128 den) {
  if (den == 0) throw std::domain_error("fraction with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  __int128 a = num < 0 ? -num : num, b = den;
  while (b != 0) {
    const __int128 t = a % b;
    a = b;
    b = t;
  }
  if (a > 1) {
    num /= a;
    den /= a;
  }
  return Fraction(narrow(num), narrow(den));
}

}  // namespace

Fraction::Fraction(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::domain_error("fraction with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  num_ = g > 1 ? num / g : num;
  den_ = g > 1 ? den / g : den;
}

Fraction Fraction::parse(std::string_view text) {
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
  auto bad = [&] { return std::invalid_argument(fmt::format("not a number: '{}'", std::string(text))); };
  if (s.empty()) throw bad();
  if (const auto slash = s.find('/'); slash != std::string::npos) {
    const Fraction a = parse(s.substr(0, slash)), b = parse(s.substr(slash + 1));
    if (a.den() != 1 || b.den() != 1) throw bad();
    return make(a.num(), b.num());
  }
  bool neg = false;
  std::size_t i = 0;
  if (s[i] == '-' || s[i] == '+') neg = s[i++] == '-';
  __int128 num = 0, den = 1;
  bool digits = false, dot = false;
  for (; i < s.size(); ++i) {
    if (s[i] == '.' && !dot) {
      dot = true;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) throw bad();
    digits = true;
    num = num * 10 + (s[i] - '0');
    if (dot) den *= 10;
    if (num > INT64_MAX || den > INT64_MAX) throw std::overflow_error("fraction overflow");
  }
  if (!digits) throw bad();
  return make(neg ? -num : num, den);
}

std::string Fraction::str() const {
  return den_ == 1 ? std::to_string(num_) : fmt::format("{}/{}", num_, den_);
}

Fraction operator+(Fraction a, Fraction b) {
  return make(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
              static_cast<__int128>(a.den_) * b.den_);
}
Fraction operator-(Fraction a, Fraction b) {
  return make(static_cast<__int128>(a.num_) * b.den_ - static_cast<__int128>(b.num_) * a.den_,
              static_cast<__int128>(a.den_) * b.den_);
}
Fraction operator*(Fraction a, Fraction b) {
  return make(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
}
Fraction operator/(Fraction a, Fraction b) {
  return make(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
}
std::strong_ordering operator<=>(const Fraction& a, const Fraction& b) {
  const __int128 l = static_cast<__int128>(a.num_) * b.den_;
  const __int128 r = static_cast<__int128>(b.num_) * a.den_;
  return l <=> r;
}

}  // namespace cexgen
