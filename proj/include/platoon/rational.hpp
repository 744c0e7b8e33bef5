#ifndef PLATOON_RATIONAL_HPP
#define PLATOON_RATIONAL_HPP

#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>

namespace platoon {

// Exact rational arithmetic over int64 numerator/denominator.
// Path costs, times and objectives are kept rational end to end so that
// equality checks (platoon synchronization, oracle comparisons) are exact.
class Rational {
 public:
  constexpr Rational() : num_(0), den_(1) {}
  constexpr Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT(google-explicit-constructor)

  Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
    if (den_ == 0) throw std::domain_error("Rational: zero denominator");
    normalize();
  }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  static Rational zero() { return Rational(); }

  friend Rational operator+(const Rational& a, const Rational& b) {
    __int128 n = i128(a.num_) * b.den_ + i128(b.num_) * a.den_;
    __int128 d = i128(a.den_) * b.den_;
    return make(n, d);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    __int128 n = i128(a.num_) * b.den_ - i128(b.num_) * a.den_;
    __int128 d = i128(a.den_) * b.den_;
    return make(n, d);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return make(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw std::domain_error("Rational: division by zero");
    return make(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
  }
  Rational operator-() const {
    Rational r = *this;
    r.num_ = -r.num_;
    return r;
  }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) {
    return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
  }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
  friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  bool is_integer() const { return den_ == 1; }

  // Largest integer <= value.
  std::int64_t floor() const {
    if (num_ >= 0) return num_ / den_;
    return -((-num_ + den_ - 1) / den_);
  }

  // Nearest multiple of step (ties round up); step must be positive.
  Rational round_to_multiple(const Rational& step) const {
    if (step.num_ <= 0) throw std::domain_error("Rational: nonpositive rounding step");
    Rational q = *this / step;
    Rational half(1, 2);
    std::int64_t k = (q + half).floor();
    return step * Rational(k);
  }

  // Parses "123", "-4.5", "1e3", "2.50e-1" or "n/d" fraction form, exactly.
  static Rational parse(std::string_view s);

  // Decimal string when the denominator is of the form 2^a*5^b, else "n/d".
  std::string str() const;

 private:
  static __int128 i128(std::int64_t v) { return static_cast<__int128>(v); }

  static Rational make(__int128 n, __int128 d) {
    if (d < 0) {
      n = -n;
      d = -d;
    }
    __int128 g = gcd128(n < 0 ? -n : n, d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
    if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX) {
      throw std::overflow_error("Rational: value out of 64-bit range");
    }
    Rational r;
    r.num_ = static_cast<std::int64_t>(n);
    r.den_ = static_cast<std::int64_t>(d);
    return r;
  }

  static __int128 gcd128(__int128 a, __int128 b) {
    while (b != 0) {
      __int128 t = a % b;
      a = b;
      b = t;
    }
    return a == 0 ? 1 : a;
  }

  void normalize() {
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  std::int64_t num_;
  std::int64_t den_;
};

inline Rational Rational::parse(std::string_view s) {
  if (s.empty()) throw std::invalid_argument("Rational::parse: empty string");
  auto slash = s.find('/');
  if (slash != std::string_view::npos) {
    Rational n = parse(s.substr(0, slash));
    Rational d = parse(s.substr(slash + 1));
    return n / d;
  }
  std::size_t i = 0;
  bool neg = false;
  if (s[i] == '+' || s[i] == '-') {
    neg = s[i] == '-';
    ++i;
  }
  __int128 mantissa = 0;
  int frac_digits = 0;
  bool seen_point = false;
  bool seen_digit = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (c == '.') {
      if (seen_point) throw std::invalid_argument("Rational::parse: bad number");
      seen_point = true;
    } else if (c >= '0' && c <= '9') {
      mantissa = mantissa * 10 + (c - '0');
      if (mantissa > (static_cast<__int128>(INT64_MAX)) * 1000000000LL) {
        throw std::overflow_error("Rational::parse: too many digits");
      }
      if (seen_point) ++frac_digits;
      seen_digit = true;
    } else if (c == 'e' || c == 'E') {
      break;
    } else {
      throw std::invalid_argument("Rational::parse: bad character");
    }
  }
  if (!seen_digit) throw std::invalid_argument("Rational::parse: no digits");
  int exp10 = 0;
  if (i < s.size()) {  // exponent part
    ++i;
    bool eneg = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
      eneg = s[i] == '-';
      ++i;
    }
    if (i >= s.size()) throw std::invalid_argument("Rational::parse: bad exponent");
    for (; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') throw std::invalid_argument("Rational::parse: bad exponent");
      exp10 = exp10 * 10 + (s[i] - '0');
      if (exp10 > 40) throw std::overflow_error("Rational::parse: exponent out of range");
    }
    if (eneg) exp10 = -exp10;
  }
  int net = exp10 - frac_digits;
  __int128 num = neg ? -mantissa : mantissa;
  __int128 den = 1;
  while (net > 0) {
    num *= 10;
    --net;
  }
  while (net < 0) {
    den *= 10;
    ++net;
  }
  return make(num, den);
}

inline std::string Rational::str() const {
  if (den_ == 1) return std::to_string(num_);
  // Finite decimal expansion exists iff den = 2^a * 5^b.
  std::int64_t d = den_;
  int twos = 0, fives = 0;
  while (d % 2 == 0) {
    d /= 2;
    ++twos;
  }
  while (d % 5 == 0) {
    d /= 5;
    ++fives;
  }
  if (d != 1) return std::to_string(num_) + "/" + std::to_string(den_);
  int digits = twos > fives ? twos : fives;
  __int128 scaled = static_cast<__int128>(num_ < 0 ? -num_ : num_);
  for (int k = 0; k < digits; ++k) scaled *= 10;
  scaled /= den_;
  std::string body;
  __int128 v = scaled;
  if (v == 0) body = "0";
  while (v > 0) {
    body.insert(body.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  while (static_cast<int>(body.size()) <= digits) body.insert(body.begin(), '0');
  body.insert(body.size() - digits, ".");
  if (num_ < 0) body.insert(body.begin(), '-');
  return body;
}

}  // namespace platoon

template <>
struct std::hash<platoon::Rational> {
  std::size_t operator()(const platoon::Rational& r) const noexcept {
    std::size_t h = std::hash<std::int64_t>()(r.num());
    return h ^ (std::hash<std::int64_t>()(r.den()) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  }
};

#endif  // PLATOON_RATIONAL_HPP
