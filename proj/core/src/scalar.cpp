#include "projdyn/scalar.hpp"

#include <cctype>
#include <vector>

namespace projdyn {

std::string_view to_string(ScalarMode mode) {
  return mode == ScalarMode::Exact ? "exact" : "float";
}

ScalarMode parse_scalar_mode(std::string_view text) {
  if (text == "exact") return ScalarMode::Exact;
  if (text == "float") return ScalarMode::Float;
  throw MathError("unknown scalar mode '" + std::string(text) + "'");
}

namespace {

BigInt parse_digits(std::string_view digits) {
  if (digits.empty()) throw MathError("empty integer literal");
  for (char c : digits)
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw MathError("bad digit in numeric literal '" + std::string(digits) + "'");
  return BigInt(std::string(digits));
}

BigInt pow10(long e) {
  BigInt r = 1;
  for (long i = 0; i < e; ++i) r *= 10;
  return r;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.empty()) throw MathError("empty numeric literal");

  bool negative = false;
  if (s.front() == '+' || s.front() == '-') {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }

  Rational value;
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    BigInt num = parse_digits(s.substr(0, slash));
    BigInt den = parse_digits(s.substr(slash + 1));
    if (den == 0) throw MathError("zero denominator in '" + std::string(text) + "'");
    value = Rational(num, den);
  } else {
    long exponent = 0;
    if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
      std::string_view exp_text = s.substr(e + 1);
      bool exp_negative = false;
      if (!exp_text.empty() && (exp_text.front() == '+' || exp_text.front() == '-')) {
        exp_negative = exp_text.front() == '-';
        exp_text.remove_prefix(1);
      }
      BigInt ev = parse_digits(exp_text);
      if (ev > 4000) throw MathError("exponent out of range in '" + std::string(text) + "'");
      exponent = ev.convert_to<long>() * (exp_negative ? -1 : 1);
      s = s.substr(0, e);
    }
    std::string digits;
    if (auto dot = s.find('.'); dot != std::string_view::npos) {
      digits = std::string(s.substr(0, dot)) + std::string(s.substr(dot + 1));
      exponent -= static_cast<long>(s.size() - dot - 1);
      if (digits.empty()) throw MathError("bad numeric literal '" + std::string(text) + "'");
    } else {
      digits = std::string(s);
    }
    BigInt mantissa = parse_digits(digits);
    value = exponent >= 0 ? Rational(mantissa * pow10(exponent))
                          : Rational(mantissa, pow10(-exponent));
  }
  return negative ? Rational(-value) : value;
}

std::string format_rational(const Rational& x) {
  BigInt num = boost::multiprecision::numerator(x);
  BigInt den = boost::multiprecision::denominator(x);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

std::vector<Rational> convergents(double x, std::int64_t max_den) {
  std::vector<Rational> out;
  if (!std::isfinite(x)) return out;
  BigInt h_prev = 1, h_prev2 = 0, k_prev = 0, k_prev2 = 1;
  double rem = x;
  for (int iter = 0; iter < 64; ++iter) {
    double a_d = std::floor(rem);
    if (std::abs(a_d) > 1e18) break;
    BigInt a = static_cast<long long>(a_d);
    BigInt h = a * h_prev + h_prev2;
    BigInt k = a * k_prev + k_prev2;
    if (k > max_den) break;
    out.emplace_back(h, k);
    h_prev2 = h_prev;
    h_prev = h;
    k_prev2 = k_prev;
    k_prev = k;
    double frac = rem - a_d;
    if (frac < 1e-15) break;
    rem = 1.0 / frac;
  }
  return out;
}

Rational pow_int(const Rational& base, long exponent) {
  if (exponent < 0) {
    if (base == 0) throw MathError("zero to a negative power");
    return pow_int(Rational(1) / base, -exponent);
  }
  Rational result = 1;
  Rational b = base;
  unsigned long e = static_cast<unsigned long>(exponent);
  while (e > 0) {
    if (e & 1UL) result *= b;
    e >>= 1;
    if (e) b *= b;
  }
  return result;
}

}  // namespace projdyn
