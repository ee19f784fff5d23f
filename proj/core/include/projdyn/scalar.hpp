#pragma once

#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace projdyn {

/// Exact rational scalar. GMP-backed, always canonical (reduced, sign on
/// the numerator). Expression templates are disabled so the type composes
/// cleanly with Eigen.
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;
using BigInt = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                             boost::multiprecision::et_off>;

enum class ScalarMode { Exact, Float };

std::string_view to_string(ScalarMode mode);
ScalarMode parse_scalar_mode(std::string_view text);

/// Numerical configuration injected into every float comparison.
struct NumericConfig {
  double tol = 1e-9;
  /// Relative radius for merging eigenvalues into one generalized weight.
  double cluster_tol = 1e-6;
};

/// Thrown for precondition and contract violations of the mathematical
/// operations (dimension mismatches, degenerate inputs, ...).
class MathError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline bool is_zero(const Rational& x, double /*tol*/) { return x == 0; }
inline bool is_zero(double x, double tol) { return std::abs(x) <= tol; }

inline int sign_of(const Rational& x, double /*tol*/) { return x.sign(); }
inline int sign_of(double x, double tol) {
  if (std::abs(x) <= tol) return 0;
  return x > 0 ? 1 : -1;
}

inline double to_double(const Rational& x) { return x.convert_to<double>(); }
inline double to_double(double x) { return x; }

inline double magnitude(const Rational& x) { return std::abs(to_double(x)); }
inline double magnitude(double x) { return std::abs(x); }

/// Parses "p/q", an integer, or a decimal literal (optionally with an
/// exponent) into an exact rational. "0.1" is exactly 1/10.
Rational parse_rational(std::string_view text);

/// Canonical text form: "p" or "p/q".
std::string format_rational(const Rational& x);

/// Best rational approximation of x with denominator at most max_den
/// (continued-fraction convergents). Returns every convergent in order.
std::vector<Rational> convergents(double x, std::int64_t max_den);

Rational pow_int(const Rational& base, long exponent);

}  // namespace projdyn
