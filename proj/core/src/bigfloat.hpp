#pragma once

// Extended-precision floating point (MPFR) for the few places where double
// range or accuracy is not enough. Internal to the core library.

#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include "projdyn/linalg.hpp"

namespace projdyn::detail {

using Big = boost::multiprecision::mpfr_float;
using MatBig = Eigen::Matrix<Big, Eigen::Dynamic, Eigen::Dynamic>;

/// Sets the MPFR default precision (decimal digits) and restores it on exit.
class PrecisionScope {
 public:
  explicit PrecisionScope(unsigned digits) : saved_(Big::default_precision()) { Big::default_precision(digits); }
  ~PrecisionScope() { Big::default_precision(saved_); }
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  unsigned saved_;
};

inline Big to_big(const Rational& x) { return Big(numerator(x)) / Big(denominator(x)); }

inline MatBig to_big(const MatD& a) {
  MatBig out(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out(i, j) = Big(a(i, j));
  return out;
}

inline MatBig to_big(const MatQ& a) {
  MatBig out(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out(i, j) = to_big(a(i, j));
  return out;
}

/// Continued-fraction convergents of x with denominators up to max_den.
inline std::vector<Rational> convergents(Big x, const BigInt& max_den) {
  std::vector<Rational> out;
  BigInt h_prev = 1, h_prev2 = 0, k_prev = 0, k_prev2 = 1;
  for (int iter = 0; iter < 400; ++iter) {
    Big a_f = floor(x);
    BigInt a = a_f.convert_to<BigInt>();
    BigInt h = a * h_prev + h_prev2;
    BigInt k = a * k_prev + k_prev2;
    if (k > max_den) break;
    out.emplace_back(h, k);
    h_prev2 = h_prev;
    h_prev = h;
    k_prev2 = k_prev;
    k_prev = k;
    Big frac = x - a_f;
    if (frac == 0) break;
    x = 1 / frac;
  }
  return out;
}

}  // namespace projdyn::detail
