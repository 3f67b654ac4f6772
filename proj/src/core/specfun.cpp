#include "specfun.hpp"

#include <cmath>
#include <limits>

namespace l0cs {

namespace {
constexpr double kSqrtPi = 1.7724538509055160273;
constexpr double kLog2 = 0.6931471805599453094;

// Asymptotic series erfcx(x) ~ 1/(x sqrt(pi)) sum_k (-1)^k (2k-1)!!/(2x^2)^k,
// machine precision for x >= 26.5 (where exp(x^2) erfc(x) leaves double range).
double erfcx_asym(double x) {
  const double r = 0.5 / (x * x);
  double term = 1.0, sum = 1.0;
  for (int k = 1; k <= 12; ++k) {
    term *= -(2 * k - 1) * r;
    sum += term;
    if (std::fabs(term) < 1e-18) break;
  }
  return sum / (x * kSqrtPi);
}
}  // namespace

double erfcx(double x) {
  if (x >= 26.5) return erfcx_asym(x);
  if (x >= 0.0) return std::exp(x * x) * std::erfc(x);
  // erfcx(-x) = 2 exp(x^2) - erfcx(x)
  const double x2 = x * x;
  if (x2 > 700.0) return std::numeric_limits<double>::infinity();
  return 2.0 * std::exp(x2) - erfcx(-x);
}

double log_erfcx(double x) {
  if (x >= 0.0) return std::log(erfcx(x));
  // erfcx(x) = 2 e^{x^2} - erfcx(-x)
  const double x2 = x * x;
  if (x < -30.0) return x2 + kLog2;  // second term < 1e-392 relative
  return x2 + std::log(2.0 - std::exp(-x2) * erfcx(-x));
}

double norm_pdf(double x) {
  return std::exp(-0.5 * x * x) * 0.3989422804014326779;
}

double norm_cdf_upper(double x) { return 0.5 * std::erfc(x * 0.7071067811865475244); }

double log_norm_cdf_upper(double x) {
  const double z = x * 0.7071067811865475244;
  return -z * z + log_erfcx(z) - kLog2;
}

double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -std::numeric_limits<double>::infinity()) return a;
  return a + std::log1p(std::exp(b - a));
}

void SignedLogSum::add(double sign, double log_abs) {
  if (sign == 0.0 || log_abs == -std::numeric_limits<double>::infinity()) return;
  if (sign_ == 0.0) {
    sign_ = sign;
    log_abs_ = log_abs;
    return;
  }
  if (sign == sign_) {
    log_abs_ = log_add(log_abs_, log_abs);
    return;
  }
  // opposite signs: subtract magnitudes
  if (log_abs == log_abs_) {
    sign_ = 0.0;
    log_abs_ = -1e308;
    return;
  }
  if (log_abs > log_abs_) {
    sign_ = sign;
    log_abs_ = log_abs + std::log1p(-std::exp(log_abs_ - log_abs));
  } else {
    log_abs_ = log_abs_ + std::log1p(-std::exp(log_abs - log_abs_));
  }
}

void SignedLogSum::add_linear(double value) {
  if (value == 0.0) return;
  add(value > 0 ? 1.0 : -1.0, std::log(std::fabs(value)));
}

double SignedLogSum::scaled(double log_ref) const {
  if (sign_ == 0.0) return 0.0;
  return sign_ * std::exp(log_abs_ - log_ref);
}

}  // namespace l0cs
