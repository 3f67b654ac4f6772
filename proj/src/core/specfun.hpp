#pragma once

// Scaled complementary error function and related helpers used by the
// closed-form denoiser potentials.

namespace l0cs {

// erfcx(x) = exp(x^2) * erfc(x). Accurate to ~1e-15 relative for all finite x
// that do not overflow (x > -26.6 or so; more negative arguments overflow the
// double range and return +inf).
double erfcx(double x);

// log(erfcx(x)), finite for all x (handles the x<0 growth ~ x^2 + log 2).
double log_erfcx(double x);

// Standard normal pdf and upper tail probability.
double norm_pdf(double x);
double norm_cdf_upper(double x);  // P(Z > x) = erfc(x/sqrt(2))/2

// log(P(Z > x)), stable for large positive x.
double log_norm_cdf_upper(double x);

// log(exp(a) + exp(b)) without overflow.
double log_add(double a, double b);

// Signed accumulator for sums of terms given as (sign, log|term|).
// Used where tail contributions span hundreds of orders of magnitude.
class SignedLogSum {
 public:
  void add(double sign, double log_abs);
  void add_linear(double value);  // value in normal double range
  double sign() const { return sign_; }
  double log_abs() const { return log_abs_; }
  // value relative to a reference scale: sign * exp(log_abs - log_ref)
  double scaled(double log_ref) const;

 private:
  double sign_ = 0.0;
  double log_abs_ = -1e308;
};

}  // namespace l0cs
