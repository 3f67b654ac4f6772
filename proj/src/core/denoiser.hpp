#pragma once

#include <stdexcept>

namespace l0cs {

// Arguments of the 1RSB inner free-entropy potential
//   phi_in(B, A1, A0, lambda) = (1/s) log E_z exp(s max((B+sqrt(A0) z)^2/(2 A1) - lambda, 0))
struct InnerPotentialInputs {
  double b_field = 0.0;  // local field B
  double a0 = 0.0;       // inter-cluster field variance, >= 0
  double a1 = 1.0;       // intra-cluster curvature, > 0
  double s = 1.0;        // Parisi parameter, > 0
  double lambda = 0.0;   // l0 penalty, >= 0
};

struct InnerPotentialEval {
  double value = 0.0;     // phi_in
  double d_b = 0.0;       // d phi_in / dB        (the cluster-mean estimator)
  double d2_b = 0.0;      // d^2 phi_in / dB^2
  double d_a1 = 0.0;      // d phi_in / dA1       (-<x^2>_cluster / 2)
  double p_active = 0.0;  // tilted probability of the nonzero branch
};

// Closed-form evaluation via the variance-inflated Gaussian tails.
// Requires a1 > 0, s > 0, lambda >= 0 and s*a0/a1 < 1 (the z-expectation
// diverges otherwise); throws std::domain_error naming the failed condition.
InnerPotentialEval phi_in_1rsb(const InnerPotentialInputs& in);

// Smoothed hard-threshold denoiser of the l0 message passing iteration:
//   eta(u) = u [1 - erfc((u-sqrt(2 lambda))/(xi lambda))/2
//              + erfc((u+sqrt(2 lambda))/(xi lambda))/2]
// xi = 0 gives the hard threshold u * 1[|u| > sqrt(2 lambda)], xi -> inf and
// lambda = 0 both give the identity.
double eta_aspo(double u, double lambda, double xi);
double eta_aspo_prime(double u, double lambda, double xi);

// Soft threshold sign(u) max(|u| - theta, 0) and its derivative 1[|u| > theta].
double eta_soft(double u, double theta);
double eta_soft_prime(double u, double theta);

}  // namespace l0cs
