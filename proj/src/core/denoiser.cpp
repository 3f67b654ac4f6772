#include "denoiser.hpp"

#include <cmath>
#include <limits>

#include "specfun.hpp"

namespace l0cs {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kLog2 = 0.6931471805599453094;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

InnerPotentialEval phi_in_point_mass(double b, double a1, double lambda) {
  // a0 = 0: the z-expectation collapses, phi_in = max(B^2/(2 A1) - lambda, 0).
  InnerPotentialEval out;
  const bool active = b * b > 2.0 * lambda * a1;
  out.value = active ? b * b / (2.0 * a1) - lambda : 0.0;
  out.d_b = active ? b / a1 : 0.0;
  out.d2_b = active ? 1.0 / a1 : 0.0;
  out.d_a1 = active ? -b * b / (2.0 * a1 * a1) : 0.0;
  out.p_active = active ? 1.0 : 0.0;
  return out;
}
}  // namespace

InnerPotentialEval phi_in_1rsb(const InnerPotentialInputs& in) {
  const double b = in.b_field, a0 = in.a0, a1 = in.a1, s = in.s, lam = in.lambda;
  if (!(a1 > 0.0)) throw std::domain_error("phi_in_1rsb: a1 > 0 required");
  if (!(s > 0.0)) throw std::domain_error("phi_in_1rsb: s > 0 required");
  if (a0 < 0.0) throw std::domain_error("phi_in_1rsb: a0 >= 0 required");
  if (lam < 0.0) throw std::domain_error("phi_in_1rsb: lambda >= 0 required");
  const double gamma = 1.0 - s * a0 / a1;
  if (!(gamma > 1e-12))
    throw std::domain_error("phi_in_1rsb: convergence condition s*a0/a1 < 1 violated");
  if (a0 < 1e-280) return phi_in_point_mass(b, a1, lam);

  const double theta = std::sqrt(2.0 * lam * a1);
  const double s0 = std::sqrt(a0);
  const double mu = b / gamma;
  const double sig = s0 / std::sqrt(gamma);

  // Gaussian factors at the two thresholds (kept as logs)
  const double lDu = -(theta - b) * (theta - b) / (2.0 * a0);
  const double lDl = -(theta + b) * (theta + b) / (2.0 * a0);

  // log of K*Phi_c at both tails, K = exp(-s lam) gamma^{-1/2} exp(s B^2/(2 A1 gamma)).
  // Identity: K*Phi_c(a) = D_u * erfcx(a/sqrt2) / (2 sqrt(gamma)).
  const double za = (theta - mu) / sig;  // upper-tail standardized threshold
  const double zb = (theta + mu) / sig;  // lower-tail
  const double lK = -s * lam + s * b * b / (2.0 * a1 * gamma) - 0.5 * std::log(gamma);
  auto tail_log = [&](double z, double lD) {
    if (z < -36.0) return lK;  // Phi_c(z) = 1 to machine precision
    return lD + log_erfcx(z * 0.7071067811865475244) - kLog2 - 0.5 * std::log(gamma);
  };
  const double lgPhiU = tail_log(za, lDu);
  const double lgPhiL = tail_log(zb, lDl);

  // S = 1 - Phi_c((theta-B)/s0) - Phi_c((theta+B)/s0) + K Phi_c(za) + K Phi_c(zb)
  SignedLogSum S;
  S.add(+1.0, 0.0);
  S.add(-1.0, log_norm_cdf_upper((theta - b) / s0));
  S.add(-1.0, log_norm_cdf_upper((theta + b) / s0));
  S.add(+1.0, lgPhiU);
  S.add(+1.0, lgPhiL);
  const double logS = S.log_abs();  // S >= 1, sign always +

  InnerPotentialEval out;
  out.value = std::max(logS / s, 0.0);

  // log of K*sigma*phi(z) terms: K sigma phi(za) = s0 D_u / (gamma sqrt(2 pi))
  const double lgphiU = lDu + std::log(s0) - std::log(gamma) - 0.5 * kLog2Pi;
  const double lgphiL = lDl + std::log(s0) - std::log(gamma) - 0.5 * kLog2Pi;

  // p_active = K Q / S with Q = Phi_c(za) + Phi_c(zb)
  SignedLogSum KQ;
  KQ.add(+1.0, lgPhiU);
  KQ.add(+1.0, lgPhiL);
  out.p_active = std::min(KQ.scaled(logS), 1.0);

  const double one_m_g = 1.0 - gamma;  // = s a0 / a1

  // S_B = (D_u - D_l)(1-gamma)/(s0 gamma sqrt(2pi)) + (s B/(a1 gamma)) K Q
  SignedLogSum SB;
  {
    const double lc = std::log(one_m_g / (s0 * gamma) * kInvSqrt2Pi);
    if (one_m_g > 0.0) {
      SB.add(+1.0, lDu + lc);
      SB.add(-1.0, lDl + lc);
    }
    if (b != 0.0) {
      const double lb = std::log(std::fabs(b) * s / (a1 * gamma));
      SB.add(b > 0 ? 1.0 : -1.0, lgPhiU + lb);
      SB.add(b > 0 ? 1.0 : -1.0, lgPhiL + lb);
    }
  }
  const double rB = SB.scaled(logS);  // S_B / S
  out.d_b = rB / s;

  // S_BB = (s/(a1 gamma)) { [theta*gamma + B(1-gamma)] D_u/(gamma s0 sqrt2pi)
  //                        + [theta*gamma - B(1-gamma)] D_l/(gamma s0 sqrt2pi)
  //                        + (s B^2/(a1 gamma) + 1) K Q }
  SignedLogSum SBB;
  {
    const double pref = std::log(s / (a1 * gamma));
    const double cu = theta * gamma + b * one_m_g;
    const double cl = theta * gamma - b * one_m_g;
    const double lg = -std::log(gamma * s0) + std::log(kInvSqrt2Pi);
    if (cu != 0.0) SBB.add(cu > 0 ? 1.0 : -1.0, pref + std::log(std::fabs(cu)) + lg + lDu);
    if (cl != 0.0) SBB.add(cl > 0 ? 1.0 : -1.0, pref + std::log(std::fabs(cl)) + lg + lDl);
    const double cq = s * b * b / (a1 * gamma) + 1.0;
    SBB.add(+1.0, pref + std::log(cq) + lgPhiU);
    SBB.add(+1.0, pref + std::log(cq) + lgPhiL);
  }
  const double rBB = SBB.scaled(logS);
  out.d2_b = (rBB - rB * rB) / s;

  // K M2 = (mu^2 + sig^2) K Q + (mu + theta) K s phi(za) + (theta - mu) K s phi(zb)
  SignedLogSum KM2;
  {
    const double c0 = mu * mu + sig * sig;
    KM2.add(+1.0, std::log(c0) + lgPhiU);
    KM2.add(+1.0, std::log(c0) + lgPhiL);
    const double cu = mu + theta, cl = theta - mu;
    if (cu != 0.0) KM2.add(cu > 0 ? 1.0 : -1.0, std::log(std::fabs(cu)) + lgphiU);
    if (cl != 0.0) KM2.add(cl > 0 ? 1.0 : -1.0, std::log(std::fabs(cl)) + lgphiL);
  }
  // d_a1 = -(1/(2 a1^2)) K M2 / S
  out.d_a1 = -KM2.scaled(logS) / (2.0 * a1 * a1);

  return out;
}

double eta_aspo(double u, double lambda, double xi) {
  if (lambda < 0.0) throw std::domain_error("eta_aspo: lambda >= 0 required");
  if (xi < 0.0) throw std::domain_error("eta_aspo: xi >= 0 required");
  if (lambda == 0.0) return u;  // annealing endpoint: identity by continuity
  const double t = std::sqrt(2.0 * lambda);
  const double d = xi * lambda;
  if (d == 0.0) return std::fabs(u) > t ? u : 0.0;
  return u * (1.0 - 0.5 * std::erfc((u - t) / d) + 0.5 * std::erfc((u + t) / d));
}

double eta_aspo_prime(double u, double lambda, double xi) {
  if (lambda < 0.0) throw std::domain_error("eta_aspo: lambda >= 0 required");
  if (xi < 0.0) throw std::domain_error("eta_aspo: xi >= 0 required");
  if (lambda == 0.0) return 1.0;
  const double t = std::sqrt(2.0 * lambda);
  const double d = xi * lambda;
  if (d == 0.0) return std::fabs(u) > t ? 1.0 : 0.0;
  const double am = (u - t) / d, ap = (u + t) / d;
  const double bracket = 1.0 - 0.5 * std::erfc(am) + 0.5 * std::erfc(ap);
  const double gauss = (std::exp(-am * am) - std::exp(-ap * ap)) / (d * 1.7724538509055160273);
  return bracket + u * gauss;
}

double eta_soft(double u, double theta) {
  if (theta < 0.0) throw std::domain_error("eta_soft: theta >= 0 required");
  if (u > theta) return u - theta;
  if (u < -theta) return u + theta;
  return 0.0;
}

double eta_soft_prime(double u, double theta) {
  if (theta < 0.0) throw std::domain_error("eta_soft: theta >= 0 required");
  return std::fabs(u) > theta ? 1.0 : 0.0;
}

}  // namespace l0cs
