#include "replica.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "denoiser.hpp"
#include "specfun.hpp"

namespace l0cs {

void ReplicaParams::validate() const {
  if (!(rho_o > 0.0 && rho_o < 1.0)) throw std::invalid_argument("rho_o must be in (0,1)");
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
  if (!(s > 0.0)) throw std::invalid_argument("s must be positive");
  quad.validate();
}

namespace {

struct HatParams {
  double m_hat, q0_hat, a0, a1;
};

HatParams hats_from(const ReplicaParams& p, double m, double q0, double v0, double v1) {
  const double d = 1.0 + v1 + p.s * v0;
  HatParams h;
  h.m_hat = p.alpha / d;
  h.q0_hat = std::max(p.alpha * (p.rho_o - 2.0 * m + q0) / (d * d), 0.0);
  h.a0 = std::max(p.alpha / p.s * (1.0 / (1.0 + v1) - 1.0 / d), 0.0);
  // a cluster variance below double-precision relevance is an exact delta for
  // every moment we take; snapping avoids asking the quadrature to resolve a
  // near-delta feature (the jump mass is then added analytically)
  if (h.a0 < 1e-12) h.a0 = 0.0;
  h.a1 = p.alpha / d + p.s * h.a0;
  return h;
}

struct MixtureMoments {
  double m, q0, v0, v1, rho, phi;
};

// E_B[f(phi_in(B))] over one Gaussian branch B ~ N(0, var).
double branch_expect(const std::function<double(const InnerPotentialEval&)>& f,
                     double var, const HatParams& h, double s, double lambda,
                     const QuadratureSpec& quad) {
  auto eval = [&](double b) {
    return f(phi_in_1rsb({b, h.a0, h.a1, s, lambda}));
  };
  if (var <= 0.0) return eval(0.0);
  const double sd = std::sqrt(var);
  const double theta = std::sqrt(2.0 * lambda * h.a1);
  std::vector<double> brk;
  if (theta > 0.0 && theta / sd < 14.0) brk = {-theta / sd, theta / sd};
  const double width = std::max(std::sqrt(h.a0), 1e-300);
  return gauss_expect([&](double z) { return eval(sd * z); }, quad, brk, width / sd);
}

// Per-branch raw moments, computed in one quadrature pass.
struct BranchMoments {
  // E[value], E[d_b^2], E[-2 d_a1] (= <x^2>), E[d2_b], E[p_active], E[B d_b]
  double phi, db2, msq, d2b, rho, bdb;
};

BranchMoments branch_moments(double var, const HatParams& h, double s, double lambda,
                             const QuadratureSpec& quad) {
  auto fill = [&](double b, double* out) {
    const InnerPotentialEval e = phi_in_1rsb({b, h.a0, h.a1, s, lambda});
    out[0] = e.value;
    out[1] = e.d_b * e.d_b;
    out[2] = -2.0 * e.d_a1;
    out[3] = e.d2_b;
    out[4] = e.p_active;
    out[5] = b * e.d_b;
  };
  double out[6];
  if (var <= 0.0) {
    fill(0.0, out);
  } else {
    const double sd = std::sqrt(var);
    const double theta = std::sqrt(2.0 * lambda * h.a1);
    std::vector<double> brk;
    if (theta > 0.0 && theta / sd < 14.0) brk = {-theta / sd, theta / sd};
    const double width = std::max(std::sqrt(h.a0), 1e-300);
    gauss_expect_multi([&](double z, double* o) { fill(sd * z, o); }, 6, quad, brk,
                       width / sd, out);
  }
  return {out[0], out[1], out[2], out[3], out[4], out[5]};
}

// Signal overlap m for a jointly Gaussian (x_o, B) pair with Cov = m_hat:
// E[x_o d_b(B)] = (m_hat / Var B) E[B d_b(B)], exact without differentiating.
MixtureMoments mixture_moments(const ReplicaParams& p, const HatParams& h) {
  const double var0 = h.q0_hat;                        // zero branch
  const double var1 = h.m_hat * h.m_hat + h.q0_hat;    // signal branch
  const BranchMoments b0 = branch_moments(var0, h, p.s, p.lambda, p.quad);
  const BranchMoments b1 = branch_moments(var1, h, p.s, p.lambda, p.quad);
  auto both = [&](double m0, double m1) {
    return (1.0 - p.rho_o) * m0 + p.rho_o * m1;
  };

  MixtureMoments mm{};
  mm.q0 = both(b0.db2, b1.db2);
  mm.v0 = std::max(both(b0.msq, b1.msq) - mm.q0, 0.0);
  mm.phi = both(b0.phi, b1.phi);
  mm.rho = both(b0.rho, b1.rho);

  double d2b = both(b0.d2b, b1.d2b);
  // When a0 is far below the quadrature resolution the cluster mean acquires a
  // genuine jump of size theta/a1 at |B| = theta; its second-derivative mass
  // must be added analytically (the heat-kernel identity requires the
  // distributional derivative).
  const double theta = std::sqrt(2.0 * p.lambda * h.a1);
  auto jump_mass = [&](double var) {
    if (theta <= 0.0 || var <= 0.0) return 0.0;
    const double sd = std::sqrt(var);
    if (std::sqrt(h.a0) >= 1e-9 * sd) return 0.0;  // resolved by quadrature
    return 2.0 * (theta / h.a1) * norm_pdf(theta / sd) / sd;
  };
  d2b += (1.0 - p.rho_o) * jump_mass(var0) + p.rho_o * jump_mass(var1);
  mm.v1 = d2b - p.s * mm.v0;

  if (var1 > 0.0 && h.m_hat > 0.0) mm.m = p.rho_o * h.m_hat / var1 * b1.bdb;
  return mm;
}

}  // namespace

double free_entropy(const ReplicaParams& p, const ReplicaOrderParams& op) {
  p.validate();
  const double s = p.s;
  const double d = 1.0 + op.v1 + s * op.v0;
  if (!(d > 1e-12)) throw std::domain_error("channel denominator not positive");
  const double e_m = p.rho_o - 2.0 * op.m + op.q0;
  const HatParams h{op.m_hat, op.q0_hat, op.a0, op.a1};
  const double var0 = h.q0_hat;
  const double var1 = h.m_hat * h.m_hat + h.q0_hat;
  auto val = [](const InnerPotentialEval& e) { return e.value; };
  const double phi_mix =
      (1.0 - p.rho_o) * branch_expect(val, var0, h, s, p.lambda, p.quad) +
      p.rho_o * branch_expect(val, var1, h, s, p.lambda, p.quad);
  return -op.m_hat * op.m + 0.5 * (op.q0 + op.v0) * op.a1 -
         0.5 * (op.v1 + s * op.v0) * (op.q0_hat + op.a0) - 0.5 * s * op.q0 * op.a0 +
         phi_mix - 0.5 * p.alpha * e_m / d +
         0.5 * p.alpha / s * std::log((1.0 + op.v1) / d);
}

SaddleResult saddle_point_from(const ReplicaParams& p, ReplicaOrderParams start,
                               double damping, int max_iters, double tol) {
  p.validate();
  if (!(damping >= 0.0 && damping < 1.0))
    throw std::invalid_argument("damping must be in [0,1)");
  SaddleResult res;
  ReplicaOrderParams op = start;
  MixtureMoments mm{};
  double damp = damping;
  double stall_ref = 1e300;
  constexpr int kStallWindow = 400;
  for (int it = 0; it < max_iters; ++it) {
    const HatParams h = hats_from(p, op.m, op.q0, op.v0, op.v1);
    op.m_hat = h.m_hat;
    op.q0_hat = h.q0_hat;
    op.a0 = h.a0;
    op.a1 = h.a1;
    mm = mixture_moments(p, h);
    const double delta = std::abs(mm.m - op.m) + std::abs(mm.q0 - op.q0) +
                         std::abs(mm.v0 - op.v0) + std::abs(mm.v1 - op.v1);
    op.m = damp * op.m + (1.0 - damp) * mm.m;
    op.q0 = damp * op.q0 + (1.0 - damp) * mm.q0;
    op.v0 = damp * op.v0 + (1.0 - damp) * mm.v0;
    op.v1 = damp * op.v1 + (1.0 - damp) * mm.v1;
    res.iters = it + 1;
    if (delta < tol) {
      res.converged = true;
      break;
    }
    // past the s a0/a1 -> 1 domain edge the iterate runs away along (v0, v1);
    // bail out early instead of burning the full budget on garbage states
    if (!(std::isfinite(op.v0) && std::isfinite(op.v1) && std::isfinite(op.m)) ||
        op.v0 > 1e8 || op.v1 > 1e8)
      break;
    // near a branch exchange the undamped map limit-cycles between basins;
    // halve the step whenever a window passes without real progress
    if (it % kStallWindow == kStallWindow - 1) {
      if (delta > 0.1 * stall_ref && damp < 0.97) damp = 1.0 - 0.5 * (1.0 - damp);
      stall_ref = delta;
    }
  }
  res.op = op;
  res.rho = mm.rho;
  res.phi = free_entropy(p, op);
  return res;
}

SaddleResult saddle_point(const ReplicaParams& p, SaddleInit init, double damping,
                          int max_iters, double tol) {
  ReplicaOrderParams start;
  if (init == SaddleInit::kInformed) {
    start.m = start.q0 = p.rho_o;
    start.v0 = 0.0;
    start.v1 = 1e-8;
  } else {
    start.v1 = p.rho_o;
    // v0 = 0 is an invariant manifold of the iteration (a point cluster stays a
    // point cluster), so the glassy saddle is reachable only from v0 > 0
    start.v0 = 0.05;
  }
  return saddle_point_from(p, start, damping, max_iters, tol);
}

ComplexityPoint complexity_at(const ReplicaParams& p, const SaddleResult& saddle) {
  const double ds = 1e-4 * p.s;
  ReplicaParams pp = p;
  pp.s = p.s - ds;
  const double phi_lo = free_entropy(pp, saddle.op);
  double dphi_ds;
  // near the domain edge s a0/a1 -> 1 the upward step can leave the region
  // where the inner measure is normalizable; fall back to a one-sided
  // difference there (the downward step is always admissible)
  if ((p.s + ds) * saddle.op.a0 < saddle.op.a1) {
    pp.s = p.s + ds;
    const double phi_hi = free_entropy(pp, saddle.op);
    dphi_ds = (phi_hi - phi_lo) / (2.0 * ds);
  } else {
    dphi_ds = (saddle.phi - phi_lo) / ds;
  }
  ComplexityPoint cp;
  cp.s = p.s;
  cp.phi = saddle.phi;
  cp.sigma = -p.s * p.s * dphi_ds;
  cp.ell = -saddle.phi - p.s * dphi_ds;
  return cp;
}

std::vector<ComplexityPoint> complexity_curve(double rho_o, double alpha, double lambda,
                                              const std::vector<double>& s_values,
                                              SaddleInit init,
                                              const QuadratureSpec& quad) {
  std::vector<ComplexityPoint> out;
  out.reserve(s_values.size());
  const ReplicaOrderParams* warm = nullptr;
  ReplicaOrderParams warm_op;
  for (double s : s_values) {
    ReplicaParams p{rho_o, alpha, lambda, s, quad};
    SaddleResult sr = warm ? saddle_point_from(p, warm_op) : saddle_point(p, init);
    warm_op = sr.op;
    warm = &warm_op;
    out.push_back(complexity_at(p, sr));
  }
  return out;
}

SStarResult select_s_star(double rho_o, double alpha, double lambda, double s_min,
                          double s_max, double tol_s, SaddleInit init,
                          const QuadratureSpec& quad, const ReplicaOrderParams* warm,
                          double s_guess) {
  if (!(s_min > 0.0 && s_max > s_min)) throw std::invalid_argument("bad s range");
  ReplicaOrderParams base;
  bool have_base = warm != nullptr;
  if (have_base) base = *warm;
  // probes only need the sign of Sigma, so they run on a reduced iteration
  // budget; the saddle at the selected s is re-polished to full accuracy at
  // the end (critical slowing down near branch exchanges makes full-accuracy
  // probes prohibitively slow)
  constexpr int kProbeIters = 600;
  constexpr double kProbeTol = 1e-9;
  auto sigma_from = [&](double s, const ReplicaOrderParams& from, SaddleResult& sr_out) {
    ReplicaParams p{rho_o, alpha, lambda, s, quad};
    sr_out = saddle_point_from(p, from, 0.5, kProbeIters, kProbeTol);
    return complexity_at(p, sr_out).sigma;
  };
  auto sigma_cold = [&](double s, SaddleResult& sr_out) {
    ReplicaParams p{rho_o, alpha, lambda, s, quad};
    sr_out = saddle_point(p, init, 0.5, kProbeIters, kProbeTol);
    return complexity_at(p, sr_out).sigma;
  };
  auto polish = [&](SStarResult& r) {
    ReplicaParams p{rho_o, alpha, lambda, r.s, quad};
    r.saddle = saddle_point_from(p, r.saddle.op);
    return r;
  };
  constexpr double kSigmaTol = -1e-9;
  SStarResult res;
  double lo, hi;
  SaddleResult sr_best;  // saddle at the current lo (Sigma >= 0 side)
  if (s_guess > 0.0) {
    // continuation walk from the previous stage's s*: saddle families exchange
    // stability along s, so the branch is followed with steps of at most a
    // factor 2, each probe warm-started from the adjacent one
    const double cur = std::min(std::max(s_guess, s_min), s_max);
    SaddleResult sr;
    const double sg = have_base ? sigma_from(cur, base, sr) : sigma_cold(cur, sr);
    if (sg >= kSigmaTol) {
      lo = hi = cur;
      sr_best = sr;
      while (true) {
        if (hi >= s_max) {
          res.s = s_max;
          res.at_s_max = true;
          res.saddle = sr_best;
          return polish(res);
        }
        const double nxt = std::min(s_max, hi * 2.0);
        SaddleResult sr_n;
        if (sigma_from(nxt, sr_best.op, sr_n) >= kSigmaTol) {
          lo = hi = nxt;
          sr_best = sr_n;
        } else {
          hi = nxt;
          break;
        }
      }
    } else {
      hi = cur;
      SaddleResult sr_w = sr;
      while (true) {
        if (hi <= s_min) {
          res.s = s_min;
          res.saddle = sr_w;
          return polish(res);
        }
        const double nxt = std::max(s_min, hi * 0.5);
        SaddleResult sr_n;
        if (sigma_from(nxt, sr_w.op, sr_n) >= kSigmaTol) {
          lo = nxt;
          sr_best = sr_n;
          break;
        }
        hi = nxt;
        sr_w = sr_n;
      }
    }
  } else {
    SaddleResult sr;
    const double sg = have_base ? sigma_from(s_max, base, sr) : sigma_cold(s_max, sr);
    if (sg >= kSigmaTol) {
      res.s = s_max;
      res.at_s_max = true;
      res.saddle = sr;
      return polish(res);
    }
    SaddleResult sr_lo;
    if (sigma_from(s_min, sr.op, sr_lo) < kSigmaTol) {
      res.s = s_min;
      res.saddle = sr_lo;
      return polish(res);
    }
    lo = s_min;
    hi = s_max;
    sr_best = sr_lo;
  }
  // bisection; mids are warm-started from the Sigma >= 0 endpoint, which is
  // the branch whose complexity vanishing is being located
  while (hi - lo > tol_s * std::max(1.0, lo)) {
    const double mid = std::sqrt(lo * hi);
    SaddleResult sr_mid;
    if (sigma_from(mid, sr_best.op, sr_mid) >= kSigmaTol) {
      lo = mid;
      sr_best = sr_mid;
    } else {
      hi = mid;
    }
  }
  res.s = lo;
  res.saddle = sr_best;
  return polish(res);
}

PredictedObservables predicted_observables(double rho_o, double alpha, double lambda,
                                           double s_min, double s_max, SaddleInit init,
                                           const QuadratureSpec& quad,
                                           const ReplicaOrderParams* warm,
                                           ReplicaOrderParams* op_out, double s_guess) {
  SStarResult st = select_s_star(rho_o, alpha, lambda, s_min, s_max, 1e-2, init, quad,
                                 warm, s_guess);
  ReplicaParams p{rho_o, alpha, lambda, st.s, quad};
  const ComplexityPoint cp = complexity_at(p, st.saddle);
  PredictedObservables po;
  po.lambda = lambda;
  po.m = st.saddle.op.m;
  po.q_self = st.saddle.op.q0 + st.saddle.op.v0;
  po.eps_rec = rho_o + po.q_self - 2.0 * po.m;
  if (po.eps_rec < 0.0 && po.eps_rec > -1e-12) po.eps_rec = 0.0;
  po.rho = st.saddle.rho;
  po.v0 = st.saddle.op.v0;
  po.s = st.s;
  po.sigma = cp.sigma;
  po.ell = cp.ell;
  po.e = std::max(2.0 * (cp.ell - lambda * po.rho), 0.0);
  po.cost = lambda > 0.0 ? po.e / lambda + po.rho : po.rho;
  po.s_at_max = st.at_s_max;
  po.converged = st.saddle.converged;
  if (op_out) *op_out = st.saddle.op;
  return po;
}

std::vector<PredictedObservables> replica_anneal(double rho_o, double alpha,
                                                 const std::vector<double>& lambdas,
                                                 double s_min, double s_max,
                                                 SaddleInit init,
                                                 const QuadratureSpec& quad) {
  if (lambdas.empty()) throw std::invalid_argument("empty lambda schedule");
  std::vector<PredictedObservables> out;
  out.reserve(lambdas.size());
  const ReplicaOrderParams* warm = nullptr;
  ReplicaOrderParams warm_op;
  // moderate starting guess: the first stage's walk reaches the Sigma = 0
  // crossing by continuation instead of probing the (possibly huge) s_max cold
  double s_guess = std::min(10.0, std::sqrt(s_min * s_max));
  bool frozen = false;
  for (double lambda : lambdas) {
    if (frozen) {
      // branch endpoint reached: the complexity-selected family terminates at a
      // finite lambda on the failure side; the endpoint observables are the
      // operational lambda -> 0 limit and are carried forward, marked
      // unconverged
      PredictedObservables po = out.back();
      po.lambda = lambda;
      po.converged = false;
      out.push_back(po);
      continue;
    }
    // the selected saddle doubles as the warm start for the next stage, and its
    // s* localizes the next stage's bracket
    ReplicaOrderParams op_stage;
    PredictedObservables po = predicted_observables(rho_o, alpha, lambda, s_min, s_max,
                                                    init, quad, warm, &op_stage, s_guess);
    // a merely unconverged stage (slow critical saddle) still carries usable
    // observables and a usable warm start; only a runaway marks the endpoint
    const bool sane = std::isfinite(po.v0) && po.v0 < 1e6 && std::isfinite(po.m) &&
                      std::isfinite(po.cost);
    if (!sane && !out.empty()) {
      frozen = true;
      PredictedObservables prev = out.back();
      prev.lambda = lambda;
      prev.converged = false;
      out.push_back(prev);
      continue;
    }
    warm_op = op_stage;
    warm = &warm_op;
    s_guess = po.s;
    out.push_back(po);
  }
  return out;
}

double phase_boundary(double rho_o, double tol_alpha, double s_max,
                      const QuadratureSpec& quad) {
  if (tol_alpha <= 0.0) throw std::invalid_argument("tol_alpha must be positive");
  // On the recovery side v0 -> 0 so the annealed fixed point is insensitive to
  // s; a single large s stands in for the s -> s* envelope.
  auto success = [&](double alpha) {
    ReplicaOrderParams warm_op;
    bool have_warm = false;
    double eps = 1.0;
    for (double lambda = 1.0; lambda >= 1e-8; lambda *= 0.5) {
      ReplicaParams p{rho_o, alpha, lambda, s_max, quad};
      // classification only needs the terminal basin, not fully polished
      // saddles; near-critical stages are capped and annealing recovers
      SaddleResult sr = have_warm ? saddle_point_from(p, warm_op, 0.5, 1500)
                                  : saddle_point(p, SaddleInit::kUninformed, 0.5, 1500);
      warm_op = sr.op;
      have_warm = true;
      eps = rho_o + sr.op.q0 + sr.op.v0 - 2.0 * sr.op.m;
      // a runaway cluster spread only amplifies under further annealing;
      // classify as no-recovery immediately
      if (!sr.converged && (sr.op.v0 > 1e6 || sr.op.v1 > 1e6)) return false;
    }
    return eps < 1e-8;
  };
  double lo = rho_o, hi = 1.0;
  const bool s_lo = success(lo), s_hi = success(hi);
  if (s_lo || !s_hi) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "boundary bracket invalid: success(%.4f)=%d success(%.4f)=%d", lo,
                  int(s_lo), hi, int(s_hi));
    throw std::runtime_error(buf);
  }
  while (hi - lo > tol_alpha) {
    const double mid = 0.5 * (lo + hi);
    (success(mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

void write_complexity_csv(const std::vector<ComplexityPoint>& curve,
                          const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + path);
  std::fprintf(f, "s,phi,sigma,ell\n");
  for (const auto& c : curve)
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g\n", c.s, c.phi, c.sigma, c.ell);
  std::fclose(f);
}

void write_cost_curve_csv(const std::vector<PredictedObservables>& curve,
                          const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + path);
  std::fprintf(f, "lambda,e,rho,cost,m,eps_rec\n");
  for (const auto& c : curve)
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", c.lambda, c.e, c.rho,
                 c.cost, c.m, c.eps_rec);
  std::fclose(f);
}

}  // namespace l0cs
