#include "se.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "denoiser.hpp"
#include "specfun.hpp"

namespace l0cs {

namespace {

// Branch expectation E_{u~N(0,var)}[f(u)], with the scalar denoiser's kink
// locations at u = +/- t passed through as breakpoints.
double branch_expect(const std::function<double(double)>& f, double var, double t,
                     double width, const QuadratureSpec& quad) {
  if (var <= 0.0) return f(0.0);
  const double sd = std::sqrt(var);
  std::vector<double> brk;
  if (t > 0.0 && t / sd < 14.0) brk = {-t / sd, t / sd};
  return gauss_expect([&](double z) { return f(sd * z); }, quad, brk, width / sd);
}

struct StepOut {
  double m, q, v;
};

// One SE step for a scalar denoiser eta(u) applied to u = x_o + noise. The two
// variances are the zero branch (x_o = 0) and signal branch (x_o ~ N(0,1)).
// Stein's lemma reduces E[x_o eta(u)] to E[eta'(u)] over the signal branch;
// `jump_mass` carries the extra boundary terms when eta has genuine jumps.
template <class Eta, class EtaPrime>
StepOut se_step_generic(const SEState& state, double rho_o, double alpha,
                        Eta&& eta, EtaPrime&& eta_prime, double t, double width,
                        double jump_mass_t, const QuadratureSpec& quad,
                        SEFieldForm field) {
  const double e_mse = state.e_mse(rho_o);
  const double a = state.a_scalar(alpha);
  const double noise_var =
      field == SEFieldForm::kDerived ? e_mse / alpha : e_mse / (a * a);
  const double v0 = noise_var;        // zero branch
  const double v1 = 1.0 + noise_var;  // signal branch

  auto eta_sq = [&](double u) { const double h = eta(u); return h * h; };

  StepOut out{};
  double mp = branch_expect(eta_prime, v1, t, width, quad);
  if (jump_mass_t > 0.0 && t > 0.0) {
    // eta jumps by jump_mass_t at u = +/- t; distributional derivative adds
    // jump * pdf at each kink.
    mp += 2.0 * jump_mass_t * norm_pdf(t / std::sqrt(v1)) / std::sqrt(v1);
  }
  out.m = rho_o * mp;
  out.q = (1.0 - rho_o) * branch_expect(eta_sq, v0, t, width, quad) +
          rho_o * branch_expect(eta_sq, v1, t, width, quad);
  out.v = (1.0 - rho_o) * branch_expect(eta_prime, v0, t, width, quad) +
          rho_o * branch_expect(eta_prime, v1, t, width, quad);
  return out;
}

}  // namespace

SEState se_step_aspo(const SEState& state, double rho_o, double alpha, double lambda,
                     double xi, const QuadratureSpec& quad, SEFieldForm field) {
  const double a = state.a_scalar(alpha);
  const double lam_eff = lambda / a;
  const double t = std::sqrt(2.0 * lam_eff);
  // xi = 0 makes eta (and its derivative) discontinuous: Gauss-Hermite cannot
  // see the jump, so force the breakpoint-aware adaptive path with width 0
  const double width =
      lam_eff > 0.0 ? (xi > 0.0 ? std::max(xi * lam_eff, 1e-300) : 0.0) : 1e300;
  const double jump = (xi == 0.0 && lam_eff > 0.0) ? t : 0.0;
  const StepOut o = se_step_generic(
      state, rho_o, alpha, [&](double u) { return eta_aspo(u, lam_eff, xi); },
      [&](double u) { return eta_aspo_prime(u, lam_eff, xi); }, t, width, jump, quad,
      field);
  return SEState{o.m, o.q, o.v};
}

SEState se_step_lasso(const SEState& state, double rho_o, double alpha, double lambda,
                      const QuadratureSpec& quad, SEFieldForm field) {
  const double a = state.a_scalar(alpha);
  const double lam_eff = lambda / a;
  // width 0: eta' is an indicator, only the adaptive path integrates it well
  const StepOut o = se_step_generic(
      state, rho_o, alpha, [&](double u) { return eta_soft(u, lam_eff); },
      [&](double u) { return eta_soft_prime(u, lam_eff); }, lam_eff,
      lam_eff > 0.0 ? 0.0 : 1e300, 0.0, quad, field);
  return SEState{o.m, o.q, o.v};
}

std::vector<SEPoint> se_anneal(double rho_o, double alpha,
                               const AnnealingSchedule& schedule, Algorithm algorithm,
                               double xi, const QuadratureSpec& quad,
                               SEFieldForm field) {
  schedule.validate();
  quad.validate();
  if (algorithm == Algorithm::kAsp)
    throw std::invalid_argument("se_anneal supports kAspo and kLasso only");

  std::vector<SEPoint> trace;
  trace.reserve(schedule.lambdas.size());
  SEState state{};  // uninformed start: x_hat = 0
  constexpr double kDivergedMse = 1e6;
  for (double lambda : schedule.lambdas) {
    SEPoint pt;
    pt.lambda = lambda;
    double damp = 0.0;
    double prev_dm = 0.0;
    for (int it = 0; it < schedule.max_iters_per_stage; ++it) {
      if (!std::isfinite(state.q) || state.e_mse(rho_o) > kDivergedMse) {
        pt.diverged = true;
        break;
      }
      const SEState next = algorithm == Algorithm::kAspo
                               ? se_step_aspo(state, rho_o, alpha, lambda, xi, quad, field)
                               : se_step_lasso(state, rho_o, alpha, lambda, quad, field);
      const double dm = next.m - state.m;
      const double delta =
          std::abs(dm) + std::abs(next.q - state.q) + std::abs(next.v - state.v);
      if (dm * prev_dm < 0.0) damp = 0.5;  // oscillation: engage damping
      prev_dm = dm;
      state.m = damp * state.m + (1.0 - damp) * next.m;
      state.q = damp * state.q + (1.0 - damp) * next.q;
      state.v = damp * state.v + (1.0 - damp) * next.v;
      pt.iters = it + 1;
      if (delta < 1e-12) {
        pt.converged = true;
        break;
      }
    }
    pt.state = state;
    trace.push_back(pt);
    if (pt.diverged) break;
  }
  return trace;
}

double algorithmic_threshold(double rho_o, Algorithm algorithm, double xi,
                             double tol_alpha, const AnnealingSchedule& schedule,
                             const QuadratureSpec& quad) {
  if (tol_alpha <= 0.0) throw std::invalid_argument("tol_alpha must be positive");
  auto success = [&](double alpha) {
    const auto trace = se_anneal(rho_o, alpha, schedule, algorithm, xi, quad);
    return trace.back().state.e_mse(rho_o) < 1e-8;
  };
  double lo = rho_o, hi = 1.0;
  const bool s_lo = success(lo), s_hi = success(hi);
  if (s_lo || !s_hi) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "threshold bracket invalid: success(%.4f)=%d success(%.4f)=%d",
                  lo, int(s_lo), hi, int(s_hi));
    throw std::runtime_error(buf);
  }
  while (hi - lo > tol_alpha) {
    const double mid = 0.5 * (lo + hi);
    (success(mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

void write_se_trace_csv(const std::vector<SEPoint>& trace, double rho_o, double alpha,
                        const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + path);
  std::fprintf(f, "lambda,m,q,V,E,A\n");
  for (const auto& pt : trace) {
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", pt.lambda, pt.state.m,
                 pt.state.q, pt.state.v, pt.state.e_mse(rho_o),
                 pt.state.a_scalar(alpha));
  }
  std::fclose(f);
}

}  // namespace l0cs
