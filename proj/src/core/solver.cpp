#include "solver.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

#include "denoiser.hpp"

namespace l0cs {

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::kAsp: return "asp";
    case Algorithm::kAspo: return "aspo";
    case Algorithm::kLasso: return "lasso";
  }
  return "?";
}

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "asp") return Algorithm::kAsp;
  if (name == "aspo") return Algorithm::kAspo;
  if (name == "lasso") return Algorithm::kLasso;
  throw std::invalid_argument("unknown algorithm: " + name);
}

AspState AspState::zero_init(int n, int m, double alpha, double s0) {
  AspState st;
  st.x_hat = Eigen::VectorXd::Zero(n);
  st.g = Eigen::VectorXd::Zero(m);
  st.w = Eigen::VectorXd::Zero(m);
  st.b_field = Eigen::VectorXd::Zero(n);
  st.v0 = st.v1 = st.a0 = 0.0;
  st.a1 = alpha;
  st.s = s0;
  return st;
}

AspoState AspoState::zero_init(int n, int m, double alpha) {
  AspoState st;
  st.x_hat = Eigen::VectorXd::Zero(n);
  st.z = Eigen::VectorXd::Zero(m);
  st.v_scalar = 0.0;
  st.a_scalar = alpha;
  return st;
}

void AnnealingSchedule::validate() const {
  if (lambdas.empty()) throw std::invalid_argument("schedule: empty lambda list");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0)) throw std::invalid_argument("schedule: lambdas must be positive");
    if (i > 0 && !(lambdas[i] < lambdas[i - 1]))
      throw std::invalid_argument("schedule: lambdas must be strictly decreasing");
  }
  if (max_iters_per_stage < 1) throw std::invalid_argument("schedule: max_iters_per_stage >= 1");
  if (!(converge_tol > 0.0)) throw std::invalid_argument("schedule: converge_tol > 0");
  if (!(damping >= 0.0 && damping < 1.0)) throw std::invalid_argument("schedule: damping in [0,1)");
}

AnnealingSchedule AnnealingSchedule::geometric(double lambda_max, double lambda_min,
                                               double ratio) {
  if (!(lambda_max > lambda_min && lambda_min > 0.0 && ratio > 0.0 && ratio < 1.0))
    throw std::invalid_argument("geometric schedule: need lambda_max > lambda_min > 0, ratio in (0,1)");
  AnnealingSchedule sched;
  double lam = lambda_max;
  while (lam > lambda_min * (1.0 + 1e-12)) {
    sched.lambdas.push_back(lam);
    lam *= ratio;
  }
  sched.lambdas.push_back(lambda_min);
  return sched;
}

namespace {
void check_finite(const Eigen::VectorXd& v, const char* what, int iteration) {
  // treat magnitude explosion as divergence too: a runaway iteration can grow
  // for many sweeps before overflowing to inf, poisoning every later stage
  if (!v.allFinite() || v.squaredNorm() > 1e12 * v.size())
    throw DivergenceError(std::string("divergence: non-finite ") + what, iteration);
}
}  // namespace

AspState asp_step(const AspState& state, const ProblemInstance& instance, double lambda,
                  double damping, int iteration) {
  const int n = instance.n(), m = instance.m_rows();
  const double alpha = static_cast<double>(m) / n;
  const double s = state.s;
  const double D = 1.0 + state.v1 + s * state.v0;
  if (!(D > 1e-12) || !std::isfinite(D))
    throw DivergenceError("divergence: 1+V1+sV0 not positive", iteration);

  AspState next = state;
  next.w = instance.matrix_f * state.x_hat - state.g * (s * state.v0 + state.v1);
  next.g = (instance.y - next.w) / D;
  check_finite(next.g, "g", iteration);

  next.a0 = std::max(alpha / s * (1.0 / (1.0 + state.v1) - 1.0 / D), 0.0);
  next.a1 = alpha / D + s * next.a0;
  next.b_field = instance.matrix_f.transpose() * next.g +
                 state.x_hat * (next.a1 - s * next.a0);
  check_finite(next.b_field, "B", iteration);

  double sum_d2b = 0.0, sum_v0 = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto ev = phi_in_1rsb({next.b_field(i), next.a0, next.a1, s, lambda});
    next.x_hat(i) = ev.d_b;
    sum_d2b += ev.d2_b;
    sum_v0 += -2.0 * ev.d_a1 - ev.d_b * ev.d_b;
  }
  check_finite(next.x_hat, "x_hat", iteration);

  const double v0_new = std::max(sum_v0 / n, 0.0);
  const double v1_new = sum_d2b / n - s * v0_new;
  next.v0 = (1.0 - damping) * v0_new + damping * state.v0;
  next.v1 = (1.0 - damping) * v1_new + damping * state.v1;
  if (!std::isfinite(next.v0) || !std::isfinite(next.v1))
    throw DivergenceError("divergence: non-finite variances", iteration);
  return next;
}

namespace {

template <class Eta, class EtaPrime>
AspoState amp_step(const AspoState& state, const ProblemInstance& instance,
                   double lambda, double damping, int iteration, Eta&& eta,
                   EtaPrime&& eta_prime) {
  const int n = instance.n(), m = instance.m_rows();
  const double alpha = static_cast<double>(m) / n;
  AspoState next = state;
  next.z = instance.y - instance.matrix_f * state.x_hat +
           state.z * (state.v_scalar / alpha);
  check_finite(next.z, "z", iteration);
  const Eigen::VectorXd u = instance.matrix_f.transpose() * next.z + state.x_hat;
  const double theta = lambda / state.a_scalar;
  double sum_prime = 0.0;
  for (int i = 0; i < n; ++i) {
    next.x_hat(i) = eta(u(i), theta);
    sum_prime += eta_prime(u(i), theta);
  }
  check_finite(next.x_hat, "x_hat", iteration);
  const double v_new = sum_prime / n;
  next.v_scalar = (1.0 - damping) * v_new + damping * state.v_scalar;
  next.a_scalar = alpha / (1.0 + next.v_scalar);
  if (!(next.a_scalar > 0.0) || !std::isfinite(next.a_scalar))
    throw DivergenceError("divergence: bad A scalar", iteration);
  return next;
}

}  // namespace

AspoState aspo_step(const AspoState& state, const ProblemInstance& instance,
                    double lambda, double xi, double damping, int iteration) {
  return amp_step(
      state, instance, lambda, damping, iteration,
      [xi](double u, double th) { return eta_aspo(u, th, xi); },
      [xi](double u, double th) { return eta_aspo_prime(u, th, xi); });
}

AspoState lasso_amp_step(const AspoState& state, const ProblemInstance& instance,
                         double lambda, double damping, int iteration) {
  return amp_step(
      state, instance, lambda, damping, iteration,
      [](double u, double th) { return eta_soft(u, th); },
      [](double u, double th) { return eta_soft_prime(u, th); });
}

namespace {

// Plug-in 1RSB free entropy at the current messages, as a function of s only
// (fields B and variances V0, V1 held fixed). Used for the s-stationarity.
double plug_in_phi(const AspState& state, const ProblemInstance& instance,
                   double lambda, double s) {
  const int n = instance.n();
  const double alpha = static_cast<double>(instance.m_rows()) / n;
  const double D = 1.0 + state.v1 + s * state.v0;
  if (!(D > 1e-12)) return -std::numeric_limits<double>::infinity();
  const double q0 = state.x_hat.squaredNorm() / n;
  const double m = instance.x_o.dot(state.x_hat) / n;
  const double rho_hat = instance.x_o.squaredNorm() / n;
  const double e_m = rho_hat - 2.0 * m + q0;
  const double m_hat = alpha / D;
  const double q0_hat = alpha * e_m / (D * D);
  const double a0 = std::max(alpha / s * (1.0 / (1.0 + state.v1) - 1.0 / D), 0.0);
  const double a1 = alpha / D + s * a0;
  double inner = 0.0;
  for (int i = 0; i < n; ++i)
    inner += phi_in_1rsb({state.b_field(i), a0, a1, s, lambda}).value;
  inner /= n;
  return -m_hat * m + 0.5 * (q0 + state.v0) * a1 -
         0.5 * (state.v1 + s * state.v0) * (q0_hat + a0) - 0.5 * s * q0 * a0 + inner -
         0.5 * alpha * e_m / D + alpha / (2.0 * s) * std::log((1.0 + state.v1) / D);
}

}  // namespace

double tune_s(const AspState& state, const ProblemInstance& instance, double lambda,
              const AspOptions& opts) {
  auto phi = [&](double s) { return plug_in_phi(state, instance, lambda, s); };
  auto slope = [&](double s) {
    const double h = 1e-5 * s;
    return (phi(s + h) - phi(s - h)) / (2.0 * h);
  };
  const int kGrid = 25;
  const double ls0 = std::log(opts.s_min), ls1 = std::log(opts.s_max);
  double prev_s = opts.s_min, prev_g = slope(prev_s);
  double mean_g = prev_g;
  double lo = 0.0, hi = 0.0, glo = 0.0;
  bool bracketed = false;
  for (int k = 1; k < kGrid; ++k) {
    const double sk = std::exp(ls0 + (ls1 - ls0) * k / (kGrid - 1));
    const double gk = slope(sk);
    mean_g += gk;
    if (!bracketed && std::isfinite(prev_g) && std::isfinite(gk) && prev_g * gk < 0.0) {
      lo = prev_s;
      hi = sk;
      glo = prev_g;
      bracketed = true;
    }
    prev_s = sk;
    prev_g = gk;
  }
  if (!bracketed) return mean_g >= 0.0 ? opts.s_max : opts.s_min;
  while (hi - lo > 1e-8 * std::max(1.0, lo)) {
    const double mid = 0.5 * (lo + hi);
    const double gm = slope(mid);
    if (gm == 0.0) return mid;
    if (gm * glo < 0.0) {
      hi = mid;
    } else {
      lo = mid;
      glo = gm;
    }
  }
  return 0.5 * (lo + hi);
}

namespace {

double iterate_change(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).squaredNorm() / a.size();
}

}  // namespace

SolveResult anneal_solve(const ProblemInstance& instance,
                         const AnnealingSchedule& schedule, Algorithm algorithm,
                         double xi, const AspOptions& asp_opts) {
  schedule.validate();
  const int n = instance.n(), m = instance.m_rows();
  const double alpha = static_cast<double>(m) / n;

  AspState asp = AspState::zero_init(n, m, alpha, 1.0);
  // The v0 = 0 manifold is invariant under asp_step (with a0 = 0 the delta
  // branch gives -2 d_a1 = d_b^2 exactly), so the cluster variance never
  // develops from an exactly-zero start and the iteration degenerates into a
  // bare hard-threshold AMP, which is unstable. Seed a small positive v0.
  asp.v0 = 0.05;
  asp.v1 = 0.05;
  AspoState amp = AspoState::zero_init(n, m, alpha);

  SolveResult result;
  for (std::size_t stage = 0; stage < schedule.lambdas.size(); ++stage) {
    const double lambda = schedule.lambdas[stage];
    const AspState asp_start = asp;
    const AspoState amp_start = amp;
    double damping = schedule.damping;
    SolveTraceRow row;
    row.stage = static_cast<int>(stage);
    row.lambda = lambda;

    for (int attempt = 0; attempt < 2; ++attempt) {
      try {
        int it = 0;
        bool converged = false;
        for (; it < schedule.max_iters_per_stage; ++it) {
          if (algorithm == Algorithm::kAsp) {
            if (asp_opts.retune_interval > 0 && it % asp_opts.retune_interval == 0) {
              const double s_new = tune_s(asp, instance, lambda, asp_opts);
              // keep V = v1 + s v0 (and hence the channel denominator) invariant
              // under the s change
              asp.v1 += (asp.s - s_new) * asp.v0;
              asp.s = s_new;
            }
            AspState next = asp_step(asp, instance, lambda, damping, it);
            const double change = iterate_change(next.x_hat, asp.x_hat);
            asp = std::move(next);
            if (change < schedule.converge_tol) { converged = true; ++it; break; }
          } else {
            AspoState next = algorithm == Algorithm::kAspo
                                 ? aspo_step(amp, instance, lambda, xi, damping, it)
                                 : lasso_amp_step(amp, instance, lambda, damping, it);
            const double change = iterate_change(next.x_hat, amp.x_hat);
            amp = std::move(next);
            if (change < schedule.converge_tol) { converged = true; ++it; break; }
          }
        }
        row.iters = it;
        row.converged = converged;
        break;
      } catch (const DivergenceError&) {
        if (attempt == 0) {
          // one retry from the stage-start state with stronger damping
          asp = asp_start;
          amp = amp_start;
          damping = std::min(0.9, damping + 0.3);
        } else {
          asp = asp_start;
          amp = amp_start;
          row.aborted = true;
          row.converged = false;
        }
      }
    }

    if (algorithm == Algorithm::kAsp) {
      row.obs = observables(asp.x_hat, instance);
      row.V = asp.v1 + asp.s * asp.v0;
      row.has_s = true;
      row.s = asp.s;
      row.v0 = asp.v0;
      row.v1 = asp.v1;
    } else {
      row.obs = observables(amp.x_hat, instance);
      row.V = amp.v_scalar;
    }
    result.trace.push_back(row);
  }
  result.x_hat = algorithm == Algorithm::kAsp ? asp.x_hat : amp.x_hat;
  return result;
}

void write_solve_trace_csv(const std::vector<SolveTraceRow>& trace,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "stage,lambda,iters,m,q,e,rho,eps_rec,V,s,V0,V1,converged\n";
  out << std::setprecision(12);
  for (const auto& r : trace) {
    out << r.stage << ',' << r.lambda << ',' << r.iters << ',' << r.obs.m << ','
        << r.obs.q << ',' << r.obs.e << ',' << r.obs.rho << ',' << r.obs.eps_rec << ','
        << r.V << ',';
    if (r.has_s)
      out << r.s << ',' << r.v0 << ',' << r.v1;
    else
      out << ",,";
    out << ',' << (r.converged ? 1 : 0) << '\n';
  }
}

}  // namespace l0cs
