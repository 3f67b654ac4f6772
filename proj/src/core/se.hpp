#pragma once

#include <string>
#include <vector>

#include "quadrature.hpp"
#include "solver.hpp"

namespace l0cs {

// State evolution: deterministic scalar recursion tracking the infinite-size
// order parameters (m, q, V) of ASP_o and l1-AMP under lambda annealing.

struct SEState {
  double m = 0.0;  // signal overlap
  double q = 0.0;  // self overlap
  double v = 0.0;  // variance

  double e_mse(double rho_o) const {
    const double e = rho_o + q - 2.0 * m;
    return e < 1e-14 ? std::max(e, 0.0) : e;  // clip roundoff negatives
  }
  double a_scalar(double alpha) const { return alpha / (1.0 + v); }
};

// The eta argument in the SE average. kDerived uses x_o + sqrt(E/alpha) z,
// the large-N form of the algorithm's B/A field; kPrinted uses x_o + sqrt(E) z / A.
enum class SEFieldForm { kDerived, kPrinted };

SEState se_step_aspo(const SEState& state, double rho_o, double alpha, double lambda,
                     double xi, const QuadratureSpec& quad,
                     SEFieldForm field = SEFieldForm::kDerived);
SEState se_step_lasso(const SEState& state, double rho_o, double alpha, double lambda,
                      const QuadratureSpec& quad,
                      SEFieldForm field = SEFieldForm::kDerived);

struct SEPoint {
  double lambda = 0.0;
  SEState state;
  int iters = 0;
  bool converged = false;
  // mse escaped to +inf (the iteration amplifies noise by 1/alpha per step
  // once the effective threshold is too small to cut it); a definitive
  // no-recovery signal, the remaining stages are skipped
  bool diverged = false;
};

// Per-lambda fixed points (|dm|+|dq|+|dV| < 1e-12), warm-started along the
// schedule. Damping 0.5 engages only after an oscillation in m is detected.
std::vector<SEPoint> se_anneal(double rho_o, double alpha,
                               const AnnealingSchedule& schedule, Algorithm algorithm,
                               double xi, const QuadratureSpec& quad,
                               SEFieldForm field = SEFieldForm::kDerived);

// Bisection in alpha of the terminal-eps_rec success indicator.
double algorithmic_threshold(double rho_o, Algorithm algorithm, double xi,
                             double tol_alpha,
                             const AnnealingSchedule& schedule = AnnealingSchedule::geometric(),
                             const QuadratureSpec& quad = {});

void write_se_trace_csv(const std::vector<SEPoint>& trace, double rho_o, double alpha,
                        const std::string& path);

}  // namespace l0cs
