#pragma once

#include <string>
#include <vector>

#include "quadrature.hpp"
#include "solver.hpp"

namespace l0cs {

// 1RSB variational analysis of the l0-penalized least-squares measure:
// free-entropy potential, saddle-point equations, complexity curve Sigma(s),
// and the derived equilibrium predictions (phase boundary, cost curves).

struct ReplicaOrderParams {
  // overlaps / variances
  double m = 0.0;
  double q0 = 0.0;
  double v0 = 0.0;
  double v1 = 0.0;
  // conjugates
  double m_hat = 0.0;
  double q0_hat = 0.0;
  double a0 = 0.0;
  double a1 = 0.0;
};

struct ReplicaParams {
  double rho_o = 0.0;
  double alpha = 0.0;
  double lambda = 0.0;
  double s = 1.0;
  QuadratureSpec quad;

  void validate() const;
};

enum class SaddleInit { kUninformed, kInformed };

struct SaddleResult {
  ReplicaOrderParams op;
  double phi = 0.0;       // free entropy at the saddle
  double rho = 0.0;       // predicted support density (inner measure)
  int iters = 0;
  bool converged = false;
};

// Full variational potential at the given (not necessarily stationary) point.
double free_entropy(const ReplicaParams& params, const ReplicaOrderParams& op);

SaddleResult saddle_point(const ReplicaParams& params, SaddleInit init,
                          double damping = 0.5, int max_iters = 4000,
                          double tol = 1e-11);
// Warm-started variant.
SaddleResult saddle_point_from(const ReplicaParams& params, ReplicaOrderParams start,
                               double damping = 0.5, int max_iters = 4000,
                               double tol = 1e-11);

struct ComplexityPoint {
  double s = 0.0;
  double phi = 0.0;    // free entropy
  double sigma = 0.0;  // complexity Sigma = -s^2 dPhi/ds
  double ell = 0.0;    // internal free energy  ell = -Phi - s dPhi/ds
};

// Envelope derivative in s: the saddle is re-solved at s, then Phi(s +/- ds)
// is evaluated with the order parameters held fixed (central difference).
ComplexityPoint complexity_at(const ReplicaParams& params, const SaddleResult& saddle);

std::vector<ComplexityPoint> complexity_curve(double rho_o, double alpha, double lambda,
                                              const std::vector<double>& s_values,
                                              SaddleInit init,
                                              const QuadratureSpec& quad = {});

struct SStarResult {
  double s = 0.0;
  bool at_s_max = false;  // Sigma >= 0 over the whole range (recovery side)
  SaddleResult saddle;    // saddle at the selected s
};

// sup{ s in [s_min, s_max] : Sigma(s) >= 0 } by bisection.  A positive s_guess
// localizes the initial bracket around it (grown geometrically as needed),
// which avoids solving stubborn saddles at the range endpoints.
SStarResult select_s_star(double rho_o, double alpha, double lambda, double s_min,
                          double s_max, double tol_s, SaddleInit init,
                          const QuadratureSpec& quad = {},
                          const ReplicaOrderParams* warm = nullptr,
                          double s_guess = 0.0);

struct PredictedObservables {
  double lambda = 0.0;
  double m = 0.0;
  double q_self = 0.0;   // q0 + v0
  double eps_rec = 0.0;  // rho_o + q_self - 2 m
  double rho = 0.0;      // support density
  double e = 0.0;        // residual mse per variable
  double cost = 0.0;     // e / lambda + rho
  double v0 = 0.0;
  double s = 0.0;
  double sigma = 0.0;
  double ell = 0.0;
  bool s_at_max = false;
  bool converged = false;
};

PredictedObservables predicted_observables(double rho_o, double alpha, double lambda,
                                           double s_min, double s_max, SaddleInit init,
                                           const QuadratureSpec& quad = {},
                                           const ReplicaOrderParams* warm = nullptr,
                                           ReplicaOrderParams* op_out = nullptr,
                                           double s_guess = 0.0);

// Lambda-annealed equilibrium curve with per-stage s selection, warm-started
// along the schedule.
std::vector<PredictedObservables> replica_anneal(double rho_o, double alpha,
                                                 const std::vector<double>& lambdas,
                                                 double s_min, double s_max,
                                                 SaddleInit init,
                                                 const QuadratureSpec& quad = {});

// Equilibrium recovery boundary: bisection in alpha of the annealed
// (lambda -> 1e-8) eps_rec < 1e-8 indicator.
double phase_boundary(double rho_o, double tol_alpha, double s_max = 200.0,
                      const QuadratureSpec& quad = {});

void write_complexity_csv(const std::vector<ComplexityPoint>& curve,
                          const std::string& path);
void write_cost_curve_csv(const std::vector<PredictedObservables>& curve,
                          const std::string& path);

}  // namespace l0cs
