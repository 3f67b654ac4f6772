#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ensemble.hpp"

namespace l0cs {

enum class Algorithm { kAsp, kAspo, kLasso };

std::string algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);

// Full 1RSB survey-propagation state (per-measurement messages w, g; per-site
// fields B and estimates x_hat; scalar variances V0, V1 and cavity curvatures
// A0, A1; Parisi parameter s).
struct AspState {
  Eigen::VectorXd x_hat;
  Eigen::VectorXd g;
  Eigen::VectorXd w;
  Eigen::VectorXd b_field;
  double v0 = 0.0;
  double v1 = 0.0;
  double a0 = 0.0;
  double a1 = 0.0;
  double s = 1.0;

  static AspState zero_init(int n, int m, double alpha, double s0);
};

// Collapsed state used by ASP_o and the l1-AMP baseline.
struct AspoState {
  Eigen::VectorXd x_hat;
  Eigen::VectorXd z;
  double a_scalar = 0.0;  // = alpha / (1 + v_scalar)
  double v_scalar = 0.0;

  static AspoState zero_init(int n, int m, double alpha);
};

struct AnnealingSchedule {
  std::vector<double> lambdas;  // strictly decreasing, positive
  int max_iters_per_stage = 1000;
  double converge_tol = 1e-10;  // on mean-square iterate change
  double damping = 0.3;         // scalar variances only

  void validate() const;
  // Geometric default: 1.0 down to 1e-6 with ratio 0.8.
  static AnnealingSchedule geometric(double lambda_max = 1.0, double lambda_min = 1e-6,
                                     double ratio = 0.8);
};

struct AspOptions {
  // Retune s by solving d(phi_Bethe)/ds = 0 every `retune_interval` iterations
  // (1 = every iteration); 0 disables tuning (s frozen).
  int retune_interval = 1;
  double s_max = 100.0;
  double s_min = 0.1;
};

struct DivergenceError : std::runtime_error {
  int iteration;
  DivergenceError(const std::string& what, int iter)
      : std::runtime_error(what), iteration(iter) {}
};

AspState asp_step(const AspState& state, const ProblemInstance& instance, double lambda,
                  double damping = 0.0, int iteration = -1);
AspoState aspo_step(const AspoState& state, const ProblemInstance& instance,
                    double lambda, double xi, double damping = 0.0, int iteration = -1);
AspoState lasso_amp_step(const AspoState& state, const ProblemInstance& instance,
                         double lambda, double damping = 0.0, int iteration = -1);

// Stationary point in s of the plug-in 1RSB Bethe free entropy assembled from
// the current messages; falls back to the bracket bound when the derivative
// does not change sign.
double tune_s(const AspState& state, const ProblemInstance& instance, double lambda,
              const AspOptions& opts = {});

struct SolveTraceRow {
  int stage = 0;
  double lambda = 0.0;
  int iters = 0;
  Observables obs;
  double V = 0.0;  // v_scalar for ASP_o/LASSO, V1 + s V0 for ASP
  bool has_s = false;
  double s = 0.0, v0 = 0.0, v1 = 0.0;
  bool converged = false;
  bool aborted = false;
};

struct SolveResult {
  Eigen::VectorXd x_hat;
  std::vector<SolveTraceRow> trace;
};

// Anneal lambda over the schedule, warm-starting every stage, recording one
// trace row per stage. A diverging stage is retried once from the stage-start
// state with stronger damping, then aborted (the run continues).
SolveResult anneal_solve(const ProblemInstance& instance,
                         const AnnealingSchedule& schedule, Algorithm algorithm,
                         double xi = 0.7, const AspOptions& asp_opts = {});

void write_solve_trace_csv(const std::vector<SolveTraceRow>& trace,
                           const std::string& path);

}  // namespace l0cs
