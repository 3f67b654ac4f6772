#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

namespace l0cs {

// Synthetic instance generator for the noiseless compressed sensing model:
// Gauss-Bernoulli signal, i.i.d. N(0, 1/N) measurement matrix, y = F x_o.
//
// RNG: seeds are expanded with SplitMix64 into an mt19937_64 stream; this is
// the documented generator for cross-language ports (statistics must match,
// bit streams need not).

struct EnsembleParams {
  int n = 0;           // signal dimension N
  double alpha = 0.5;  // compression rate M/N, in (0, 1]
  double rho_o = 0.5;  // signal density, in [0, 1]
  std::uint64_t seed = 0;

  int rows() const;  // M = round(alpha * N)
  void validate() const;
};

struct ProblemInstance {
  Eigen::MatrixXd matrix_f;  // M x N
  Eigen::VectorXd x_o;       // ground truth, length N
  Eigen::VectorXd y;         // measurements, length M
  EnsembleParams params;

  int n() const { return static_cast<int>(x_o.size()); }
  int m_rows() const { return static_cast<int>(y.size()); }
};

Eigen::VectorXd sample_signal(int n, double rho_o, std::uint64_t seed);
ProblemInstance sample_instance(const EnsembleParams& params);

struct Observables {
  double m = 0.0;        // x_o . x_hat / N
  double q = 0.0;        // |x_hat|^2 / N
  double e = 0.0;        // |y - F x_hat|^2 / N
  double rho = 0.0;      // fraction of entries with |x_hat_i| > zero_tol
  double eps_rec = 0.0;  // |x_o - x_hat|^2 / N
};

constexpr double kDefaultZeroTol = 1e-8;

Observables observables(const Eigen::VectorXd& x_hat, const ProblemInstance& instance,
                        double zero_tol = kDefaultZeroTol);

// Flat binary serialization: magic, header (n, m, alpha, rho_o, seed), then
// F row-major, x_o, y as little-endian doubles.
void save_instance(const ProblemInstance& instance, const std::string& path);
ProblemInstance load_instance(const std::string& path);

}  // namespace l0cs
