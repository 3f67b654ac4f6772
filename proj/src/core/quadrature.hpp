#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

namespace l0cs {

// Gauss-Hermite rule in probabilist form: E_{z~N(0,1)}[f] ~= sum w_k f(z_k).
struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussHermite(int n);

  template <class F>
  double expect(F&& f) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) acc += weights[k] * f(nodes[k]);
    return acc;
  }
};

enum class QuadScheme { kGaussHermite, kAdaptive };

struct QuadratureSpec {
  QuadScheme scheme = QuadScheme::kGaussHermite;
  int nodes = 201;  // must be odd so the zero node is present
  double tol = 1e-11;

  void validate() const {
    if (nodes < 63 || nodes % 2 == 0)
      throw std::invalid_argument("quadrature nodes must be odd and >= 63");
    if (tol <= 0) throw std::invalid_argument("quadrature tol must be positive");
  }
};

// Cached rule lookup (rules are expensive to build; cache is thread-safe).
const GaussHermite& hermite_rule(int n);

// E_{z~N(0,1)}[f(z)] by adaptive integration of the weighted integrand.
// `breakpoints` mark kinks/jumps of f; the integration panels are split there
// so each panel sees a smooth (or one-sided) integrand.
double gauss_expect_adaptive(const std::function<double(double)>& f,
                             const std::vector<double>& breakpoints, double tol,
                             double z_max = 12.0);

// E_{z~N(0,1)}[f(z)] with automatic scheme selection: Gauss-Hermite unless the
// integrand features (width `feature_width` near the breakpoints) are too
// narrow for the node spacing.
double gauss_expect(const std::function<double(double)>& f, const QuadratureSpec& spec,
                    const std::vector<double>& breakpoints = {},
                    double feature_width = 1e300);

// Vector form of gauss_expect: f(z, out) fills dim components and all of them
// are accumulated in a single pass (one integrand evaluation per node), with
// the adaptive refinement driven by the worst component.
void gauss_expect_multi(const std::function<void(double, double*)>& f, int dim,
                        const QuadratureSpec& spec,
                        const std::vector<double>& breakpoints, double feature_width,
                        double* out);

// E over the Gauss-Bernoulli signal prior: (1-rho) f(0) + rho E_{g~N(0,1)}[f(g)].
double gauss_bernoulli_expect(const std::function<double(double)>& f, double rho_o,
                              const QuadratureSpec& spec);

}  // namespace l0cs
