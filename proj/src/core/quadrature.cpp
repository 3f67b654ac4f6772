#include "quadrature.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "specfun.hpp"

namespace l0cs {

GaussHermite::GaussHermite(int n) {
  if (n < 1) throw std::invalid_argument("GaussHermite: n >= 1 required");
  // Golub-Welsch on the Jacobi matrix of the (physicists') Hermite recursion,
  // off-diagonal beta_k = sqrt(k/2).
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = std::sqrt(0.5 * k);
    J(k, k - 1) = b;
    J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  nodes.resize(n);
  weights.resize(n);
  for (int k = 0; k < n; ++k) {
    // probabilist form: z = sqrt(2) x, weight = v0^2 (sum of weights is 1)
    nodes[k] = es.eigenvalues()(k) * std::sqrt(2.0);
    const double v0 = es.eigenvectors()(0, k);
    weights[k] = v0 * v0;
  }
}

const GaussHermite& hermite_rule(int n) {
  static std::mutex mu;
  static std::map<int, GaussHermite> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, GaussHermite(n)).first;
  return it->second;
}

namespace {

// Adaptive Simpson on [a,b] for g(z) = phi(z) f(z).
double simpson(const std::function<double(double)>& g, double a, double fa, double m,
               double fm, double b, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const std::function<double(double)>& g, double a, double fa, double b,
             double fb, double m, double fm, double whole, double tol, int depth,
             long* budget) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = g(lm), frm = g(rm);
  *budget -= 2;
  const double left = simpson(g, a, fa, lm, flm, m, fm);
  const double right = simpson(g, m, fm, rm, frm, b, fb);
  const double delta = left + right - whole;
  // the inverted comparison also stops on NaN/inf instead of recursing forever;
  // the budget caps total work when the error estimate never settles
  if (depth <= 0 || *budget <= 0 || !(std::fabs(delta) > 15.0 * tol))
    return left + right + delta / 15.0;
  return adapt(g, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1, budget) +
         adapt(g, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1, budget);
}

double integrate_panel(const std::function<double(double)>& g, double a, double b,
                       double tol, long* budget) {
  if (b <= a) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = g(a), fb = g(b), fm = g(m);
  const double whole = simpson(g, a, fa, m, fm, b, fb);
  // tolerance is relative to the panel scale so large-magnitude integrands
  // (tilted exponentials) terminate at the same relative accuracy
  const double scale = std::max(1.0, std::fabs(whole));
  return adapt(g, a, fa, b, fb, m, fm, whole, tol * scale, 48, budget);
}

using VecF = std::function<void(double, double*)>;

void vec_adapt(const VecF& g, int dim, double a, const double* fa, double b,
               const double* fb, double m, const double* fm, const double* whole,
               double tol, int depth, double* acc, long* budget) {
  std::vector<double> flm(dim), frm(dim), left(dim), right(dim), delta(dim);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  g(lm, flm.data());
  g(rm, frm.data());
  *budget -= 2;
  bool ok = true;
  for (int i = 0; i < dim; ++i) {
    left[i] = (m - a) / 6.0 * (fa[i] + 4.0 * flm[i] + fm[i]);
    right[i] = (b - m) / 6.0 * (fm[i] + 4.0 * frm[i] + fb[i]);
    delta[i] = left[i] + right[i] - whole[i];
    const double scale = std::max(1.0, std::fabs(whole[i]));
    if (std::fabs(delta[i]) > 15.0 * tol * scale) ok = false;
  }
  // the budget caps the total work on integrands whose error estimate never
  // settles (noisy or genuinely singular); the panel estimate is then accepted
  if (depth <= 0 || ok || *budget <= 0) {
    for (int i = 0; i < dim; ++i) acc[i] += left[i] + right[i] + delta[i] / 15.0;
    return;
  }
  vec_adapt(g, dim, a, fa, m, fm, lm, flm.data(), left.data(), 0.5 * tol, depth - 1, acc,
            budget);
  vec_adapt(g, dim, m, fm, b, fb, rm, frm.data(), right.data(), 0.5 * tol, depth - 1, acc,
            budget);
}

}  // namespace

void gauss_expect_multi(const std::function<void(double, double*)>& f, int dim,
                        const QuadratureSpec& spec,
                        const std::vector<double>& breakpoints, double feature_width,
                        double* out) {
  spec.validate();
  std::fill(out, out + dim, 0.0);
  const double spacing = 4.44 / std::sqrt(2.0 * spec.nodes);
  const bool adaptive = spec.scheme == QuadScheme::kAdaptive ||
                        (!breakpoints.empty() && feature_width < spacing);
  if (!adaptive) {
    const GaussHermite& rule = hermite_rule(spec.nodes);
    std::vector<double> buf(dim);
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      f(rule.nodes[k], buf.data());
      for (int i = 0; i < dim; ++i) out[i] += rule.weights[k] * buf[i];
    }
    return;
  }
  auto g = [&](double z, double* v) {
    f(z, v);
    const double w = norm_pdf(z);
    for (int i = 0; i < dim; ++i) v[i] *= w;
  };
  const double z_max = 12.0;
  std::vector<double> pts;
  pts.push_back(-z_max);
  // pad extra edges around each breakpoint at the feature scale so the steep
  // transition region is confined to short panels
  for (double b : breakpoints) {
    for (double o : {0.0, -4.0, 4.0, -64.0, 64.0}) {
      const double p = b + o * feature_width;
      if (p > -z_max && p < z_max) pts.push_back(p);
    }
  }
  for (double b : {-6.0, -3.0, -1.0, 0.0, 1.0, 3.0, 6.0})
    if (b > -z_max && b < z_max) pts.push_back(b);
  pts.push_back(z_max);
  std::sort(pts.begin(), pts.end());
  std::vector<double> fa(dim), fb(dim), fm(dim), whole(dim);
  long budget = 40000;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double a = pts[i], b = pts[i + 1];
    if (b - a < 1e-300) continue;
    const double m = 0.5 * (a + b);
    g(a, fa.data());
    g(b, fb.data());
    g(m, fm.data());
    for (int j = 0; j < dim; ++j) whole[j] = (b - a) / 6.0 * (fa[j] + 4.0 * fm[j] + fb[j]);
    vec_adapt(g, dim, a, fa.data(), b, fb.data(), m, fm.data(), whole.data(),
              spec.tol / pts.size(), 30, out, &budget);
  }
}

double gauss_expect_adaptive(const std::function<double(double)>& f,
                             const std::vector<double>& breakpoints, double tol,
                             double z_max) {
  auto g = [&f](double z) { return norm_pdf(z) * f(z); };
  std::vector<double> pts;
  pts.push_back(-z_max);
  for (double b : breakpoints)
    if (b > -z_max && b < z_max) pts.push_back(b);
  // a few fixed interior points keep panels short where the weight lives
  for (double b : {-6.0, -3.0, -1.0, 0.0, 1.0, 3.0, 6.0})
    if (b > -z_max && b < z_max) pts.push_back(b);
  pts.push_back(z_max);
  std::sort(pts.begin(), pts.end());
  double acc = 0.0;
  long budget = 40000;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (pts[i + 1] - pts[i] < 1e-300) continue;
    // offset panel edges a hair off the breakpoints so one-sided values are used
    acc += integrate_panel(g, pts[i], pts[i + 1], tol / pts.size(), &budget);
  }
  return acc;
}

double gauss_expect(const std::function<double(double)>& f, const QuadratureSpec& spec,
                    const std::vector<double>& breakpoints, double feature_width) {
  spec.validate();
  if (spec.scheme == QuadScheme::kAdaptive)
    return gauss_expect_adaptive(f, breakpoints, spec.tol);
  // Gauss-Hermite under-resolves features narrower than the node spacing near
  // the origin (~ sqrt(2)*pi/sqrt(2n)); fall back to adaptive panels there.
  const double spacing = 4.44 / std::sqrt(2.0 * spec.nodes);
  if (!breakpoints.empty() && feature_width < spacing)
    return gauss_expect_adaptive(f, breakpoints, spec.tol);
  return hermite_rule(spec.nodes).expect(f);
}

double gauss_bernoulli_expect(const std::function<double(double)>& f, double rho_o,
                              const QuadratureSpec& spec) {
  if (rho_o < 0.0 || rho_o > 1.0)
    throw std::invalid_argument("gauss_bernoulli_expect: rho_o in [0,1] required");
  double acc = (1.0 - rho_o) * f(0.0);
  if (rho_o > 0.0) acc += rho_o * gauss_expect(f, spec);
  if (!std::isfinite(acc))
    throw std::runtime_error("gauss_bernoulli_expect: non-finite integrand");
  return acc;
}

}  // namespace l0cs
