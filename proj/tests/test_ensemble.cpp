#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>

#include "core/ensemble.hpp"
#include "doctest.h"

using namespace l0cs;

TEST_CASE("parameter validation") {
  EnsembleParams p{1000, 0.5, 0.3, 1};
  CHECK_NOTHROW(p.validate());
  CHECK(p.rows() == 500);
  p.alpha = 0.873;
  CHECK(p.rows() == 873);
  p.n = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.n = 100;
  p.alpha = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.alpha = 1.5;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.alpha = 0.5;
  p.rho_o = -0.1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("instance generation is deterministic in the seed") {
  const EnsembleParams p{200, 0.6, 0.4, 42};
  const auto a = sample_instance(p);
  const auto b = sample_instance(p);
  CHECK(a.matrix_f == b.matrix_f);
  CHECK(a.x_o == b.x_o);
  EnsembleParams p2 = p;
  p2.seed = 43;
  const auto c = sample_instance(p2);
  CHECK(a.x_o != c.x_o);
  CHECK(a.matrix_f != c.matrix_f);
}

TEST_CASE("instance statistics match the model") {
  const EnsembleParams p{4000, 0.7, 0.35, 7};
  const auto inst = sample_instance(p);
  CHECK(inst.n() == 4000);
  CHECK(inst.m_rows() == 2800);
  // y = F x_o exactly
  CHECK((inst.y - inst.matrix_f * inst.x_o).lpNorm<Eigen::Infinity>() < 1e-12);
  // entries of F: mean ~ 0, variance ~ 1/N
  const double fm = inst.matrix_f.mean();
  const double fv = inst.matrix_f.array().square().mean() - fm * fm;
  CHECK(std::fabs(fm) < 4.0 / std::sqrt(4000.0 * 2800.0));
  CHECK(fv * 4000.0 == doctest::Approx(1.0).epsilon(0.01));
  // signal density and nonzero variance
  int nz = 0;
  double ss = 0.0;
  for (int i = 0; i < inst.n(); ++i) {
    if (inst.x_o[i] != 0.0) {
      ++nz;
      ss += inst.x_o[i] * inst.x_o[i];
    }
  }
  CHECK(std::fabs(nz / 4000.0 - 0.35) < 0.03);
  CHECK(ss / nz == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("observables against a brute-force computation at N=8") {
  EnsembleParams p{8, 1.0, 0.5, 3};
  auto inst = sample_instance(p);
  Eigen::VectorXd x_hat(8);
  x_hat << 0.0, 1.2, -0.7, 1e-9, 0.0, 2.0, -1.0, 0.3;
  const auto obs = observables(x_hat, inst);
  double m = 0, q = 0, eps = 0;
  int nz = 0;
  for (int i = 0; i < 8; ++i) {
    m += inst.x_o[i] * x_hat[i];
    q += x_hat[i] * x_hat[i];
    eps += (inst.x_o[i] - x_hat[i]) * (inst.x_o[i] - x_hat[i]);
    if (std::fabs(x_hat[i]) > 1e-8) ++nz;
  }
  double e = 0;
  for (int a = 0; a < inst.m_rows(); ++a) {
    double r = inst.y[a];
    for (int i = 0; i < 8; ++i) r -= inst.matrix_f(a, i) * x_hat[i];
    e += r * r;
  }
  CHECK(obs.m == doctest::Approx(m / 8).epsilon(1e-13));
  CHECK(obs.q == doctest::Approx(q / 8).epsilon(1e-13));
  CHECK(obs.e == doctest::Approx(e / 8).epsilon(1e-12));
  CHECK(obs.eps_rec == doctest::Approx(eps / 8).epsilon(1e-13));
  CHECK(obs.rho == doctest::Approx(nz / 8.0));
  CHECK(nz == 5);  // the 1e-9 entry is below the zero tolerance
}

TEST_CASE("save/load roundtrip is exact") {
  const EnsembleParams p{64, 0.5, 0.3, 99};
  const auto inst = sample_instance(p);
  const std::string path = "test_instance_roundtrip.bin";
  save_instance(inst, path);
  const auto back = load_instance(path);
  CHECK(back.matrix_f == inst.matrix_f);
  CHECK(back.x_o == inst.x_o);
  CHECK(back.y == inst.y);
  CHECK(back.params.n == p.n);
  CHECK(back.params.alpha == p.alpha);
  CHECK(back.params.rho_o == p.rho_o);
  CHECK(back.params.seed == p.seed);
  std::remove(path.c_str());
  CHECK_THROWS(load_instance("does_not_exist.bin"));
}
