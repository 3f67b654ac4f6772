#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "core/replica.hpp"
#include "doctest.h"

using namespace l0cs;

namespace {
const QuadratureSpec kQuad;

// central finite-difference gradient of the variational potential at op,
// one component at a time
double fd_grad(const ReplicaParams& p, const ReplicaOrderParams& op, int comp,
               double h) {
  auto shift = [&](double eps) {
    ReplicaOrderParams o = op;
    double* fields[8] = {&o.m, &o.q0, &o.v0, &o.v1, &o.m_hat, &o.q0_hat, &o.a0, &o.a1};
    *fields[comp] += eps;
    return free_entropy(p, o);
  };
  return (shift(h) - shift(-h)) / (2.0 * h);
}
}  // namespace

TEST_CASE("converged saddle is a stationary point of the potential") {
  ReplicaParams p{0.6, 0.9, 0.5, 8.0, kQuad};
  const auto sr = saddle_point(p, SaddleInit::kUninformed);
  REQUIRE(sr.converged);
  // all eight first derivatives vanish at the saddle (the fixed-point update
  // is exactly the stationarity system)
  for (int comp = 0; comp < 8; ++comp) {
    INFO("component ", comp);
    CHECK(std::abs(fd_grad(p, sr.op, comp, 1e-4)) < 1e-6);
  }
}

TEST_CASE("envelope derivative: total dPhi/ds equals partial at the saddle") {
  ReplicaParams p{0.6, 0.9, 0.3, 6.0, kQuad};
  const auto sr = saddle_point(p, SaddleInit::kUninformed);
  REQUIRE(sr.converged);
  const auto cp = complexity_at(p, sr);
  const double ds = 1e-3 * p.s;
  ReplicaParams p2 = p;
  p2.s = p.s + ds;
  const auto sr2 = saddle_point_from(p2, sr.op);
  REQUIRE(sr2.converged);
  const double total = (sr2.phi - sr.phi) / ds;
  const double partial = -cp.sigma / (p.s * p.s);  // sigma = -s^2 dPhi/ds
  CHECK(total == doctest::Approx(partial).epsilon(5e-3));
}

TEST_CASE("complexity identities tie sigma, ell and phi together") {
  ReplicaParams p{0.6, 0.9, 0.3, 6.0, kQuad};
  const auto sr = saddle_point(p, SaddleInit::kUninformed);
  REQUIRE(sr.converged);
  const auto cp = complexity_at(p, sr);
  // Legendre structure: phi = -ell + sigma / s
  CHECK(cp.phi == doctest::Approx(-cp.ell + cp.sigma / cp.s).epsilon(1e-9));
  CHECK(cp.s == p.s);
  CHECK(cp.phi == sr.phi);
}

TEST_CASE("informed init lands on the recovery fixed point") {
  ReplicaParams p{0.6, 0.9, 1e-3, 50.0, kQuad};
  const auto sr = saddle_point(p, SaddleInit::kInformed);
  REQUIRE(sr.converged);
  const double eps = p.rho_o + sr.op.q0 + sr.op.v0 - 2.0 * sr.op.m;
  CHECK(sr.op.m == doctest::Approx(0.6).epsilon(1e-3));
  CHECK(std::abs(eps) < 1e-4);
  CHECK(sr.op.v0 >= 0.0);
  CHECK(sr.rho > 0.0);
  CHECK(sr.rho < 1.0);
}

TEST_CASE("sigma changes sign at the selected cluster exponent") {
  // below the equilibrium boundary the complexity vanishes at finite s
  const auto st = select_s_star(0.6, 0.7, 0.1, 0.1, 200.0, 1e-2, SaddleInit::kUninformed,
                                kQuad, nullptr, 10.0);
  REQUIRE(!st.at_s_max);
  REQUIRE(st.saddle.converged);
  CHECK(st.s > 0.1);
  CHECK(st.s < 200.0);
  ReplicaParams lo{0.6, 0.7, 0.1, 0.85 * st.s, kQuad};
  const auto sr_lo = saddle_point_from(lo, st.saddle.op);
  CHECK(complexity_at(lo, sr_lo).sigma > 0.0);
  ReplicaParams hi{0.6, 0.7, 0.1, 1.25 * st.s, kQuad};
  const auto sr_hi = saddle_point_from(hi, st.saddle.op);
  CHECK(complexity_at(hi, sr_hi).sigma < 0.0);
}

TEST_CASE("predicted observables are internally consistent") {
  ReplicaOrderParams op;
  const auto po = predicted_observables(0.6, 0.7, 0.1, 0.1, 200.0,
                                        SaddleInit::kUninformed, kQuad, nullptr, &op, 10.0);
  CHECK(po.converged);
  CHECK(po.q_self == doctest::Approx(op.q0 + op.v0).epsilon(1e-12));
  CHECK(po.eps_rec == doctest::Approx(0.6 + po.q_self - 2.0 * po.m).epsilon(1e-9));
  CHECK(po.cost == doctest::Approx(po.e / po.lambda + po.rho).epsilon(1e-12));
  CHECK(po.rho > 0.0);
  CHECK(po.rho < 1.0);
  CHECK(po.e >= 0.0);
}

TEST_CASE("annealed curve: eps_rec decreases with lambda on the recovery side") {
  const std::vector<double> lams{1.0, 0.3, 0.1};
  const auto curve = replica_anneal(0.6, 0.9, lams, 0.1, 200.0, SaddleInit::kUninformed,
                                    kQuad);
  REQUIRE(curve.size() == 3);
  for (const auto& po : curve) CHECK(po.converged);
  CHECK(curve[1].eps_rec < curve[0].eps_rec);
  CHECK(curve[2].eps_rec < curve[1].eps_rec);
  // support density grows as the penalty is released
  CHECK(curve[2].rho > curve[0].rho);
}

TEST_CASE("csv writers emit one parseable row per point") {
  ReplicaParams p{0.6, 0.9, 0.5, 8.0, kQuad};
  const auto sr = saddle_point(p, SaddleInit::kUninformed);
  const auto cp = complexity_at(p, sr);
  const std::string path = "test_replica_curve.csv";
  write_complexity_csv({cp, cp}, path);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  CHECK(line == "s,phi,sigma,ell");
  int rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    int cols = 0;
    double parsed = 0.0;
    while (std::getline(ss, cell, ',')) {
      parsed = std::stod(cell);
      ++cols;
    }
    CHECK(cols == 4);
    CHECK(parsed == doctest::Approx(cp.ell));
    ++rows;
  }
  CHECK(rows == 2);
  std::remove(path.c_str());
}

TEST_CASE("invalid arguments") {
  ReplicaParams bad{0.6, 0.9, 0.5, -1.0, kQuad};
  CHECK_THROWS(saddle_point(bad, SaddleInit::kUninformed));
  CHECK_THROWS_AS(select_s_star(0.6, 0.9, 0.5, 2.0, 1.0, 1e-2, SaddleInit::kUninformed,
                                kQuad),
                  std::invalid_argument);
  CHECK_THROWS_AS(phase_boundary(0.6, 0.0), std::invalid_argument);
}
