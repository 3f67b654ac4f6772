#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <fstream>

#include "core/solver.hpp"
#include "doctest.h"

using namespace l0cs;

namespace {
ProblemInstance make_instance(int n, double alpha, double rho_o, std::uint64_t seed) {
  EnsembleParams ep;
  ep.n = n;
  ep.alpha = alpha;
  ep.rho_o = rho_o;
  ep.seed = seed;
  return sample_instance(ep);
}
}  // namespace

TEST_CASE("algorithm names round-trip") {
  for (auto a : {Algorithm::kAsp, Algorithm::kAspo, Algorithm::kLasso})
    CHECK(algorithm_from_name(algorithm_name(a)) == a);
  CHECK_THROWS_AS(algorithm_from_name("unknown"), std::invalid_argument);
}

TEST_CASE("schedule validation") {
  auto s = AnnealingSchedule::geometric();
  CHECK(s.lambdas.front() == 1.0);
  CHECK(s.lambdas.back() >= 1e-6);
  for (std::size_t i = 1; i < s.lambdas.size(); ++i)
    CHECK(s.lambdas[i] < s.lambdas[i - 1]);
  s.lambdas = {0.5, 0.5};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("annealed recovery well above the transition") {
  const auto inst = make_instance(1000, 0.95, 0.6, 7);
  const auto res = anneal_solve(inst, AnnealingSchedule::geometric(), Algorithm::kAspo);
  const auto obs = observables(res.x_hat, inst);
  CHECK(obs.eps_rec < 1e-8);
  CHECK(obs.m == doctest::Approx(obs.q).epsilon(1e-6));  // x_hat = x_o
  CHECK(res.trace.back().converged);
  // the penalty anneal sweeps the support density up towards rho_o
  CHECK(res.trace.front().obs.rho < res.trace.back().obs.rho);
}

TEST_CASE("l1 baseline fails where the l0 solver succeeds") {
  const auto inst = make_instance(1000, 0.95, 0.6, 7);
  const auto res = anneal_solve(inst, AnnealingSchedule::geometric(), Algorithm::kLasso);
  const auto obs = observables(res.x_hat, inst);
  // alpha = 0.95 is below the l1 Donoho-Tanner line at rho_o = 0.6
  CHECK(obs.eps_rec > 1e-3);
  CHECK(obs.m / 0.6 < 0.95);
}

TEST_CASE("full message passing matches its collapsed form at fixed s") {
  // with s frozen (no retuning) the per-measurement messages concentrate and
  // the full solver tracks the collapsed one up to finite-size corrections
  const auto inst = make_instance(600, 0.95, 0.4, 3);
  AspOptions opts;
  opts.retune_interval = 0;  // keep s at its initial value
  auto sched = AnnealingSchedule::geometric(1.0, 1e-3, 0.8);
  const auto full = anneal_solve(inst, sched, Algorithm::kAsp, 0.7, opts);
  const auto collapsed = anneal_solve(inst, sched, Algorithm::kAspo, 0.7, opts);
  const auto of = observables(full.x_hat, inst);
  const auto oc = observables(collapsed.x_hat, inst);
  CHECK(of.eps_rec == doctest::Approx(oc.eps_rec).epsilon(0.05).scale(0.01));
  CHECK(of.m == doctest::Approx(oc.m).epsilon(0.02));
  const double dot = full.x_hat.dot(collapsed.x_hat);
  const double nn = full.x_hat.norm() * collapsed.x_hat.norm();
  CHECK(dot / nn > 0.99);
}

TEST_CASE("s retuning keeps s inside its bracket") {
  const auto inst = make_instance(400, 0.9, 0.5, 11);
  AspOptions opts;
  auto sched = AnnealingSchedule::geometric(1.0, 1e-2, 0.7);
  const auto res = anneal_solve(inst, sched, Algorithm::kAsp, 0.7, opts);
  for (const auto& row : res.trace) {
    REQUIRE(row.has_s);
    CHECK(row.s >= opts.s_min);
    CHECK(row.s <= opts.s_max);
    CHECK(row.v0 >= 0.0);
    CHECK(row.v1 >= 0.0);
  }
}

TEST_CASE("same seed gives identical runs, different seeds differ") {
  const auto a = make_instance(300, 0.8, 0.4, 5);
  const auto b = make_instance(300, 0.8, 0.4, 5);
  const auto c = make_instance(300, 0.8, 0.4, 6);
  auto sched = AnnealingSchedule::geometric(1.0, 1e-2, 0.7);
  const auto ra = anneal_solve(a, sched, Algorithm::kAspo);
  const auto rb = anneal_solve(b, sched, Algorithm::kAspo);
  const auto rc = anneal_solve(c, sched, Algorithm::kAspo);
  CHECK((ra.x_hat - rb.x_hat).norm() == 0.0);
  CHECK((ra.x_hat - rc.x_hat).norm() > 0.0);
}

TEST_CASE("a diverging stage is recorded, not thrown") {
  // far below the transition the small-lambda stages amplify noise; the anneal
  // must survive, mark the stage aborted and keep the last finite iterate
  const auto inst = make_instance(800, 0.65, 0.6, 2);
  const auto res = anneal_solve(inst, AnnealingSchedule::geometric(), Algorithm::kAspo);
  CHECK(res.x_hat.allFinite());
  bool any_aborted = false;
  for (const auto& row : res.trace) any_aborted |= row.aborted;
  const auto obs = observables(res.x_hat, inst);
  // either way this is a failed reconstruction
  CHECK((any_aborted || obs.eps_rec > 1e-3));
}

TEST_CASE("trace csv has one row per stage") {
  const auto inst = make_instance(300, 0.8, 0.4, 5);
  auto sched = AnnealingSchedule::geometric(1.0, 1e-2, 0.7);
  const auto res = anneal_solve(inst, sched, Algorithm::kAspo);
  const std::string path = "test_solver_trace.csv";
  write_solve_trace_csv(res.trace, path);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  int rows = -1;  // header
  while (std::getline(in, line)) ++rows;
  CHECK(rows == static_cast<int>(res.trace.size()));
  std::remove(path.c_str());
}
