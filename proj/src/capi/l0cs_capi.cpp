#include "l0cs/l0cs.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "core/ensemble.hpp"
#include "core/replica.hpp"
#include "core/se.hpp"
#include "core/solver.hpp"

namespace {

thread_local std::string g_last_error = "no error";

l0cs_status fail(l0cs_status code, const char* what) {
  g_last_error = what;
  return code;
}

// maps C++ exceptions at the boundary onto status codes
template <class F>
l0cs_status guarded(F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    return fail(L0CS_ERR_INVALID, e.what());
  } catch (const std::ios_base::failure& e) {
    return fail(L0CS_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(L0CS_ERR_RUNTIME, "out of memory");
  } catch (const std::exception& e) {
    return fail(L0CS_ERR_RUNTIME, e.what());
  } catch (...) {
    return fail(L0CS_ERR_RUNTIME, "unknown error");
  }
}

l0cs::AnnealingSchedule to_schedule(const l0cs_schedule* s) {
  if (!s) return l0cs::AnnealingSchedule::geometric();
  auto out = l0cs::AnnealingSchedule::geometric(s->lambda_max, s->lambda_min, s->ratio);
  out.max_iters_per_stage = s->max_iters_per_stage;
  out.damping = s->damping;
  out.validate();
  return out;
}

}  // namespace

struct l0cs_instance {
  l0cs::ProblemInstance inst;
};

extern "C" {

const char* l0cs_version(void) { return "1.0.0"; }

const char* l0cs_last_error(void) { return g_last_error.c_str(); }

l0cs_status l0cs_instance_create(int n, double alpha, double rho_o, uint64_t seed,
                                 l0cs_instance** out) {
  if (!out) return fail(L0CS_ERR_INVALID, "out must not be NULL");
  return guarded([&] {
    l0cs::EnsembleParams ep;
    ep.n = n;
    ep.alpha = alpha;
    ep.rho_o = rho_o;
    ep.seed = seed;
    *out = new l0cs_instance{l0cs::sample_instance(ep)};
    return L0CS_OK;
  });
}

void l0cs_instance_free(l0cs_instance* inst) { delete inst; }

l0cs_status l0cs_instance_save(const l0cs_instance* inst, const char* path) {
  if (!inst || !path) return fail(L0CS_ERR_INVALID, "inst and path must not be NULL");
  return guarded([&] {
    l0cs::save_instance(inst->inst, path);
    return L0CS_OK;
  });
}

l0cs_status l0cs_instance_load(const char* path, l0cs_instance** out) {
  if (!path || !out) return fail(L0CS_ERR_INVALID, "path and out must not be NULL");
  return guarded([&] {
    *out = new l0cs_instance{l0cs::load_instance(path)};
    return L0CS_OK;
  });
}

void l0cs_instance_dims(const l0cs_instance* inst, int* n, int* m) {
  if (!inst) return;
  if (n) *n = inst->inst.n();
  if (m) *m = inst->inst.m_rows();
}

l0cs_status l0cs_instance_signal(const l0cs_instance* inst, double* x_o, int n) {
  if (!inst || !x_o) return fail(L0CS_ERR_INVALID, "inst and x_o must not be NULL");
  if (n != inst->inst.n()) return fail(L0CS_ERR_INVALID, "buffer length != n");
  std::memcpy(x_o, inst->inst.x_o.data(), sizeof(double) * n);
  return L0CS_OK;
}

void l0cs_schedule_default(l0cs_schedule* sched) {
  if (!sched) return;
  sched->lambda_max = 1.0;
  sched->lambda_min = 1e-6;
  sched->ratio = 0.8;
  sched->max_iters_per_stage = 1000;
  sched->damping = 0.3;
}

l0cs_status l0cs_solve(const l0cs_instance* inst, const char* algorithm, double xi,
                       const l0cs_schedule* sched, int retune_interval, double* x_hat,
                       int x_hat_len, l0cs_trace_row* rows, int max_rows, int* n_rows) {
  if (!inst || !algorithm || !x_hat)
    return fail(L0CS_ERR_INVALID, "inst, algorithm and x_hat must not be NULL");
  if (x_hat_len != inst->inst.n()) return fail(L0CS_ERR_INVALID, "x_hat length != n");
  if (n_rows) *n_rows = 0;
  return guarded([&] {
    const auto algo = l0cs::algorithm_from_name(algorithm);
    l0cs::AspOptions opts;
    if (retune_interval >= 0) opts.retune_interval = retune_interval;
    const auto res = l0cs::anneal_solve(inst->inst, to_schedule(sched), algo, xi, opts);
    std::memcpy(x_hat, res.x_hat.data(), sizeof(double) * x_hat_len);
    int written = 0;
    for (const auto& row : res.trace) {
      if (!rows || written >= max_rows) break;
      l0cs_trace_row& r = rows[written++];
      r.lambda = row.lambda;
      r.m = row.obs.m;
      r.q = row.obs.q;
      r.e = row.obs.e;
      r.rho = row.obs.rho;
      r.eps_rec = row.obs.eps_rec;
      r.v = row.V;
      r.iters = row.iters;
      r.converged = row.converged ? 1 : 0;
      r.aborted = row.aborted ? 1 : 0;
    }
    if (n_rows) *n_rows = written;
    return L0CS_OK;
  });
}

l0cs_status l0cs_se_anneal(double rho_o, double alpha, const char* algorithm, double xi,
                           const l0cs_schedule* sched, l0cs_se_row* rows, int max_rows,
                           int* n_rows) {
  if (!algorithm) return fail(L0CS_ERR_INVALID, "algorithm must not be NULL");
  if (n_rows) *n_rows = 0;
  return guarded([&] {
    const auto algo = l0cs::algorithm_from_name(algorithm);
    const auto trace =
        l0cs::se_anneal(rho_o, alpha, to_schedule(sched), algo, xi, l0cs::QuadratureSpec{});
    int written = 0;
    for (const auto& pt : trace) {
      if (!rows || written >= max_rows) break;
      l0cs_se_row& r = rows[written++];
      r.lambda = pt.lambda;
      r.m = pt.state.m;
      r.q = pt.state.q;
      r.v = pt.state.v;
      r.converged = pt.converged ? 1 : 0;
      r.diverged = pt.diverged ? 1 : 0;
    }
    if (n_rows) *n_rows = written;
    return L0CS_OK;
  });
}

l0cs_status l0cs_se_threshold(double rho_o, const char* algorithm, double xi,
                              double tol_alpha, const l0cs_schedule* sched,
                              double* alpha_c) {
  if (!algorithm || !alpha_c)
    return fail(L0CS_ERR_INVALID, "algorithm and alpha_c must not be NULL");
  return guarded([&] {
    const auto algo = l0cs::algorithm_from_name(algorithm);
    *alpha_c = l0cs::algorithmic_threshold(rho_o, algo, xi, tol_alpha, to_schedule(sched),
                                           l0cs::QuadratureSpec{});
    return L0CS_OK;
  });
}

l0cs_status l0cs_replica_cost_curve(double rho_o, double alpha,
                                    const l0cs_schedule* sched, double s_min,
                                    double s_max, int informed, l0cs_replica_row* rows,
                                    int max_rows, int* n_rows) {
  if (n_rows) *n_rows = 0;
  return guarded([&] {
    const auto lambdas = to_schedule(sched).lambdas;
    const auto init =
        informed ? l0cs::SaddleInit::kInformed : l0cs::SaddleInit::kUninformed;
    const auto curve = l0cs::replica_anneal(rho_o, alpha, lambdas, s_min, s_max, init,
                                            l0cs::QuadratureSpec{});
    int written = 0;
    for (const auto& po : curve) {
      if (!rows || written >= max_rows) break;
      l0cs_replica_row& r = rows[written++];
      r.lambda = po.lambda;
      r.m = po.m;
      r.eps_rec = po.eps_rec;
      r.rho = po.rho;
      r.e = po.e;
      r.cost = po.cost;
      r.v0 = po.v0;
      r.s = po.s;
      r.converged = po.converged ? 1 : 0;
      r.s_at_max = po.s_at_max ? 1 : 0;
    }
    if (n_rows) *n_rows = written;
    return L0CS_OK;
  });
}

l0cs_status l0cs_replica_boundary(double rho_o, double tol_alpha, double* alpha_c) {
  if (!alpha_c) return fail(L0CS_ERR_INVALID, "alpha_c must not be NULL");
  return guarded([&] {
    *alpha_c = l0cs::phase_boundary(rho_o, tol_alpha);
    return L0CS_OK;
  });
}

}  // extern "C"
