// Experiment runner: generates instances, runs the solvers / state evolution /
// equilibrium predictions over parameter grids, and writes CSV artifacts plus
// a manifest.  Artifacts are named <command>_<fnv64 of the config echo> so a
// given configuration always maps to the same file set.
#include <atomic>
#include <chrono>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "l0cs/l0cs.h"

namespace {

// ---- small utilities -------------------------------------------------------

std::uint64_t fnv64(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, v);
  return buf;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// RFC 4180 quoting; numeric cells pass through untouched
std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

struct CsvWriter {
  std::FILE* f = nullptr;
  explicit CsvWriter(const std::string& path) {
    f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  }
  ~CsvWriter() {
    if (f) std::fclose(f);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i)
      std::fprintf(f, "%s%s", i ? "," : "", csv_cell(cells[i]).c_str());
    std::fputc('\n', f);
  }
};

[[noreturn]] void die(const l0cs_status st, const std::string& context) {
  std::fprintf(stderr, "error: %s: %s\n", context.c_str(), l0cs_last_error());
  std::exit(st == L0CS_ERR_INVALID ? 2 : 1);
}

void check(l0cs_status st, const std::string& context) {
  if (st != L0CS_OK) die(st, context);
}

// deterministic merge: results land in a preallocated slot per grid index
void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int workers = std::min(threads, count);
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
    });
  for (auto& t : pool) t.join();
}

// ---- shared configuration --------------------------------------------------

struct CommonConfig {
  std::string out_dir = ".";
  int threads = 0;  // 0 = resolve from env / hardware
  // ensemble
  int n = 4000;
  double alpha = 0.87;
  double rho_o = 0.6;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  // algorithm
  std::vector<std::string> algorithms{"aspo", "lasso"};
  double xi = 0.7;
  int retune_interval = -1;
  // schedule
  l0cs_schedule sched{};
  // grids
  std::vector<double> rho_list{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<double> alpha_list{0.7, 0.83, 0.9};
  double tol_alpha = 0.005;
  // replica
  double s_min = 0.1;
  double s_max = 1e4;
  bool informed = false;
};

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("L0CS_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

std::vector<std::string> validate(const CommonConfig& c, const std::string& command) {
  std::vector<std::string> errors;
  auto bad = [&](const std::string& key, const std::string& why) {
    errors.push_back(key + ": " + why);
  };
  if (c.n <= 0) bad("n", "must be positive");
  if (!(c.alpha > 0.0 && c.alpha <= 1.0)) bad("alpha", "must be in (0, 1]");
  if (!(c.rho_o > 0.0 && c.rho_o < 1.0)) bad("rho", "must be in (0, 1)");
  if (c.seeds.empty()) bad("seeds", "must be non-empty");
  for (std::size_t i = 0; i < c.seeds.size(); ++i)
    for (std::size_t j = i + 1; j < c.seeds.size(); ++j)
      if (c.seeds[i] == c.seeds[j]) {
        bad("seeds", "must be distinct");
        i = c.seeds.size();
        break;
      }
  if (c.algorithms.empty()) bad("algorithms", "must be non-empty");
  for (const auto& a : c.algorithms)
    if (a != "asp" && a != "aspo" && a != "lasso")
      bad("algorithms", "unknown algorithm '" + a + "'");
  if (!(c.sched.lambda_max > 0.0)) bad("lambda-max", "must be positive");
  if (!(c.sched.lambda_min > 0.0 && c.sched.lambda_min <= c.sched.lambda_max))
    bad("lambda-min", "must be in (0, lambda-max]");
  if (!(c.sched.ratio > 0.0 && c.sched.ratio < 1.0)) bad("ratio", "must be in (0, 1)");
  if (c.sched.max_iters_per_stage <= 0) bad("stage-iters", "must be positive");
  if (!(c.sched.damping >= 0.0 && c.sched.damping < 1.0))
    bad("damping", "must be in [0, 1)");
  if (command == "phase-diagram") {
    if (c.rho_list.empty()) bad("rho-list", "must be non-empty");
    for (double r : c.rho_list)
      if (!(r > 0.0 && r < 1.0)) {
        bad("rho-list", "entries must be in (0, 1)");
        break;
      }
  }
  if (command == "cost-curve" && c.alpha_list.empty())
    bad("alpha-list", "must be non-empty");
  if (!(c.tol_alpha > 0.0)) bad("tol-alpha", "must be positive");
  if (!(c.s_min > 0.0 && c.s_max > c.s_min)) bad("s-min/s-max", "need 0 < s-min < s-max");
  return errors;
}

// canonical flat key=value text: hashed for artifact names and echoed into the
// manifest, so config + manifest determine every artifact
std::string config_echo(const CommonConfig& c, const std::string& command) {
  std::string text = "command=" + command + "\n";
  auto kv = [&](const std::string& k, const std::string& v) {
    text += k + "=" + v + "\n";
  };
  auto list = [](const auto& values, auto&& format) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i)
      out += (i ? "," : "") + format(values[i]);
    return out;
  };
  kv("n", std::to_string(c.n));
  kv("alpha", fmt(c.alpha));
  kv("rho", fmt(c.rho_o));
  kv("seeds", list(c.seeds, [](std::uint64_t s) { return std::to_string(s); }));
  kv("algorithms", list(c.algorithms, [](const std::string& s) { return s; }));
  kv("xi", fmt(c.xi));
  kv("retune_interval", std::to_string(c.retune_interval));
  kv("lambda_max", fmt(c.sched.lambda_max));
  kv("lambda_min", fmt(c.sched.lambda_min));
  kv("ratio", fmt(c.sched.ratio));
  kv("stage_iters", std::to_string(c.sched.max_iters_per_stage));
  kv("damping", fmt(c.sched.damping));
  kv("rho_list", list(c.rho_list, [](double v) { return fmt(v); }));
  kv("alpha_list", list(c.alpha_list, [](double v) { return fmt(v); }));
  kv("tol_alpha", fmt(c.tol_alpha));
  kv("s_min", fmt(c.s_min));
  kv("s_max", fmt(c.s_max));
  kv("informed", c.informed ? "1" : "0");
  return text;
}

void write_manifest(const CommonConfig& c, const std::string& command,
                    const std::string& stem, const std::vector<std::string>& artifacts,
                    double wall_seconds) {
  const std::string path = c.out_dir + "/" + stem + "_manifest.txt";
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  std::fprintf(f, "%s", config_echo(c, command).c_str());
  std::fprintf(f, "version=%s\n", l0cs_version());
  std::fprintf(f, "wall_time_s=%.3f\n", wall_seconds);
  for (const auto& a : artifacts) std::fprintf(f, "artifact=%s\n", a.c_str());
  std::fclose(f);
  std::printf("%s\n", path.c_str());
}

// max stages of the geometric schedule, for buffer sizing
int stage_count(const l0cs_schedule& s) {
  int count = 0;
  for (double l = s.lambda_max; l >= s.lambda_min * (1.0 - 1e-12); l *= s.ratio) ++count;
  return count + 2;
}

// ---- commands --------------------------------------------------------------

int run_gen(const CommonConfig& c, const std::string& stem) {
  std::vector<std::string> artifacts;
  for (std::uint64_t seed : c.seeds) {
    l0cs_instance* inst = nullptr;
    check(l0cs_instance_create(c.n, c.alpha, c.rho_o, seed, &inst), "gen");
    const std::string name = stem + "_seed" + std::to_string(seed) + ".bin";
    const auto st = l0cs_instance_save(inst, (c.out_dir + "/" + name).c_str());
    l0cs_instance_free(inst);
    check(st, "gen: save " + name);
    artifacts.push_back(name);
    std::printf("%s/%s\n", c.out_dir.c_str(), name.c_str());
  }
  return 0;
}

int run_solve(const CommonConfig& c, const std::string& stem, int threads,
              std::vector<std::string>& artifacts) {
  const int stages = stage_count(c.sched);
  const int n_seeds = static_cast<int>(c.seeds.size());
  for (const auto& algo : c.algorithms) {
    // traces[k] holds seed k's per-stage rows; filled in parallel, merged by index
    std::vector<std::vector<l0cs_trace_row>> traces(n_seeds);
    std::vector<int> counts(n_seeds, 0);
    std::vector<l0cs_status> status(n_seeds, L0CS_OK);
    parallel_for(n_seeds, threads, [&](int k) {
      l0cs_instance* inst = nullptr;
      status[k] = l0cs_instance_create(c.n, c.alpha, c.rho_o, c.seeds[k], &inst);
      if (status[k] != L0CS_OK) return;
      std::vector<double> x_hat(c.n);
      traces[k].resize(stages);
      status[k] = l0cs_solve(inst, algo.c_str(), c.xi, &c.sched, c.retune_interval,
                             x_hat.data(), c.n, traces[k].data(), stages, &counts[k]);
      l0cs_instance_free(inst);
    });
    for (int k = 0; k < n_seeds; ++k)
      check(status[k], "solve " + algo + " seed " + std::to_string(c.seeds[k]));

    for (int k = 0; k < n_seeds; ++k) {
      const std::string name =
          stem + "_" + algo + "_seed" + std::to_string(c.seeds[k]) + ".csv";
      CsvWriter csv(c.out_dir + "/" + name);
      csv.row({"lambda", "m", "q", "e", "rho", "eps_rec", "V", "iters", "converged",
               "aborted"});
      for (int i = 0; i < counts[k]; ++i) {
        const auto& r = traces[k][i];
        csv.row({fmt(r.lambda), fmt(r.m), fmt(r.q), fmt(r.e), fmt(r.rho),
                 fmt(r.eps_rec), fmt(r.v), std::to_string(r.iters),
                 std::to_string(r.converged), std::to_string(r.aborted)});
      }
      artifacts.push_back(name);
    }

    // seed-averaged trajectory next to its infinite-size prediction
    std::vector<l0cs_se_row> se_rows(stages);
    int se_count = 0;
    const bool has_se = algo != "asp";
    if (has_se)
      check(l0cs_se_anneal(c.rho_o, c.alpha, algo.c_str(), c.xi, &c.sched,
                           se_rows.data(), stages, &se_count),
            "solve: state evolution " + algo);
    const std::string name = stem + "_" + algo + "_summary.csv";
    CsvWriter csv(c.out_dir + "/" + name);
    csv.row({"lambda", "m_mean", "V_mean", "eps_rec_mean", "m_se", "V_se"});
    for (int i = 0; i < counts[0]; ++i) {
      double m = 0, v = 0, eps = 0;
      for (int k = 0; k < n_seeds; ++k) {
        m += traces[k][i].m;
        v += traces[k][i].v;
        eps += traces[k][i].eps_rec;
      }
      m /= n_seeds;
      v /= n_seeds;
      eps /= n_seeds;
      const bool se_ok = has_se && i < se_count;
      csv.row({fmt(traces[0][i].lambda), fmt(m), fmt(v), fmt(eps),
               se_ok ? fmt(se_rows[i].m) : "", se_ok ? fmt(se_rows[i].v) : ""});
    }
    artifacts.push_back(name);
  }
  return 0;
}

int run_se(const CommonConfig& c, const std::string& stem,
           std::vector<std::string>& artifacts) {
  const int stages = stage_count(c.sched);
  for (const auto& algo : c.algorithms) {
    if (algo == "asp") {
      std::fprintf(stderr, "error: se: no state evolution for 'asp'\n");
      return 2;
    }
    std::vector<l0cs_se_row> rows(stages);
    int count = 0;
    check(l0cs_se_anneal(c.rho_o, c.alpha, algo.c_str(), c.xi, &c.sched, rows.data(),
                         stages, &count),
          "se " + algo);
    const std::string name = stem + "_" + algo + ".csv";
    CsvWriter csv(c.out_dir + "/" + name);
    csv.row({"lambda", "m", "q", "V", "converged", "diverged"});
    for (int i = 0; i < count; ++i)
      csv.row({fmt(rows[i].lambda), fmt(rows[i].m), fmt(rows[i].q), fmt(rows[i].v),
               std::to_string(rows[i].converged), std::to_string(rows[i].diverged)});
    artifacts.push_back(name);
  }
  return 0;
}

int run_replica(const CommonConfig& c, const std::string& stem,
                std::vector<std::string>& artifacts) {
  const int stages = stage_count(c.sched);
  std::vector<l0cs_replica_row> rows(stages);
  int count = 0;
  check(l0cs_replica_cost_curve(c.rho_o, c.alpha, &c.sched, c.s_min, c.s_max,
                                c.informed ? 1 : 0, rows.data(), stages, &count),
        "replica");
  const std::string name = stem + ".csv";
  CsvWriter csv(c.out_dir + "/" + name);
  csv.row({"lambda", "m", "eps_rec", "rho", "e", "cost", "v0", "s", "converged",
           "s_at_max"});
  for (int i = 0; i < count; ++i)
    csv.row({fmt(rows[i].lambda), fmt(rows[i].m), fmt(rows[i].eps_rec),
             fmt(rows[i].rho), fmt(rows[i].e), fmt(rows[i].cost), fmt(rows[i].v0),
             fmt(rows[i].s), std::to_string(rows[i].converged),
             std::to_string(rows[i].s_at_max)});
  artifacts.push_back(name);
  return 0;
}

int run_phase_diagram(const CommonConfig& c, const std::string& stem, int threads,
                      std::vector<std::string>& artifacts) {
  const int n_rho = static_cast<int>(c.rho_list.size());
  struct Row {
    double replica = 0, se_aspo = 0, se_lasso = 0;
    l0cs_status st = L0CS_OK;
  };
  std::vector<Row> rows(n_rho);
  parallel_for(n_rho, threads, [&](int i) {
    Row& r = rows[i];
    const double rho = c.rho_list[i];
    r.st = l0cs_replica_boundary(rho, c.tol_alpha, &r.replica);
    if (r.st != L0CS_OK) return;
    r.st = l0cs_se_threshold(rho, "aspo", c.xi, c.tol_alpha, &c.sched, &r.se_aspo);
    if (r.st != L0CS_OK) return;
    r.st = l0cs_se_threshold(rho, "lasso", 0.0, c.tol_alpha, &c.sched, &r.se_lasso);
  });
  for (int i = 0; i < n_rho; ++i)
    check(rows[i].st, "phase-diagram at rho " + fmt(c.rho_list[i]));
  const std::string name = stem + ".csv";
  CsvWriter csv(c.out_dir + "/" + name);
  csv.row({"rho", "alpha_replica", "alpha_se_aspo", "alpha_se_lasso", "alpha_diag"});
  for (int i = 0; i < n_rho; ++i)
    csv.row({fmt(c.rho_list[i]), fmt(rows[i].replica), fmt(rows[i].se_aspo),
             fmt(rows[i].se_lasso), fmt(c.rho_list[i])});
  artifacts.push_back(name);
  return 0;
}

int run_cost_curve(const CommonConfig& c, const std::string& stem, int threads,
                   std::vector<std::string>& artifacts) {
  const int stages = stage_count(c.sched);
  const int n_alpha = static_cast<int>(c.alpha_list.size());
  // grid cell = (alpha, init); informed starts on the signal (reference
  // branch), uninformed is the equilibrium prediction
  struct Cell {
    std::vector<l0cs_replica_row> rows;
    int count = 0;
    l0cs_status st = L0CS_OK;
  };
  std::vector<Cell> cells(2 * n_alpha);
  parallel_for(2 * n_alpha, threads, [&](int idx) {
    Cell& cell = cells[idx];
    const double alpha = c.alpha_list[idx / 2];
    const int informed = idx % 2;
    cell.rows.resize(stages);
    cell.st = l0cs_replica_cost_curve(c.rho_o, alpha, &c.sched, c.s_min, c.s_max,
                                      informed, cell.rows.data(), stages, &cell.count);
  });
  for (int idx = 0; idx < 2 * n_alpha; ++idx)
    check(cells[idx].st, "cost-curve at alpha " + fmt(c.alpha_list[idx / 2]));
  const std::string name = stem + ".csv";
  CsvWriter csv(c.out_dir + "/" + name);
  csv.row({"alpha", "init", "lambda", "cost", "e", "rho", "m", "eps_rec", "v0", "s",
           "converged"});
  for (int idx = 0; idx < 2 * n_alpha; ++idx) {
    const auto& cell = cells[idx];
    for (int i = 0; i < cell.count; ++i) {
      const auto& r = cell.rows[i];
      csv.row({fmt(c.alpha_list[idx / 2]), idx % 2 ? "informed" : "uninformed",
               fmt(r.lambda), fmt(r.cost), fmt(r.e), fmt(r.rho), fmt(r.m),
               fmt(r.eps_rec), fmt(r.v0), fmt(r.s), std::to_string(r.converged)});
    }
  }
  artifacts.push_back(name);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"noiseless sparse recovery: solvers, state evolution and 1RSB "
               "equilibrium predictions"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key=value config file; flags override it");

  CommonConfig c;
  l0cs_schedule_default(&c.sched);

  app.add_option("--out", c.out_dir, "output directory")->capture_default_str();
  app.add_option("--threads", c.threads,
                 "worker threads (0 = $L0CS_THREADS or hardware)")
      ->capture_default_str();
  app.add_option("--n", c.n, "signal dimension N")->capture_default_str();
  app.add_option("--alpha", c.alpha, "compression rate M/N")->capture_default_str();
  app.add_option("--rho", c.rho_o, "signal density")->capture_default_str();
  app.add_option("--seeds", c.seeds, "instance seeds")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--algorithms", c.algorithms, "asp, aspo, lasso")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--xi", c.xi, "denoiser smoothing")->capture_default_str();
  app.add_option("--retune-interval", c.retune_interval,
                 "asp: iterations between s retunes (0 = frozen, -1 = default)")
      ->capture_default_str();
  app.add_option("--lambda-max", c.sched.lambda_max, "first penalty")
      ->capture_default_str();
  app.add_option("--lambda-min", c.sched.lambda_min, "last penalty")
      ->capture_default_str();
  app.add_option("--ratio", c.sched.ratio, "penalty multiplier per stage")
      ->capture_default_str();
  app.add_option("--stage-iters", c.sched.max_iters_per_stage,
                 "solver iterations per stage")
      ->capture_default_str();
  app.add_option("--damping", c.sched.damping, "solver variance damping")
      ->capture_default_str();
  app.add_option("--rho-list", c.rho_list, "phase-diagram densities")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--alpha-list", c.alpha_list, "cost-curve compression rates")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--tol-alpha", c.tol_alpha, "threshold bisection width")
      ->capture_default_str();
  app.add_option("--s-min", c.s_min, "cluster exponent lower bound")
      ->capture_default_str();
  app.add_option("--s-max", c.s_max, "cluster exponent upper bound")
      ->capture_default_str();
  app.add_flag("--informed", c.informed, "replica: start the saddle on the signal");

  app.add_subcommand("gen", "generate and save problem instances");
  app.add_subcommand("solve", "run solvers over seeds, write traces + summary");
  app.add_subcommand("se", "state-evolution trace at (rho, alpha)");
  app.add_subcommand("replica", "1RSB cost curve at (rho, alpha)");
  app.add_subcommand("phase-diagram", "recovery boundaries over rho-list");
  app.add_subcommand("cost-curve", "cost curves over alpha-list at fixed rho");

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  const auto errors = validate(c, command);
  if (!errors.empty()) {
    std::fprintf(stderr, "config errors:\n");
    for (const auto& e : errors) std::fprintf(stderr, "  %s\n", e.c_str());
    return 2;
  }
  const int threads = resolve_threads(c.threads);
  const std::string stem = command + "_" + hex16(fnv64(config_echo(c, command)));

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> artifacts;
  int rc = 1;
  try {
    if (command == "gen")
      rc = run_gen(c, stem);
    else if (command == "solve")
      rc = run_solve(c, stem, threads, artifacts);
    else if (command == "se")
      rc = run_se(c, stem, artifacts);
    else if (command == "replica")
      rc = run_replica(c, stem, artifacts);
    else if (command == "phase-diagram")
      rc = run_phase_diagram(c, stem, threads, artifacts);
    else if (command == "cost-curve")
      rc = run_cost_curve(c, stem, threads, artifacts);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  if (rc != 0) return rc;

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const auto& a : artifacts) std::printf("%s/%s\n", c.out_dir.c_str(), a.c_str());
  write_manifest(c, command, stem, artifacts, wall);
  return 0;
}
