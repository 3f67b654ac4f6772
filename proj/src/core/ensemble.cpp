#include "ensemble.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

namespace l0cs {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t st = seed ^ (0xa0761d6478bd642fULL * (stream + 1));
  std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(st)),
                    static_cast<std::uint32_t>(splitmix64(st)),
                    static_cast<std::uint32_t>(splitmix64(st)),
                    static_cast<std::uint32_t>(splitmix64(st))};
  return std::mt19937_64(seq);
}

constexpr char kMagic[8] = {'L', '0', 'C', 'S', 'I', 'N', 'S', '1'};

}  // namespace

int EnsembleParams::rows() const { return static_cast<int>(std::lround(alpha * n)); }

void EnsembleParams::validate() const {
  if (n < 1) throw std::invalid_argument("EnsembleParams: n >= 1 required");
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("EnsembleParams: alpha in (0,1] required");
  if (!(rho_o >= 0.0 && rho_o <= 1.0))
    throw std::invalid_argument("EnsembleParams: rho_o in [0,1] required");
  if (rows() < 1) throw std::invalid_argument("EnsembleParams: alpha*n < 1");
}

Eigen::VectorXd sample_signal(int n, double rho_o, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_signal: n >= 1 required");
  if (!(rho_o >= 0.0 && rho_o <= 1.0))
    throw std::invalid_argument("sample_signal: rho_o in [0,1] required");
  auto eng = make_engine(seed, 1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x(i) = unif(eng) < rho_o ? gauss(eng) : 0.0;
  return x;
}

ProblemInstance sample_instance(const EnsembleParams& params) {
  params.validate();
  const int n = params.n, m = params.rows();
  ProblemInstance inst;
  inst.params = params;
  inst.x_o = sample_signal(n, params.rho_o, params.seed);
  auto eng = make_engine(params.seed, 2);
  std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(static_cast<double>(n)));
  inst.matrix_f.resize(m, n);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < n; ++c) inst.matrix_f(r, c) = gauss(eng);
  inst.y = inst.matrix_f * inst.x_o;
  return inst;
}

Observables observables(const Eigen::VectorXd& x_hat, const ProblemInstance& instance,
                        double zero_tol) {
  const int n = instance.n();
  if (x_hat.size() != n) throw std::invalid_argument("observables: dimension mismatch");
  if (zero_tol < 0.0) throw std::invalid_argument("observables: zero_tol >= 0 required");
  Observables obs;
  const double dn = static_cast<double>(n);
  obs.m = instance.x_o.dot(x_hat) / dn;
  obs.q = x_hat.squaredNorm() / dn;
  obs.e = (instance.y - instance.matrix_f * x_hat).squaredNorm() / dn;
  obs.eps_rec = (instance.x_o - x_hat).squaredNorm() / dn;
  int nz = 0;
  for (int i = 0; i < n; ++i)
    if (std::fabs(x_hat(i)) > zero_tol) ++nz;
  obs.rho = nz / dn;
  return obs;
}

void save_instance(const ProblemInstance& instance, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_instance: cannot open " + path);
  out.write(kMagic, 8);
  const std::int64_t n = instance.n(), m = instance.m_rows();
  out.write(reinterpret_cast<const char*>(&n), 8);
  out.write(reinterpret_cast<const char*>(&m), 8);
  out.write(reinterpret_cast<const char*>(&instance.params.alpha), 8);
  out.write(reinterpret_cast<const char*>(&instance.params.rho_o), 8);
  out.write(reinterpret_cast<const char*>(&instance.params.seed), 8);
  // F row-major, then x_o, then y
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < n; ++c) {
      const double v = instance.matrix_f(r, c);
      out.write(reinterpret_cast<const char*>(&v), 8);
    }
  out.write(reinterpret_cast<const char*>(instance.x_o.data()), 8 * n);
  out.write(reinterpret_cast<const char*>(instance.y.data()), 8 * m);
  if (!out) throw std::runtime_error("save_instance: write failed for " + path);
}

ProblemInstance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_instance: cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("load_instance: bad magic in " + path);
  std::int64_t n = 0, m = 0;
  ProblemInstance inst;
  in.read(reinterpret_cast<char*>(&n), 8);
  in.read(reinterpret_cast<char*>(&m), 8);
  in.read(reinterpret_cast<char*>(&inst.params.alpha), 8);
  in.read(reinterpret_cast<char*>(&inst.params.rho_o), 8);
  in.read(reinterpret_cast<char*>(&inst.params.seed), 8);
  if (!in || n < 1 || m < 1) throw std::runtime_error("load_instance: bad header");
  inst.params.n = static_cast<int>(n);
  inst.matrix_f.resize(m, n);
  for (std::int64_t r = 0; r < m; ++r)
    for (std::int64_t c = 0; c < n; ++c) {
      double v;
      in.read(reinterpret_cast<char*>(&v), 8);
      inst.matrix_f(r, c) = v;
    }
  inst.x_o.resize(n);
  in.read(reinterpret_cast<char*>(inst.x_o.data()), 8 * n);
  inst.y.resize(m);
  in.read(reinterpret_cast<char*>(inst.y.data()), 8 * m);
  if (!in) throw std::runtime_error("load_instance: truncated file " + path);
  return inst;
}

}  // namespace l0cs
