// Serial reference vs OpenMP kernel timings. Each row also checks that both
// versions produced the same result.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include <omp.h>

#include "shatterlab/diagnostics.hpp"
#include "shatterlab/experiments.hpp"
#include "shatterlab/matrix_core.hpp"
#include "shatterlab/noise.hpp"
#include "shatterlab/pseudospectrum.hpp"

using namespace shatterlab;
using clk = std::chrono::steady_clock;

namespace {

double seconds(const std::function<void()>& f, int reps) {
  f();  // warm-up
  const auto t0 = clk::now();
  for (int r = 0; r < reps; ++r) f();
  return std::chrono::duration<double>(clk::now() - t0).count() / reps;
}

void row(const char* name, double serial, double parallel, bool same) {
  std::printf("%-28s %12.4f %12.4f %9.2fx  %s\n", name, serial * 1e3, parallel * 1e3, serial / parallel,
              same ? "match" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::stoi(argv[1]) : 3;
  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-28s %12s %12s %10s\n", "kernel", "serial ms", "parallel ms", "speedup");

  {
    const CsrMatrix a = sample_sparse_noise({4000, 0.01, 1.0, 1});
    Vector v = Vector::Ones(a.n());
    Vector ys, yp;
    const double s = seconds([&] { ys = matvec_serial(a, v); }, reps * 10);
    const double p = seconds([&] { yp = matvec(a, v); }, reps * 10);
    row("matvec n=4000 rho=0.01", s, p, ys == yp);
  }
  {
    const NoiseSpec spec{1024, 0.05, 1.0, 2};
    CsrMatrix ns, np;
    const double s = seconds([&] { ns = sample_sparse_noise_serial(spec, 0); }, reps);
    const double p = seconds([&] { np = sample_sparse_noise(spec, 0); }, reps);
    row("noise n=1024 rho=0.05", s, p, ns == np);
  }
  {
    const Matrix a = sample_sparse_noise({32, 1.0, 1.0, 3}).to_dense();
    PseudospectrumGrid gs, gp;
    const double s = seconds([&] { gs = pseudospectrum_grid_serial(a, {0.1}, {0.0, 0.0}, 8.0, 40); }, 1);
    const double p = seconds([&] { gp = pseudospectrum_grid(a, {0.1}, {0.0, 0.0}, 8.0, 40); }, 1);
    double diff = 0.0;
    for (std::size_t k = 0; k < gs.sigma_min_field.size(); ++k)
      diff = std::max(diff, std::abs(gs.sigma_min_field[k] - gp.sigma_min_field[k]) / (1.0 + gs.sigma_min_field[k]));
    row("grid n=32 res=40", s, p, diff < 1e-8);
  }
  {
    const Matrix a = sample_sparse_noise({16, 1.0, 1.0, 4}).to_dense();
    const SigmaMinEvaluator ev(a);
    const double radius = ev.shifted_norm({0.0, 0.0}) + 0.1;
    AreaEstimate es, ep;
    const double s = seconds([&] { es = pseudospectral_area_uniform_serial(ev, 0.1, {0.0, 0.0}, radius, 150); }, 1);
    const double p = seconds([&] { ep = pseudospectral_area(ev, 0.1, {0.0, 0.0}, radius, 150); }, 1);
    row("area n=16 res=150", s, p, es.cells_inside == ep.cells_inside && es.boundary_cells == ep.boundary_cells);
  }
  {
    ConcentrationQuery q;
    q.v = Vector::Ones(64) / 8.0;
    q.r = 0.5;
    q.rho = 0.3;
    q.trials = 200000;
    q.seed = 5;
    ConcentrationEstimate cs{}, cp{};
    const double s = seconds([&] { cs = levy_concentration_serial(q); }, 1);
    const double p = seconds([&] { cp = levy_concentration(q); }, 1);
    row("levy n=64 T=2e5", s, p, cs.estimate == cp.estimate);
  }
  {
    TailCampaignConfig cfg;
    cfg.family = {FamilyKind::Zero, 32, 1.0, "", 0};
    cfg.trials = 400;
    cfg.seed = 6;
    cfg.eps_grid = geometric_grid(1.0, 1e-3, 10);
    TailCampaignResult rs, rp;
    const double s = seconds([&] { rs = run_tail_campaign_serial(cfg); }, 1);
    const double p = seconds([&] { rp = run_tail_campaign(cfg); }, 1);
    row("tail campaign n=32 T=400", s, p, rs.samples == rp.samples);
  }
  return 0;
}
