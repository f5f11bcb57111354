// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "dmabf/harness.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace dmabf;
using dmabf::testing::rel_diff;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

void fail(Outcome& o, const std::string& why) {
  if (o.pass) o.detail = why;
  o.pass = false;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

ScenarioConfig base(int k, double r_min, int realizations, std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.k = k;
  cfg.r_min = r_min;
  cfg.realizations = realizations;
  cfg.seed = seed;
  cfg.workers = 1;
  cfg.timing = false;
  return cfg;
}

double mean_dbm(const ExperimentResult& r, Mode mode) {
  const auto* s = r.summary.find(mode);
  return s && s->mean_power_dbm ? *s->mean_power_dbm : std::nan("");
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0;
  double my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0;
  double sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

Outcome single_user_closed_form() {
  Outcome o;
  const Zone zones[] = {Zone::kNear, Zone::kFar, Zone::kCombined};
  for (int r = 0; r < 50; ++r) {
    auto cfg = base(1, 2.0 + r % 9, 1, 1000 + r);
    cfg.zone = zones[r % 3];
    const auto inst = dmabf::testing::desk_instance(cfg, 0, Architecture::kFd, true);
    const auto start = std::chrono::steady_clock::now();
    const auto res = solve_fd(inst, cfg.solver_settings());
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double closed = inst.targets(0) * inst.noise_powers(0) / inst.channels[0].squaredNorm();
    if (res.status != BeamformStatus::kConverged) fail(o, "draw " + std::to_string(r) + " not converged");
    const double err = rel_diff(res.tx_power_watts, closed);
    if (err > 1e-6) fail(o, "draw " + std::to_string(r) + " rel error " + num(err));
    if (secs >= 1.0) fail(o, "draw " + std::to_string(r) + " took " + num(secs) + " s");
  }
  if (o.pass) o.detail = "50 draws";
  return o;
}

Outcome sdp_certification() {
  Outcome o;
  CounterRng rng = CounterRng::stream(2024, 0);
  int oracle_cases = 0;
  double worst_gap = 0;
  double worst_oracle = 0;
  for (int t = 0; t < 100; ++t) {
    SdpProblem p;
    std::vector<ComplexVector> g;
    std::vector<double> delta;
    std::vector<double> noise;
    const bool beamforming = t % 2 == 0;
    if (beamforming) {
      const int k = 1 + (t / 2) % 4;
      const int n = t % 4 == 0 ? 2 : 2 + static_cast<int>(rng.uniform() * 7);
      const int kk = n == 2 ? std::min(k, 2) : k;
      for (int i = 0; i < kk; ++i) {
        g.push_back(dmabf::testing::random_vector(n, rng));
        delta.push_back(rng.uniform(0.5, 3.0));
        noise.push_back(rng.uniform(0.5, 2.0));
      }
      p = dmabf::testing::beamforming_sdp(g, delta, noise);
    } else {
      p = dmabf::testing::random_generic_sdp(rng, 1 + static_cast<int>(rng.uniform() * 3), 8,
                                             1 + static_cast<int>(rng.uniform() * 4));
    }
    const auto sol = solve_sdp(p, SdpOptions{1e-9, 1e-9, 100});
    const std::string tag = "instance " + std::to_string(t);
    if (sol.status != SdpStatus::kOptimal) {
      fail(o, tag + " status " + to_string(sol.status));
      continue;
    }
    worst_gap = std::max(worst_gap, sol.duality_gap);
    if (sol.duality_gap > 1e-6) fail(o, tag + " gap " + num(sol.duality_gap));
    for (double r : sol.constraint_residuals) {
      if (r < -1e-8) fail(o, tag + " residual " + num(r));
    }
    if (beamforming && p.block_dims[0] == 2) {
      ++oracle_cases;
      const double brute = dmabf::testing::BeamformingGridOracle(g, delta, noise).solve();
      const double err = rel_diff(sol.objective_value, brute);
      worst_oracle = std::max(worst_oracle, err);
      if (err > 1e-4) fail(o, tag + " oracle rel error " + num(err));
    }
  }
  if (oracle_cases < 10) fail(o, "only " + std::to_string(oracle_cases) + " oracle cases");
  if (o.pass) {
    o.detail = "worst gap " + num(worst_gap) + ", " + std::to_string(oracle_cases) +
               " oracle cases, worst " + num(worst_oracle);
  }
  return o;
}

Outcome feasibility_of_outputs() {
  Outcome o;
  int converged = 0;
  int total = 0;
  const double spacings[] = {0.5, 1.0 / 3, 0.25, 1.0 / 3};
  const Zone zones[] = {Zone::kNear, Zone::kFar, Zone::kCombined, Zone::kCombined};
  for (int group = 0; group < 4; ++group) {
    auto cfg = base(1 + group % 3, 2.0 + 2 * group, 25, 300 + group);
    cfg.modes = {Mode::kFd, Mode::kOp1, Mode::kDma, Mode::kUw};
    cfg.d_x_over_lambda = spacings[group];
    cfg.zone = zones[group];
    cfg.workers = 0;
    for (int r = 0; r < cfg.realizations; ++r) {
      const auto users = draw_users(cfg, r);
      for (Mode mode : cfg.modes) {
        const Architecture arch = mode == Mode::kDma ? Architecture::kDma
                                  : mode == Mode::kUw ? Architecture::kUw
                                                      : Architecture::kFd;
        const auto inst = dmabf::testing::desk_instance(cfg, r, arch, mode == Mode::kFd);
        BeamformSettings settings = cfg.solver_settings();
        settings.seed = 77 + r;
        const auto res = solve(inst, settings);
        ++total;
        if (res.status != BeamformStatus::kConverged) continue;
        ++converged;
        const auto ev = evaluate(inst, res.precoders, res.weights);
        const auto again = dmabf::testing::recompute(inst, res);
        for (int k = 0; k < inst.user_count(); ++k) {
          const double floor = inst.targets(k) * (1 - 1e-6);
          if (ev.sinrs(k) < floor || again.sinrs[k] < floor) {
            fail(o, "group " + std::to_string(group) + " draw " + std::to_string(r) + " mode " +
                        to_string(mode) + " user " + std::to_string(k) + " SINR " + num(ev.sinrs(k)));
          }
        }
      }
    }
  }
  if (converged == 0) fail(o, "no converged result");
  if (o.pass) o.detail = std::to_string(converged) + "/" + std::to_string(total) + " converged, all feasible";
  return o;
}

Outcome dma_monotonicity() {
  Outcome o;
  for (int r = 0; r < 20; ++r) {
    auto cfg = base(1 + r % 3, 2.0 + r % 5, 1, 500 + r);
    cfg.d_x_over_lambda = r % 2 == 0 ? 0.5 : 0.25;
    const auto inst = dmabf::testing::desk_instance(cfg, 0, Architecture::kDma);
    BeamformSettings settings = cfg.solver_settings();
    settings.seed = 900 + r;
    const auto res = solve_dma(inst, settings);
    if (res.power_trace.empty()) fail(o, "run " + std::to_string(r) + " has no trace");
    for (std::size_t i = 1; i < res.power_trace.size(); ++i) {
      if (res.power_trace[i] > res.power_trace[i - 1]) {
        fail(o, "run " + std::to_string(r) + " increases at step " + std::to_string(i));
      }
    }
  }
  if (o.pass) o.detail = "20 runs";
  return o;
}

Outcome ordering_sandwich() {
  Outcome o;
  auto cfg = base(2, 4.0, 30, 600);
  cfg.modes = {Mode::kOp1, Mode::kUw, Mode::kDma};
  cfg.d_x_over_lambda = 1.0 / 3;
  cfg.workers = 0;
  const auto res = run_experiment(cfg);
  int checked = 0;
  for (std::size_t i = 0; i < res.records.size(); i += 3) {
    const auto& fd = res.records[i];
    const auto& uw = res.records[i + 1];
    const auto& dma = res.records[i + 2];
    const std::string tag = "draw " + std::to_string(fd.realization);
    if (!fd.tx_power_watts || !uw.tx_power_watts || !dma.tx_power_watts) {
      fail(o, tag + " not converged in every mode");
      continue;
    }
    ++checked;
    if (*fd.tx_power_watts > *uw.tx_power_watts * (1 + 1e-6)) fail(o, tag + " FD > UW");
    if (*uw.tx_power_watts > *dma.tx_power_watts * (1 + 1e-6)) fail(o, tag + " UW > DMA");
  }
  if (o.pass) o.detail = std::to_string(checked) + " matched draws";
  return o;
}

Outcome single_user_parity() {
  Outcome o;
  auto cfg = base(1, 4.0, 30, 700);
  cfg.modes = {Mode::kFd, Mode::kUw};
  cfg.workers = 0;
  const auto res = run_experiment(cfg);
  const auto* g = res.summary.gap(Mode::kUw, Mode::kFd);
  if (!g || !g->gap_db || g->paired < 30) {
    fail(o, "missing paired draws");
  } else {
    o.detail = "|UW - FD| = " + num(std::abs(*g->gap_db)) + " dB";
    if (std::abs(*g->gap_db) > 0.1) fail(o, o.detail);
  }
  return o;
}

Outcome rate_slope() {
  Outcome o;
  const std::vector<double> rates = {6, 8, 10};
  for (int k : {1, 2}) {
    std::vector<double> means;
    for (double r : rates) {
      auto cfg = base(k, r, 30, 800);
      cfg.modes = {Mode::kFd};
      const auto res = run_experiment(cfg);
      means.push_back(mean_dbm(res, Mode::kFd));
    }
    const double s = slope(rates, means);
    const double tol = k == 1 ? 0.05 : 0.3;
    o.detail += "K=" + std::to_string(k) + " slope " + num(s) + " ";
    if (!(std::abs(s - 3.01) <= tol)) fail(o, "K=" + std::to_string(k) + " slope " + num(s));
  }
  return o;
}

Outcome dof_gap() {
  Outcome o;
  double previous = -1e300;
  for (int k : {1, 2, 3}) {
    auto cfg = base(k, 6.0, 50, 1100);
    cfg.modes = {Mode::kFd, Mode::kDma};
    cfg.workers = 0;
    const auto res = run_experiment(cfg);
    const auto* g = res.summary.gap(Mode::kDma, Mode::kFd);
    if (!g || !g->gap_db || g->paired < 50) {
      fail(o, "K=" + std::to_string(k) + " has " + std::to_string(g ? g->paired : 0) + " paired draws");
      continue;
    }
    o.detail += "K=" + std::to_string(k) + " " + num(*g->gap_db) + " dB ";
    if (*g->gap_db < previous - 0.2) fail(o, "gap drops at K=" + std::to_string(k));
    previous = std::max(previous, *g->gap_db);
  }
  return o;
}

Outcome element_count() {
  Outcome o;
  double previous = 1e300;
  for (double dx : {0.5, 1.0 / 3, 0.25}) {
    auto cfg = base(2, 6.0, 40, 1200);
    cfg.modes = {Mode::kDma};
    cfg.d_x_over_lambda = dx;
    cfg.workers = 0;
    const double m = mean_dbm(run_experiment(cfg), Mode::kDma);
    o.detail += num(m) + " ";
    if (!(m <= previous + 0.2)) fail(o, "DMA mean rises to " + num(m) + " dBm at d_x/lambda " + num(dx));
    previous = std::min(previous, m);
  }
  return o;
}

Outcome lorentzian_projection() {
  Outcome o;
  constexpr int kGrid = 100000;
  constexpr double kStep = 2 * kPi / kGrid;
  std::vector<Complex> grid(kGrid);
  for (int i = 0; i < kGrid; ++i) grid[i] = lorentzian_point(kStep * i);
  CounterRng rng = CounterRng::stream(31337, 0);
  double worst_grid = 0;
  double worst_polished = 0;
  double worst_idem = 0;
  for (int t = 0; t < 1000; ++t) {
    const Complex z(rng.uniform(-2.0, 2.0), rng.uniform(-1.5, 2.5));
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int i = 0; i < kGrid; ++i) {
      const double d = std::abs(z - grid[i]);
      if (d < best) {
        best = d;
        arg = i;
      }
    }
    // Ternary search inside the bracketing grid cells.
    const auto dist = [&](double phi) { return std::abs(z - lorentzian_point(phi)); };
    double lo = kStep * (arg - 1);
    double hi = kStep * (arg + 1);
    for (int it = 0; it < 200; ++it) {
      const double m1 = lo + (hi - lo) / 3;
      const double m2 = hi - (hi - lo) / 3;
      if (dist(m1) < dist(m2)) {
        hi = m2;
      } else {
        lo = m1;
      }
    }
    const double polished = std::min(best, dist(0.5 * (lo + hi)));
    const auto p = lorentzian_project(z);
    const double mine = std::abs(z - p.value);
    worst_grid = std::max(worst_grid, mine - best);
    worst_polished = std::max(worst_polished, std::abs(mine - polished));
    worst_idem = std::max(worst_idem, std::abs(lorentzian_project(p.value).value - p.value));
  }
  o.detail = "excess over grid " + num(worst_grid) + ", vs polished grid " + num(worst_polished) +
             ", idempotence " + num(worst_idem);
  if (worst_grid > 1e-9 || worst_polished > 1e-9 || worst_idem > 1e-12) fail(o, o.detail);
  return o;
}

Outcome determinism() {
  Outcome o;
  auto cfg = base(2, 4.0, 8, 1300);
  cfg.modes = {Mode::kFd, Mode::kOp1, Mode::kDma, Mode::kUw};
  cfg.d_x_over_lambda = 1.0 / 3;
  cfg.workers = 1;
  const std::string one = records_to_csv(run_experiment(cfg).records);
  cfg.workers = 8;
  const std::string eight = records_to_csv(run_experiment(cfg).records);
  if (one != eight) fail(o, "CSV differs between 1 and 8 workers");
  if (o.pass) o.detail = std::to_string(one.size()) + " identical bytes";
  return o;
}

}  // namespace

// Optional arguments select criteria by number; all run by default.
int main(int argc, char** argv) {
  ::unsetenv("DMABF_WORKERS");
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"single-user closed form", single_user_closed_form},
      {"SDP certification", sdp_certification},
      {"feasibility of outputs", feasibility_of_outputs},
      {"DMA kept-power monotonicity", dma_monotonicity},
      {"FD <= UW <= DMA ordering", ordering_sandwich},
      {"K=1 UW/FD parity", single_user_parity},
      {"rate slope", rate_slope},
      {"DMA-FD gap over K", dof_gap},
      {"DMA power over element count", element_count},
      {"Lorentzian projection", lorentzian_projection},
      {"determinism across workers", determinism},
  };
  int failures = 0;
  std::vector<bool> selected(criteria.size(), argc < 2);
  for (int a = 1; a < argc; ++a) {
    const int n = std::atoi(argv[a]);
    if (n < 1 || n > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "unknown criterion '%s'\n", argv[a]);
      return 2;
    }
    selected[n - 1] = true;
  }
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected[i]) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      fail(o, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::printf("%s %2zu %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
