#include "dmabf/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace dmabf {
namespace {

Architecture architecture_of(Mode mode) {
  switch (mode) {
    case Mode::kFd:
    case Mode::kOp1:
      return Architecture::kFd;
    case Mode::kDma:
      return Architecture::kDma;
    case Mode::kUw:
      return Architecture::kUw;
  }
  return Architecture::kFd;
}

ArrayGeometry geometry_of(const ScenarioConfig& config, Mode mode) {
  return mode == Mode::kFd ? config.fd_geometry() : config.dma_geometry();
}

// Stream ids below this are reserved for user draws.
constexpr std::uint64_t kSolverStreamBase = 1ULL << 40;

RunRecord solve_mode(const ScenarioConfig& config, Mode mode, int realization,
                     const std::vector<Point3>& users) {
  const ArrayGeometry geometry = geometry_of(config, mode);
  const double lambda = config.wavelength();
  const double delta = sinr_target_from_rate(config.r_min);

  ScenarioInstance instance;
  instance.architecture = architecture_of(mode);
  for (int k = 0; k < config.k; ++k) {
    instance.channels.push_back(channel_vector(geometry, users[k], lambda, k).entries);
  }
  instance.targets = RealVector::Constant(config.k, delta);
  instance.noise_powers = RealVector::Constant(config.k, dbm_to_watts(config.noise_dbm));
  if (instance.architecture != Architecture::kFd) instance.dma.emplace(geometry);

  BeamformSettings settings = config.solver_settings();
  // DMA and UW share the initialization stream of a realization.
  settings.seed = CounterRng::stream(config.seed, kSolverStreamBase + realization)();

  const auto start = std::chrono::steady_clock::now();
  const BeamformingResult result = solve(instance, settings);
  const auto stop = std::chrono::steady_clock::now();

  RunRecord rec;
  rec.realization = realization;
  rec.mode = mode;
  rec.k = config.k;
  rec.r_min = config.r_min;
  rec.d_x_over_lambda = mode == Mode::kFd ? 0.5 : config.d_x_over_lambda;
  rec.users = users;
  rec.status = result.status;
  rec.iterations = result.iterations;
  rec.wall_ms =
      config.timing ? std::chrono::duration<double, std::milli>(stop - start).count() : 0.0;
  if (result.status == BeamformStatus::kConverged) {
    rec.tx_power_watts = result.tx_power_watts;
    rec.tx_power_dbm = watts_to_dbm(result.tx_power_watts);
    rec.achieved_sinrs.assign(result.achieved_sinrs.begin(), result.achieved_sinrs.end());
    double margin = std::numeric_limits<double>::infinity();
    for (double s : rec.achieved_sinrs) margin = std::min(margin, (s - delta) / delta);
    rec.min_sinr_margin = margin;
  }
  return rec;
}

}  // namespace

std::vector<Point3> draw_users(const ScenarioConfig& config, int realization) {
  const double d_f = fraunhofer_distance(config.aperture_m, config.wavelength());
  UserSampler sampler(config.zone, d_f, CounterRng::stream(config.seed, realization),
                      reactive_zone_radius(config.aperture_m));
  return sampler.sample(config.k);
}

std::vector<RunRecord> run_realization(const ScenarioConfig& config, int realization) {
  const std::vector<Point3> users = draw_users(config, realization);
  std::vector<RunRecord> out;
  out.reserve(config.modes.size());
  for (Mode mode : config.modes) out.push_back(solve_mode(config, mode, realization, users));
  return out;
}

int resolve_workers(const ScenarioConfig& config) {
  int workers = config.workers;
  if (const char* env = std::getenv("DMABF_WORKERS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == nullptr || *end != '\0' || v < 0) {
      throw ConfigError(std::string("DMABF_WORKERS must be a non-negative integer, got '") + env + "'");
    }
    workers = static_cast<int>(v);
  }
  if (workers == 0) workers = static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
  return std::clamp(workers, 1, std::max(1, config.realizations));
}

ExperimentResult run_experiment(const ScenarioConfig& config) {
  config.validate();
  const int n = config.realizations;
  std::vector<std::vector<RunRecord>> slots(n);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto work = [&] {
    for (int r = next++; r < n; r = next++) {
      try {
        slots[r] = run_realization(config, r);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };

  const int workers = resolve_workers(config);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  ExperimentResult result;
  result.config = config;
  for (auto& slot : slots) {
    for (auto& rec : slot) result.records.push_back(std::move(rec));
  }
  result.summary = summarize(config, result.records);
  return result;
}

double aggregate_dbm(const std::vector<double>& watts, Aggregate how) {
  if (watts.empty()) throw DomainError("aggregate_dbm: no values");
  if (how == Aggregate::kWatts) {
    const double mean = std::accumulate(watts.begin(), watts.end(), 0.0) / watts.size();
    return watts_to_dbm(mean);
  }
  double sum = 0.0;
  for (double w : watts) sum += watts_to_dbm(w);
  return sum / watts.size();
}

const ModeSummary* Summary::find(Mode mode) const {
  for (const auto& m : modes) {
    if (m.mode == mode) return &m;
  }
  return nullptr;
}

const PairGap* Summary::gap(Mode a, Mode b) const {
  for (const auto& g : gaps) {
    if (g.a == a && g.b == b) return &g;
  }
  return nullptr;
}

Summary summarize(const ScenarioConfig& config, const std::vector<RunRecord>& records) {
  Summary summary;
  std::map<Mode, std::map<int, double>> converged;
  for (Mode mode : config.modes) {
    ModeSummary s;
    s.mode = mode;
    const ArrayGeometry geometry = geometry_of(config, mode);
    s.elements = geometry.size();
    const Architecture arch = architecture_of(mode);
    const int beams = arch == Architecture::kFd ? config.k : std::min(config.k, geometry.n_rows);
    s.dof = dof_count(arch, geometry.n_rows, geometry.n_cols, beams);
    std::vector<double> watts;
    for (const auto& rec : records) {
      if (rec.mode != mode) continue;
      switch (rec.status) {
        case BeamformStatus::kConverged:
          ++s.converged;
          watts.push_back(*rec.tx_power_watts);
          converged[mode][rec.realization] = *rec.tx_power_watts;
          break;
        case BeamformStatus::kInfeasible:
          ++s.infeasible;
          break;
        case BeamformStatus::kMaxIter:
          ++s.failed;
          break;
      }
    }
    if (!watts.empty()) s.mean_power_dbm = aggregate_dbm(watts, config.aggregate);
    summary.modes.push_back(s);
  }

  for (std::size_t i = 0; i < config.modes.size(); ++i) {
    for (std::size_t j = 0; j < config.modes.size(); ++j) {
      if (i == j) continue;
      PairGap g;
      g.a = config.modes[i];
      g.b = config.modes[j];
      std::vector<double> wa;
      std::vector<double> wb;
      for (const auto& [r, pa] : converged[g.a]) {
        const auto it = converged[g.b].find(r);
        if (it == converged[g.b].end()) continue;
        wa.push_back(pa);
        wb.push_back(it->second);
      }
      g.paired = static_cast<int>(wa.size());
      if (!wa.empty()) {
        g.gap_db = aggregate_dbm(wa, config.aggregate) - aggregate_dbm(wb, config.aggregate);
      }
      summary.gaps.push_back(g);
    }
  }
  return summary;
}

SweepAxis sweep_axis_from_string(const std::string& name) {
  if (name == "r_min" || name == "R_min" || name == "r-min") return SweepAxis::kRMin;
  if (name == "k" || name == "K") return SweepAxis::kK;
  if (name == "d_x" || name == "d-x" || name == "d_x_over_lambda") return SweepAxis::kDx;
  throw ConfigError("unknown sweep axis '" + name + "' (expected r_min, k or d_x)");
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kRMin:
      return "r_min";
    case SweepAxis::kK:
      return "k";
    case SweepAxis::kDx:
      return "d_x_over_lambda";
  }
  return "unknown";
}

SweepResult sweep(const ScenarioConfig& base, SweepAxis axis, const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  SweepResult out;
  out.axis = axis;
  for (double v : values) {
    ScenarioConfig cfg = base;
    switch (axis) {
      case SweepAxis::kRMin:
        cfg.r_min = v;
        break;
      case SweepAxis::kK:
        if (v != std::floor(v)) throw ConfigError("sweep over k needs integer values");
        cfg.k = static_cast<int>(v);
        break;
      case SweepAxis::kDx:
        cfg.d_x_over_lambda = v;
        break;
    }
    ExperimentResult point = run_experiment(cfg);
    for (const auto& s : point.summary.modes) {
      const ArrayGeometry geometry = geometry_of(cfg, s.mode);
      SweepRow row;
      row.value = v;
      row.mode = s.mode;
      row.n_rows = geometry.n_rows;
      row.n_cols = geometry.n_cols;
      row.dof = s.dof;
      row.converged = s.converged;
      row.infeasible = s.infeasible;
      row.failed = s.failed;
      row.mean_power_dbm = s.mean_power_dbm;
      out.rows.push_back(row);
    }
    out.points.push_back(std::move(point));
  }
  return out;
}

std::vector<OracleRow> single_user_oracle(const ScenarioConfig& config) {
  ScenarioConfig cfg = config;
  cfg.k = 1;
  cfg.modes = {Mode::kFd};
  cfg.validate();
  const ArrayGeometry geometry = cfg.fd_geometry();
  const double delta = sinr_target_from_rate(cfg.r_min);
  const double noise = dbm_to_watts(cfg.noise_dbm);
  std::vector<OracleRow> rows;
  for (int r = 0; r < cfg.realizations; ++r) {
    const auto users = draw_users(cfg, r);
    ScenarioInstance instance;
    instance.channels = {channel_vector(geometry, users[0], cfg.wavelength()).entries};
    instance.targets = RealVector::Constant(1, delta);
    instance.noise_powers = RealVector::Constant(1, noise);
    const BeamformingResult res = solve_fd(instance, cfg.solver_settings());
    OracleRow row;
    row.realization = r;
    row.closed_form_watts = delta * noise / instance.channels[0].squaredNorm();
    row.solver_watts = res.status == BeamformStatus::kConverged
                           ? res.tx_power_watts
                           : std::numeric_limits<double>::quiet_NaN();
    row.relative_error = std::abs(row.solver_watts - row.closed_form_watts) / row.closed_form_watts;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace dmabf
