#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dmabf/beamform.hpp"
#include "dmabf/channel.hpp"

namespace dmabf {

/// Thrown for malformed or inconsistent scenario configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// FD: fully digital at d_x = lambda/2. OP1: the fully digital problem at the
/// DMA element spacing. DMA / UW: alternating optimization at the DMA
/// spacing with Lorentzian / unrestricted weights.
enum class Mode { kFd, kOp1, kDma, kUw };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);
std::string to_string(Zone zone);
Zone zone_from_string(const std::string& name);

enum class Aggregate { kWatts, kDb };

/// Flat scenario description. Keys of the config file and CLI flags mirror
/// the field names (d_x_over_lambda <-> --d-x-over-lambda).
struct ScenarioConfig {
  double frequency_hz = 28e9;
  double aperture_m = 0.025;
  double d_x_over_lambda = 0.5;
  double d_y_over_lambda = 0.5;
  double gain_exponent = 2.0;
  std::vector<Mode> modes{Mode::kFd, Mode::kDma};
  int k = 2;
  double r_min = 20.0;
  double noise_dbm = -114.0;
  Zone zone = Zone::kCombined;
  int realizations = 50;
  std::uint64_t seed = 1;
  double tol = 1e-8;
  double gap_tol = 1e-9;
  int max_iter = 100;
  int outer_iterations = 20;
  int randomization_trials = 30;
  Aggregate aggregate = Aggregate::kWatts;
  /// 0 picks the hardware concurrency; DMABF_WORKERS overrides.
  int workers = 0;
  /// When false, wall_ms is recorded as 0 so reports are reproducible
  /// byte for byte.
  bool timing = true;

  [[nodiscard]] double wavelength() const { return wavelength_from_frequency(frequency_hz); }
  /// DMA / OP1 geometry at the configured spacing.
  [[nodiscard]] ArrayGeometry dma_geometry() const;
  /// Fully digital benchmark geometry (d_x = lambda/2).
  [[nodiscard]] ArrayGeometry fd_geometry() const;
  [[nodiscard]] BeamformSettings solver_settings() const;

  /// Throws ConfigError.
  void validate() const;
  /// Applies one `key = value` setting. Throws ConfigError for unknown keys
  /// or unparsable values.
  void set(const std::string& key, const std::string& value);
  /// Canonical `key = value` lines in a fixed order.
  [[nodiscard]] std::string serialize() const;
  [[nodiscard]] std::map<std::string, std::string> to_map() const;
};

/// Parses `key = value` lines; '#' starts a comment.
ScenarioConfig parse_config(const std::string& text, ScenarioConfig base = {});
ScenarioConfig load_config(const std::filesystem::path& path, ScenarioConfig base = {});

/// SHA-1 of "blob <len>\0<canonical config>", as git hashes file contents.
std::string config_content_hash(const ScenarioConfig& config);

struct RunRecord {
  int realization = 0;
  Mode mode = Mode::kFd;
  int k = 0;
  double r_min = 0.0;
  double d_x_over_lambda = 0.0;
  std::vector<Point3> users;
  BeamformStatus status = BeamformStatus::kInfeasible;
  /// Present iff status is converged.
  std::optional<double> tx_power_watts;
  std::optional<double> tx_power_dbm;
  std::vector<double> achieved_sinrs;
  /// min_k (SINR_k - delta_k) / delta_k.
  std::optional<double> min_sinr_margin;
  int iterations = 0;
  double wall_ms = 0.0;
};

struct ModeSummary {
  Mode mode = Mode::kFd;
  int converged = 0;
  int infeasible = 0;
  int failed = 0;
  /// Absent when no realization converged.
  std::optional<double> mean_power_dbm;
  long dof = 0;
  int elements = 0;
};

struct PairGap {
  Mode a = Mode::kFd;
  Mode b = Mode::kFd;
  int paired = 0;
  /// mean(a) - mean(b) in dB over realizations where both converged.
  std::optional<double> gap_db;
};

struct Summary {
  std::vector<ModeSummary> modes;
  std::vector<PairGap> gaps;
  [[nodiscard]] const ModeSummary* find(Mode mode) const;
  [[nodiscard]] const PairGap* gap(Mode a, Mode b) const;
};

struct ExperimentResult {
  ScenarioConfig config;
  std::vector<RunRecord> records;
  Summary summary;
};

/// Mean power in dBm under the chosen aggregation: dBm of the mean of watts,
/// or the mean of dBm values.
double aggregate_dbm(const std::vector<double>& watts, Aggregate how);

Summary summarize(const ScenarioConfig& config, const std::vector<RunRecord>& records);

/// Number of workers after applying DMABF_WORKERS and the config.
int resolve_workers(const ScenarioConfig& config);

/// Monte-Carlo run: users are drawn once per realization from the stream
/// (seed, realization) and every requested mode is solved on that draw.
/// Records are ordered by (realization, mode order in the config).
ExperimentResult run_experiment(const ScenarioConfig& config);

/// Solves every requested mode for one realization.
std::vector<RunRecord> run_realization(const ScenarioConfig& config, int realization);

/// The user positions drawn for a realization.
std::vector<Point3> draw_users(const ScenarioConfig& config, int realization);

enum class SweepAxis { kRMin, kK, kDx };

SweepAxis sweep_axis_from_string(const std::string& name);
std::string to_string(SweepAxis axis);

struct SweepRow {
  double value = 0.0;
  Mode mode = Mode::kFd;
  int n_rows = 0;
  int n_cols = 0;
  long dof = 0;
  int converged = 0;
  int infeasible = 0;
  int failed = 0;
  std::optional<double> mean_power_dbm;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::kRMin;
  std::vector<ExperimentResult> points;
  std::vector<SweepRow> rows;
};

/// One experiment per grid value along `axis` with all other keys fixed.
SweepResult sweep(const ScenarioConfig& base, SweepAxis axis, const std::vector<double>& values);

struct OracleRow {
  int realization = 0;
  double closed_form_watts = 0.0;
  double solver_watts = 0.0;
  double relative_error = 0.0;
};

/// Single-user check: the fully digital optimum delta sigma^2 / ||gamma||^2
/// against the SDP solver, per realization of the configured zone.
std::vector<OracleRow> single_user_oracle(const ScenarioConfig& config);

// Reports.

inline constexpr const char* kCsvHeader =
    "realization,mode,K,R_min,d_x_over_lambda,status,tx_power_dbm,min_sinr_margin,iterations,wall_ms";

std::string records_to_csv(const std::vector<RunRecord>& records);
std::string experiment_to_json(const ExperimentResult& result);
/// Inverse of experiment_to_json; the summary is recomputed from records.
ExperimentResult experiment_from_json(const std::string& text);
std::string sweep_to_csv(const SweepResult& result);
std::string oracle_to_csv(const std::vector<OracleRow>& rows);

/// Writes `content` to `path`, creating parent directories. Throws
/// std::runtime_error naming the path on failure.
void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace dmabf
