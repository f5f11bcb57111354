#ifdef DMABF_CLI11_SINGLE_HEADER
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dmabf/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitSolver = 2;
constexpr int kExitConfig = 3;

const std::vector<std::string> kConfigKeys = {
    "frequency_hz", "aperture_m", "d_x_over_lambda", "d_y_over_lambda", "gain_exponent",
    "modes",        "k",          "r_min",           "noise_dbm",       "zone",
    "realizations", "seed",       "tol",             "gap_tol",         "max_iter",
    "outer_iterations", "randomization_trials", "aggregate", "workers", "timing"};

std::string dashed(std::string key) {
  for (char& c : key) {
    if (c == '_') c = '-';
  }
  return key;
}

struct CommonOptions {
  std::string config_path;
  std::map<std::string, std::string> overrides;
  std::string out;

  void attach(CLI::App& cmd) {
    cmd.add_option("-c,--config", config_path, "key = value config file");
    cmd.add_option("-o,--out", out, "output path prefix (default: stdout)");
    for (const auto& key : kConfigKeys) {
      cmd.add_option("--" + dashed(key), overrides[key], "override '" + key + "'");
    }
  }

  [[nodiscard]] dmabf::ScenarioConfig resolve(const CLI::App& cmd) const {
    dmabf::ScenarioConfig cfg;
    if (!config_path.empty()) cfg = dmabf::load_config(config_path);
    for (const auto& key : kConfigKeys) {
      if (cmd.count("--" + dashed(key)) > 0) cfg.set(key, overrides.at(key));
    }
    cfg.validate();
    return cfg;
  }
};

void emit(const std::string& out, const std::string& suffix, const std::string& content) {
  if (out.empty()) {
    std::cout << content;
  } else {
    dmabf::write_text_file(out + suffix, content);
  }
}

void print_summary(const dmabf::ExperimentResult& result) {
  for (const auto& m : result.summary.modes) {
    std::fprintf(stderr, "%-4s N=%d dof=%ld converged=%d infeasible=%d failed=%d mean=%s dBm\n",
                 dmabf::to_string(m.mode).c_str(), m.elements, m.dof, m.converged, m.infeasible,
                 m.failed,
                 m.mean_power_dbm ? std::to_string(*m.mean_power_dbm).c_str() : "n/a");
  }
  for (const auto& g : result.summary.gaps) {
    if (g.a < g.b && g.gap_db) {
      std::fprintf(stderr, "gap %s-%s = %.4f dB over %d paired draws\n", dmabf::to_string(g.a).c_str(),
                   dmabf::to_string(g.b).c_str(), *g.gap_db, g.paired);
    }
  }
}

bool any_failed(const std::vector<dmabf::RunRecord>& records) {
  for (const auto& r : records) {
    if (r.status == dmabf::BeamformStatus::kMaxIter) return true;
  }
  return false;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      values.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw dmabf::ConfigError("--values: cannot parse '" + item + "'");
    }
  }
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transmit-power minimization for DMA and fully digital arrays"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  std::string run_format = "csv";
  auto* run = app.add_subcommand("run", "Monte-Carlo run over user draws");
  run_opts.attach(*run);
  run->add_option("--format", run_format, "csv, json or both")
      ->check(CLI::IsMember({"csv", "json", "both"}));

  CommonOptions sweep_opts;
  std::string axis = "r_min";
  std::string values_text;
  std::string records_path;
  auto* sw = app.add_subcommand("sweep", "Repeat the run along one axis");
  sweep_opts.attach(*sw);
  sw->add_option("--axis", axis, "r_min, k or d_x")->check(CLI::IsMember({"r_min", "k", "d_x"}));
  sw->add_option("--values", values_text, "comma-separated grid")->required();
  sw->add_option("--records", records_path, "also write every run record as CSV");

  CommonOptions oracle_opts;
  double oracle_tol = 1e-6;
  auto* oracle = app.add_subcommand("oracle", "Single-user closed form against the solver");
  oracle_opts.attach(*oracle);
  oracle->add_option("--max-rel-error", oracle_tol, "tolerance on the relative power error");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) {
      const auto cfg = run_opts.resolve(*run);
      const auto result = dmabf::run_experiment(cfg);
      if (run_format != "json") emit(run_opts.out, ".csv", dmabf::records_to_csv(result.records));
      if (run_format != "csv") emit(run_opts.out, ".json", dmabf::experiment_to_json(result));
      print_summary(result);
      return any_failed(result.records) ? kExitSolver : kExitOk;
    }
    if (sw->parsed()) {
      const auto cfg = sweep_opts.resolve(*sw);
      const auto result = dmabf::sweep(cfg, dmabf::sweep_axis_from_string(axis), parse_values(values_text));
      emit(sweep_opts.out, ".csv", dmabf::sweep_to_csv(result));
      std::vector<dmabf::RunRecord> all;
      for (const auto& p : result.points) all.insert(all.end(), p.records.begin(), p.records.end());
      if (!records_path.empty()) dmabf::write_text_file(records_path, dmabf::records_to_csv(all));
      return any_failed(all) ? kExitSolver : kExitOk;
    }
    if (oracle->parsed()) {
      const auto cfg = oracle_opts.resolve(*oracle);
      const auto rows = dmabf::single_user_oracle(cfg);
      emit(oracle_opts.out, ".csv", dmabf::oracle_to_csv(rows));
      double worst = 0.0;
      for (const auto& r : rows) worst = std::max(worst, std::isnan(r.relative_error) ? 1.0 : r.relative_error);
      std::fprintf(stderr, "worst relative error %.3e over %zu draws\n", worst, rows.size());
      return worst <= oracle_tol ? kExitOk : kExitSolver;
    }
  } catch (const dmabf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}
