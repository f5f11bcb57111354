#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dmabf/harness.hpp"

namespace dmabf {
namespace {

using nlohmann::json;

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

BeamformStatus status_from_string(const std::string& s) {
  if (s == "converged") return BeamformStatus::kConverged;
  if (s == "infeasible") return BeamformStatus::kInfeasible;
  if (s == "max_iter") return BeamformStatus::kMaxIter;
  throw std::runtime_error("unknown status '" + s + "'");
}

json record_json(const RunRecord& r) {
  json users = json::array();
  for (const auto& u : r.users) users.push_back({u.x(), u.y(), u.z()});
  return {
      {"realization", r.realization},
      {"mode", to_string(r.mode)},
      {"K", r.k},
      {"R_min", r.r_min},
      {"d_x_over_lambda", r.d_x_over_lambda},
      {"status", to_string(r.status)},
      {"tx_power_watts", optional_json(r.tx_power_watts)},
      {"tx_power_dbm", optional_json(r.tx_power_dbm)},
      {"min_sinr_margin", optional_json(r.min_sinr_margin)},
      {"achieved_sinrs", r.achieved_sinrs},
      {"users", users},
      {"iterations", r.iterations},
      {"wall_ms", r.wall_ms},
  };
}

RunRecord record_from_json(const json& j) {
  RunRecord r;
  r.realization = j.at("realization").get<int>();
  r.mode = mode_from_string(j.at("mode").get<std::string>());
  r.k = j.at("K").get<int>();
  r.r_min = j.at("R_min").get<double>();
  r.d_x_over_lambda = j.at("d_x_over_lambda").get<double>();
  r.status = status_from_string(j.at("status").get<std::string>());
  r.tx_power_watts = optional_from(j.at("tx_power_watts"));
  r.tx_power_dbm = optional_from(j.at("tx_power_dbm"));
  r.min_sinr_margin = optional_from(j.at("min_sinr_margin"));
  r.achieved_sinrs = j.at("achieved_sinrs").get<std::vector<double>>();
  for (const auto& u : j.at("users")) {
    r.users.emplace_back(u.at(0).get<double>(), u.at(1).get<double>(), u.at(2).get<double>());
  }
  r.iterations = j.at("iterations").get<int>();
  r.wall_ms = j.at("wall_ms").get<double>();
  return r;
}

json summary_json(const Summary& s) {
  json modes = json::array();
  for (const auto& m : s.modes) {
    modes.push_back({{"mode", to_string(m.mode)},
                     {"converged", m.converged},
                     {"infeasible", m.infeasible},
                     {"failed", m.failed},
                     {"mean_power_dbm", optional_json(m.mean_power_dbm)},
                     {"elements", m.elements},
                     {"dof", m.dof}});
  }
  json gaps = json::array();
  for (const auto& g : s.gaps) {
    gaps.push_back({{"a", to_string(g.a)},
                    {"b", to_string(g.b)},
                    {"paired", g.paired},
                    {"gap_db", optional_json(g.gap_db)}});
  }
  return {{"modes", modes}, {"gaps", gaps}};
}

}  // namespace

std::string records_to_csv(const std::vector<RunRecord>& records) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : records) {
    out += std::to_string(r.realization) + "," + to_string(r.mode) + "," + std::to_string(r.k) + "," +
           fmt("%.10g", r.r_min) + "," + fmt("%.10g", r.d_x_over_lambda) + "," + to_string(r.status) +
           "," + (r.tx_power_dbm ? fmt("%.12f", *r.tx_power_dbm) : "") + "," +
           (r.min_sinr_margin ? fmt("%.9e", *r.min_sinr_margin) : "") + "," +
           std::to_string(r.iterations) + "," + fmt("%.3f", r.wall_ms) + "\n";
  }
  return out;
}

std::string experiment_to_json(const ExperimentResult& result) {
  json config = json::object();
  for (const auto& [key, value] : result.config.to_map()) config[key] = value;
  config["timing"] = result.config.timing ? "on" : "off";
  json records = json::array();
  for (const auto& r : result.records) records.push_back(record_json(r));
  const json doc = {{"config", config},
                    {"config_hash", config_content_hash(result.config)},
                    {"records", records},
                    {"summary", summary_json(result.summary)}};
  return doc.dump(2) + "\n";
}

ExperimentResult experiment_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("invalid report JSON: ") + e.what());
  }
  ExperimentResult result;
  for (const auto& [key, value] : doc.at("config").items()) {
    result.config.set(key, value.get<std::string>());
  }
  if (doc.contains("config_hash") &&
      doc.at("config_hash").get<std::string>() != config_content_hash(result.config)) {
    throw std::runtime_error("report config_hash does not match its config");
  }
  for (const auto& r : doc.at("records")) result.records.push_back(record_from_json(r));
  result.summary = summarize(result.config, result.records);
  return result;
}

std::string sweep_to_csv(const SweepResult& result) {
  std::string out = to_string(result.axis) +
                    ",mode,n_rows,n_cols,dof,converged,infeasible,failed,mean_power_dbm\n";
  for (const auto& r : result.rows) {
    out += fmt("%.10g", r.value) + "," + to_string(r.mode) + "," + std::to_string(r.n_rows) + "," +
           std::to_string(r.n_cols) + "," + std::to_string(r.dof) + "," + std::to_string(r.converged) +
           "," + std::to_string(r.infeasible) + "," + std::to_string(r.failed) + "," +
           (r.mean_power_dbm ? fmt("%.12f", *r.mean_power_dbm) : "") + "\n";
  }
  return out;
}

std::string oracle_to_csv(const std::vector<OracleRow>& rows) {
  std::string out = "realization,closed_form_dbm,solver_dbm,relative_error\n";
  for (const auto& r : rows) {
    out += std::to_string(r.realization) + "," + fmt("%.12f", watts_to_dbm(r.closed_form_watts)) + "," +
           (std::isnan(r.solver_watts) ? std::string() : fmt("%.12f", watts_to_dbm(r.solver_watts))) +
           "," + fmt("%.3e", r.relative_error) + "\n";
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace dmabf
