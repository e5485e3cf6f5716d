#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dmabep/errors.hpp"
#include "dmabep/experiment.hpp"

namespace dmabep {

namespace {

constexpr const char* kResultsHeader =
    "m,n_d,realization,seed,objective,bep_bound,iters,i_q,i_p,wall_ms,mc_ber,mc_stderr";
constexpr const char* kAggregateHeader = "m,n_d,mean_bound,median_bound,n_ok";

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write to " + path.string() + " failed");
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(f);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw IoError("malformed number '" + s + "'");
  }
  return v;
}

nlohmann::json config_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["carrier_frequency"] = c.carrier_frequency;
  j["wavelength"] = c.wavelength();
  j["noise_variance_db"] = c.noise_variance_db;
  j["noise_variance"] = c.noise_variance();
  j["n_elements_per_strip"] = c.n_elements_per_strip;
  j["element_spacing_wavelengths"] = c.element_spacing_wavelengths;
  j["strip_spacing_wavelengths"] = c.strip_spacing_wavelengths;
  j["rx_spacing_wavelengths"] = c.rx_spacing_wavelengths;
  j["attenuation"] = c.attenuation;
  j["wavenumber"] = c.wavenumber;
  j["n_paths"] = c.n_paths;
  j["path_phase"] = c.path_phase;
  j["unit_norm_responses"] = c.unit_norm_responses;
  j["alphabet_sizes"] = c.alphabet_sizes;
  j["microstrip_counts"] = c.microstrip_counts;
  j["n_rx"] = c.n_rx;
  j["n_realizations"] = c.n_realizations;
  j["master_seed"] = c.master_seed;
  j["mc_trials"] = c.mc_trials;
  j["workers"] = c.workers;
  j["vector_budget"] = c.vector_budget;
  j["mu_init"] = c.pgm.mu_init;
  j["delta"] = c.pgm.delta;
  j["rho"] = c.pgm.rho;
  j["reinit_period"] = c.pgm.reinit_period;
  j["max_iters"] = c.pgm.max_iters;
  j["stop_tol"] = c.pgm.stop_tol;
  j["stop_window"] = c.pgm.stop_window;
  j["max_backtracks"] = c.pgm.max_backtracks;
  return j;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void emit_results(const ExperimentResult& result, const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());

  const auto results_path = dir / "results.csv";
  {
    auto out = open_for_write(results_path);
    out << kResultsHeader << '\n';
    for (const RunRecord& r : result.records) {
      out << r.alphabet_size << ',' << r.n_microstrips << ',' << r.realization << ',' << r.seed << ','
          << format_number(r.objective) << ',' << format_number(r.bep_bound) << ',' << r.iterations << ','
          << r.i_q << ',' << r.i_p << ',' << format_number(r.wall_ms) << ','
          << (r.mc_ber ? format_number(*r.mc_ber) : "") << ','
          << (r.mc_stderr ? format_number(*r.mc_stderr) : "") << '\n';
    }
    finish(out, results_path);
  }

  const auto aggregate_path = dir / "aggregate.csv";
  {
    auto out = open_for_write(aggregate_path);
    out << kAggregateHeader << '\n';
    for (const CellAggregate& a : result.aggregates) {
      out << a.alphabet_size << ',' << a.n_microstrips << ',' << format_number(a.mean_bound) << ','
          << format_number(a.median_bound) << ',' << a.n_ok << '\n';
    }
    finish(out, aggregate_path);
  }

  const auto manifest_path = dir / "manifest.json";
  {
    nlohmann::json m;
    m["code_version"] = version_string();
    m["master_seed"] = cfg.master_seed;
    m["config"] = config_json(cfg);
    m["n_records"] = result.records.size();
    nlohmann::json failures = nlohmann::json::array();
    for (const RunRecord& r : result.records) {
      if (!r.ok) {
        failures.push_back({{"m", r.alphabet_size}, {"n_d", r.n_microstrips},
                            {"realization", r.realization}, {"error", r.error}});
      }
    }
    m["failures"] = failures;
    auto out = open_for_write(manifest_path);
    out << m.dump(2) << '\n';
    finish(out, manifest_path);
  }
}

std::vector<RunRecord> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader) {
    throw IoError(path.string() + ": unexpected header");
  }
  std::vector<RunRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto f = split_csv(line);
    if (f.size() != 12) throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected 12 fields");
    RunRecord r;
    r.alphabet_size = std::stoull(f[0]);
    r.n_microstrips = std::stoull(f[1]);
    r.realization = std::stoull(f[2]);
    r.seed = std::stoull(f[3]);
    r.objective = to_double(f[4]);
    r.bep_bound = to_double(f[5]);
    r.ok = !std::isnan(r.objective);
    r.iterations = std::stoull(f[6]);
    r.i_q = std::stoull(f[7]);
    r.i_p = std::stoull(f[8]);
    r.wall_ms = to_double(f[9]);
    if (!f[10].empty()) r.mc_ber = to_double(f[10]);
    if (!f[11].empty()) r.mc_stderr = to_double(f[11]);
    out.push_back(r);
  }
  return out;
}

}  // namespace dmabep
