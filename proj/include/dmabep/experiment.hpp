#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dmabep/bep_core.hpp"
#include "dmabep/channel_model.hpp"
#include "dmabep/pgm_optimizer.hpp"

namespace dmabep {

/// Simulation setup. Defaults describe a 28 GHz link with 10-element
/// microstrips; the sweep is trimmed to desk scale (50 realizations).
struct ExperimentConfig {
  double carrier_frequency = 28e9;            // Hz
  double noise_variance_db = -105.0;          // sigma^2 in dB(W)
  std::size_t n_elements_per_strip = 10;
  double element_spacing_wavelengths = 0.5;
  double strip_spacing_wavelengths = 0.5;
  double rx_spacing_wavelengths = 0.5;
  double attenuation = 0.6;                   // 1/m
  double wavenumber = 827.67;                 // 1/m
  std::size_t n_paths = 3;
  bool path_phase = false;
  bool unit_norm_responses = true;
  std::vector<std::size_t> alphabet_sizes{4, 16};
  std::vector<std::size_t> microstrip_counts{2, 3};
  std::size_t n_rx = 0;                       // 0: one receive antenna per microstrip
  std::size_t n_realizations = 50;
  std::uint64_t master_seed = 1;
  std::size_t mc_trials = 100000;             // 0 disables bound validation
  std::size_t workers = 1;
  std::size_t vector_budget = kDefaultVectorBudget;
  PgmConfig pgm;

  double wavelength() const { return kSpeedOfLight / carrier_frequency; }
  double noise_variance() const;
  std::size_t receive_antennas(std::size_t n_microstrips) const {
    return n_rx == 0 ? n_microstrips : n_rx;
  }
  DmaGeometry geometry(std::size_t n_microstrips) const;
  ChannelOptions channel_options() const;

  /// Throws std::invalid_argument describing the first bad field.
  void validate() const;
};

/// Sets one field by its config-file key. Throws std::invalid_argument for an
/// unknown key or an unparsable value.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Reads `key = value` lines; `#` starts a comment. Throws std::invalid_argument
/// with the line number on malformed input.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {});

/// parse_config on a file. Throws IoError if it cannot be opened.
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

struct RunRecord {
  std::size_t alphabet_size = 0;
  std::size_t n_microstrips = 0;
  std::size_t realization = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double objective = 0.0;
  double bep_bound = 0.0;
  std::size_t iterations = 0;
  std::size_t i_q = 0;
  std::size_t i_p = 0;
  double wall_ms = 0.0;
  std::optional<double> mc_ber;
  std::optional<double> mc_stderr;
};

struct CellAggregate {
  std::size_t alphabet_size = 0;
  std::size_t n_microstrips = 0;
  double mean_bound = 0.0;
  double median_bound = 0.0;
  std::size_t n_ok = 0;
};

struct ExperimentResult {
  std::vector<RunRecord> records;      // ordered by (cell, realization)
  std::vector<CellAggregate> aggregates;
};

struct McEstimate {
  double ber = 0.0;
  double std_error = 0.0;
  std::uint64_t bit_errors = 0;
  std::uint64_t bits = 0;
};

/// Channel seed of a realization; shared by every cell of a sweep.
std::uint64_t realization_seed(std::uint64_t master_seed, std::size_t realization);

/// Seed of the optimizer start point (and the Monte Carlo stream) for one cell.
std::uint64_t cell_stream_seed(std::uint64_t realization_seed, std::size_t alphabet_size,
                               std::size_t n_microstrips);

/// Everything needed to optimise one realization of one sweep cell.
struct Realization {
  DmaGeometry geometry;
  ObjectiveContext context;
};

Realization make_realization(const ExperimentConfig& cfg, std::size_t alphabet_size,
                             std::size_t n_microstrips, std::uint64_t channel_seed);

/// Bit-error rate of exhaustive ML detection of y = G H Q P x + n with
/// CN(0, sigma^2) noise, by simulation.
McEstimate mc_ber(const ObjectiveContext& ctx, const Eigen::MatrixXcd& Q, const Eigen::VectorXcd& p,
                  std::size_t trials, std::uint64_t seed);

/// True when the record carries no Monte Carlo estimate or the estimate is
/// within three standard errors below the bound.
bool union_bound_holds(const RunRecord& r);

/// Full sweep. A failing realization is recorded (ok = false) and skipped.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Mean and median bound of the successful records of each cell.
std::vector<CellAggregate> aggregate(const std::vector<RunRecord>& records);

/// Writes results.csv, aggregate.csv and manifest.json into `dir` (created if
/// needed). Throws IoError naming the offending path.
void emit_results(const ExperimentResult& result, const ExperimentConfig& cfg,
                  const std::filesystem::path& dir);

/// Parses a results.csv produced by emit_results.
std::vector<RunRecord> read_results_csv(const std::filesystem::path& path);

/// Formats a double with 17 significant digits ("nan" for NaN).
std::string format_number(double v);

std::string version_string();

/// One instance of the analytic-vs-finite-difference gradient comparison.
struct GradientCheck {
  std::size_t n_microstrips = 0;
  std::size_t n_elements_per_strip = 0;
  std::size_t n_rx = 0;
  std::size_t alphabet_size = 0;
  double rel_error_q = 0.0;
  double rel_error_p = 0.0;
};

/// Random feasible instances cycling through (N_d, N_e, N_r, M) in
/// {(1,2,1,2), (2,3,2,4)}, compared against central differences of `step`.
std::vector<GradientCheck> run_gradient_checks(std::uint64_t seed, std::size_t n_instances,
                                               double step = 1e-6);

}  // namespace dmabep
