#include "dmabep/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dmabep/errors.hpp"

namespace dmabep {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_integer(const std::string& key, const std::string& value) {
  T out{};
  const std::string v = trim(value);
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw std::invalid_argument("config: '" + key + "' expects an unsigned integer, got '" + value + "'");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (v.empty() || used != v.size()) {
    throw std::invalid_argument("config: '" + key + "' expects a number, got '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("config: '" + key + "' expects true/false, got '" + value + "'");
}

std::vector<std::size_t> parse_list(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_integer<std::size_t>(key, item));
  if (out.empty()) throw std::invalid_argument("config: '" + key + "' expects a comma-separated list");
  return out;
}

RunRecord run_one(const ExperimentConfig& cfg, std::size_t M, std::size_t nd, std::size_t index) {
  RunRecord rec;
  rec.alphabet_size = M;
  rec.n_microstrips = nd;
  rec.realization = index;
  rec.seed = realization_seed(cfg.master_seed, index);
  const auto start = std::chrono::steady_clock::now();
  try {
    const Realization r = make_realization(cfg, M, nd, rec.seed);
    PgmConfig pgm = cfg.pgm;
    pgm.rng_seed = cell_stream_seed(rec.seed, M, nd);
    const PgmState state = optimize(r.context, r.geometry, pgm);
    rec.objective = state.objective;
    rec.bep_bound = state.objective / bound_normaliser(r.context.vset());
    rec.iterations = state.iter;
    rec.i_q = state.counters.line_search_q;
    rec.i_p = state.counters.line_search_p;
    if (cfg.mc_trials > 0 && index == 0) {
      const McEstimate mc = mc_ber(r.context, state.Q.entries(), state.p.p, cfg.mc_trials, ~pgm.rng_seed);
      rec.mc_ber = mc.ber;
      rec.mc_stderr = mc.std_error;
    }
    rec.ok = true;
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
    rec.objective = std::numeric_limits<double>::quiet_NaN();
    rec.bep_bound = std::numeric_limits<double>::quiet_NaN();
  }
  rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

}  // namespace

double ExperimentConfig::noise_variance() const { return std::pow(10.0, noise_variance_db / 10.0); }

DmaGeometry ExperimentConfig::geometry(std::size_t n_microstrips) const {
  DmaGeometry g;
  g.n_microstrips = n_microstrips;
  g.n_elements_per_strip = n_elements_per_strip;
  g.attenuation = attenuation;
  g.wavenumber = wavenumber;
  g.element_spacing = element_spacing_wavelengths * wavelength();
  return g;
}

ChannelOptions ExperimentConfig::channel_options() const {
  ChannelOptions o;
  o.strip_spacing_over_lambda = strip_spacing_wavelengths;
  o.rx_spacing_over_lambda = rx_spacing_wavelengths;
  o.propagation_phase = path_phase;
  o.unit_norm_responses = unit_norm_responses;
  return o;
}

void ExperimentConfig::validate() const {
  if (!(carrier_frequency > 0.0)) throw std::invalid_argument("config: carrier_frequency must be > 0");
  if (!std::isfinite(noise_variance_db)) throw std::invalid_argument("config: noise_variance_db must be finite");
  if (n_elements_per_strip == 0) throw std::invalid_argument("config: n_elements_per_strip must be >= 1");
  if (!(element_spacing_wavelengths > 0.0)) throw std::invalid_argument("config: element_spacing_wavelengths must be > 0");
  if (!(attenuation >= 0.0)) throw std::invalid_argument("config: attenuation must be >= 0");
  if (!(wavenumber > 0.0)) throw std::invalid_argument("config: wavenumber must be > 0");
  if (n_paths == 0) throw std::invalid_argument("config: n_paths must be >= 1");
  if (alphabet_sizes.empty() || microstrip_counts.empty()) throw std::invalid_argument("config: empty sweep");
  for (auto M : alphabet_sizes) {
    if (M != 2 && M != 4 && M != 16 && M != 64) {
      throw std::invalid_argument("config: unsupported alphabet size " + std::to_string(M));
    }
  }
  for (auto nd : microstrip_counts) {
    if (nd == 0) throw std::invalid_argument("config: microstrip counts must be >= 1");
  }
  if (workers == 0) throw std::invalid_argument("config: workers must be >= 1");
  pgm.validate();
}

void apply_setting(ExperimentConfig& cfg, const std::string& raw_key, const std::string& value) {
  const std::string key = trim(raw_key);
  if (key == "carrier_frequency") cfg.carrier_frequency = parse_double(key, value);
  else if (key == "noise_variance_db") cfg.noise_variance_db = parse_double(key, value);
  else if (key == "n_elements_per_strip") cfg.n_elements_per_strip = parse_integer<std::size_t>(key, value);
  else if (key == "element_spacing_wavelengths") cfg.element_spacing_wavelengths = parse_double(key, value);
  else if (key == "strip_spacing_wavelengths") cfg.strip_spacing_wavelengths = parse_double(key, value);
  else if (key == "rx_spacing_wavelengths") cfg.rx_spacing_wavelengths = parse_double(key, value);
  else if (key == "attenuation") cfg.attenuation = parse_double(key, value);
  else if (key == "wavenumber") cfg.wavenumber = parse_double(key, value);
  else if (key == "n_paths") cfg.n_paths = parse_integer<std::size_t>(key, value);
  else if (key == "path_phase") cfg.path_phase = parse_bool(key, value);
  else if (key == "unit_norm_responses") cfg.unit_norm_responses = parse_bool(key, value);
  else if (key == "alphabet_sizes") cfg.alphabet_sizes = parse_list(key, value);
  else if (key == "microstrip_counts") cfg.microstrip_counts = parse_list(key, value);
  else if (key == "n_rx") cfg.n_rx = parse_integer<std::size_t>(key, value);
  else if (key == "n_realizations") cfg.n_realizations = parse_integer<std::size_t>(key, value);
  else if (key == "master_seed") cfg.master_seed = parse_integer<std::uint64_t>(key, value);
  else if (key == "mc_trials") cfg.mc_trials = parse_integer<std::size_t>(key, value);
  else if (key == "workers") cfg.workers = parse_integer<std::size_t>(key, value);
  else if (key == "vector_budget") cfg.vector_budget = parse_integer<std::size_t>(key, value);
  else if (key == "mu_init") cfg.pgm.mu_init = parse_double(key, value);
  else if (key == "delta") cfg.pgm.delta = parse_double(key, value);
  else if (key == "rho") cfg.pgm.rho = parse_double(key, value);
  else if (key == "reinit_period") cfg.pgm.reinit_period = parse_integer<std::size_t>(key, value);
  else if (key == "max_iters") cfg.pgm.max_iters = parse_integer<std::size_t>(key, value);
  else if (key == "stop_tol") cfg.pgm.stop_tol = parse_double(key, value);
  else if (key == "stop_window") cfg.pgm.stop_window = parse_integer<std::size_t>(key, value);
  else if (key == "max_backtracks") cfg.pgm.max_backtracks = parse_integer<std::size_t>(key, value);
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    try {
      apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  return parse_config(in, std::move(base));
}

std::uint64_t realization_seed(std::uint64_t master_seed, std::size_t realization) {
  return master_seed + realization;
}

std::uint64_t cell_stream_seed(std::uint64_t seed, std::size_t alphabet_size, std::size_t n_microstrips) {
  return splitmix64(splitmix64(seed) ^ splitmix64((static_cast<std::uint64_t>(alphabet_size) << 32) | n_microstrips));
}

Realization make_realization(const ExperimentConfig& cfg, std::size_t alphabet_size, std::size_t n_microstrips,
                             std::uint64_t channel_seed) {
  const DmaGeometry geom = cfg.geometry(n_microstrips);
  const ChannelOptions copts = cfg.channel_options();
  const PathSet paths = sample_paths(channel_seed, cfg.n_paths, cfg.wavelength(), copts);
  Eigen::MatrixXcd G = build_channel(paths, geom, cfg.receive_antennas(n_microstrips), copts);
  const Alphabet alphabet = build_alphabet(alphabet_size, n_microstrips);
  VectorSet vset = enumerate_vectors(alphabet, n_microstrips, cfg.vector_budget);
  return Realization{geom, ObjectiveContext(std::move(G), build_propagation_matrix(geom), std::move(vset),
                                            cfg.noise_variance())};
}

McEstimate mc_ber(const ObjectiveContext& ctx, const Eigen::MatrixXcd& Q, const Eigen::VectorXcd& p,
                  std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw std::invalid_argument("mc_ber: trials must be >= 1");
  const VectorSet& vset = ctx.vset();
  const auto n_vec = static_cast<Eigen::Index>(vset.n_vectors());
  const auto nr = static_cast<Eigen::Index>(ctx.n_rx());
  // Noiseless received points, one column per candidate vector.
  const Eigen::MatrixXcd R = ctx.effective() * (Q * p.asDiagonal()) * vset.vectors();
  const Eigen::RowVectorXd energy = R.colwise().squaredNorm();

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, n_vec - 1);
  std::normal_distribution<double> noise(0.0, std::sqrt(ctx.noise_variance() / 2.0));

  constexpr Eigen::Index kBlock = 256;
  McEstimate est;
  std::vector<Eigen::Index> sent(kBlock);
  Eigen::MatrixXcd Y(nr, kBlock);
  for (std::size_t done = 0; done < trials;) {
    const auto block = static_cast<Eigen::Index>(std::min<std::size_t>(kBlock, trials - done));
    for (Eigen::Index t = 0; t < block; ++t) {
      sent[static_cast<std::size_t>(t)] = pick(rng);
      for (Eigen::Index r = 0; r < nr; ++r) {
        const double re = noise(rng);
        const double im = noise(rng);
        Y(r, t) = R(r, sent[static_cast<std::size_t>(t)]) + cd(re, im);
      }
    }
    // ||y - r_k||^2 = ||y||^2 - 2 Re(r_k^H y) + ||r_k||^2
    const Eigen::MatrixXcd corr = R.adjoint() * Y.leftCols(block);
    for (Eigen::Index t = 0; t < block; ++t) {
      Eigen::Index best = 0;
      double best_metric = std::numeric_limits<double>::infinity();
      for (Eigen::Index k = 0; k < n_vec; ++k) {
        const double metric = energy(k) - 2.0 * corr(k, t).real();
        if (metric < best_metric) {
          best_metric = metric;
          best = k;
        }
      }
      est.bit_errors += static_cast<std::uint64_t>(
          vset.hamming(static_cast<std::size_t>(sent[static_cast<std::size_t>(t)]), static_cast<std::size_t>(best)));
    }
    done += static_cast<std::size_t>(block);
  }
  est.bits = static_cast<std::uint64_t>(trials) * vset.bits_per_vector();
  est.ber = static_cast<double>(est.bit_errors) / static_cast<double>(est.bits);
  est.std_error = std::sqrt(est.ber * (1.0 - est.ber) / static_cast<double>(est.bits));
  return est;
}

bool union_bound_holds(const RunRecord& r) {
  if (!r.ok || !r.mc_ber) return true;
  return *r.mc_ber <= r.bep_bound + 3.0 * r.mc_stderr.value_or(0.0);
}

std::vector<CellAggregate> aggregate(const std::vector<RunRecord>& records) {
  std::vector<CellAggregate> out;
  for (std::size_t begin = 0; begin < records.size();) {
    std::size_t end = begin;
    while (end < records.size() && records[end].alphabet_size == records[begin].alphabet_size &&
           records[end].n_microstrips == records[begin].n_microstrips) {
      ++end;
    }
    CellAggregate agg;
    agg.alphabet_size = records[begin].alphabet_size;
    agg.n_microstrips = records[begin].n_microstrips;
    std::vector<double> bounds;
    for (std::size_t i = begin; i < end; ++i) {
      if (records[i].ok) bounds.push_back(records[i].bep_bound);
    }
    agg.n_ok = bounds.size();
    if (bounds.empty()) {
      agg.mean_bound = agg.median_bound = std::numeric_limits<double>::quiet_NaN();
    } else {
      double sum = 0.0;
      for (double b : bounds) sum += b;
      agg.mean_bound = sum / static_cast<double>(bounds.size());
      std::sort(bounds.begin(), bounds.end());
      const std::size_t h = bounds.size() / 2;
      agg.median_bound = bounds.size() % 2 == 1 ? bounds[h] : 0.5 * (bounds[h - 1] + bounds[h]);
    }
    out.push_back(agg);
    begin = end;
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result;
  for (const std::size_t M : cfg.alphabet_sizes) {
    for (const std::size_t nd : cfg.microstrip_counts) {
      std::vector<RunRecord> cell(cfg.n_realizations);
      std::atomic<std::size_t> next{0};
      auto worker = [&]() {
        for (std::size_t i = next++; i < cell.size(); i = next++) cell[i] = run_one(cfg, M, nd, i);
      };
      const std::size_t n_threads = std::min(cfg.workers, cell.size());
      if (n_threads <= 1) {
        worker();
      } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
      }
      result.records.insert(result.records.end(), cell.begin(), cell.end());
    }
  }
  result.aggregates = aggregate(result.records);
  return result;
}

std::string version_string() {
#ifdef DMABEP_VERSION
  return DMABEP_VERSION;
#else
  return "unknown";
#endif
}

std::vector<GradientCheck> run_gradient_checks(std::uint64_t seed, std::size_t n_instances, double step) {
  struct Shape {
    std::size_t nd, ne, nr, M;
  };
  constexpr Shape kShapes[] = {{1, 2, 1, 2}, {2, 3, 2, 4}};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

  std::vector<GradientCheck> out;
  for (std::size_t k = 0; k < n_instances; ++k) {
    const Shape s = kShapes[k % 2];
    DmaGeometry geom;
    geom.n_microstrips = s.nd;
    geom.n_elements_per_strip = s.ne;
    geom.attenuation = 0.6;
    geom.wavenumber = 827.67;
    geom.element_spacing = 0.5 * kSpeedOfLight / 28e9;

    Eigen::MatrixXcd G(static_cast<Eigen::Index>(s.nr), static_cast<Eigen::Index>(geom.n_total()));
    for (Eigen::Index c = 0; c < G.cols(); ++c)
      for (Eigen::Index r = 0; r < G.rows(); ++r) G(r, c) = cd(normal(rng), normal(rng));
    Eigen::VectorXd phases(static_cast<Eigen::Index>(geom.n_total()));
    for (Eigen::Index r = 0; r < phases.size(); ++r) phases(r) = phase(rng);
    Eigen::VectorXcd p(static_cast<Eigen::Index>(s.nd));
    for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = cd(normal(rng), normal(rng));

    const PropagationMatrix H = build_propagation_matrix(geom);
    const WeightMatrix Q = build_weight_matrix(geom, phases);
    const Precoder pf = project_power(p, H, Q.entries());
    // Noise level chosen so that pairwise terms sit in the informative range of Q(.)
    const double sigma2 = (G * H.dense() * Q.entries() * pf.p.asDiagonal()).squaredNorm() /
                          static_cast<double>(s.nr * s.nd) / 4.0;
    const ObjectiveContext ctx(G, H, enumerate_vectors(build_alphabet(s.M, s.nd), s.nd), sigma2);

    const Gradients analytic = gradients(ctx, Q.entries(), pf.p);
    const Gradients fd = finite_diff_grad(ctx, Q.entries(), pf.p, step);
    const Eigen::MatrixXcd masked = ctx.mask().entries.cast<cd>().cwiseProduct(analytic.q);
    GradientCheck gc{s.nd, s.ne, s.nr, s.M, 0.0, 0.0};
    gc.rel_error_q = (masked - fd.q).norm() / fd.q.norm();
    gc.rel_error_p = (analytic.p - fd.p).norm() / fd.p.norm();
    out.push_back(gc);
  }
  return out;
}

}  // namespace dmabep
