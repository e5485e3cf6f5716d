#include "dmabep/channel_model.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace dmabep {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

Eigen::VectorXcd ula_response(double azimuth, std::size_t n_antennas, double spacing_over_lambda) {
  if (n_antennas == 0) throw std::invalid_argument("ula_response: n_antennas must be >= 1");
  Eigen::VectorXcd a(static_cast<Eigen::Index>(n_antennas));
  const double step = kTwoPi * spacing_over_lambda * std::cos(azimuth);
  for (std::size_t k = 0; k < n_antennas; ++k) {
    a(static_cast<Eigen::Index>(k)) = std::polar(1.0, step * static_cast<double>(k));
  }
  return a;
}

Eigen::VectorXcd dma_response(double azimuth, double elevation, const DmaGeometry& geom,
                              double wavelength, double strip_spacing_over_lambda) {
  geom.validate();
  if (!(wavelength > 0.0)) throw std::invalid_argument("dma_response: wavelength must be > 0");
  const double along = geom.element_spacing / wavelength * std::sin(elevation) * std::sin(azimuth);
  const double across = strip_spacing_over_lambda * std::cos(elevation);
  Eigen::VectorXcd a(static_cast<Eigen::Index>(geom.n_total()));
  for (std::size_t i = 0; i < geom.n_microstrips; ++i) {
    for (std::size_t l = 0; l < geom.n_elements_per_strip; ++l) {
      const double phase = kTwoPi * (along * static_cast<double>(l) + across * static_cast<double>(i));
      a(static_cast<Eigen::Index>(geom.index(i, l))) = std::polar(1.0, phase);
    }
  }
  return a;
}

PathSet sample_paths(std::uint64_t seed, std::size_t n_paths, double wavelength,
                     const ChannelOptions& opts) {
  if (n_paths == 0) throw std::invalid_argument("sample_paths: need at least one path");
  if (!(wavelength > 0.0)) throw std::invalid_argument("sample_paths: wavelength must be > 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> length(opts.min_length, opts.max_length);
  std::uniform_real_distribution<double> angle(opts.min_angle, opts.max_angle);

  PathSet set;
  set.wavelength = wavelength;
  set.paths.reserve(n_paths);
  for (std::size_t l = 0; l < n_paths; ++l) {
    Path p;
    p.length = length(rng);
    p.azimuth_tx = angle(rng);
    p.elevation_tx = angle(rng);
    p.azimuth_rx = angle(rng);
    const double magnitude = wavelength / (4.0 * std::numbers::pi * p.length);
    p.gain = opts.propagation_phase ? std::polar(magnitude, kTwoPi * p.length / wavelength)
                                    : cd(magnitude, 0.0);
    set.paths.push_back(p);
  }
  return set;
}

Eigen::MatrixXcd build_channel(const PathSet& paths, const DmaGeometry& geom, std::size_t n_rx,
                               const ChannelOptions& opts) {
  if (paths.size() == 0) throw std::invalid_argument("build_channel: empty path set");
  if (n_rx == 0) throw std::invalid_argument("build_channel: n_rx must be >= 1");
  const auto n = static_cast<double>(geom.n_total());
  const auto nr = static_cast<double>(n_rx);
  double scale = std::sqrt(n * nr / static_cast<double>(paths.size()));
  if (opts.unit_norm_responses) scale /= std::sqrt(n * nr);

  Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n_rx),
                                              static_cast<Eigen::Index>(geom.n_total()));
  for (const Path& p : paths.paths) {
    const Eigen::VectorXcd a_r = ula_response(p.azimuth_rx, n_rx, opts.rx_spacing_over_lambda);
    const Eigen::VectorXcd a_t = dma_response(p.azimuth_tx, p.elevation_tx, geom, paths.wavelength,
                                              opts.strip_spacing_over_lambda);
    G.noalias() += p.gain * a_r * a_t.adjoint();
  }
  return scale * G;
}

}  // namespace dmabep
