#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "dmabep/dma_model.hpp"

namespace dmabep {

inline constexpr double kSpeedOfLight = 2.99792458e8;  // m/s

struct Path {
  cd gain;                 // alpha_l
  double length = 0.0;     // d_l, m
  double azimuth_tx = 0.0;
  double elevation_tx = 0.0;
  double azimuth_rx = 0.0;
};

struct PathSet {
  std::vector<Path> paths;
  double wavelength = 0.0;

  std::size_t size() const { return paths.size(); }
};

struct ChannelOptions {
  double strip_spacing_over_lambda = 0.5;
  double rx_spacing_over_lambda = 0.5;
  double min_length = 10.0;
  double max_length = 40.0;
  double min_angle = 0.5235987755982988;  // pi/6
  double max_angle = 2.6179938779914944;  // 5pi/6
  bool propagation_phase = false;         // multiply gains by e^{j 2pi d_l / lambda}
  bool unit_norm_responses = true;        // a_R / sqrt(N_r), a_T / sqrt(N) inside G
};

/// Receive ULA: entry k is e^{j 2pi s k cos(azimuth)}, unit modulus.
Eigen::VectorXcd ula_response(double azimuth, std::size_t n_antennas, double spacing_over_lambda);

/// Transmit DMA as a planar array. Element (i, l) sits at l * element_spacing
/// along its strip and i * strip_spacing across strips; unit-modulus entries.
Eigen::VectorXcd dma_response(double azimuth, double elevation, const DmaGeometry& geom,
                              double wavelength, double strip_spacing_over_lambda);

/// Draws L paths uniformly on the configured length/angle intervals.
PathSet sample_paths(std::uint64_t seed, std::size_t n_paths, double wavelength,
                     const ChannelOptions& opts = {});

/// G = sqrt(N N_r / L) sum_l alpha_l a_R a_T^H, an N_r x N matrix. By default the
/// response vectors enter with unit norm (a / sqrt(length)), so for L = 1 the
/// Frobenius norm squared is N N_r |alpha|^2.
Eigen::MatrixXcd build_channel(const PathSet& paths, const DmaGeometry& geom, std::size_t n_rx,
                               const ChannelOptions& opts = {});

}  // namespace dmabep
