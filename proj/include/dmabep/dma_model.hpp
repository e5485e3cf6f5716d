#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace dmabep {

using cd = std::complex<double>;

/// Planar DMA: `n_microstrips` waveguides, each feeding `n_elements_per_strip`
/// radiating elements. All strips share the same attenuation and wavenumber.
struct DmaGeometry {
  std::size_t n_microstrips = 1;          // N_d
  std::size_t n_elements_per_strip = 1;   // N_e
  double attenuation = 0.0;               // 1/m
  double wavenumber = 1.0;                // 1/m
  double element_spacing = 1.0;           // m, between adjacent elements
  double port_offset = 0.0;               // m, distance of the first element from the port

  std::size_t n_total() const { return n_microstrips * n_elements_per_strip; }

  /// Row of element `l` (0-based) of strip `i` (0-based) in H, Q and the mask.
  std::size_t index(std::size_t strip, std::size_t element) const {
    return strip * n_elements_per_strip + element;
  }

  /// Distance of element `l` (0-based) from the strip's input port.
  double distance_from_port(std::size_t element) const {
    return port_offset + static_cast<double>(element) * element_spacing;
  }

  /// Throws std::invalid_argument if any field is out of range.
  void validate() const;
};

/// Diagonal of H: propagation coefficient of each element, element order (i-1)N_e+l.
struct PropagationMatrix {
  Eigen::VectorXcd diagonal;

  std::size_t size() const { return static_cast<std::size_t>(diagonal.size()); }
  Eigen::MatrixXcd dense() const { return diagonal.asDiagonal(); }
};

/// Binary N x N_d block pattern: element rows of strip i feed column i only.
struct MaskMatrix {
  Eigen::MatrixXd entries;
};

/// Block-structured N x N_d matrix of Lorentzian weights. The phases are the
/// canonical parameters; `entries` is always derived from them.
class WeightMatrix {
 public:
  WeightMatrix() = default;

  /// Block layout with N / n_microstrips consecutive rows per strip. Throws
  /// std::invalid_argument if the phase count is not a positive multiple.
  static WeightMatrix from_phases(std::size_t n_microstrips, const Eigen::VectorXd& phases);

  const Eigen::MatrixXcd& entries() const { return entries_; }
  const Eigen::VectorXd& phases() const { return phases_; }
  std::size_t n_rows() const { return static_cast<std::size_t>(entries_.rows()); }
  std::size_t n_cols() const { return static_cast<std::size_t>(entries_.cols()); }

 private:
  Eigen::MatrixXcd entries_;
  Eigen::VectorXd phases_;
};

/// e^{-distance (attenuation + j wavenumber)}.
cd propagation_coefficient(double attenuation, double wavenumber, double distance);

PropagationMatrix build_propagation_matrix(const DmaGeometry& geom);

/// Point (j + e^{j phase}) / 2 on the Lorentzian circle centred at j/2, radius 1/2.
cd lorentzian_weight(double phase);

/// Inverse of lorentzian_weight for a point on (or near) the circle, in [0, 2pi).
double lorentzian_phase(cd weight);

/// Distance of `q` from the Lorentzian circle, | |q - j/2| - 1/2 |.
double lorentzian_residual(cd q);

/// Builds Q from one phase per element. Throws std::invalid_argument on a
/// length mismatch.
WeightMatrix build_weight_matrix(const DmaGeometry& geom, const Eigen::VectorXd& phases);

MaskMatrix build_mask(const DmaGeometry& geom);

/// t = H Q s. Throws std::invalid_argument on dimension mismatch.
Eigen::VectorXcd dma_transmit(const PropagationMatrix& H, const Eigen::MatrixXcd& Q,
                              const Eigen::VectorXcd& s);

}  // namespace dmabep
