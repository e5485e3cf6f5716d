#include "dmabep/dma_model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dmabep {

namespace {
constexpr cd kCircleCentre{0.0, 0.5};
}

void DmaGeometry::validate() const {
  if (n_microstrips == 0 || n_elements_per_strip == 0) {
    throw std::invalid_argument("DmaGeometry: strip and element counts must be positive");
  }
  if (!(attenuation >= 0.0)) {
    throw std::invalid_argument("DmaGeometry: attenuation must be >= 0");
  }
  if (!(wavenumber > 0.0)) {
    throw std::invalid_argument("DmaGeometry: wavenumber must be > 0");
  }
  if (!(element_spacing > 0.0)) {
    throw std::invalid_argument("DmaGeometry: element_spacing must be > 0");
  }
  if (!(port_offset >= 0.0)) {
    throw std::invalid_argument("DmaGeometry: port_offset must be >= 0");
  }
}

cd propagation_coefficient(double attenuation, double wavenumber, double distance) {
  return std::exp(-distance * cd(attenuation, wavenumber));
}

PropagationMatrix build_propagation_matrix(const DmaGeometry& geom) {
  geom.validate();
  PropagationMatrix H;
  H.diagonal.resize(static_cast<Eigen::Index>(geom.n_total()));
  for (std::size_t i = 0; i < geom.n_microstrips; ++i) {
    for (std::size_t l = 0; l < geom.n_elements_per_strip; ++l) {
      H.diagonal(static_cast<Eigen::Index>(geom.index(i, l))) =
          propagation_coefficient(geom.attenuation, geom.wavenumber, geom.distance_from_port(l));
    }
  }
  return H;
}

cd lorentzian_weight(double phase) {
  return 0.5 * (cd(0.0, 1.0) + std::polar(1.0, phase));
}

double lorentzian_phase(cd weight) {
  const cd u = 2.0 * weight - cd(0.0, 1.0);
  double phi = std::atan2(u.imag(), u.real());
  if (phi < 0.0) phi += 2.0 * std::numbers::pi;
  return phi;
}

double lorentzian_residual(cd q) {
  return std::abs(std::abs(q - kCircleCentre) - 0.5);
}

WeightMatrix WeightMatrix::from_phases(std::size_t n_microstrips, const Eigen::VectorXd& phases) {
  const auto n = static_cast<std::size_t>(phases.size());
  if (n_microstrips == 0 || n == 0 || n % n_microstrips != 0) {
    throw std::invalid_argument("WeightMatrix: " + std::to_string(n) +
                                " phases do not split evenly over " + std::to_string(n_microstrips) +
                                " microstrips");
  }
  const std::size_t per_strip = n / n_microstrips;
  WeightMatrix Q;
  Q.entries_ = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n_microstrips));
  Q.phases_ = phases;
  for (std::size_t row = 0; row < n; ++row) {
    const auto r = static_cast<Eigen::Index>(row);
    Q.entries_(r, static_cast<Eigen::Index>(row / per_strip)) = lorentzian_weight(phases(r));
  }
  return Q;
}

WeightMatrix build_weight_matrix(const DmaGeometry& geom, const Eigen::VectorXd& phases) {
  geom.validate();
  if (static_cast<std::size_t>(phases.size()) != geom.n_total()) {
    throw std::invalid_argument("build_weight_matrix: expected " + std::to_string(geom.n_total()) +
                                " phases, got " + std::to_string(phases.size()));
  }
  return WeightMatrix::from_phases(geom.n_microstrips, phases);
}

MaskMatrix build_mask(const DmaGeometry& geom) {
  geom.validate();
  MaskMatrix M;
  M.entries = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(geom.n_total()),
                                    static_cast<Eigen::Index>(geom.n_microstrips));
  for (std::size_t i = 0; i < geom.n_microstrips; ++i) {
    for (std::size_t l = 0; l < geom.n_elements_per_strip; ++l) {
      M.entries(static_cast<Eigen::Index>(geom.index(i, l)), static_cast<Eigen::Index>(i)) = 1.0;
    }
  }
  return M;
}

Eigen::VectorXcd dma_transmit(const PropagationMatrix& H, const Eigen::MatrixXcd& Q,
                              const Eigen::VectorXcd& s) {
  if (Q.rows() != H.diagonal.size() || Q.cols() != s.size()) {
    throw std::invalid_argument("dma_transmit: dimension mismatch (H " +
                                std::to_string(H.diagonal.size()) + ", Q " +
                                std::to_string(Q.rows()) + "x" + std::to_string(Q.cols()) +
                                ", s " + std::to_string(s.size()) + ")");
  }
  return H.diagonal.cwiseProduct(Q * s);
}

}  // namespace dmabep
