#pragma once

#include <cstddef>
#include <functional>

#include <Eigen/Dense>

#include "dmabep/dma_model.hpp"
#include "dmabep/signal_space.hpp"

namespace dmabep {

/// Diagonal precoder P = diag(p).
struct Precoder {
  Eigen::VectorXcd p;
};

/// Pairwise distances below this floor are clamped inside the gradient weights.
inline constexpr double kDistanceFloor = 1e-30;

/// Everything that stays fixed for one channel realization: G, H, the symbol
/// vectors, sigma^2, and the cached products A = G H and B = A^H A.
class ObjectiveContext {
 public:
  /// Throws std::invalid_argument on dimension mismatch or noise_variance <= 0.
  ObjectiveContext(Eigen::MatrixXcd channel, PropagationMatrix propagation, VectorSet vset,
                   double noise_variance);

  const Eigen::MatrixXcd& channel() const { return channel_; }
  const PropagationMatrix& propagation() const { return propagation_; }
  const VectorSet& vset() const { return vset_; }
  const DifferenceSet& differences() const { return differences_; }
  double noise_variance() const { return noise_variance_; }

  /// A = G H, N_r x N.
  const Eigen::MatrixXcd& effective() const { return effective_; }
  /// B = A^H A, N x N.
  const Eigen::MatrixXcd& gram() const { return gram_; }
  /// Block pattern of Q implied by N and N_d.
  const MaskMatrix& mask() const { return mask_; }

  std::size_t n_elements() const { return static_cast<std::size_t>(channel_.cols()); }
  std::size_t n_streams() const { return vset_.n_streams(); }
  std::size_t n_rx() const { return static_cast<std::size_t>(channel_.rows()); }

 private:
  Eigen::MatrixXcd channel_;
  PropagationMatrix propagation_;
  VectorSet vset_;
  DifferenceSet differences_;
  double noise_variance_;
  Eigen::MatrixXcd effective_;
  Eigen::MatrixXcd gram_;
  MaskMatrix mask_;
};

/// Wirtinger gradients with respect to Q* and p*.
struct Gradients {
  Eigen::MatrixXcd q;
  Eigen::VectorXcd p;
};

/// Gaussian tail probability, erfc(x / sqrt 2) / 2.
double gaussian_q(double x);

/// F_{m,n} = ||G H Q P (x_m - x_n)||^2. Throws std::invalid_argument for m == n.
double pairwise_distance(const ObjectiveContext& ctx, const Eigen::MatrixXcd& Q,
                         const Eigen::VectorXcd& p, std::size_t m, std::size_t n);

/// Union-bound sum f(Q, p) = sum_{m != n} D(x_m, x_n) Q(sqrt(F_{m,n} / (2 sigma^2))).
/// Accepts infeasible (Q, p).
double objective(const ObjectiveContext& ctx, const Eigen::MatrixXcd& Q, const Eigen::VectorXcd& p);
double objective(const ObjectiveContext& ctx, const WeightMatrix& Q, const Precoder& p);

/// objective / (N_vec log2 N_vec), the reportable bit-error-probability bound.
double bep_bound(const ObjectiveContext& ctx, const Eigen::MatrixXcd& Q, const Eigen::VectorXcd& p);
double bep_bound(const ObjectiveContext& ctx, const WeightMatrix& Q, const Precoder& p);

/// Normalisation N_vec log2 N_vec between objective and bep_bound.
double bound_normaliser(const VectorSet& vset);

/// Closed-form gradient with respect to Q*, dense N x N_d (not masked).
/// Throws NumericFailure if the result is not finite.
Eigen::MatrixXcd grad_q(const ObjectiveContext& ctx, const Eigen::MatrixXcd& Q, const Eigen::VectorXcd& p);

/// Closed-form gradient with respect to p*. Throws NumericFailure if not finite.
Eigen::VectorXcd grad_p(const ObjectiveContext& ctx, const Eigen::MatrixXcd& Q, const Eigen::VectorXcd& p);

/// Both gradients from one pass over the pair sum.
Gradients gradients(const ObjectiveContext& ctx, const Eigen::MatrixXcd& Q, const Eigen::VectorXcd& p);

using ObjectiveFn = std::function<double(const Eigen::MatrixXcd&, const Eigen::VectorXcd&)>;

/// Central-difference Wirtinger gradient (df/dRe + j df/dIm) / 2 of any real
/// function of (Q, p). Q is perturbed only where `mask` is one.
/// Throws std::invalid_argument unless step is in [1e-8, 1e-4].
Gradients finite_diff_grad(const ObjectiveFn& f, const Eigen::MatrixXcd& Q, const Eigen::VectorXcd& p,
                           const MaskMatrix& mask, double step);

/// finite_diff_grad applied to `objective` of `ctx`.
Gradients finite_diff_grad(const ObjectiveContext& ctx, const Eigen::MatrixXcd& Q,
                           const Eigen::VectorXcd& p, double step);

}  // namespace dmabep
