#include "dmabep/bep_core.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

#include "dmabep/errors.hpp"

namespace dmabep {

namespace {

// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

void check_shapes(const ObjectiveContext& ctx, const Eigen::MatrixXcd& Q, const Eigen::VectorXcd& p) {
  if (static_cast<std::size_t>(Q.rows()) != ctx.n_elements() ||
      static_cast<std::size_t>(Q.cols()) != ctx.n_streams() ||
      static_cast<std::size_t>(p.size()) != ctx.n_streams()) {
    throw std::invalid_argument("objective: Q must be " + std::to_string(ctx.n_elements()) + "x" +
                                std::to_string(ctx.n_streams()) + " and p of length " +
                                std::to_string(ctx.n_streams()));
  }
}

// Squared received distance for every representative difference vector.
Eigen::VectorXd distances(const ObjectiveContext& ctx, const Eigen::MatrixXcd& Q,
                          const Eigen::VectorXcd& p) {
  check_shapes(ctx, Q, p);
  const Eigen::MatrixXcd C = ctx.effective() * (Q * p.asDiagonal());
  const Eigen::MatrixXcd V = C * ctx.differences().deltas;
  return V.colwise().squaredNorm().transpose();
}

double gradient_coefficient(double sigma2) {
  return -1.0 / (4.0 * std::sqrt(2.0 * std::numbers::pi) * sigma2);
}

// S = sum_k w_k e^{-F_k / 4 sigma^2} (F_k / 2 sigma^2)^{-1/2} d_k d_k^H
Eigen::MatrixXcd weighted_outer_sum(const ObjectiveContext& ctx, const Eigen::VectorXd& F) {
  const double sigma2 = ctx.noise_variance();
  const DifferenceSet& ds = ctx.differences();
  Eigen::VectorXd c(F.size());
  for (Eigen::Index k = 0; k < F.size(); ++k) {
    const double Fk = F(k) < kDistanceFloor ? kDistanceFloor : F(k);
    c(k) = ds.weights(k) * std::exp(-F(k) / (4.0 * sigma2)) / std::sqrt(Fk / (2.0 * sigma2));
  }
  return ds.deltas * c.asDiagonal() * ds.deltas.adjoint();
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (!m.allFinite()) throw NumericFailure(std::string(what) + ": non-finite gradient");
}

}  // namespace

ObjectiveContext::ObjectiveContext(Eigen::MatrixXcd channel, PropagationMatrix propagation, VectorSet vset,
                                   double noise_variance)
    : channel_(std::move(channel)),
      propagation_(std::move(propagation)),
      vset_(std::move(vset)),
      noise_variance_(noise_variance) {
  if (!(noise_variance_ > 0.0) || !std::isfinite(noise_variance_)) {
    throw std::invalid_argument("ObjectiveContext: noise variance must be positive and finite");
  }
  if (channel_.cols() != propagation_.diagonal.size()) {
    throw std::invalid_argument("ObjectiveContext: channel has " + std::to_string(channel_.cols()) +
                                " columns but the DMA has " +
                                std::to_string(propagation_.diagonal.size()) + " elements");
  }
  const std::size_t n = n_elements();
  const std::size_t nd = vset_.n_streams();
  if (nd == 0 || n % nd != 0) {
    throw std::invalid_argument("ObjectiveContext: element count must be a multiple of the stream count");
  }
  differences_ = build_difference_set(vset_);
  effective_ = channel_ * propagation_.diagonal.asDiagonal();
  gram_ = effective_.adjoint() * effective_;

  const std::size_t ne = n / nd;
  mask_.entries = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(nd));
  for (std::size_t i = 0; i < nd; ++i) {
    mask_.entries.block(static_cast<Eigen::Index>(i * ne), static_cast<Eigen::Index>(i),
                        static_cast<Eigen::Index>(ne), 1)
        .setOnes();
  }
}

double gaussian_q(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double pairwise_distance(const ObjectiveContext& ctx, const Eigen::MatrixXcd& Q, const Eigen::VectorXcd& p,
                         std::size_t m, std::size_t n) {
  check_shapes(ctx, Q, p);
  const Eigen::VectorXcd delta = difference(ctx.vset(), m, n);
  return (ctx.effective() * (Q * p.cwiseProduct(delta))).squaredNorm();
}

double objective(const ObjectiveContext& ctx, const Eigen::MatrixXcd& Q, const Eigen::VectorXcd& p) {
  const Eigen::VectorXd F = distances(ctx, Q, p);
  const double two_sigma2 = 2.0 * ctx.noise_variance();
  const Eigen::VectorXd& w = ctx.differences().weights;
  CompensatedSum sum;
  for (Eigen::Index k = 0; k < F.size(); ++k) {
    sum.add(w(k) * gaussian_q(std::sqrt(F(k) / two_sigma2)));
  }
  return sum.value();
}

double objective(const ObjectiveContext& ctx, const WeightMatrix& Q, const Precoder& p) {
  return objective(ctx, Q.entries(), p.p);
}

double bound_normaliser(const VectorSet& vset) {
  const auto n_vec = static_cast<double>(vset.n_vectors());
  return n_vec * std::log2(n_vec);
}

double bep_bound(const ObjectiveContext& ctx, const Eigen::MatrixXcd& Q, const Eigen::VectorXcd& p) {
  return objective(ctx, Q, p) / bound_normaliser(ctx.vset());
}

double bep_bound(const ObjectiveContext& ctx, const WeightMatrix& Q, const Precoder& p) {
  return bep_bound(ctx, Q.entries(), p.p);
}

Gradients gradients(const ObjectiveContext& ctx, const Eigen::MatrixXcd& Q, const Eigen::VectorXcd& p) {
  const Eigen::VectorXd F = distances(ctx, Q, p);
  const Eigen::MatrixXcd S = weighted_outer_sum(ctx, F);
  const double coef = gradient_coefficient(ctx.noise_variance());

  const Eigen::MatrixXcd QP = Q * p.asDiagonal();
  const Eigen::MatrixXcd BQPS = ctx.gram() * QP * S;
  Gradients g;
  g.q = coef * BQPS * p.conjugate().asDiagonal();
  g.p = coef * (Q.adjoint() * BQPS).diagonal();
  require_finite(g.q, "grad_q");
  require_finite(g.p, "grad_p");
  return g;
}

Eigen::MatrixXcd grad_q(const ObjectiveContext& ctx, const Eigen::MatrixXcd& Q, const Eigen::VectorXcd& p) {
  const Eigen::VectorXd F = distances(ctx, Q, p);
  const Eigen::MatrixXcd S = weighted_outer_sum(ctx, F);
  Eigen::MatrixXcd g =
      gradient_coefficient(ctx.noise_variance()) * ctx.gram() * (Q * p.asDiagonal()) * S * p.conjugate().asDiagonal();
  require_finite(g, "grad_q");
  return g;
}

Eigen::VectorXcd grad_p(const ObjectiveContext& ctx, const Eigen::MatrixXcd& Q, const Eigen::VectorXcd& p) {
  const Eigen::VectorXd F = distances(ctx, Q, p);
  const Eigen::MatrixXcd S = weighted_outer_sum(ctx, F);
  Eigen::VectorXcd g = gradient_coefficient(ctx.noise_variance()) *
                       (Q.adjoint() * ctx.gram() * (Q * p.asDiagonal()) * S).diagonal();
  require_finite(g, "grad_p");
  return g;
}

Gradients finite_diff_grad(const ObjectiveFn& f, const Eigen::MatrixXcd& Q, const Eigen::VectorXcd& p,
                           const MaskMatrix& mask, double step) {
  if (!(step >= 1e-8 && step <= 1e-4)) {
    throw std::invalid_argument("finite_diff_grad: step must lie in [1e-8, 1e-4]");
  }
  if (mask.entries.rows() != Q.rows() || mask.entries.cols() != Q.cols()) {
    throw std::invalid_argument("finite_diff_grad: mask shape does not match Q");
  }
  const cd unit_re(1.0, 0.0);
  const cd unit_im(0.0, 1.0);
  auto central = [&](auto&& eval_at) {
    const double d_re = (eval_at(step * unit_re) - eval_at(-step * unit_re)) / (2.0 * step);
    const double d_im = (eval_at(step * unit_im) - eval_at(-step * unit_im)) / (2.0 * step);
    return 0.5 * cd(d_re, d_im);
  };

  Gradients g;
  g.q = Eigen::MatrixXcd::Zero(Q.rows(), Q.cols());
  g.p = Eigen::VectorXcd::Zero(p.size());
  Eigen::MatrixXcd Qw = Q;
  for (Eigen::Index c = 0; c < Q.cols(); ++c) {
    for (Eigen::Index r = 0; r < Q.rows(); ++r) {
      if (mask.entries(r, c) == 0.0) continue;
      g.q(r, c) = central([&](cd h) {
        Qw(r, c) = Q(r, c) + h;
        const double v = f(Qw, p);
        Qw(r, c) = Q(r, c);
        return v;
      });
    }
  }
  Eigen::VectorXcd pw = p;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    g.p(i) = central([&](cd h) {
      pw(i) = p(i) + h;
      const double v = f(Q, pw);
      pw(i) = p(i);
      return v;
    });
  }
  return g;
}

Gradients finite_diff_grad(const ObjectiveContext& ctx, const Eigen::MatrixXcd& Q, const Eigen::VectorXcd& p,
                           double step) {
  return finite_diff_grad([&ctx](const Eigen::MatrixXcd& q, const Eigen::VectorXcd& pp) { return objective(ctx, q, pp); },
                          Q, p, ctx.mask(), step);
}

}  // namespace dmabep
