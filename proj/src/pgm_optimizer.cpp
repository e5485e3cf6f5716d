#include "dmabep/pgm_optimizer.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "dmabep/errors.hpp"

namespace dmabep {

namespace {

constexpr cd kCircleCentre{0.0, 0.5};
constexpr int kMaxInitAttempts = 100;

struct Dims {
  std::uint64_t n, nd, nr, k;
};

Dims dims_of(const ObjectiveContext& ctx) {
  return {ctx.n_elements(), ctx.n_streams(), ctx.n_rx(), ctx.differences().size()};
}

// A Q P, then one N_r x N_d product and a norm per difference vector.
std::uint64_t objective_cost(const Dims& d) {
  return d.nr * d.n + d.nr * d.nd + d.k * (d.nr * d.nd + d.nr);
}

// Distances, the N_d x N_d outer-product sum, and B Q P S P^H plus its diagonal for p.
std::uint64_t gradient_cost(const Dims& d) {
  return objective_cost(d) + d.k * d.nd * d.nd + d.n * d.n * d.nd + 2 * d.n * d.nd * d.nd + d.n * d.nd;
}

bool is_block_mask(const MaskMatrix& mask, Eigen::Index rows, Eigen::Index cols) {
  if (mask.entries.rows() != rows || mask.entries.cols() != cols || cols == 0 || rows % cols != 0) {
    return false;
  }
  const Eigen::Index per_strip = rows / cols;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (mask.entries(r, c) != (r / per_strip == c ? 1.0 : 0.0)) return false;
    }
  }
  return true;
}

double squared_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a - b).squaredNorm();
}

}  // namespace

Eigen::MatrixXcd reduced_grad_q(const ObjectiveContext& ctx, const Eigen::MatrixXcd& Q, const Eigen::VectorXcd& p) {
  const Gradients g = gradients(ctx, Q, p);
  const double scale = (p.adjoint() * g.p)(0).real() / static_cast<double>(p.size());
  const Eigen::VectorXd h2 = ctx.propagation().diagonal.cwiseAbs2();
  const Eigen::VectorXd p2 = p.cwiseAbs2();
  Eigen::MatrixXcd power_grad = h2.asDiagonal() * Q * p2.asDiagonal();
  return ctx.mask().entries.cast<cd>().cwiseProduct(g.q - scale * power_grad);
}

void PgmConfig::validate() const {
  if (!(mu_init > 0.0)) throw std::invalid_argument("PgmConfig: mu_init must be > 0");
  if (!(delta > 0.0)) throw std::invalid_argument("PgmConfig: delta must be > 0");
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("PgmConfig: rho must lie in (0, 1)");
  if (reinit_period == 0) throw std::invalid_argument("PgmConfig: reinit_period must be >= 1");
  if (!(stop_tol >= 0.0)) throw std::invalid_argument("PgmConfig: stop_tol must be >= 0");
  if (stop_window == 0) throw std::invalid_argument("PgmConfig: stop_window must be >= 1");
  if (max_backtracks == 0) throw std::invalid_argument("PgmConfig: max_backtracks must be >= 1");
}

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::kMaxIters: return "max_iters";
    case StopReason::kConverged: return "converged";
    case StopReason::kStalled: return "stalled";
  }
  return "unknown";
}

WeightMatrix project_lorentzian(const Eigen::MatrixXcd& Qraw, const MaskMatrix& mask) {
  if (!is_block_mask(mask, Qraw.rows(), Qraw.cols())) {
    throw std::invalid_argument("project_lorentzian: mask is not the block pattern of a " +
                                std::to_string(Qraw.rows()) + "x" + std::to_string(Qraw.cols()) + " Q");
  }
  const Eigen::Index per_strip = Qraw.rows() / Qraw.cols();
  Eigen::VectorXd phases(Qraw.rows());
  for (Eigen::Index r = 0; r < Qraw.rows(); ++r) {
    const cd offset = Qraw(r, r / per_strip) - kCircleCentre;
    if (offset == cd(0.0, 0.0)) {
      phases(r) = 0.0;
      continue;
    }
    // e^{j phi} = 2 q - j, and the nearest circle point lies along the ray through q.
    double phi = std::arg(offset);
    if (phi < 0.0) phi += 2.0 * std::numbers::pi;
    phases(r) = phi;
  }
  return WeightMatrix::from_phases(static_cast<std::size_t>(Qraw.cols()), phases);
}

double transmit_power(const PropagationMatrix& H, const Eigen::MatrixXcd& Q, const Eigen::VectorXcd& p) {
  if (Q.rows() != H.diagonal.size() || Q.cols() != p.size()) {
    throw std::invalid_argument("transmit_power: dimension mismatch");
  }
  return (H.diagonal.asDiagonal() * Q * p.asDiagonal()).squaredNorm();
}

Precoder project_power(const Eigen::VectorXcd& praw, const PropagationMatrix& H, const Eigen::MatrixXcd& Q) {
  const double power = transmit_power(H, Q, praw);
  if (!(power > 0.0) || !std::isfinite(power)) {
    throw DegenerateInput("project_power: ||H Q diag(p)|| is zero or not finite");
  }
  const double nd = static_cast<double>(praw.size());
  return Precoder{praw * (std::sqrt(nd) / std::sqrt(power))};
}

StepOutcome step_q(PgmState& state, const ObjectiveContext& ctx, const PgmConfig& config) {
  const Dims d = dims_of(ctx);
  const Eigen::MatrixXcd& Q = state.Q.entries();
  const Eigen::MatrixXcd direction = reduced_grad_q(ctx, Q, state.p.p);
  ++state.counters.gradient_evals;
  state.counters.complex_mults += gradient_cost(d) + d.n * d.nd;

  double mu = state.mu1;
  StepOutcome out;
  for (std::size_t l = 0; l < config.max_backtracks; ++l, mu *= config.rho) {
    const Eigen::MatrixXcd moved = Q - mu * direction;
    const bool still = moved == Q;
    WeightMatrix trial = still ? state.Q : project_lorentzian(moved, ctx.mask());
    Precoder p_trial;
    try {
      p_trial = still ? state.p : project_power(state.p.p, ctx.propagation(), trial.entries());
    } catch (const DegenerateInput&) {
      continue;
    }
    const double f_trial = objective(ctx, trial.entries(), p_trial.p);
    ++out.evaluations;
    ++state.counters.line_search_q;
    ++state.counters.objective_evals;
    state.counters.complex_mults += objective_cost(d);
    if (f_trial <= state.objective - config.delta * squared_distance(trial.entries(), Q)) {
      state.Q = std::move(trial);
      state.p = std::move(p_trial);
      state.objective = f_trial;
      state.mu1 = mu;
      out.accepted = true;
      return out;
    }
  }
  return out;
}

StepOutcome step_p(PgmState& state, const ObjectiveContext& ctx, const PgmConfig& config) {
  const Dims d = dims_of(ctx);
  const Eigen::MatrixXcd& Q = state.Q.entries();
  const Eigen::VectorXcd direction = grad_p(ctx, Q, state.p.p);
  ++state.counters.gradient_evals;
  state.counters.complex_mults += gradient_cost(d);

  double mu = state.mu2;
  StepOutcome out;
  for (std::size_t l = 0; l < config.max_backtracks; ++l, mu *= config.rho) {
    const Eigen::VectorXcd moved = state.p.p - mu * direction;
    Precoder trial;
    try {
      trial = moved == state.p.p ? state.p : project_power(moved, ctx.propagation(), Q);
    } catch (const DegenerateInput&) {
      continue;
    }
    const double f_trial = objective(ctx, Q, trial.p);
    ++out.evaluations;
    ++state.counters.line_search_p;
    ++state.counters.objective_evals;
    state.counters.complex_mults += objective_cost(d);
    if (f_trial <= state.objective - config.delta * (trial.p - state.p.p).squaredNorm()) {
      state.p = std::move(trial);
      state.objective = f_trial;
      state.mu2 = mu;
      out.accepted = true;
      return out;
    }
  }
  return out;
}

PgmState initial_state(const ObjectiveContext& ctx, const DmaGeometry& geom, const PgmConfig& config) {
  config.validate();
  geom.validate();
  if (geom.n_total() != ctx.n_elements() || geom.n_microstrips != ctx.n_streams()) {
    throw std::invalid_argument("optimize: geometry does not match the objective context");
  }
  std::mt19937_64 rng(config.rng_seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));

  const auto n = static_cast<Eigen::Index>(geom.n_total());
  const auto nd = static_cast<Eigen::Index>(geom.n_microstrips);
  for (int attempt = 0; attempt < kMaxInitAttempts; ++attempt) {
    Eigen::VectorXd phases(n);
    for (Eigen::Index r = 0; r < n; ++r) phases(r) = phase(rng);
    Eigen::VectorXcd p(nd);
    for (Eigen::Index i = 0; i < nd; ++i) p(i) = cd(normal(rng), normal(rng));

    PgmState state;
    state.Q = build_weight_matrix(geom, phases);
    try {
      state.p = project_power(p, ctx.propagation(), state.Q.entries());
    } catch (const DegenerateInput&) {
      continue;
    }
    state.objective = objective(ctx, state.Q.entries(), state.p.p);
    ++state.counters.objective_evals;
    state.counters.complex_mults += objective_cost(dims_of(ctx));
    state.mu1 = state.mu2 = config.mu_init;
    state.trace.push_back({0, state.objective, state.mu1, state.mu2, 0, 0});
    return state;
  }
  throw DegenerateInput("optimize: could not draw a feasible starting point");
}

PgmState optimize(const ObjectiveContext& ctx, const DmaGeometry& geom, const PgmConfig& config,
                  const IterationObserver& observer) {
  PgmState state = initial_state(ctx, geom, config);
  std::size_t quiet = 0;
  state.stop_reason = StopReason::kMaxIters;
  for (std::size_t it = 1; it <= config.max_iters; ++it) {
    if ((it - 1) % config.reinit_period == 0) {
      state.mu1 = config.mu_init;
      state.mu2 = config.mu_init;
    }
    const double f_before = state.objective;
    const StepOutcome q = step_q(state, ctx, config);
    const StepOutcome p = step_p(state, ctx, config);
    state.iter = it;
    state.trace.push_back({it, state.objective, state.mu1, state.mu2, q.evaluations, p.evaluations});
    if (observer) observer(state);

    if (!q.accepted && !p.accepted) {
      state.stop_reason = StopReason::kStalled;
      break;
    }
    const double rel = f_before > 0.0 ? (f_before - state.objective) / f_before : 0.0;
    quiet = rel < config.stop_tol ? quiet + 1 : 0;
    if (quiet >= config.stop_window) {
      state.stop_reason = StopReason::kConverged;
      break;
    }
  }
  return state;
}

}  // namespace dmabep
