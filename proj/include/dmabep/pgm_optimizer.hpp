#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dmabep/bep_core.hpp"
#include "dmabep/dma_model.hpp"

namespace dmabep {

struct PgmConfig {
  double mu_init = 1000.0;
  double delta = 1e-3;            // Armijo sufficient-decrease constant
  double rho = 0.5;               // backtracking factor
  std::size_t reinit_period = 50; // step sizes return to mu_init this often
  std::size_t max_iters = 500;
  double stop_tol = 1e-6;         // relative decrease regarded as no progress
  std::size_t stop_window = 10;   // consecutive no-progress iterations before stopping
  std::size_t max_backtracks = 60;
  std::uint64_t rng_seed = 0;

  /// Throws std::invalid_argument for out-of-range values.
  void validate() const;
};

struct TraceRecord {
  std::size_t iter = 0;
  double objective = 0.0;
  double mu1 = 0.0;
  double mu2 = 0.0;
  std::size_t ls_steps_q = 0;
  std::size_t ls_steps_p = 0;
};

/// Coarse operation tallies. Complex multiplications are counted per matrix
/// product from its dimensions, not per arithmetic instruction.
struct OpCounters {
  std::size_t line_search_q = 0;  // I_Q: objective evaluations inside Q line searches
  std::size_t line_search_p = 0;  // I_P: objective evaluations inside p line searches
  std::size_t objective_evals = 0;
  std::size_t gradient_evals = 0;
  std::uint64_t complex_mults = 0;
};

enum class StopReason { kMaxIters, kConverged, kStalled };

std::string_view to_string(StopReason r);

struct PgmState {
  WeightMatrix Q;
  Precoder p;
  double objective = 0.0;
  std::size_t iter = 0;
  double mu1 = 0.0;
  double mu2 = 0.0;
  OpCounters counters;
  std::vector<TraceRecord> trace;
  StopReason stop_reason = StopReason::kMaxIters;
};

struct StepOutcome {
  bool accepted = false;
  std::size_t evaluations = 0;  // l_n + 1 when accepted
};

/// Nearest point of the Lorentzian circle for every entry where `mask` is one;
/// all other entries become zero. The circle centre itself maps to phase 0.
/// Throws std::invalid_argument if `mask` is not the block pattern of Q.
WeightMatrix project_lorentzian(const Eigen::MatrixXcd& Qraw, const MaskMatrix& mask);

/// sqrt(N_d) p / ||H Q diag(p)||. Throws DegenerateInput if the norm is zero.
Precoder project_power(const Eigen::VectorXcd& praw, const PropagationMatrix& H, const Eigen::MatrixXcd& Q);

/// ||H Q diag(p)||_F^2.
double transmit_power(const PropagationMatrix& H, const Eigen::MatrixXcd& Q, const Eigen::VectorXcd& p);

/// Masked gradient of Q -> f(Q, c(Q) p) with c(Q) = sqrt(N_d) / ||H Q diag(p)||,
/// at a feasible (Q, p): G_Q - Re(p^H G_p) / N_d * |h_r|^2 |p_i|^2 Q_ri.
Eigen::MatrixXcd reduced_grad_q(const ObjectiveContext& ctx, const Eigen::MatrixXcd& Q, const Eigen::VectorXcd& p);

/// One masked projected-gradient step on Q with backtracking from state.mu1.
/// The direction is the gradient of Q -> f(Q, c(Q) p), with c(Q) the power
/// rescaling of p. Each trial is the Lorentzian projection with p rescaled for
/// that trial Q; the Armijo test is against ||Q_trial - Q||^2.
/// On failure after max_backtracks trials the state is left unchanged.
StepOutcome step_q(PgmState& state, const ObjectiveContext& ctx, const PgmConfig& config);

/// Projected-gradient step on p with backtracking from state.mu2.
StepOutcome step_p(PgmState& state, const ObjectiveContext& ctx, const PgmConfig& config);

/// Random feasible starting point drawn from config.rng_seed.
PgmState initial_state(const ObjectiveContext& ctx, const DmaGeometry& geom, const PgmConfig& config);

/// Called with the state after every completed iteration.
using IterationObserver = std::function<void(const PgmState&)>;

/// Alternating Q / p steps until max_iters, sustained stagnation, or a stall in
/// both blocks. The returned trace starts with the initial point (iter 0).
PgmState optimize(const ObjectiveContext& ctx, const DmaGeometry& geom, const PgmConfig& config,
                  const IterationObserver& observer = {});

}  // namespace dmabep
