#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "wcrr3d/solvers.hpp"
#include "wcrr3d/volume.hpp"
#include "wcrr3d/wcrr_model.hpp"

namespace wcrr {

struct TrainingConfig {
  int batch_size = 12;
  int epochs = 500;
  double learning_rate = 1e-2;
  double lr_decay_per_epoch = std::pow(0.05, 1.0 / 500.0);
  double penalty_weight = 1e-6;  // mu
  int penalty_every = 5;         // penalty gradient added on every 5th step
  int power_iters = 50;
  Dims3 patch_size{12, 12, 12};
  std::uint64_t seed = 0;
  double force_sigma = -1;       // >= 0 overrides the knot assignment (off-protocol runs)
  int steps_per_epoch = 0;       // 0: ceil(dataset size / batch size)
  int checkpoint_every_epochs = 0;  // 0: final checkpoint only
};

/// AdaBelief moments over a flat parameter vector.
struct OptimizerState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-16;
  std::int64_t step_count = 0;
  RealVec m;  // first moment
  RealVec s;  // belief second moment, >= 0 elementwise

  explicit OptimizerState(size_t n_params = 0) : m(n_params, 0.0), s(n_params, 0.0) {}
};

/// One AdaBelief update:
///   m <- b1 m + (1-b1) g;  s <- b2 s + (1-b2) (g - m)^2;
///   params -= lr * mhat / (sqrt(shat) + eps)  with bias-corrected moments.
void adabelief_step(OptimizerState& state, RealVec& params, const RealVec& grads, double lr);

/// Gradient over all trainable parameters of a WcrrModel.
struct ModelGrad {
  FilterBankGrad filters;
  std::vector<double> knots;  // J x K
  double b = 0;

  void accumulate(const ModelGrad& other, double scale);
  RealVec flatten() const;
};

/// Flat parameter vector in the fixed order (conv layers, knots, b).
RealVec get_params(const WcrrModel& model);
void set_params(WcrrModel& model, const RealVec& params);
ModelGrad zero_model_grad(const WcrrModel& model);

/// x plus i.i.d. N(0, sigma^2) noise on each of the two real channels,
/// from a sequential seeded stream.
ComplexVolume corrupt(const ComplexVolume& x, double sigma, std::uint64_t seed);

struct DenoiseResult {
  ComplexVolume x;
  double fixed_point_residual = 0;  // ||x - y + grad R(x)||
  SolverTrace trace;
};

/// argmin_x 1/2||x - y||^2 + R_theta(sigma)(x) via nmAPG from x0 = y.
DenoiseResult denoise(const WcrrModel& model, const ComplexVolume& y, double sigma,
                      const SolverConfig& solver_cfg);

/// Gradient of <grad_x R_theta(x_hat), v> over theta at fixed x_hat, v;
/// chains through the conv layers, the zero-mean reparametrization, the
/// 1/||U|| normalization (via the FFT norm's singular pair), the spline
/// knots, and the shape parameter b.
ModelGrad wcrr_inner_product_theta_gradient(const WcrrModel& model, const ComplexVolume& x_hat,
                                            const ComplexVolume& v, double sigma);

/// Implicit-differentiation parameter gradient: solves
/// (I + H_R(theta, x_hat)) v = loss_grad with MINRES, then returns
/// -d<grad_x R(x_hat), v>/dtheta.
ModelGrad param_gradient(const WcrrModel& model, const ComplexVolume& y, double sigma,
                         const ComplexVolume& x_hat, const ComplexVolume& loss_grad,
                         double minres_tol = 1e-9, int minres_max_iters = 400);

struct PenaltyResult {
  double value = 0;  // mu * |<u, H u>|
  ModelGrad grad;
};

/// Power-iteration estimate of mu*||H_R(theta, x_hat)|| and its theta
/// gradient with the eigenvector held fixed (first-order eigenvalue
/// derivative; phi''' = 0 almost everywhere).
PenaltyResult hessian_penalty_gradient(const WcrrModel& model, const ComplexVolume& x_hat,
                                       double sigma, int power_iters, double mu);

struct LossRow {
  int step = 0;
  int epoch = 0;
  double loss = 0;
  double penalty = 0;
  double lr = 0;
  double wall_ms = 0;
};

struct TrainResult {
  WcrrModel model;
  std::vector<LossRow> history;
};

void write_loss_history(const std::vector<LossRow>& history, const std::string& path);

/// Denoising-task training loop: random patches, one distinct noise knot
/// per batch element, nmAPG denoise, implicit gradients, AdaBelief with
/// per-epoch learning-rate decay, Hessian-norm penalty every
/// `penalty_every` steps, and re-normalization of the filter bank after
/// every update. Deterministic for a fixed cfg.seed.
TrainResult train(const std::vector<ComplexVolume>& dataset, const WcrrModel& init,
                  const TrainingConfig& cfg, const SolverConfig& solver_cfg,
                  const std::string& checkpoint_dir = "");

}  // namespace wcrr
