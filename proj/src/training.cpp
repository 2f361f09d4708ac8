#include "wcrr3d/training.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "wcrr3d/potentials.hpp"
#include "wcrr3d/rng.hpp"

namespace wcrr {

void adabelief_step(OptimizerState& state, RealVec& params, const RealVec& grads, double lr) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw std::invalid_argument("adabelief_step: shape mismatch");
  state.step_count += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, double(state.step_count));
  const double bc2 = 1.0 - std::pow(state.beta2, double(state.step_count));
  for (size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
    const double diff = grads[i] - state.m[i];
    state.s[i] = state.beta2 * state.s[i] + (1.0 - state.beta2) * diff * diff;
    const double mhat = state.m[i] / bc1;
    const double shat = state.s[i] / bc2;
    params[i] -= lr * mhat / (std::sqrt(shat) + state.eps);
  }
}

void ModelGrad::accumulate(const ModelGrad& other, double scale) {
  filters.accumulate(other.filters, scale);
  for (size_t i = 0; i < knots.size(); ++i) knots[i] += scale * other.knots[i];
  b += scale * other.b;
}

RealVec ModelGrad::flatten() const {
  RealVec flat;
  for (const auto& l : filters.layers) flat.insert(flat.end(), l.begin(), l.end());
  flat.insert(flat.end(), knots.begin(), knots.end());
  flat.push_back(b);
  return flat;
}

RealVec get_params(const WcrrModel& model) {
  RealVec flat;
  for (const ConvLayer& l : model.filter_bank.layers)
    flat.insert(flat.end(), l.weights.begin(), l.weights.end());
  flat.insert(flat.end(), model.potentials.knot_values.begin(),
              model.potentials.knot_values.end());
  flat.push_back(model.potentials.b);
  return flat;
}

void set_params(WcrrModel& model, const RealVec& params) {
  size_t pos = 0;
  for (ConvLayer& l : model.filter_bank.layers) {
    std::copy(params.begin() + long(pos), params.begin() + long(pos + l.weights.size()),
              l.weights.begin());
    pos += l.weights.size();
  }
  std::copy(params.begin() + long(pos),
            params.begin() + long(pos + model.potentials.knot_values.size()),
            model.potentials.knot_values.begin());
  pos += model.potentials.knot_values.size();
  model.potentials.b = params.at(pos);
}

ModelGrad zero_model_grad(const WcrrModel& model) {
  ModelGrad g;
  g.filters = model.filter_bank.zero_grad();
  g.knots.assign(model.potentials.knot_values.size(), 0.0);
  g.b = 0;
  return g;
}

ComplexVolume corrupt(const ComplexVolume& x, double sigma, std::uint64_t seed) {
  if (sigma < 0) throw std::invalid_argument("corrupt: sigma must be >= 0");
  if (sigma == 0) return x;
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  ComplexVolume out = x;
  for (cplx& c : out.data) c += cplx(sigma * rng.gaussian(), sigma * rng.gaussian());
  return out;
}

DenoiseResult denoise(const WcrrModel& model, const ComplexVolume& y, double sigma,
                      const SolverConfig& solver_cfg) {
  const Dims3 d = y.dims;
  Objective obj;
  obj.value = [&](const RealVec& xv) {
    const ComplexVolume x = from_real_vector(xv, d);
    const ComplexVolume diff = axpy(x, -1.0, y);
    const double n = norm(diff);
    return 0.5 * n * n + wcrr_value(model, x, sigma);
  };
  obj.gradient = [&](const RealVec& xv) {
    const ComplexVolume x = from_real_vector(xv, d);
    const ComplexVolume g = axpy(wcrr_grad(model, x, sigma), 1.0, axpy(x, -1.0, y));
    return to_real_vector(g);
  };

  NmapgResult res = nmapg_minimize(obj, to_real_vector(y), solver_cfg);
  DenoiseResult out;
  out.x = from_real_vector(res.x, d);
  out.trace = std::move(res.trace);
  const ComplexVolume fp =
      axpy(wcrr_grad(model, out.x, sigma), 1.0, axpy(out.x, -1.0, y));
  out.fixed_point_residual = norm(fp);
  return out;
}

namespace {

struct ChannelScales {
  std::vector<double> alpha;
  double beta = 0;
};

ChannelScales scales_for(const WcrrModel& model, double sigma) {
  ChannelScales cs;
  cs.beta = model.potentials.beta();
  const int j_channels = model.filter_bank.feature_channels();
  cs.alpha.resize(size_t(j_channels));
  for (int j = 0; j < j_channels; ++j) cs.alpha[size_t(j)] = model.potentials.alpha(sigma, j);
  return cs;
}

/// Spread a per-channel d/d(alpha_j) into spline-knot gradients through
/// alpha_j = exp(s_{c_j}(sigma)) / (sigma + 1e-5):
/// d(alpha_j)/d(c_{j,k}) = alpha_j * w_k(sigma).
void alpha_to_knot_grads(const WcrrModel& model, double sigma, const std::vector<double>& d_alpha,
                         const std::vector<double>& alpha, std::vector<double>& knot_grads) {
  const double sc = model.potentials.clamp_sigma(sigma);
  int k0;
  double w0, w1;
  model.potentials.spline_support(sc, &k0, &w0, &w1);
  const int k_knots = model.potentials.knots;
  for (size_t j = 0; j < d_alpha.size(); ++j) {
    const double da = d_alpha[j] * alpha[j];
    knot_grads[j * size_t(k_knots) + size_t(k0)] += da * w0;
    knot_grads[j * size_t(k_knots) + size_t(k0) + 1] += da * w1;
  }
}

}  // namespace

ModelGrad wcrr_inner_product_theta_gradient(const WcrrModel& model, const ComplexVolume& x_hat,
                                            const ComplexVolume& v, double sigma) {
  const FilterBank& fb = model.filter_bank;
  const ChannelScales cs = scales_for(model, sigma);
  const double beta = cs.beta;
  const double s = fb.scale();
  const FeatureField x2 = to_feature_field(x_hat);
  const FeatureField v2 = to_feature_field(v);
  const std::int64_t n = x_hat.size();

  ModelGrad grad = zero_model_grad(model);
  std::vector<double> d_alpha(cs.alpha.size(), 0.0);
  double norm_path_coef = 0;  // accumulates dg/d||U||

  for (const Rotation& r : model.rotations.elements) {
    const FeatureField xr = rotate_field(x2, r);
    const FeatureField vr = rotate_field(v2, r);
    CascadeActivations acts_x, acts_v;
    const FeatureField feats = cascade_forward(fb, xr, &acts_x);
    const FeatureField dirs = cascade_forward(fb, vr, &acts_v);

    FeatureField cot_x(feats.dims, feats.channels);  // psi''_j(F) * G, times s
    FeatureField cot_v(feats.dims, feats.channels);  // psi'_j(F), times s
    double s_r = 0;
    for (int j = 0; j < feats.channels; ++j) {
      const double a = cs.alpha[size_t(j)];
      const double* f = feats.channel(j);
      const double* g = dirs.channel(j);
      double* c1 = cot_x.channel(j);
      double* c2 = cot_v.channel(j);
      double da = 0, db = 0;
      for (std::int64_t i = 0; i < n; ++i) {
        const double u = a * f[i];
        const double phi1 = shared_potential_d1(u, beta);
        const double phi2 = shared_potential_d2(u, beta);
        const double psi1 = phi1 / a;
        c1[i] = s * phi2 * g[i];
        c2[i] = s * psi1;
        // d(psi'_j)/d(alpha) = -phi'(u)/a^2 + phi''(u) f / a
        da += (-phi1 / (a * a) + phi2 * f[i] / a) * g[i];
        // d(psi'_j)/d(beta) = f * [|beta u| < 1]
        if (std::abs(beta * u) < 1.0) db += f[i] * g[i];
        s_r += phi2 * f[i] * g[i] + psi1 * g[i];
      }
      d_alpha[size_t(j)] += da;
      grad.b += beta * db;
    }
    cascade_param_backprop(fb, acts_x, cot_x, grad.filters);
    cascade_param_backprop(fb, acts_v, cot_v, grad.filters);
    norm_path_coef += -s * s_r;
  }

  alpha_to_knot_grads(model, sigma, d_alpha, cs.alpha, grad.knots);

  if (fb.cached_norm > 0) {
    const SpectralNormInfo info = spectral_norm_fft(fb, fb.norm_dims);
    const FilterBankGrad norm_grad = spectral_norm_param_gradient(fb, fb.norm_dims, info);
    grad.filters.accumulate(norm_grad, norm_path_coef);
  }

  const double inv = 1.0 / double(model.rotations.size());
  for (auto& l : grad.filters.layers)
    for (double& w : l) w *= inv;
  for (double& k : grad.knots) k *= inv;
  grad.b *= inv;
  return grad;
}

ModelGrad param_gradient(const WcrrModel& model, const ComplexVolume& y, double sigma,
                         const ComplexVolume& x_hat, const ComplexVolume& loss_grad,
                         double minres_tol, int minres_max_iters) {
  (void)y;
  const Dims3 d = x_hat.dims;
  auto apply = [&](const RealVec& vv) {
    const ComplexVolume v = from_real_vector(vv, d);
    const ComplexVolume hv = wcrr_hvp(model, x_hat, sigma, v);
    RealVec out = vv;
    const RealVec hvv = to_real_vector(hv);
    for (size_t i = 0; i < out.size(); ++i) out[i] += hvv[i];
    return out;
  };

  MinresResult sol = minres_solve(apply, to_real_vector(loss_grad),
                                  {minres_tol, minres_max_iters, false});
  if (!sol.converged)
    sol = minres_solve(apply, to_real_vector(loss_grad),
                       {minres_tol, 4 * minres_max_iters, false});
  if (!sol.converged)
    throw std::runtime_error("param_gradient: MINRES did not converge on (I + H) v = g");

  const ComplexVolume v = from_real_vector(sol.x, d);
  ModelGrad grad = wcrr_inner_product_theta_gradient(model, x_hat, v, sigma);
  // d(loss)/d(theta) = -d<grad R(x_hat), v>/d(theta).
  for (auto& l : grad.filters.layers)
    for (double& w : l) w = -w;
  for (double& k : grad.knots) k = -k;
  grad.b = -grad.b;
  return grad;
}

PenaltyResult hessian_penalty_gradient(const WcrrModel& model, const ComplexVolume& x_hat,
                                       double sigma, int power_iters, double mu) {
  const Dims3 d = x_hat.dims;
  const std::int64_t dim = 2 * d.count();
  auto apply = [&](const RealVec& vv) {
    return to_real_vector(wcrr_hvp(model, x_hat, sigma, from_real_vector(vv, d)));
  };
  const PowerIterResult pi = power_iteration_norm(apply, dim, power_iters, 23);

  PenaltyResult res;
  res.grad = zero_model_grad(model);
  if (pi.value == 0.0) return res;

  const ComplexVolume u = from_real_vector(pi.vector, d);
  const double lambda_signed = inner(u, wcrr_hvp(model, x_hat, sigma, u)).real();
  res.value = mu * std::abs(lambda_signed);
  const double outer = mu * (lambda_signed >= 0 ? 1.0 : -1.0);

  // theta-gradient of q = <u, H u> with u fixed:
  //   q = |G|^-1 sum_R sum_{j,n} psi''_j(F) P^2 with F = W R x_hat, P = W R u.
  const FilterBank& fb = model.filter_bank;
  const ChannelScales cs = scales_for(model, sigma);
  const double beta = cs.beta;
  const double s = fb.scale();
  const FeatureField x2 = to_feature_field(x_hat);
  const FeatureField u2 = to_feature_field(u);
  const std::int64_t n = x_hat.size();

  double norm_path_coef = 0;
  for (const Rotation& r : model.rotations.elements) {
    const FeatureField xr = rotate_field(x2, r);
    const FeatureField ur = rotate_field(u2, r);
    CascadeActivations acts_u;
    const FeatureField feats = cascade_forward(fb, xr);
    const FeatureField dirs = cascade_forward(fb, ur, &acts_u);

    FeatureField cot(dirs.dims, dirs.channels);  // 2 psi''_j(F) P, times s
    double q_r = 0, db = 0;
    for (int j = 0; j < feats.channels; ++j) {
      const double a = cs.alpha[size_t(j)];
      const double* f = feats.channel(j);
      const double* p = dirs.channel(j);
      double* c = cot.channel(j);
      for (std::int64_t i = 0; i < n; ++i) {
        const double uarg = a * f[i];
        const double phi2 = shared_potential_d2(uarg, beta);
        c[i] = s * 2.0 * phi2 * p[i];
        q_r += phi2 * p[i] * p[i];
        // d(phi''_beta)/d(beta) = [|u| < 1/beta] a.e.
        if (std::abs(uarg) < 1.0 / beta) db += p[i] * p[i];
      }
    }
    cascade_param_backprop(fb, acts_u, cot, res.grad.filters);
    res.grad.b += beta * db;
    norm_path_coef += -2.0 * s * q_r;
  }

  if (fb.cached_norm > 0) {
    const SpectralNormInfo info = spectral_norm_fft(fb, fb.norm_dims);
    const FilterBankGrad norm_grad = spectral_norm_param_gradient(fb, fb.norm_dims, info);
    res.grad.filters.accumulate(norm_grad, norm_path_coef);
  }

  const double total = outer / double(model.rotations.size());
  for (auto& l : res.grad.filters.layers)
    for (double& w : l) w *= total;
  res.grad.b *= total;
  return res;
}

void write_loss_history(const std::vector<LossRow>& history, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("write_loss_history: cannot open " + path);
  std::fprintf(f, "step,epoch,loss,penalty,lr,wall_ms\n");
  for (const LossRow& r : history)
    std::fprintf(f, "%d,%d,%.12g,%.12g,%.12g,%.3f\n", r.step, r.epoch, r.loss, r.penalty, r.lr,
                 r.wall_ms);
  std::fclose(f);
}

TrainResult train(const std::vector<ComplexVolume>& dataset, const WcrrModel& init,
                  const TrainingConfig& cfg, const SolverConfig& solver_cfg,
                  const std::string& checkpoint_dir) {
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
  if (cfg.batch_size > init.potentials.knots)
    throw std::invalid_argument("train: batch_size must be <= number of spline knots");
  for (const ComplexVolume& v : dataset) {
    if (v.dims.nx < cfg.patch_size.nx || v.dims.ny < cfg.patch_size.ny ||
        v.dims.nz < cfg.patch_size.nz)
      throw std::invalid_argument("train: patch does not fit inside a dataset volume");
  }

  const auto t_start = std::chrono::steady_clock::now();
  TrainResult result;
  result.model = init;
  if (result.model.filter_bank.cached_norm <= 0)
    result.model.filter_bank = normalize(result.model.filter_bank, cfg.patch_size);

  RealVec params = get_params(result.model);
  OptimizerState opt(params.size());
  double lr = cfg.learning_rate;
  const int steps_per_epoch =
      cfg.steps_per_epoch > 0
          ? cfg.steps_per_epoch
          : int((dataset.size() + size_t(cfg.batch_size) - 1) / size_t(cfg.batch_size));
  const int k_knots = result.model.potentials.knots;

  int global_step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (int step = 0; step < steps_per_epoch; ++step) {
      ++global_step;
      Rng step_rng = counter_rng(cfg.seed, 0x57e9, std::uint64_t(global_step));

      // Knot assignment: a permutation when the batch covers all knots,
      // otherwise a draw without replacement.
      std::vector<int> knot_order(static_cast<size_t>(k_knots));
      std::iota(knot_order.begin(), knot_order.end(), 0);
      for (int i = k_knots - 1; i > 0; --i)
        std::swap(knot_order[size_t(i)], knot_order[size_t(step_rng.uniform_int(i + 1))]);

      struct ElementJob {
        ComplexVolume clean, noisy;
        double sigma = 0;
        std::uint64_t noise_seed = 0;
      };
      std::vector<ElementJob> jobs(static_cast<size_t>(cfg.batch_size));
      for (int e = 0; e < cfg.batch_size; ++e) {
        ElementJob& job = jobs[size_t(e)];
        const int vol = step_rng.uniform_int(int(dataset.size()));
        const ComplexVolume& src = dataset[size_t(vol)];
        const std::array<int, 3> corner{
            step_rng.uniform_int(src.dims.nx - cfg.patch_size.nx + 1),
            step_rng.uniform_int(src.dims.ny - cfg.patch_size.ny + 1),
            step_rng.uniform_int(src.dims.nz - cfg.patch_size.nz + 1)};
        job.clean = extract_patch(src, corner, cfg.patch_size);
        job.sigma = cfg.force_sigma >= 0
                        ? cfg.force_sigma
                        : result.model.potentials.knot_sigma(knot_order[size_t(e)]);
        job.noise_seed = step_rng.next_u64();
      }

      std::vector<ModelGrad> grads(static_cast<size_t>(cfg.batch_size));
      std::vector<double> losses(size_t(cfg.batch_size), 0.0);
      ComplexVolume first_xhat;
      double first_sigma = 0;
#pragma omp parallel for schedule(dynamic, 1)
      for (int e = 0; e < cfg.batch_size; ++e) {
        ElementJob& job = jobs[size_t(e)];
        job.noisy = corrupt(job.clean, job.sigma, job.noise_seed);
        const DenoiseResult den = denoise(result.model, job.noisy, job.sigma, solver_cfg);
        ComplexVolume loss_grad = axpy(den.x, -1.0, job.clean);
        const double l = norm(loss_grad);
        losses[size_t(e)] = l * l;
        for (cplx& c : loss_grad.data) c *= 2.0;
        grads[size_t(e)] =
            param_gradient(result.model, job.noisy, job.sigma, den.x, loss_grad, 1e-7, 400);
        if (e == 0) {
          first_xhat = den.x;
          first_sigma = job.sigma;
        }
      }

      ModelGrad batch_grad = zero_model_grad(result.model);
      double batch_loss = 0;
      for (int e = 0; e < cfg.batch_size; ++e) {
        batch_grad.accumulate(grads[size_t(e)], 1.0 / cfg.batch_size);
        batch_loss += losses[size_t(e)] / cfg.batch_size;
      }

      double penalty = 0;
      if (cfg.penalty_weight > 0 && global_step % cfg.penalty_every == 0) {
        const PenaltyResult pen = hessian_penalty_gradient(result.model, first_xhat, first_sigma,
                                                           cfg.power_iters, cfg.penalty_weight);
        batch_grad.accumulate(pen.grad, 1.0);
        penalty = pen.value;
      }

      params = get_params(result.model);
      adabelief_step(opt, params, batch_grad.flatten(), lr);
      set_params(result.model, params);
      result.model.filter_bank = normalize(result.model.filter_bank, cfg.patch_size);

      const double wall =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start)
              .count();
      result.history.push_back({global_step, epoch, batch_loss, penalty, lr, wall});
    }
    lr *= cfg.lr_decay_per_epoch;
    if (!checkpoint_dir.empty() && cfg.checkpoint_every_epochs > 0 &&
        (epoch + 1) % cfg.checkpoint_every_epochs == 0)
      save_checkpoint(result.model, checkpoint_dir + "/epoch_" + std::to_string(epoch + 1));
  }

  if (!checkpoint_dir.empty()) {
    save_checkpoint(result.model, checkpoint_dir + "/final");
    write_loss_history(result.history, checkpoint_dir + "/loss_history.csv");
  }
  return result;
}

}  // namespace wcrr
