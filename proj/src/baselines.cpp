#include "wcrr3d/baselines.hpp"

#include <stdexcept>

namespace wcrr {

ReconContext::ReconContext(CoilSet coils, const KSpaceTrajectory& traj, Dims3 dims,
                           KSpaceData data, int pipe_iters, int power_iters)
    : op(std::move(coils), traj, dims), y(std::move(data)) {
  if (y.coils != op.coils() || y.samples_per_coil != op.samples())
    throw std::invalid_argument("ReconContext: measurement shape mismatch");
  weights = estimate_density_weights(traj, dims, pipe_iters);
  norm_sq = op.norm_squared_estimate(power_iters);
}

ComplexVolume recon_dcp(const ReconContext& ctx) {
  return ctx.op.adjoint_weighted(ctx.y, ctx.weights);
}

BaselineResult recon_l1_wavelet(const ReconContext& ctx, double lambda, double tol, int max_iters,
                                int wavelet_levels) {
  const Dims3 d = ctx.op.dims();
  const WaveletPlan plan = WaveletPlan::create(d, wavelet_levels);
  const double step = 1.0 / ctx.norm_sq;

  auto grad_f = [&](const RealVec& xv) {
    const ComplexVolume x = from_real_vector(xv, d);
    KSpaceData r = ctx.op.forward(x);
    for (size_t i = 0; i < r.samples.size(); ++i) r.samples[i] -= ctx.y.samples[i];
    return to_real_vector(ctx.op.adjoint(r));
  };
  auto prox = [&](const RealVec& xv, double s) {
    const ComplexVolume x = from_real_vector(xv, d);
    const ComplexVolume coeffs = dwt3(x, plan);
    const ComplexVolume shrunk = soft_threshold_details(coeffs, plan, lambda * s);
    return to_real_vector(idwt3(shrunk, plan));
  };

  std::function<RealVec(const RealVec&, double)> prox_fn;
  if (lambda > 0) prox_fn = prox;
  const ComplexVolume x0 = recon_dcp(ctx);
  FistaResult res =
      fista_minimize(grad_f, prox_fn, to_real_vector(x0), step, max_iters, tol);
  BaselineResult out;
  out.x = from_real_vector(res.x, d);
  out.trace = std::move(res.trace);
  return out;
}

BaselineResult recon_tv(const ReconContext& ctx, double lambda, double tol, int max_iters) {
  const Dims3 d = ctx.op.dims();
  VolumeLinearOp a;
  a.forward = [&](const ComplexVolume& x) { return to_real_vector(ctx.op.forward(x)); };
  a.adjoint = [&](const RealVec& yv) {
    return ctx.op.adjoint(from_real_vector(yv, ctx.op.coils(), ctx.op.samples()));
  };

  const ComplexVolume x0 = recon_dcp(ctx);
  CondatResult res = condat_tv_reconstruct(a, to_real_vector(ctx.y), lambda, x0,
                                           1.0 / ctx.norm_sq, tol, max_iters);
  BaselineResult out;
  out.x = std::move(res.x);
  out.trace = std::move(res.trace);
  return out;
}

}  // namespace wcrr
