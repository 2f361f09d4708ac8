#pragma once

#include "wcrr3d/condat.hpp"
#include "wcrr3d/forward_op.hpp"
#include "wcrr3d/solvers.hpp"
#include "wcrr3d/wavelet.hpp"

namespace wcrr {

/// Shared per-reconstruction state: the stacked operator with its cached
/// NDFT plan, the measurements, Pipe density weights, and a
/// power-iteration estimate of ||A||^2.
struct ReconContext {
  MriOperator op;
  KSpaceData y;
  DensityWeights weights;
  double norm_sq = 0;

  ReconContext(CoilSet coils, const KSpaceTrajectory& traj, Dims3 dims, KSpaceData data,
               int pipe_iters = 10, int power_iters = 50);
};

/// Density-compensated adjoint sum_c conj(S_c) F^H (w y_c).
ComplexVolume recon_dcp(const ReconContext& ctx);

struct BaselineResult {
  ComplexVolume x;
  SolverTrace trace;
};

/// FISTA on 1/2||Ax - y||^2 + lambda * ||detail(Psi x)||_1; the proximal
/// step soft-thresholds the complex detail coefficients of the
/// orthonormal Daubechies-4 transform. Step 1/||A||^2, init recon_dcp.
BaselineResult recon_l1_wavelet(const ReconContext& ctx, double lambda, double tol = 5e-3,
                                int max_iters = 300, int wavelet_levels = 4);

/// Isotropic-TV reconstruction through the primal-dual scheme with
/// tau = 1/||A||^2, eta = 1/(24 tau), p0 = 0, init recon_dcp.
BaselineResult recon_tv(const ReconContext& ctx, double lambda, double tol = 5e-4,
                        int max_iters = 500);

}  // namespace wcrr
