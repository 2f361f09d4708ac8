#pragma once

#include <functional>

#include "wcrr3d/solvers.hpp"
#include "wcrr3d/volume.hpp"

namespace wcrr {

/// Generic linear operator from image space to a real-vector data space.
struct VolumeLinearOp {
  std::function<RealVec(const ComplexVolume&)> forward;
  std::function<ComplexVolume(const RealVec&)> adjoint;
};

struct CondatResult {
  ComplexVolume x;
  SolverTrace trace;
};

/// Primal-dual scheme for 1/2||Ax - y||^2 + lambda * TV_iso(x) with the
/// forward-difference periodic 3D gradient applied per real channel:
///   p   <- proj_{lambda-ball}(p + eta * grad(x))
///   x   <- x - tau * (A^H (A x - y) + div^T(2p - p_prev))
/// with eta = 1/(24 tau) and p0 = 0. Each per-channel, per-voxel
/// 3-vector of dual variables is projected onto the lambda ball.
CondatResult condat_tv_reconstruct(const VolumeLinearOp& a, const RealVec& y, double lambda,
                                   const ComplexVolume& x0, double tau, double tol,
                                   int max_iters);

/// Forward-difference periodic gradient and its exact adjoint.
std::array<ComplexVolume, 3> tv_forward_gradient(const ComplexVolume& x);
ComplexVolume tv_gradient_adjoint(const std::array<ComplexVolume, 3>& p);

/// Projects each per-channel, per-voxel 3-vector of dual variables onto
/// the lambda ball: p <- p * min(1, lambda / ||p||_2).
void project_tv_dual(std::array<ComplexVolume, 3>& p, double lambda);

}  // namespace wcrr
