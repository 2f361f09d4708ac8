#pragma once

// Independent reference implementations used only by tests. These stay
// deliberately naive (triple loops, dense matrices) so they cannot share
// bugs with the optimized library paths they check.

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "wcrr3d/rng.hpp"
#include "wcrr3d/trajectory.hpp"
#include "wcrr3d/volume.hpp"

namespace oracle {

/// Direct NDFT by a literal quadruple loop over samples and voxels.
inline std::vector<wcrr::cplx> ndft_forward_bruteforce(const wcrr::ComplexVolume& x,
                                                       const wcrr::KSpaceTrajectory& traj) {
  std::vector<wcrr::cplx> out(traj.points.size());
  const wcrr::Dims3 d = x.dims;
  for (size_t m = 0; m < traj.points.size(); ++m) {
    const auto& k = traj.points[m];
    wcrr::cplx acc = 0;
    for (int z = 0; z < d.nz; ++z)
      for (int y = 0; y < d.ny; ++y)
        for (int xx = 0; xx < d.nx; ++xx) {
          const double rx = xx - std::floor(d.nx / 2.0);
          const double ry = y - std::floor(d.ny / 2.0);
          const double rz = z - std::floor(d.nz / 2.0);
          const double phase = -2.0 * M_PI * (k[0] * rx + k[1] * ry + k[2] * rz);
          acc += x.at(xx, y, z) * wcrr::cplx(std::cos(phase), std::sin(phase));
        }
    out[m] = acc;
  }
  return out;
}

inline wcrr::ComplexVolume random_volume(wcrr::Dims3 dims, std::uint64_t seed) {
  wcrr::Rng rng(seed);
  wcrr::ComplexVolume v(dims);
  for (wcrr::cplx& c : v.data) c = {rng.gaussian(), rng.gaussian()};
  return v;
}

/// Exact 1D total-variation denoising, min 1/2||x-y||^2 + lam*sum|x_{i+1}-x_i|
/// (the taut-string solution). Solved through the dual box-constrained QP
///   min_p 1/2||y - D^T p||^2  s.t.  |p_i| <= lam,
/// with cyclic coordinate descent run to machine-level convergence; each
/// coordinate update is an exact clip, so the method converges to the
/// unique primal solution x = y - D^T p.
inline std::vector<double> tv1d_taut_string(const std::vector<double>& y, double lam) {
  const int n = int(y.size());
  if (n <= 1 || lam <= 0) return y;
  std::vector<double> p(size_t(n - 1), 0.0);
  std::vector<double> r = y;  // r = y - D^T p, D^T p has -p_i at i, +p_i at i+1
  for (int sweep = 0; sweep < 200000; ++sweep) {
    double max_move = 0;
    for (int i = 0; i < n - 1; ++i) {
      const double unclipped = p[size_t(i)] + (r[size_t(i) + 1] - r[size_t(i)]) / 2.0;
      const double pn = std::min(lam, std::max(-lam, unclipped));
      const double dp = pn - p[size_t(i)];
      if (dp != 0) {
        p[size_t(i)] = pn;
        r[size_t(i)] += dp;
        r[size_t(i) + 1] -= dp;
        max_move = std::max(max_move, std::abs(dp));
      }
    }
    if (max_move < 1e-14) break;
  }
  return r;
}

}  // namespace oracle
