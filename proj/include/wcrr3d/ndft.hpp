#pragma once

#include <vector>

#include "wcrr3d/trajectory.hpp"
#include "wcrr3d/volume.hpp"

namespace wcrr {

/// Direct-summation non-uniform DFT between a centered voxel grid and
/// arbitrary k-space locations. Voxel coordinates are r_n =
/// (i - floor(Nx/2), j - floor(Ny/2), k - floor(Nz/2)).
///
/// The per-sample complex exponentials factorize over axes; the plan
/// caches the three 1D phase tables per sample so repeated transforms
/// with the same trajectory and dims cost pure multiply-accumulates.
class NdftPlan {
 public:
  NdftPlan(const KSpaceTrajectory& traj, Dims3 dims);

  /// (F x)_m = sum_n x_n exp(-i 2 pi <k_m, r_n>).
  std::vector<cplx> forward(const ComplexVolume& x) const;

  /// (F^H y)_n = sum_m y_m exp(+i 2 pi <k_m, r_n>).
  ComplexVolume adjoint(const std::vector<cplx>& y) const;

  Dims3 dims() const { return dims_; }
  std::int64_t samples() const { return m_; }

 private:
  Dims3 dims_;
  std::int64_t m_;
  // Split re/im tables, sample-major: tab_x_re_[m * nx + i] etc.
  std::vector<double> tab_x_re_, tab_x_im_;
  std::vector<double> tab_y_re_, tab_y_im_;
  std::vector<double> tab_z_re_, tab_z_im_;
};

/// One-shot conveniences; each builds a plan internally.
std::vector<cplx> ndft_forward(const ComplexVolume& x, const KSpaceTrajectory& traj);
ComplexVolume ndft_adjoint(const std::vector<cplx>& y, const KSpaceTrajectory& traj, Dims3 dims);

}  // namespace wcrr
