#pragma once

#include <string>

#include "wcrr3d/filter_bank.hpp"
#include "wcrr3d/potentials.hpp"
#include "wcrr3d/rotation.hpp"
#include "wcrr3d/volume.hpp"

namespace wcrr {

/// Rotation-averaged weakly convex ridge regularizer
///   R(x) = |G|^-1 sum_{R in G} sum_j <1, psi_j(W_j R x)>
/// on the 2-channel real view of a complex volume, with periodic
/// convolutions. With ||W|| = 1 the regularizer is 1-weakly convex for
/// any beta > 0, and nonnegative with R(0) = 0 when beta >= 1.
struct WcrrModel {
  FilterBank filter_bank;
  PotentialParams potentials;
  RotationSet rotations;
  std::uint64_t init_seed = 0;

  /// Random model: Gaussian kernels, zero spline knots, beta = 2.
  static WcrrModel create(const std::vector<int>& channel_plan, RotationSet rots,
                          std::uint64_t seed, int knots = 12, double sigma_min = 0.01,
                          double sigma_max = 0.1);
};

double wcrr_value(const WcrrModel& model, const ComplexVolume& x, double sigma);
ComplexVolume wcrr_grad(const WcrrModel& model, const ComplexVolume& x, double sigma);
ComplexVolume wcrr_hvp(const WcrrModel& model, const ComplexVolume& x, double sigma,
                       const ComplexVolume& v);

/// Checkpoint: <dir>/manifest.json plus one raw little-endian f32 blob
/// per parameter tensor, names and shapes listed in the manifest.
void save_checkpoint(const WcrrModel& model, const std::string& dir);
WcrrModel load_checkpoint(const std::string& dir);

}  // namespace wcrr
