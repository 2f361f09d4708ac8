#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "wcrr3d/coils.hpp"
#include "wcrr3d/kspace.hpp"
#include "wcrr3d/ndft.hpp"
#include "wcrr3d/trajectory.hpp"
#include "wcrr3d/volume.hpp"

namespace wcrr {

/// Per-sample density compensation weights (strictly positive).
struct DensityWeights {
  std::vector<double> weights;
};

/// Pipe fixed-point iteration w <- w / |F F^H w|, elementwise, starting
/// from all-ones weights. Throws on a degenerate trajectory (denominator
/// magnitude below 1e-12).
DensityWeights estimate_density_weights(const KSpaceTrajectory& traj, Dims3 dims, int iters = 10);

/// Additive complex white Gaussian noise: total complex variance sigma^2
/// split equally across real and imaginary parts.
struct NoiseModel {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Stacked multi-coil forward model y_c = F (S_c . x) and its adjoint
/// sum_c conj(S_c) . F^H y_c, sharing one cached NDFT plan.
class MriOperator {
 public:
  MriOperator(CoilSet coils, const KSpaceTrajectory& traj, Dims3 dims);

  KSpaceData forward(const ComplexVolume& x) const;
  ComplexVolume adjoint(const KSpaceData& y) const;

  /// Density-compensated adjoint sum_c conj(S_c) . F^H (w . y_c).
  ComplexVolume adjoint_weighted(const KSpaceData& y, const DensityWeights& w) const;

  /// A^H A x.
  ComplexVolume normal(const ComplexVolume& x) const;

  /// Power-iteration estimate of ||A||^2 (top eigenvalue of A^H A).
  double norm_squared_estimate(int iters = 50, std::uint64_t seed = 7) const;

  Dims3 dims() const { return plan_.dims(); }
  int coils() const { return coils_.coils(); }
  std::int64_t samples() const { return plan_.samples(); }
  const CoilSet& coil_set() const { return coils_; }

 private:
  CoilSet coils_;
  NdftPlan plan_;
};

/// One-shot conveniences over a freshly built operator.
KSpaceData forward(const ComplexVolume& x, const CoilSet& coils, const KSpaceTrajectory& traj);
ComplexVolume adjoint(const KSpaceData& y, const CoilSet& coils, const KSpaceTrajectory& traj,
                      Dims3 dims);

/// forward(gt) plus per-sample counter-seeded complex Gaussian noise;
/// deterministic for a fixed seed regardless of thread count.
KSpaceData simulate_acquisition(const ComplexVolume& gt, const CoilSet& coils,
                                const KSpaceTrajectory& traj, const NoiseModel& noise);

}  // namespace wcrr
