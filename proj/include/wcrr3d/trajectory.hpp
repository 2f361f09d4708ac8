#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "wcrr3d/volume.hpp"

namespace wcrr {

/// Non-Cartesian sample locations in cycles per voxel; every component
/// lies in [-0.5, 0.5). Validated on construction.
struct KSpaceTrajectory {
  std::vector<std::array<double, 3>> points;

  KSpaceTrajectory() = default;
  explicit KSpaceTrajectory(std::vector<std::array<double, 3>> pts);

  std::int64_t samples() const { return std::int64_t(points.size()); }
};

/// Full Cartesian grid frequencies f/N, f in [-N/2, N/2); with the
/// centered voxel coordinates this realizes the standard centered DFT.
KSpaceTrajectory cartesian_trajectory(Dims3 dims);

struct RadialParams {
  int spokes = 64;
};

struct RandomVdsParams {
  double decay_exponent = 1.0;  // density ~ |k|^-decay_exponent, in [0, 3)
  std::uint64_t seed = 0;
};

/// Spokes through the origin with Fibonacci-sphere directions, samples
/// equispaced along [-0.5, 0.5). A remainder of M_total % spokes is
/// absorbed by giving the first spokes one extra sample.
KSpaceTrajectory radial3d_trajectory(const RadialParams& p, std::int64_t m_total);

/// I.i.d. draws from a radially decaying density with the given exponent.
KSpaceTrajectory random_vds_trajectory(const RandomVdsParams& p, std::int64_t m_total);

/// KTRJ file format: 8-byte magic "KTRJ\0\0\0\1", LE u32 M, then 3*M
/// LE f64 coordinates, (kx, ky, kz) per sample.
void save_ktrj(const KSpaceTrajectory& traj, const std::string& path);
KSpaceTrajectory load_ktrj(const std::string& path);

}  // namespace wcrr
