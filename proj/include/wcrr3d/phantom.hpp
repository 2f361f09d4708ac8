#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "wcrr3d/volume.hpp"

namespace wcrr {

/// One ellipsoid in normalized coordinates ([-1,1] per axis).
struct Ellipsoid {
  std::array<double, 3> center{0, 0, 0};
  std::array<double, 3> semi_axes{1, 1, 1};
  std::array<double, 3> euler_zyx{0, 0, 0};  // intrinsic Z-Y-X angles, radians
  double intensity = 1.0;

  bool contains(double u, double v, double w) const;
};

/// Analytic ground-truth generator: additive ellipsoid intensities with
/// a smooth low-order polynomial phase applied as a unit-modulus factor.
struct EllipsoidPhantom {
  std::vector<Ellipsoid> ellipsoids;
  /// Phase(u,v,w) = c0 + c1*u + c2*v + c3*w + c4*u*v + c5*v*w + c6*u*w
  ///             + c7*u^2 + c8*v^2 + c9*w^2  (radians).
  std::array<double, 10> phase_coeffs{};

  static EllipsoidPhantom default_spec();
  static EllipsoidPhantom random_spec(std::uint64_t seed, int n_ellipsoids = 6);
};

/// Deterministic rasterization on voxel centers u_i = (2i + 1 - N) / N.
ComplexVolume generate_phantom(const EllipsoidPhantom& spec, Dims3 dims);

}  // namespace wcrr
