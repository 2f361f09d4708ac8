#include "wcrr3d/phantom.hpp"

#include <cmath>
#include <stdexcept>

#include "wcrr3d/rng.hpp"

namespace wcrr {

namespace {

using Mat3d = std::array<std::array<double, 3>, 3>;

/// Intrinsic Z-Y-X rotation matrix from Euler angles.
Mat3d euler_zyx_matrix(const std::array<double, 3>& ang) {
  const double cz = std::cos(ang[0]), sz = std::sin(ang[0]);
  const double cy = std::cos(ang[1]), sy = std::sin(ang[1]);
  const double cx = std::cos(ang[2]), sx = std::sin(ang[2]);
  Mat3d m;
  m[0] = {cz * cy, cz * sy * sx - sz * cx, cz * sy * cx + sz * sx};
  m[1] = {sz * cy, sz * sy * sx + cz * cx, sz * sy * cx - cz * sx};
  m[2] = {-sy, cy * sx, cy * cx};
  return m;
}

}  // namespace

bool Ellipsoid::contains(double u, double v, double w) const {
  const Mat3d m = euler_zyx_matrix(euler_zyx);
  const double du = u - center[0], dv = v - center[1], dw = w - center[2];
  // Body-frame coordinates: R^T * (p - c).
  const double bu = m[0][0] * du + m[1][0] * dv + m[2][0] * dw;
  const double bv = m[0][1] * du + m[1][1] * dv + m[2][1] * dw;
  const double bw = m[0][2] * du + m[1][2] * dv + m[2][2] * dw;
  const double q = (bu / semi_axes[0]) * (bu / semi_axes[0]) +
                   (bv / semi_axes[1]) * (bv / semi_axes[1]) +
                   (bw / semi_axes[2]) * (bw / semi_axes[2]);
  return q <= 1.0;
}

EllipsoidPhantom EllipsoidPhantom::default_spec() {
  EllipsoidPhantom p;
  p.ellipsoids = {
      {{0.0, 0.0, 0.0}, {0.72, 0.85, 0.78}, {0, 0, 0}, 0.8},
      {{0.0, 0.0, 0.0}, {0.62, 0.75, 0.68}, {0, 0, 0}, -0.3},
      {{0.22, 0.25, 0.0}, {0.21, 0.16, 0.25}, {0.5, 0, 0}, 0.25},
      {{-0.22, 0.22, -0.05}, {0.16, 0.26, 0.21}, {-0.4, 0, 0}, 0.25},
      {{0.0, -0.35, 0.1}, {0.28, 0.18, 0.2}, {0, 0.3, 0}, -0.15},
      {{0.0, 0.1, -0.25}, {0.08, 0.08, 0.08}, {0, 0, 0}, 0.4},
      {{-0.06, -0.55, -0.12}, {0.05, 0.06, 0.05}, {0, 0, 0}, 0.3},
  };
  p.phase_coeffs = {0.2, 0.6, -0.4, 0.5, 0.15, -0.1, 0.1, -0.3, 0.2, -0.25};
  return p;
}

EllipsoidPhantom EllipsoidPhantom::random_spec(std::uint64_t seed, int n_ellipsoids) {
  Rng rng(seed);
  EllipsoidPhantom p;
  // Enclosing head-like shell plus random interior structures.
  p.ellipsoids.push_back({{0, 0, 0},
                          {rng.uniform(0.65, 0.85), rng.uniform(0.65, 0.85), rng.uniform(0.65, 0.85)},
                          {0, 0, 0},
                          rng.uniform(0.4, 0.8)});
  for (int i = 1; i < n_ellipsoids; ++i) {
    Ellipsoid e;
    for (int d = 0; d < 3; ++d) e.center[d] = rng.uniform(-0.4, 0.4);
    for (int d = 0; d < 3; ++d) e.semi_axes[d] = rng.uniform(0.06, 0.3);
    for (int d = 0; d < 3; ++d) e.euler_zyx[d] = rng.uniform(-1.5, 1.5);
    e.intensity = rng.uniform(-0.3, 0.5);
    p.ellipsoids.push_back(e);
  }
  for (double& c : p.phase_coeffs) c = rng.uniform(-0.5, 0.5);
  return p;
}

ComplexVolume generate_phantom(const EllipsoidPhantom& spec, Dims3 dims) {
  if (dims.nx <= 0 || dims.ny <= 0 || dims.nz <= 0)
    throw std::invalid_argument("generate_phantom: dims must be positive");
  ComplexVolume vol(dims);
  for (int z = 0; z < dims.nz; ++z) {
    const double w = double(2 * z + 1 - dims.nz) / dims.nz;
    for (int y = 0; y < dims.ny; ++y) {
      const double v = double(2 * y + 1 - dims.ny) / dims.ny;
      for (int x = 0; x < dims.nx; ++x) {
        const double u = double(2 * x + 1 - dims.nx) / dims.nx;
        double mag = 0;
        for (const Ellipsoid& e : spec.ellipsoids) {
          if (e.contains(u, v, w)) mag += e.intensity;
        }
        if (mag == 0.0) continue;
        const auto& c = spec.phase_coeffs;
        const double phase = c[0] + c[1] * u + c[2] * v + c[3] * w + c[4] * u * v +
                             c[5] * v * w + c[6] * u * w + c[7] * u * u + c[8] * v * v +
                             c[9] * w * w;
        vol.at(x, y, z) = mag * cplx(std::cos(phase), std::sin(phase));
      }
    }
  }
  return vol;
}

}  // namespace wcrr
