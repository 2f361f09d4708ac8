#include "wcrr3d/coils.hpp"

#include <cmath>
#include <stdexcept>

#include "wcrr3d/rng.hpp"

namespace wcrr {

CoilSet synth_coils(Dims3 dims, int n_coils, std::uint64_t seed) {
  if (n_coils < 1) throw std::invalid_argument("synth_coils: need at least one coil");
  Rng rng(seed + 0xc0117);

  struct Profile {
    double cx, cy, cz;   // Gaussian center, normalized coords
    double width;
    double px, py, pz;   // linear phase gradient (radians per unit coord)
    double p0;
  };
  std::vector<Profile> profiles(static_cast<size_t>(n_coils));
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int c = 0; c < n_coils; ++c) {
    // Centers on a sphere of radius 1.4 around the volume.
    const double zc = n_coils == 1 ? 0.0 : 1.0 - 2.0 * (c + 0.5) / n_coils;
    const double r = std::sqrt(std::max(0.0, 1.0 - zc * zc));
    const double phi = golden * c + rng.uniform(0.0, 0.2);
    profiles[size_t(c)] = {1.4 * r * std::cos(phi),
                           1.4 * r * std::sin(phi),
                           1.4 * zc,
                           rng.uniform(1.0, 1.4),
                           rng.uniform(-1.0, 1.0),
                           rng.uniform(-1.0, 1.0),
                           rng.uniform(-1.0, 1.0),
                           rng.uniform(0.0, 2.0 * M_PI)};
  }

  CoilSet set;
  set.maps.assign(size_t(n_coils), ComplexVolume(dims));
  for (int z = 0; z < dims.nz; ++z) {
    const double w = double(2 * z + 1 - dims.nz) / dims.nz;
    for (int y = 0; y < dims.ny; ++y) {
      const double v = double(2 * y + 1 - dims.ny) / dims.ny;
      for (int x = 0; x < dims.nx; ++x) {
        const double u = double(2 * x + 1 - dims.nx) / dims.nx;
        double ssos = 0;
        for (int c = 0; c < n_coils; ++c) {
          const Profile& p = profiles[size_t(c)];
          const double d2 = (u - p.cx) * (u - p.cx) + (v - p.cy) * (v - p.cy) +
                            (w - p.cz) * (w - p.cz);
          const double mag = std::exp(-0.5 * d2 / (p.width * p.width));
          const double ph = p.p0 + p.px * u + p.py * v + p.pz * w;
          set.maps[size_t(c)].at(x, y, z) = mag * cplx(std::cos(ph), std::sin(ph));
          ssos += mag * mag;
        }
        const double inv = 1.0 / std::sqrt(ssos);
        for (int c = 0; c < n_coils; ++c) set.maps[size_t(c)].at(x, y, z) *= inv;
      }
    }
  }
  return set;
}

bool coils_normalized(const CoilSet& coils, double tol) {
  if (coils.maps.empty()) return false;
  const std::int64_t n = coils.dims().count();
  for (std::int64_t i = 0; i < n; ++i) {
    double s = 0;
    for (const ComplexVolume& m : coils.maps) s += std::norm(m.data[size_t(i)]);
    if (std::abs(s - 1.0) > tol) return false;
  }
  return true;
}

void save_coils(const CoilSet& coils, const std::string& prefix) {
  for (int c = 0; c < coils.coils(); ++c)
    save_cvol(coils.maps[size_t(c)], prefix + "_c" + std::to_string(c) + ".cvol");
}

CoilSet load_coils(const std::string& prefix, int n_coils) {
  CoilSet set;
  for (int c = 0; c < n_coils; ++c)
    set.maps.push_back(load_cvol(prefix + "_c" + std::to_string(c) + ".cvol"));
  return set;
}

}  // namespace wcrr
