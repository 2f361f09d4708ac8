#include "wcrr3d/trajectory.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>

#include "wcrr3d/rng.hpp"

namespace wcrr {

KSpaceTrajectory::KSpaceTrajectory(std::vector<std::array<double, 3>> pts) : points(std::move(pts)) {
  if (points.empty()) throw std::invalid_argument("KSpaceTrajectory: needs at least one sample");
  for (const auto& k : points) {
    for (double c : k) {
      if (!(c >= -0.5 && c < 0.5))
        throw std::invalid_argument("KSpaceTrajectory: component outside [-0.5, 0.5)");
    }
  }
}

KSpaceTrajectory cartesian_trajectory(Dims3 dims) {
  std::vector<std::array<double, 3>> pts;
  pts.reserve(size_t(dims.count()));
  for (int fz = -dims.nz / 2; fz < (dims.nz + 1) / 2; ++fz)
    for (int fy = -dims.ny / 2; fy < (dims.ny + 1) / 2; ++fy)
      for (int fx = -dims.nx / 2; fx < (dims.nx + 1) / 2; ++fx)
        pts.push_back({double(fx) / dims.nx, double(fy) / dims.ny, double(fz) / dims.nz});
  return KSpaceTrajectory(std::move(pts));
}

KSpaceTrajectory radial3d_trajectory(const RadialParams& p, std::int64_t m_total) {
  if (m_total < 1) throw std::invalid_argument("radial3d_trajectory: M_total must be >= 1");
  const int spokes = std::min<std::int64_t>(p.spokes, m_total);
  const std::int64_t base = m_total / spokes;
  const std::int64_t extra = m_total % spokes;
  const double golden = M_PI * (3.0 - std::sqrt(5.0));

  std::vector<std::array<double, 3>> pts;
  pts.reserve(size_t(m_total));
  for (int s = 0; s < spokes; ++s) {
    // Fibonacci-sphere direction.
    const double zc = 1.0 - 2.0 * (s + 0.5) / spokes;
    const double r = std::sqrt(std::max(0.0, 1.0 - zc * zc));
    const double phi = golden * s;
    const double d[3] = {r * std::cos(phi), r * std::sin(phi), zc};

    const std::int64_t n = base + (s < extra ? 1 : 0);
    for (std::int64_t i = 0; i < n; ++i) {
      const double t = -0.5 + double(i) / double(n);
      // |t| <= 0.5 and |d| = 1 keep every component in [-0.5, 0.5);
      // nudge the t = -0.5 endpoint so a -1 direction component stays in range.
      const double tt = (t == -0.5) ? t + 1e-9 : t;
      pts.push_back({tt * d[0], tt * d[1], tt * d[2]});
    }
  }
  return KSpaceTrajectory(std::move(pts));
}

KSpaceTrajectory random_vds_trajectory(const RandomVdsParams& p, std::int64_t m_total) {
  if (m_total < 1) throw std::invalid_argument("random_vds_trajectory: M_total must be >= 1");
  if (!(p.decay_exponent >= 0.0 && p.decay_exponent < 3.0))
    throw std::invalid_argument("random_vds_trajectory: decay exponent must be in [0, 3)");
  Rng rng(p.seed + 0x5d5);
  const double r_max = 0.5 * (1.0 - 1e-9);
  const double inv_pow = 1.0 / (3.0 - p.decay_exponent);

  std::vector<std::array<double, 3>> pts;
  pts.reserve(size_t(m_total));
  for (std::int64_t i = 0; i < m_total; ++i) {
    // Radius from the density ~ r^-d on the ball: CDF ~ r^(3-d).
    const double radius = r_max * std::pow(rng.uniform01(), inv_pow);
    // Uniform direction.
    const double zc = rng.uniform(-1.0, 1.0);
    const double phi = rng.uniform(0.0, 2.0 * M_PI);
    const double s = std::sqrt(std::max(0.0, 1.0 - zc * zc));
    pts.push_back({radius * s * std::cos(phi), radius * s * std::sin(phi), radius * zc});
  }
  return KSpaceTrajectory(std::move(pts));
}

namespace {

constexpr char kKtrjMagic[8] = {'K', 'T', 'R', 'J', 0, 0, 0, 1};

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

void save_ktrj(const KSpaceTrajectory& traj, const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw std::runtime_error("save_ktrj: cannot open " + path);
  if (std::fwrite(kKtrjMagic, 1, 8, f.get()) != 8) throw std::runtime_error("write failed");
  const std::uint32_t m = std::uint32_t(traj.points.size());
  unsigned char b[4] = {(unsigned char)(m & 0xff), (unsigned char)((m >> 8) & 0xff),
                        (unsigned char)((m >> 16) & 0xff), (unsigned char)((m >> 24) & 0xff)};
  if (std::fwrite(b, 1, 4, f.get()) != 4) throw std::runtime_error("write failed");
  for (const auto& k : traj.points) {
    if (std::fwrite(k.data(), 8, 3, f.get()) != 3) throw std::runtime_error("write failed");
  }
}

KSpaceTrajectory load_ktrj(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw std::runtime_error("load_ktrj: cannot open " + path);
  char magic[8];
  if (std::fread(magic, 1, 8, f.get()) != 8 || std::memcmp(magic, kKtrjMagic, 8) != 0)
    throw std::runtime_error("load_ktrj: bad magic in " + path);
  unsigned char b[4];
  if (std::fread(b, 1, 4, f.get()) != 4) throw std::runtime_error("load_ktrj: truncated");
  const std::uint32_t m = std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
                          (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
  std::vector<std::array<double, 3>> pts(m);
  for (auto& k : pts) {
    if (std::fread(k.data(), 8, 3, f.get()) != 3) throw std::runtime_error("load_ktrj: truncated");
  }
  return KSpaceTrajectory(std::move(pts));
}

}  // namespace wcrr
