#pragma once

#include <string>
#include <vector>

#include "wcrr3d/volume.hpp"

namespace wcrr {

/// Multi-coil k-space measurements: C coils x M samples.
struct KSpaceData {
  int coils = 0;
  std::int64_t samples_per_coil = 0;
  std::vector<cplx> samples;  // coil-major: samples[c * M + m]

  KSpaceData() = default;
  KSpaceData(int c, std::int64_t m) : coils(c), samples_per_coil(m), samples(size_t(c) * m) {}

  cplx* coil(int c) { return samples.data() + size_t(c) * samples_per_coil; }
  const cplx* coil(int c) const { return samples.data() + size_t(c) * samples_per_coil; }
};

double norm(const KSpaceData& y);
cplx inner(const KSpaceData& a, const KSpaceData& b);

std::vector<double> to_real_vector(const KSpaceData& y);
KSpaceData from_real_vector(const std::vector<double>& r, int coils, std::int64_t m);

/// KDAT file format: 8-byte magic "KDAT\0\0\0\1", LE u32 C, LE u32 M,
/// then interleaved LE f32 (re, im) per coil.
void save_kdat(const KSpaceData& y, const std::string& path);
KSpaceData load_kdat(const std::string& path);

}  // namespace wcrr
