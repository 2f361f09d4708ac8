#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace wcrr {

using cplx = std::complex<double>;

/// Voxel counts along (x, y, z).
struct Dims3 {
  int nx = 0;
  int ny = 0;
  int nz = 0;

  std::int64_t count() const { return std::int64_t(nx) * ny * nz; }
  bool operator==(const Dims3&) const = default;
};

/// 3D complex-valued image. Element (x, y, z) lives at index
/// x + nx*(y + ny*z), i.e. x-fastest. The two real channels of the
/// 2-channel view are the real and imaginary parts.
struct ComplexVolume {
  Dims3 dims;
  std::vector<cplx> data;

  ComplexVolume() = default;
  explicit ComplexVolume(Dims3 d) : dims(d), data(size_t(d.count())) {}

  std::int64_t size() const { return dims.count(); }

  cplx& at(int x, int y, int z) {
    return data[size_t(x) + size_t(dims.nx) * (size_t(y) + size_t(dims.ny) * size_t(z))];
  }
  const cplx& at(int x, int y, int z) const {
    return data[size_t(x) + size_t(dims.nx) * (size_t(y) + size_t(dims.ny) * size_t(z))];
  }
};

bool all_finite(const ComplexVolume& v);

double norm(const ComplexVolume& v);
cplx inner(const ComplexVolume& a, const ComplexVolume& b);

/// a + s*b, dims must match.
ComplexVolume axpy(const ComplexVolume& a, cplx s, const ComplexVolume& b);

/// Contiguous sub-volume copy; throws std::out_of_range if the patch
/// does not fit.
ComplexVolume extract_patch(const ComplexVolume& v, std::array<int, 3> corner, Dims3 size);

/// Flatten to a real vector of length 2*N, interleaved (re, im), and back.
std::vector<double> to_real_vector(const ComplexVolume& v);
ComplexVolume from_real_vector(const std::vector<double>& r, Dims3 dims);

/// Separable periodic Gaussian smoothing of both channels; used to make
/// band-limited ground-truth volumes (sigma in voxels, 0 is a no-op).
ComplexVolume gaussian_smooth(const ComplexVolume& v, double sigma);

/// CVOL file format: 8-byte magic "CVOL\0\0\0\1", three LE u32 dims
/// (Nx, Ny, Nz), then 2*Nx*Ny*Nz LE f32 interleaved (re, im), x-fastest.
void save_cvol(const ComplexVolume& v, const std::string& path);
ComplexVolume load_cvol(const std::string& path);

}  // namespace wcrr
