#pragma once

#include "wcrr3d/volume.hpp"

namespace wcrr {

/// Orthonormal separable 3D Daubechies-4 transform (4-tap filter pair),
/// periodic boundary, standard octave layout: after L levels the
/// approximation band occupies [0, Nx/2^L) x [0, Ny/2^L) x [0, Nz/2^L).
struct WaveletPlan {
  Dims3 dims;
  int levels = 0;

  /// Caps the requested level count so the coarsest band keeps at least
  /// 8 samples per axis.
  static WaveletPlan create(Dims3 dims, int requested_levels = 4);

  bool is_detail(int x, int y, int z) const {
    return x >= dims.nx >> levels || y >= dims.ny >> levels || z >= dims.nz >> levels;
  }
};

/// Analysis / synthesis; throws if dims are not divisible by 2^levels.
ComplexVolume dwt3(const ComplexVolume& v, const WaveletPlan& plan);
ComplexVolume idwt3(const ComplexVolume& coeffs, const WaveletPlan& plan);

/// Complex soft-thresholding of the detail bands only: shrink the
/// magnitude by t, preserve the phase.
ComplexVolume soft_threshold_details(const ComplexVolume& coeffs, const WaveletPlan& plan,
                                     double t);

/// Sum of complex magnitudes over the detail bands.
double detail_l1(const ComplexVolume& coeffs, const WaveletPlan& plan);

}  // namespace wcrr
