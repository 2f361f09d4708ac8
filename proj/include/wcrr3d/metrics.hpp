#pragma once

#include <vector>

#include "wcrr3d/volume.hpp"

namespace wcrr {

/// Boolean foreground mask, same layout as the volume it was built from.
struct EvalMask {
  Dims3 dims;
  std::vector<bool> keep;

  std::int64_t count() const;
};

/// Voxels whose magnitude exceeds 5% of the maximum ground-truth
/// magnitude. Throws if gt is identically zero.
EvalMask foreground_mask(const ComplexVolume& gt, double rel_threshold = 0.05);

/// Masked PSNR in dB. Magnitude images are z-score normalized over the
/// mask, each with its own mask statistics (population std; if the std
/// is below 1e-12 the image is only centered). Peak value is the max
/// normalized ground-truth magnitude over the mask. Returns `cap_db`
/// when the masked MSE is zero.
double masked_psnr(const ComplexVolume& gt, const ComplexVolume& rec, const EvalMask& mask,
                   double cap_db = 99.0);

/// Masked SSIM on z-score normalized magnitude images: mean over masked
/// voxels of the local SSIM map. 3D Gaussian window, sigma 1.5 voxels,
/// 11^3 support, periodic boundary; K1 = 0.01, K2 = 0.03; dynamic range
/// max - min of the normalized ground truth over the mask (1 if that
/// range is zero).
double masked_ssim(const ComplexVolume& gt, const ComplexVolume& rec, const EvalMask& mask);

}  // namespace wcrr
