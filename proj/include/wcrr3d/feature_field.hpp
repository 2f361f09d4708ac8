#pragma once

#include <vector>

#include "wcrr3d/rotation.hpp"
#include "wcrr3d/volume.hpp"

namespace wcrr {

/// Multi-channel real-valued 3D field, channel-major with x-fastest
/// spatial layout: data[((c*nz + z)*ny + y)*nx + x].
struct FeatureField {
  Dims3 dims;
  int channels = 0;
  std::vector<double> data;

  FeatureField() = default;
  FeatureField(Dims3 d, int c)
      : dims(d), channels(c), data(size_t(c) * size_t(d.count()), 0.0) {}

  std::int64_t voxels() const { return dims.count(); }
  double* channel(int c) { return data.data() + size_t(c) * size_t(dims.count()); }
  const double* channel(int c) const { return data.data() + size_t(c) * size_t(dims.count()); }
};

/// Real/imaginary channels of a complex volume as a 2-channel field.
FeatureField to_feature_field(const ComplexVolume& v);
ComplexVolume to_complex_volume(const FeatureField& f);

FeatureField rotate_field(const FeatureField& f, const Rotation& r);

double dot(const FeatureField& a, const FeatureField& b);

}  // namespace wcrr
