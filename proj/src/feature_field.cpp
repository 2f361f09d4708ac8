#include "wcrr3d/feature_field.hpp"

#include <stdexcept>

namespace wcrr {

FeatureField to_feature_field(const ComplexVolume& v) {
  FeatureField f(v.dims, 2);
  double* re = f.channel(0);
  double* im = f.channel(1);
  for (size_t i = 0; i < v.data.size(); ++i) {
    re[i] = v.data[i].real();
    im[i] = v.data[i].imag();
  }
  return f;
}

ComplexVolume to_complex_volume(const FeatureField& f) {
  if (f.channels != 2) throw std::invalid_argument("to_complex_volume: needs 2 channels");
  ComplexVolume v(f.dims);
  const double* re = f.channel(0);
  const double* im = f.channel(1);
  for (size_t i = 0; i < v.data.size(); ++i) v.data[i] = {re[i], im[i]};
  return v;
}

FeatureField rotate_field(const FeatureField& f, const Rotation& r) {
  if (r.quarter_turns % 4 == 0) return f;
  FeatureField out(rotated_dims(f.dims, r), f.channels);
  for (int c = 0; c < f.channels; ++c)
    rotate_scalar_field(f.channel(c), f.dims, r, out.channel(c));
  return out;
}

double dot(const FeatureField& a, const FeatureField& b) {
  if (a.dims != b.dims || a.channels != b.channels)
    throw std::invalid_argument("FeatureField dot: shape mismatch");
  double s = 0;
  for (size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
  return s;
}

}  // namespace wcrr
