#include "wcrr3d/wavelet.hpp"

#include <cmath>
#include <stdexcept>

namespace wcrr {

namespace {

// Daubechies-4 analysis filters.
const double kSqrt3 = std::sqrt(3.0);
const double kNorm = 4.0 * std::sqrt(2.0);
const double kH[4] = {(1 + kSqrt3) / kNorm, (3 + kSqrt3) / kNorm, (3 - kSqrt3) / kNorm,
                      (1 - kSqrt3) / kNorm};
const double kG[4] = {kH[3], -kH[2], kH[1], -kH[0]};

/// One periodic analysis pass over a line of even length n.
void analyze_line(const cplx* in, int n, cplx* out) {
  const int half = n / 2;
  for (int k = 0; k < half; ++k) {
    cplx a = 0, d = 0;
    for (int t = 0; t < 4; ++t) {
      const cplx v = in[(2 * k + t) % n];
      a += kH[t] * v;
      d += kG[t] * v;
    }
    out[k] = a;
    out[half + k] = d;
  }
}

void synthesize_line(const cplx* in, int n, cplx* out) {
  const int half = n / 2;
  for (int i = 0; i < n; ++i) out[i] = 0;
  for (int k = 0; k < half; ++k) {
    const cplx a = in[k], d = in[half + k];
    for (int t = 0; t < 4; ++t) out[(2 * k + t) % n] += kH[t] * a + kG[t] * d;
  }
}

using LineOp = void (*)(const cplx*, int, cplx*);

/// Applies a line transform along `axis` within the leading
/// sub-cube of size `sub`.
void transform_axis(ComplexVolume& v, Dims3 sub, int axis, LineOp op) {
  const Dims3 d = v.dims;
  const int n = axis == 0 ? sub.nx : (axis == 1 ? sub.ny : sub.nz);
  std::vector<cplx> line(static_cast<size_t>(n)), res(static_cast<size_t>(n));
  const std::int64_t stride[3] = {1, d.nx, std::int64_t(d.nx) * d.ny};

  const int o1 = axis == 0 ? 1 : 0;
  const int o2 = axis == 2 ? 1 : 2;
  const int n1 = o1 == 0 ? sub.nx : (o1 == 1 ? sub.ny : sub.nz);
  const int n2 = o2 == 0 ? sub.nx : (o2 == 1 ? sub.ny : sub.nz);
  for (int j = 0; j < n2; ++j) {
    for (int i = 0; i < n1; ++i) {
      const std::int64_t base = stride[o1] * i + stride[o2] * j;
      for (int k = 0; k < n; ++k) line[size_t(k)] = v.data[size_t(base + stride[axis] * k)];
      op(line.data(), n, res.data());
      for (int k = 0; k < n; ++k) v.data[size_t(base + stride[axis] * k)] = res[size_t(k)];
    }
  }
}

void check_divisible(Dims3 d, int levels) {
  const int f = 1 << levels;
  if (d.nx % f != 0 || d.ny % f != 0 || d.nz % f != 0)
    throw std::invalid_argument("wavelet: dims must be divisible by 2^levels");
}

}  // namespace

WaveletPlan WaveletPlan::create(Dims3 dims, int requested_levels) {
  WaveletPlan plan;
  plan.dims = dims;
  int levels = 0;
  while (levels < requested_levels) {
    const int f = 1 << (levels + 1);
    if (dims.nx % f != 0 || dims.ny % f != 0 || dims.nz % f != 0) break;
    if (dims.nx / f < 8 || dims.ny / f < 8 || dims.nz / f < 8) break;
    ++levels;
  }
  plan.levels = levels;
  return plan;
}

ComplexVolume dwt3(const ComplexVolume& v, const WaveletPlan& plan) {
  if (v.dims != plan.dims) throw std::invalid_argument("dwt3: dims mismatch with plan");
  check_divisible(v.dims, plan.levels);
  ComplexVolume c = v;
  Dims3 sub = v.dims;
  for (int l = 0; l < plan.levels; ++l) {
    transform_axis(c, sub, 0, analyze_line);
    transform_axis(c, sub, 1, analyze_line);
    transform_axis(c, sub, 2, analyze_line);
    sub = {sub.nx / 2, sub.ny / 2, sub.nz / 2};
  }
  return c;
}

ComplexVolume idwt3(const ComplexVolume& coeffs, const WaveletPlan& plan) {
  if (coeffs.dims != plan.dims) throw std::invalid_argument("idwt3: dims mismatch with plan");
  check_divisible(coeffs.dims, plan.levels);
  ComplexVolume v = coeffs;
  for (int l = plan.levels - 1; l >= 0; --l) {
    const Dims3 sub{plan.dims.nx >> l, plan.dims.ny >> l, plan.dims.nz >> l};
    transform_axis(v, sub, 2, synthesize_line);
    transform_axis(v, sub, 1, synthesize_line);
    transform_axis(v, sub, 0, synthesize_line);
  }
  return v;
}

ComplexVolume soft_threshold_details(const ComplexVolume& coeffs, const WaveletPlan& plan,
                                     double t) {
  ComplexVolume out = coeffs;
  for (int z = 0; z < plan.dims.nz; ++z)
    for (int y = 0; y < plan.dims.ny; ++y)
      for (int x = 0; x < plan.dims.nx; ++x) {
        if (!plan.is_detail(x, y, z)) continue;
        cplx& c = out.at(x, y, z);
        const double mag = std::abs(c);
        c = mag > t ? c * ((mag - t) / mag) : cplx(0, 0);
      }
  return out;
}

double detail_l1(const ComplexVolume& coeffs, const WaveletPlan& plan) {
  double s = 0;
  for (int z = 0; z < plan.dims.nz; ++z)
    for (int y = 0; y < plan.dims.ny; ++y)
      for (int x = 0; x < plan.dims.nx; ++x)
        if (plan.is_detail(x, y, z)) s += std::abs(coeffs.at(x, y, z));
  return s;
}

}  // namespace wcrr
