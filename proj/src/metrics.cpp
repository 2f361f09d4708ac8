#include "wcrr3d/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wcrr {

std::int64_t EvalMask::count() const {
  std::int64_t n = 0;
  for (bool b : keep) n += b ? 1 : 0;
  return n;
}

EvalMask foreground_mask(const ComplexVolume& gt, double rel_threshold) {
  double max_mag = 0;
  for (const cplx& c : gt.data) max_mag = std::max(max_mag, std::abs(c));
  if (max_mag == 0.0) throw std::invalid_argument("foreground_mask: ground truth is all zero");
  const double thr = rel_threshold * max_mag;
  EvalMask m;
  m.dims = gt.dims;
  m.keep.resize(gt.data.size());
  for (size_t i = 0; i < gt.data.size(); ++i) m.keep[i] = std::abs(gt.data[i]) > thr;
  return m;
}

namespace {

void check_metric_args(const ComplexVolume& gt, const ComplexVolume& rec, const EvalMask& mask) {
  if (gt.dims != rec.dims || gt.dims != mask.dims)
    throw std::invalid_argument("metrics: dimension mismatch");
  if (mask.count() == 0) throw std::invalid_argument("metrics: empty mask");
}

/// Magnitude image z-scored with its own mask statistics (population
/// std). A near-constant image is only centered.
std::vector<double> normalized_magnitude(const ComplexVolume& v, const EvalMask& mask) {
  std::vector<double> mag(v.data.size());
  for (size_t i = 0; i < v.data.size(); ++i) mag[i] = std::abs(v.data[i]);
  double sum = 0, sum2 = 0;
  std::int64_t n = 0;
  for (size_t i = 0; i < mag.size(); ++i) {
    if (!mask.keep[i]) continue;
    sum += mag[i];
    sum2 += mag[i] * mag[i];
    ++n;
  }
  const double mean = sum / double(n);
  const double var = std::max(0.0, sum2 / double(n) - mean * mean);
  const double std_dev = std::sqrt(var);
  const double scale = std_dev > 1e-12 ? 1.0 / std_dev : 1.0;
  for (double& m : mag) m = (m - mean) * scale;
  return mag;
}

int wrap(int i, int n) { return ((i % n) + n) % n; }

/// Separable periodic Gaussian filter, sigma 1.5, 11-tap support.
std::vector<double> gaussian_blur3(const std::vector<double>& in, Dims3 d) {
  constexpr int kRadius = 5;
  double taps[2 * kRadius + 1];
  double tap_sum = 0;
  for (int t = -kRadius; t <= kRadius; ++t) {
    taps[t + kRadius] = std::exp(-0.5 * (t * t) / (1.5 * 1.5));
    tap_sum += taps[t + kRadius];
  }
  for (double& t : taps) t /= tap_sum;

  auto pass = [&](const std::vector<double>& src, int axis) {
    std::vector<double> dst(src.size());
    const int n[3] = {d.nx, d.ny, d.nz};
    const std::int64_t stride[3] = {1, d.nx, std::int64_t(d.nx) * d.ny};
    for (int z = 0; z < d.nz; ++z)
      for (int y = 0; y < d.ny; ++y)
        for (int x = 0; x < d.nx; ++x) {
          const int idx[3] = {x, y, z};
          const std::int64_t base = x + d.nx * (y + std::int64_t(d.ny) * z);
          double acc = 0;
          for (int t = -kRadius; t <= kRadius; ++t) {
            const int j = wrap(idx[axis] + t, n[axis]);
            acc += taps[t + kRadius] * src[base + (j - idx[axis]) * stride[axis]];
          }
          dst[base] = acc;
        }
    return dst;
  };

  std::vector<double> out = pass(in, 0);
  out = pass(out, 1);
  out = pass(out, 2);
  return out;
}

}  // namespace

double masked_psnr(const ComplexVolume& gt, const ComplexVolume& rec, const EvalMask& mask,
                   double cap_db) {
  check_metric_args(gt, rec, mask);
  const std::vector<double> g = normalized_magnitude(gt, mask);
  const std::vector<double> r = normalized_magnitude(rec, mask);
  double mse = 0, range = 0;
  std::int64_t n = 0;
  for (size_t i = 0; i < g.size(); ++i) {
    if (!mask.keep[i]) continue;
    const double e = g[i] - r[i];
    mse += e * e;
    range = std::max(range, g[i]);
    ++n;
  }
  mse /= double(n);
  if (mse == 0.0) return cap_db;
  return 10.0 * std::log10(range * range / mse);
}

double masked_ssim(const ComplexVolume& gt, const ComplexVolume& rec, const EvalMask& mask) {
  check_metric_args(gt, rec, mask);
  const std::vector<double> a = normalized_magnitude(gt, mask);
  const std::vector<double> b = normalized_magnitude(rec, mask);

  double lo = a[0], hi = a[0];
  bool first = true;
  for (size_t i = 0; i < a.size(); ++i) {
    if (!mask.keep[i]) continue;
    if (first) { lo = hi = a[i]; first = false; }
    lo = std::min(lo, a[i]);
    hi = std::max(hi, a[i]);
  }
  const double range = (hi - lo) > 0 ? hi - lo : 1.0;
  const double c1 = (0.01 * range) * (0.01 * range);
  const double c2 = (0.03 * range) * (0.03 * range);

  const Dims3 d = gt.dims;
  std::vector<double> aa(a.size()), bb(a.size()), ab(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }
  const std::vector<double> mu_a = gaussian_blur3(a, d);
  const std::vector<double> mu_b = gaussian_blur3(b, d);
  const std::vector<double> m_aa = gaussian_blur3(aa, d);
  const std::vector<double> m_bb = gaussian_blur3(bb, d);
  const std::vector<double> m_ab = gaussian_blur3(ab, d);

  double acc = 0;
  std::int64_t n = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    if (!mask.keep[i]) continue;
    const double va = m_aa[i] - mu_a[i] * mu_a[i];
    const double vb = m_bb[i] - mu_b[i] * mu_b[i];
    const double cov = m_ab[i] - mu_a[i] * mu_b[i];
    const double s = ((2 * mu_a[i] * mu_b[i] + c1) * (2 * cov + c2)) /
                     ((mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2));
    acc += s;
    ++n;
  }
  return acc / double(n);
}

}  // namespace wcrr
