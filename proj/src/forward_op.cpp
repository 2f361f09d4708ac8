#include "wcrr3d/forward_op.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wcrr3d/rng.hpp"

namespace wcrr {

DensityWeights estimate_density_weights(const KSpaceTrajectory& traj, Dims3 dims, int iters) {
  if (iters < 1) throw std::invalid_argument("estimate_density_weights: iters must be >= 1");
  const NdftPlan plan(traj, dims);
  const std::int64_t m = traj.samples();
  std::vector<cplx> w(size_t(m), cplx(1.0, 0.0));
  for (int it = 0; it < iters; ++it) {
    const std::vector<cplx> d = plan.forward(plan.adjoint(w));
    for (std::int64_t i = 0; i < m; ++i) {
      const double mag = std::abs(d[size_t(i)]);
      if (mag < 1e-12)
        throw std::runtime_error("estimate_density_weights: degenerate trajectory");
      w[size_t(i)] /= mag;
    }
  }
  DensityWeights out;
  out.weights.resize(size_t(m));
  for (std::int64_t i = 0; i < m; ++i) out.weights[size_t(i)] = w[size_t(i)].real();
  return out;
}

MriOperator::MriOperator(CoilSet coils, const KSpaceTrajectory& traj, Dims3 dims)
    : coils_(std::move(coils)), plan_(traj, dims) {
  if (coils_.coils() < 1) throw std::invalid_argument("MriOperator: no coils");
  if (coils_.dims() != dims) throw std::invalid_argument("MriOperator: coil dims mismatch");
}

KSpaceData MriOperator::forward(const ComplexVolume& x) const {
  if (x.dims != plan_.dims()) throw std::invalid_argument("MriOperator::forward: dim mismatch");
  KSpaceData y(coils_.coils(), plan_.samples());
  ComplexVolume weighted(x.dims);
  for (int c = 0; c < coils_.coils(); ++c) {
    const ComplexVolume& s = coils_.maps[size_t(c)];
    for (size_t i = 0; i < x.data.size(); ++i) weighted.data[i] = s.data[i] * x.data[i];
    const std::vector<cplx> yc = plan_.forward(weighted);
    std::copy(yc.begin(), yc.end(), y.coil(c));
  }
  return y;
}

ComplexVolume MriOperator::adjoint(const KSpaceData& y) const {
  if (y.coils != coils_.coils() || y.samples_per_coil != plan_.samples())
    throw std::invalid_argument("MriOperator::adjoint: shape mismatch");
  ComplexVolume out(plan_.dims());
  std::vector<cplx> yc(static_cast<size_t>(plan_.samples()));
  for (int c = 0; c < coils_.coils(); ++c) {
    std::copy(y.coil(c), y.coil(c) + plan_.samples(), yc.begin());
    const ComplexVolume back = plan_.adjoint(yc);
    const ComplexVolume& s = coils_.maps[size_t(c)];
    for (size_t i = 0; i < out.data.size(); ++i)
      out.data[i] += std::conj(s.data[i]) * back.data[i];
  }
  return out;
}

ComplexVolume MriOperator::adjoint_weighted(const KSpaceData& y, const DensityWeights& w) const {
  if (std::int64_t(w.weights.size()) != plan_.samples())
    throw std::invalid_argument("MriOperator::adjoint_weighted: weight length mismatch");
  KSpaceData scaled = y;
  for (int c = 0; c < y.coils; ++c) {
    cplx* row = scaled.coil(c);
    for (std::int64_t m = 0; m < y.samples_per_coil; ++m) row[m] *= w.weights[size_t(m)];
  }
  return adjoint(scaled);
}

ComplexVolume MriOperator::normal(const ComplexVolume& x) const { return adjoint(forward(x)); }

double MriOperator::norm_squared_estimate(int iters, std::uint64_t seed) const {
  Rng rng(seed);
  ComplexVolume v(plan_.dims());
  for (cplx& c : v.data) c = {rng.gaussian(), rng.gaussian()};
  double lambda = 0;
  for (int it = 0; it < iters; ++it) {
    const double n = norm(v);
    if (n == 0) return 0;
    for (cplx& c : v.data) c /= n;
    const ComplexVolume av = normal(v);
    lambda = std::abs(inner(v, av));
    v = av;
  }
  return lambda;
}

KSpaceData forward(const ComplexVolume& x, const CoilSet& coils, const KSpaceTrajectory& traj) {
  return MriOperator(coils, traj, x.dims).forward(x);
}

ComplexVolume adjoint(const KSpaceData& y, const CoilSet& coils, const KSpaceTrajectory& traj,
                      Dims3 dims) {
  return MriOperator(coils, traj, dims).adjoint(y);
}

KSpaceData simulate_acquisition(const ComplexVolume& gt, const CoilSet& coils,
                                const KSpaceTrajectory& traj, const NoiseModel& noise) {
  const MriOperator op(coils, traj, gt.dims);
  KSpaceData y = op.forward(gt);
  if (noise.sigma > 0) {
    const double s = noise.sigma / std::sqrt(2.0);  // per-component std
    for (int c = 0; c < y.coils; ++c) {
      cplx* row = y.coil(c);
      for (std::int64_t m = 0; m < y.samples_per_coil; ++m) {
        Rng rng = counter_rng(noise.seed, std::uint64_t(c), std::uint64_t(m));
        row[m] += cplx(s * rng.gaussian(), s * rng.gaussian());
      }
    }
  }
  return y;
}

}  // namespace wcrr
