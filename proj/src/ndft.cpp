#include "wcrr3d/ndft.hpp"

#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace wcrr {

NdftPlan::NdftPlan(const KSpaceTrajectory& traj, Dims3 dims) : dims_(dims), m_(traj.samples()) {
  if (dims.nx <= 0 || dims.ny <= 0 || dims.nz <= 0)
    throw std::invalid_argument("NdftPlan: dims must be positive");
  const int nx = dims.nx, ny = dims.ny, nz = dims.nz;
  tab_x_re_.resize(size_t(m_) * nx);
  tab_x_im_.resize(size_t(m_) * nx);
  tab_y_re_.resize(size_t(m_) * ny);
  tab_y_im_.resize(size_t(m_) * ny);
  tab_z_re_.resize(size_t(m_) * nz);
  tab_z_im_.resize(size_t(m_) * nz);

  const double cx = std::floor(nx / 2.0), cy = std::floor(ny / 2.0), cz = std::floor(nz / 2.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t m = 0; m < m_; ++m) {
    const auto& k = traj.points[size_t(m)];
    for (int i = 0; i < nx; ++i) {
      const double ph = -2.0 * M_PI * k[0] * (i - cx);
      tab_x_re_[size_t(m) * nx + i] = std::cos(ph);
      tab_x_im_[size_t(m) * nx + i] = std::sin(ph);
    }
    for (int j = 0; j < ny; ++j) {
      const double ph = -2.0 * M_PI * k[1] * (j - cy);
      tab_y_re_[size_t(m) * ny + j] = std::cos(ph);
      tab_y_im_[size_t(m) * ny + j] = std::sin(ph);
    }
    for (int l = 0; l < nz; ++l) {
      const double ph = -2.0 * M_PI * k[2] * (l - cz);
      tab_z_re_[size_t(m) * nz + l] = std::cos(ph);
      tab_z_im_[size_t(m) * nz + l] = std::sin(ph);
    }
  }
}

std::vector<cplx> NdftPlan::forward(const ComplexVolume& x) const {
  if (x.dims != dims_) throw std::invalid_argument("NdftPlan::forward: dim mismatch");
  const int nx = dims_.nx, ny = dims_.ny, nz = dims_.nz;
  const std::int64_t n = dims_.count();

  // Split storage so the inner loops vectorize.
  std::vector<double> xr(static_cast<size_t>(n)), xi(static_cast<size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    xr[size_t(i)] = x.data[size_t(i)].real();
    xi[size_t(i)] = x.data[size_t(i)].imag();
  }

  std::vector<cplx> out(static_cast<size_t>(m_));
#pragma omp parallel
  {
    std::vector<double> syr(static_cast<size_t>(ny) * nz), syi(static_cast<size_t>(ny) * nz);
#pragma omp for schedule(static)
    for (std::int64_t m = 0; m < m_; ++m) {
      const double* axr = &tab_x_re_[size_t(m) * nx];
      const double* axi = &tab_x_im_[size_t(m) * nx];
      // Stage 1: contract over x.
      for (int zy = 0; zy < ny * nz; ++zy) {
        const double* vr = &xr[size_t(zy) * nx];
        const double* vi = &xi[size_t(zy) * nx];
        double sr = 0, si = 0;
        for (int i = 0; i < nx; ++i) {
          sr += axr[i] * vr[i] - axi[i] * vi[i];
          si += axr[i] * vi[i] + axi[i] * vr[i];
        }
        syr[size_t(zy)] = sr;
        syi[size_t(zy)] = si;
      }
      // Stage 2: contract over y, then z.
      const double* ayr = &tab_y_re_[size_t(m) * ny];
      const double* ayi = &tab_y_im_[size_t(m) * ny];
      const double* azr = &tab_z_re_[size_t(m) * nz];
      const double* azi = &tab_z_im_[size_t(m) * nz];
      double tr = 0, ti = 0;
      for (int l = 0; l < nz; ++l) {
        double sr = 0, si = 0;
        const double* ryr = &syr[size_t(l) * ny];
        const double* ryi = &syi[size_t(l) * ny];
        for (int j = 0; j < ny; ++j) {
          sr += ayr[j] * ryr[j] - ayi[j] * ryi[j];
          si += ayr[j] * ryi[j] + ayi[j] * ryr[j];
        }
        tr += azr[l] * sr - azi[l] * si;
        ti += azr[l] * si + azi[l] * sr;
      }
      out[size_t(m)] = {tr, ti};
    }
  }
  return out;
}

ComplexVolume NdftPlan::adjoint(const std::vector<cplx>& y) const {
  if (std::int64_t(y.size()) != m_) throw std::invalid_argument("NdftPlan::adjoint: length mismatch");
  const int nx = dims_.nx, ny = dims_.ny, nz = dims_.nz;
  ComplexVolume out(dims_);
  std::vector<double> or_(static_cast<size_t>(dims_.count())), oi(static_cast<size_t>(dims_.count()));

  // Adjoint phases are the conjugate tables. Each z-slab is owned by one
  // thread, so the per-voxel accumulation order is fixed.
#pragma omp parallel for schedule(static)
  for (int l = 0; l < nz; ++l) {
    for (std::int64_t m = 0; m < m_; ++m) {
      const double wzr = tab_z_re_[size_t(m) * nz + l];
      const double wzi = -tab_z_im_[size_t(m) * nz + l];
      const double yr = y[size_t(m)].real(), yi = y[size_t(m)].imag();
      const double br = yr * wzr - yi * wzi;
      const double bi = yr * wzi + yi * wzr;
      const double* ayr = &tab_y_re_[size_t(m) * ny];
      const double* ayi = &tab_y_im_[size_t(m) * ny];
      const double* axr = &tab_x_re_[size_t(m) * nx];
      const double* axi = &tab_x_im_[size_t(m) * nx];
      for (int j = 0; j < ny; ++j) {
        const double cr = br * ayr[j] + bi * ayi[j];   // b * conj(ay)
        const double ci = bi * ayr[j] - br * ayi[j];
        double* pr = &or_[(size_t(l) * ny + j) * nx];
        double* pi = &oi[(size_t(l) * ny + j) * nx];
        for (int i = 0; i < nx; ++i) {
          pr[i] += cr * axr[i] + ci * axi[i];          // c * conj(ax)
          pi[i] += ci * axr[i] - cr * axi[i];
        }
      }
    }
  }
  for (std::int64_t i = 0; i < dims_.count(); ++i)
    out.data[size_t(i)] = {or_[size_t(i)], oi[size_t(i)]};
  return out;
}

std::vector<cplx> ndft_forward(const ComplexVolume& x, const KSpaceTrajectory& traj) {
  return NdftPlan(traj, x.dims).forward(x);
}

ComplexVolume ndft_adjoint(const std::vector<cplx>& y, const KSpaceTrajectory& traj, Dims3 dims) {
  return NdftPlan(traj, dims).adjoint(y);
}

}  // namespace wcrr
