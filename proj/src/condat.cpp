#include "wcrr3d/condat.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace wcrr {

std::array<ComplexVolume, 3> tv_forward_gradient(const ComplexVolume& x) {
  const Dims3 d = x.dims;
  std::array<ComplexVolume, 3> g{ComplexVolume(d), ComplexVolume(d), ComplexVolume(d)};
  for (int z = 0; z < d.nz; ++z) {
    const int zp = (z + 1) % d.nz;
    for (int y = 0; y < d.ny; ++y) {
      const int yp = (y + 1) % d.ny;
      for (int xx = 0; xx < d.nx; ++xx) {
        const int xp = (xx + 1) % d.nx;
        const cplx v = x.at(xx, y, z);
        g[0].at(xx, y, z) = x.at(xp, y, z) - v;
        g[1].at(xx, y, z) = x.at(xx, yp, z) - v;
        g[2].at(xx, y, z) = x.at(xx, y, zp) - v;
      }
    }
  }
  return g;
}

ComplexVolume tv_gradient_adjoint(const std::array<ComplexVolume, 3>& p) {
  const Dims3 d = p[0].dims;
  ComplexVolume out(d);
  for (int z = 0; z < d.nz; ++z) {
    const int zm = (z + d.nz - 1) % d.nz;
    for (int y = 0; y < d.ny; ++y) {
      const int ym = (y + d.ny - 1) % d.ny;
      for (int xx = 0; xx < d.nx; ++xx) {
        const int xm = (xx + d.nx - 1) % d.nx;
        out.at(xx, y, z) = (p[0].at(xm, y, z) - p[0].at(xx, y, z)) +
                           (p[1].at(xx, ym, z) - p[1].at(xx, y, z)) +
                           (p[2].at(xx, y, zm) - p[2].at(xx, y, z));
      }
    }
  }
  return out;
}

void project_tv_dual(std::array<ComplexVolume, 3>& p, double lambda) {
  const size_t n = p[0].data.size();
  for (size_t i = 0; i < n; ++i) {
    const double nr = std::sqrt(p[0].data[i].real() * p[0].data[i].real() +
                                p[1].data[i].real() * p[1].data[i].real() +
                                p[2].data[i].real() * p[2].data[i].real());
    const double ni = std::sqrt(p[0].data[i].imag() * p[0].data[i].imag() +
                                p[1].data[i].imag() * p[1].data[i].imag() +
                                p[2].data[i].imag() * p[2].data[i].imag());
    const double sr = nr > lambda ? lambda / nr : 1.0;
    const double si = ni > lambda ? lambda / ni : 1.0;
    for (int dir = 0; dir < 3; ++dir) {
      cplx& c = p[dir].data[i];
      c = {c.real() * sr, c.imag() * si};
    }
  }
}

namespace {

double tv_value(const ComplexVolume& x) {
  const std::array<ComplexVolume, 3> g = tv_forward_gradient(x);
  double s = 0;
  for (size_t i = 0; i < g[0].data.size(); ++i) {
    s += std::sqrt(g[0].data[i].real() * g[0].data[i].real() +
                   g[1].data[i].real() * g[1].data[i].real() +
                   g[2].data[i].real() * g[2].data[i].real());
    s += std::sqrt(g[0].data[i].imag() * g[0].data[i].imag() +
                   g[1].data[i].imag() * g[1].data[i].imag() +
                   g[2].data[i].imag() * g[2].data[i].imag());
  }
  return s;
}

}  // namespace

CondatResult condat_tv_reconstruct(const VolumeLinearOp& a, const RealVec& y, double lambda,
                                   const ComplexVolume& x0, double tau, double tol,
                                   int max_iters) {
  const auto t_start = std::chrono::steady_clock::now();
  const double eta = 1.0 / (24.0 * tau);
  const Dims3 d = x0.dims;

  CondatResult res;
  ComplexVolume x = x0;
  std::array<ComplexVolume, 3> p{ComplexVolume(d), ComplexVolume(d), ComplexVolume(d)};

  for (int k = 1; k <= max_iters; ++k) {
    // Dual ascent with projection.
    const std::array<ComplexVolume, 3> gx = tv_forward_gradient(x);
    std::array<ComplexVolume, 3> p_next = p;
    for (int dir = 0; dir < 3; ++dir)
      for (size_t i = 0; i < p_next[dir].data.size(); ++i)
        p_next[dir].data[i] += eta * gx[dir].data[i];
    project_tv_dual(p_next, lambda);

    // Primal descent with the extrapolated dual 2 p_next - p.
    RealVec residual = a.forward(x);
    for (size_t i = 0; i < residual.size(); ++i) residual[i] -= y[i];
    double data_term = 0;
    for (double r : residual) data_term += r * r;
    data_term *= 0.5;

    const ComplexVolume grad_data = a.adjoint(residual);
    std::array<ComplexVolume, 3> p_bar = p_next;
    for (int dir = 0; dir < 3; ++dir)
      for (size_t i = 0; i < p_bar[dir].data.size(); ++i)
        p_bar[dir].data[i] = 2.0 * p_next[dir].data[i] - p[dir].data[i];
    const ComplexVolume div_term = tv_gradient_adjoint(p_bar);

    double dx2 = 0, x2 = 0;
    for (size_t i = 0; i < x.data.size(); ++i) {
      const cplx step = tau * (grad_data.data[i] + div_term.data[i]);
      x2 += std::norm(x.data[i]);
      dx2 += std::norm(step);
      x.data[i] -= step;
      if (!std::isfinite(x.data[i].real()) || !std::isfinite(x.data[i].imag()))
        throw std::runtime_error("condat_tv_reconstruct: non-finite iterate");
    }
    p = std::move(p_next);

    const double rel = std::sqrt(dx2) / std::max(std::sqrt(x2), 1e-300);
    const double wall =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start)
            .count();
    res.trace.rows.push_back({k, data_term + lambda * tv_value(x), 1.0 / tau, rel, wall});
    if (rel < tol) {
      res.trace.converged = true;
      break;
    }
  }
  res.x = std::move(x);
  return res;
}

}  // namespace wcrr
