#include "wcrr3d/solvers.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

#include "wcrr3d/rng.hpp"

namespace wcrr {

namespace vec {

double dot(const RealVec& a, const RealVec& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double nrm2(const RealVec& v) { return std::sqrt(dot(v, v)); }

void axpy(double a, const RealVec& x, RealVec& y) {
  for (size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

RealVec lincomb(double a, const RealVec& x, double b, const RealVec& y) {
  RealVec out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = a * x[i] + b * y[i];
  return out;
}

}  // namespace vec

void SolverTrace::write_csv(const std::string& path) const {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("SolverTrace: cannot open " + path);
  std::fprintf(f, "iter,objective,L_k,rel_change,wall_ms\n");
  for (const TraceRow& r : rows)
    std::fprintf(f, "%d,%.12g,%.12g,%.12g,%.3f\n", r.iter, r.objective, r.lipschitz, r.rel_change,
                 r.wall_ms);
  std::fclose(f);
}

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v))
    throw std::runtime_error(std::string("nmapg: non-finite objective value in ") + what);
}

/// Barzilai-Borwein estimate <dg,dg>/<dg,dx>; falls back to `previous`
/// when the curvature inner product is non-positive or tiny.
double bb_estimate(const RealVec& dg, const RealVec& dx, double previous) {
  const double num = vec::dot(dg, dg);
  const double den = vec::dot(dg, dx);
  const double guard = 1e-12 * std::sqrt(num) * vec::nrm2(dx);
  if (den <= guard) return previous;
  return num / den;
}

}  // namespace

NmapgResult nmapg_minimize(const Objective& obj, const RealVec& x0, const SolverConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();
  NmapgResult res;
  SolverTrace& trace = res.trace;

  auto step_candidate = [&](const RealVec& point, const RealVec& grad, double lipschitz) {
    RealVec cand = point;
    vec::axpy(-1.0 / lipschitz, grad, cand);
    if (obj.prox) cand = obj.prox(cand, 1.0 / lipschitz);
    return cand;
  };

  RealVec x_prev = x0;            // x_{k-1}
  RealVec x = x0;                 // x_k
  RealVec z = x0;                 // z_k
  RealVec xbar_prev = x0;         // xbar_{k-1}; equal to x_1 so the BB guard fires at k=1
  RealVec gbar_prev;              // grad at xbar_{k-1}
  double t_prev = 0.0, t = 1.0;   // t_0, t_1
  double q = 1.0;                 // q_1
  double c = obj.value(x);        // c_1 = J(x_1)
  require_finite(c, "initial point");
  double lipschitz = cfg.initial_lipschitz;

  for (int k = 1; k <= cfg.max_iters; ++k) {
    // Extrapolation.
    RealVec xbar(x.size());
    for (size_t i = 0; i < x.size(); ++i)
      xbar[i] = x[i] + (t_prev / t) * (z[i] - x[i]) + ((t_prev - 1.0) / t) * (x[i] - x_prev[i]);

    RealVec gbar = obj.gradient(xbar);
    const double j_xbar = obj.value(xbar);
    require_finite(j_xbar, "extrapolated point");

    if (k > 1) {
      const RealVec dg = vec::lincomb(1.0, gbar, -1.0, gbar_prev);
      const RealVec dx = vec::lincomb(1.0, xbar, -1.0, xbar_prev);
      lipschitz = bb_estimate(dg, dx, lipschitz);
    }

    const double c_relaxed = std::max(j_xbar, c);

    // Line search from the extrapolated point.
    RealVec z_next;
    double j_z = 0, dist2_z = 0;
    for (int l = 1; l <= cfg.line_search_cap; ++l) {
      z_next = step_candidate(xbar, gbar, lipschitz);
      j_z = obj.value(z_next);
      require_finite(j_z, "line search");
      const RealVec dz = vec::lincomb(1.0, z_next, -1.0, xbar);
      dist2_z = vec::dot(dz, dz);
      if (j_z <= c_relaxed - cfg.delta * dist2_z) break;
      if (l == cfg.line_search_cap) {
        trace.line_search_capped = true;
        break;
      }
      lipschitz /= cfg.rho;
      if (lipschitz > 1e300) throw std::runtime_error("nmapg: Lipschitz estimate overflow");
    }

    RealVec x_next;
    double j_next;
    if (j_z <= c - cfg.delta * dist2_z) {
      x_next = z_next;
      j_next = j_z;
    } else {
      // Fallback candidate without extrapolation, with its own BB
      // estimate from (x_k, xbar_{k-1}) and line search.
      RealVec gx = obj.gradient(x);
      if (!gbar_prev.empty()) {
        const RealVec dg = vec::lincomb(1.0, gx, -1.0, gbar_prev);
        const RealVec dx = vec::lincomb(1.0, x, -1.0, xbar_prev);
        lipschitz = bb_estimate(dg, dx, lipschitz);
      }
      RealVec v_next;
      double j_v = 0;
      for (int l = 1; l <= cfg.line_search_cap; ++l) {
        v_next = step_candidate(x, gx, lipschitz);
        j_v = obj.value(v_next);
        require_finite(j_v, "fallback line search");
        const RealVec dv = vec::lincomb(1.0, v_next, -1.0, x);
        if (j_v <= c - cfg.delta * vec::dot(dv, dv)) break;
        if (l == cfg.line_search_cap) {
          trace.line_search_capped = true;
          break;
        }
        lipschitz /= cfg.rho;
        if (lipschitz > 1e300) throw std::runtime_error("nmapg: Lipschitz estimate overflow");
      }
      if (j_z <= j_v) {
        x_next = z_next;
        j_next = j_z;
      } else {
        x_next = v_next;
        j_next = j_v;
      }
    }

    const double t_next = (std::sqrt(4.0 * t * t + 1.0) + 1.0) / 2.0;
    const double q_next = cfg.eta * q + 1.0;
    c = (cfg.eta * q * c + j_next) / q_next;
    q = q_next;
    t_prev = t;
    t = t_next;
    xbar_prev = std::move(xbar);
    gbar_prev = std::move(gbar);
    x_prev = std::move(x);
    x = std::move(x_next);
    z = std::move(z_next);

    const RealVec dx = vec::lincomb(1.0, x, -1.0, x_prev);
    const double denom = std::max(vec::nrm2(x_prev), 1e-300);
    const double rel = vec::nrm2(dx) / denom;
    trace.rows.push_back({k, j_next, lipschitz, rel, elapsed_ms(t_start)});
    if (rel < cfg.eps) {
      trace.converged = true;
      break;
    }
  }

  res.x = std::move(x);
  return res;
}

MinresResult minres_solve(const std::function<RealVec(const RealVec&)>& apply_a, const RealVec& b,
                          const MinresOptions& opts) {
  const std::int64_t n = std::int64_t(b.size());
  MinresResult res;
  res.x.assign(b.size(), 0.0);

  if (opts.check_symmetry) {
    Rng rng(101);
    RealVec u(b.size()), v(b.size());
    for (double& e : u) e = rng.gaussian();
    for (double& e : v) e = rng.gaussian();
    const double lhs = vec::dot(apply_a(u), v);
    const double rhs = vec::dot(u, apply_a(v));
    const double scale = std::max(1.0, std::abs(lhs));
    if (std::abs(lhs - rhs) > 1e-8 * scale)
      throw std::runtime_error("minres: operator is not symmetric");
  }

  const double beta1 = vec::nrm2(b);
  if (beta1 == 0.0) {
    res.converged = true;
    return res;
  }

  const int max_iters = opts.max_iters > 0 ? opts.max_iters : int(4 * n);

  // Lanczos + Givens recurrences (Paige & Saunders).
  RealVec r1 = b;
  RealVec r2 = b;
  double beta = beta1, oldb = 0;
  double dbar = 0, epsln = 0, qrnorm = beta1, phibar = beta1;
  double cs = -1.0, sn = 0.0, oldeps = 0;
  RealVec w(b.size(), 0.0), w2(b.size(), 0.0);

  for (int itn = 1; itn <= max_iters; ++itn) {
    RealVec v(b.size());
    for (size_t i = 0; i < v.size(); ++i) v[i] = r2[i] / beta;
    RealVec y = apply_a(v);
    if (itn >= 2) vec::axpy(-beta / oldb, r1, y);
    const double alfa = vec::dot(v, y);
    vec::axpy(-alfa / beta, r2, y);
    r1 = std::move(r2);
    r2 = std::move(y);
    oldb = beta;
    beta = vec::nrm2(r2);

    oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;

    double gamma = std::sqrt(gbar * gbar + beta * beta);
    const bool breakdown = gamma < 1e-300;
    gamma = std::max(gamma, 1e-300);
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    RealVec w1 = std::move(w2);
    w2 = w;
    w.resize(b.size());
    for (size_t i = 0; i < w.size(); ++i)
      w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
    vec::axpy(phi, w, res.x);

    qrnorm = phibar;
    res.iterations = itn;
    res.residual_history.push_back(qrnorm);
    if (qrnorm <= opts.tol * beta1 || breakdown) {
      res.converged = qrnorm <= opts.tol * beta1 || beta < 1e-300 * beta1;
      break;
    }
  }
  return res;
}

PowerIterResult power_iteration_norm(const std::function<RealVec(const RealVec&)>& apply_a,
                                     std::int64_t dim, int iters, std::uint64_t seed) {
  if (iters < 1) throw std::invalid_argument("power_iteration_norm: iters must be >= 1");
  Rng rng(seed);
  RealVec v(static_cast<size_t>(dim));
  for (double& e : v) e = rng.gaussian();
  const double n0 = vec::nrm2(v);
  for (double& e : v) e /= n0;

  PowerIterResult res;
  for (int it = 0; it < iters; ++it) {
    RealVec av = apply_a(v);
    res.value = std::abs(vec::dot(v, av));
    const double n = vec::nrm2(av);
    if (n == 0.0) {
      res.value = 0.0;
      res.vector = v;
      return res;
    }
    for (double& e : av) e /= n;
    v = std::move(av);
  }
  res.vector = std::move(v);
  return res;
}

FistaResult fista_minimize(const std::function<RealVec(const RealVec&)>& grad_f,
                           const std::function<RealVec(const RealVec&, double)>& prox_g,
                           const RealVec& x0, double step, int max_iters, double tol,
                           const std::function<double(const RealVec&)>& f_value) {
  const auto t_start = std::chrono::steady_clock::now();
  FistaResult res;
  RealVec x = x0;
  RealVec y = x0;
  double t = 1.0;

  for (int k = 1; k <= max_iters; ++k) {
    RealVec x_next = y;
    vec::axpy(-step, grad_f(y), x_next);
    if (prox_g) x_next = prox_g(x_next, step);
    for (double e : x_next)
      if (!std::isfinite(e)) throw std::runtime_error("fista: non-finite iterate");

    const double t_next = (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0;
    const RealVec dx = vec::lincomb(1.0, x_next, -1.0, x);
    y = x_next;
    vec::axpy((t - 1.0) / t_next, dx, y);

    const double rel = vec::nrm2(dx) / std::max(vec::nrm2(x), 1e-300);
    x = std::move(x_next);
    t = t_next;
    res.iterations = k;
    res.trace.rows.push_back(
        {k, f_value ? f_value(x) : 0.0, 1.0 / step, rel, elapsed_ms(t_start)});
    if (rel < tol) {
      res.trace.converged = true;
      break;
    }
  }
  res.x = std::move(x);
  return res;
}

}  // namespace wcrr
