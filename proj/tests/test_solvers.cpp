#include <doctest.h>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "wcrr3d/condat.hpp"
#include "wcrr3d/solvers.hpp"

using namespace wcrr;

TEST_SUITE_BEGIN("solvers");

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.gaussian();
  return m;
}

RealVec to_vec(const Eigen::VectorXd& v) { return RealVec(v.data(), v.data() + v.size()); }
Eigen::VectorXd to_eigen(const RealVec& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), long(v.size()));
}

}  // namespace

TEST_CASE("nmapg: exact quadratic reaches the target") {
  Rng rng(1);
  RealVec a(16);
  for (double& e : a) e = rng.gaussian();

  Objective obj;
  obj.value = [&](const RealVec& x) {
    RealVec d = vec::lincomb(1.0, x, -1.0, a);
    return 0.5 * vec::dot(d, d);
  };
  obj.gradient = [&](const RealVec& x) { return vec::lincomb(1.0, x, -1.0, a); };

  SolverConfig cfg;
  cfg.eps = 1e-8;
  cfg.max_iters = 200;
  const NmapgResult res = nmapg_minimize(obj, RealVec(16, 0.0), cfg);
  const RealVec err = vec::lincomb(1.0, res.x, -1.0, a);
  CHECK(vec::nrm2(err) <= cfg.eps * vec::nrm2(a) * 10);
  CHECK(res.trace.converged);
  // Final energy never exceeds the initial energy.
  CHECK(res.trace.rows.back().objective <= 0.5 * vec::dot(a, a));
}

TEST_CASE("nmapg: least squares matches the normal-equations solution") {
  const Eigen::MatrixXd m = random_matrix(20, 10, 2);
  const Eigen::VectorXd b = random_matrix(20, 1, 3);
  const Eigen::VectorXd x_star = (m.transpose() * m).ldlt().solve(m.transpose() * b);

  Objective obj;
  obj.value = [&](const RealVec& x) { return 0.5 * (m * to_eigen(x) - b).squaredNorm(); };
  obj.gradient = [&](const RealVec& x) {
    return to_vec(Eigen::VectorXd(m.transpose() * (m * to_eigen(x) - b)));
  };

  SolverConfig cfg;
  cfg.eps = 1e-10;
  cfg.max_iters = 2000;
  cfg.initial_lipschitz = 1.0;
  const NmapgResult res = nmapg_minimize(obj, RealVec(10, 0.0), cfg);
  CHECK((to_eigen(res.x) - x_star).norm() <= 1e-6 * x_star.norm());
}

TEST_CASE("nmapg: objective trace is bounded below by inf J and c_k acceptance holds") {
  // Nonconvex scalar-ish objective: Rosenbrock-lite in 4D.
  Objective obj;
  obj.value = [](const RealVec& x) {
    double s = 0;
    for (size_t i = 0; i + 1 < x.size(); ++i)
      s += 10 * (x[i + 1] - x[i] * x[i]) * (x[i + 1] - x[i] * x[i]) + (1 - x[i]) * (1 - x[i]);
    return s;
  };
  obj.gradient = [](const RealVec& x) {
    RealVec g(x.size(), 0.0);
    for (size_t i = 0; i + 1 < x.size(); ++i) {
      const double t = x[i + 1] - x[i] * x[i];
      g[i] += -40 * t * x[i] - 2 * (1 - x[i]);
      g[i + 1] += 20 * t;
    }
    return g;
  };
  SolverConfig cfg;
  cfg.eps = 1e-9;
  cfg.max_iters = 3000;
  const NmapgResult res = nmapg_minimize(obj, RealVec(4, -0.5), cfg);
  CHECK(obj.value(res.x) < obj.value(RealVec(4, -0.5)));
  for (const TraceRow& r : res.trace.rows) CHECK(r.objective >= 0.0);  // inf J = 0
}

TEST_CASE("nmapg: non-finite objective aborts with diagnostic") {
  Objective obj;
  obj.value = [](const RealVec& x) { return std::log(x[0]); };  // NaN for x<=0
  obj.gradient = [](const RealVec& x) { return RealVec{1.0 / x[0]}; };
  SolverConfig cfg;
  cfg.max_iters = 50;
  CHECK_THROWS_AS(nmapg_minimize(obj, RealVec{-1.0}, cfg), std::runtime_error);
}

TEST_CASE("minres: identity solves in one iteration") {
  Rng rng(4);
  RealVec b(12);
  for (double& e : b) e = rng.gaussian();
  const MinresResult res = minres_solve([](const RealVec& v) { return v; }, b);
  CHECK(res.iterations == 1);
  CHECK(res.converged);
  for (size_t i = 0; i < b.size(); ++i) CHECK(res.x[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("minres: diagonal system has the reciprocal solution") {
  const RealVec b(5, 1.0);
  const MinresResult res = minres_solve(
      [](const RealVec& v) {
        RealVec out(v.size());
        for (size_t i = 0; i < v.size(); ++i) out[i] = double(i + 1) * v[i];
        return out;
      },
      b, {1e-12, 100, false});
  for (size_t i = 0; i < b.size(); ++i)
    CHECK(res.x[i] == doctest::Approx(1.0 / double(i + 1)).epsilon(1e-10));
}

TEST_CASE("minres: random symmetric indefinite system matches dense solve") {
  const int n = 30;
  Eigen::MatrixXd m = random_matrix(n, n, 5);
  m = ((m + m.transpose()) / 2).eval();
  m.diagonal().array() -= m.eigenvalues().real().mean();  // push toward indefinite
  const Eigen::VectorXd b = random_matrix(n, 1, 6);
  const Eigen::VectorXd x_star = m.fullPivLu().solve(b);

  const MinresResult res = minres_solve(
      [&](const RealVec& v) { return to_vec(Eigen::VectorXd(m * to_eigen(v))); }, to_vec(b),
      {1e-12, 500, true});
  CHECK(res.converged);
  CHECK((to_eigen(res.x) - x_star).norm() <= 1e-8 * x_star.norm());

  // Indefiniteness sanity: the shifted matrix should have both signs.
  const Eigen::VectorXd evals = m.selfadjointView<Eigen::Lower>().eigenvalues();
  CHECK(evals.minCoeff() < 0);
  CHECK(evals.maxCoeff() > 0);
}

TEST_CASE("minres: residual history non-increasing on SPD systems") {
  const int n = 25;
  Eigen::MatrixXd m = random_matrix(n, n, 7);
  m = (m * m.transpose()).eval();
  m.diagonal().array() += 1.0;
  const Eigen::VectorXd b = random_matrix(n, 1, 8);
  const MinresResult res = minres_solve(
      [&](const RealVec& v) { return to_vec(Eigen::VectorXd(m * to_eigen(v))); }, to_vec(b),
      {1e-13, 200, false});
  for (size_t i = 1; i < res.residual_history.size(); ++i)
    CHECK(res.residual_history[i] <= res.residual_history[i - 1] + 1e-12);
}

TEST_CASE("minres: non-symmetric operator detected when checking is on") {
  CHECK_THROWS_AS(minres_solve(
                      [](const RealVec& v) {
                        RealVec out(v.size(), 0.0);
                        out[0] = v[0] + 2 * v[1];
                        for (size_t i = 1; i < v.size(); ++i) out[i] = v[i];
                        return out;
                      },
                      RealVec(4, 1.0), {1e-10, 50, true}),
                  std::runtime_error);
}

TEST_CASE("power iteration: dominant magnitude eigenvalue of a diagonal") {
  const RealVec diag{3.0, -1.0, 2.0};
  const PowerIterResult res = power_iteration_norm(
      [&](const RealVec& v) {
        RealVec out(v.size());
        for (size_t i = 0; i < v.size(); ++i) out[i] = diag[i] * v[i];
        return out;
      },
      3, 50);
  CHECK(res.value == doctest::Approx(3.0).epsilon(1e-6));

  const PowerIterResult ident =
      power_iteration_norm([](const RealVec& v) { return v; }, 6, 1);
  CHECK(ident.value == doctest::Approx(1.0).epsilon(1e-14));

  const PowerIterResult zero = power_iteration_norm(
      [](const RealVec& v) { return RealVec(v.size(), 0.0); }, 5, 10);
  CHECK(zero.value == 0.0);
}

TEST_CASE("fista: g = 0 returns the quadratic center; l1 gives soft thresholding") {
  Rng rng(9);
  RealVec y(10);
  for (double& e : y) e = rng.gaussian();
  auto grad = [&](const RealVec& x) { return vec::lincomb(1.0, x, -1.0, y); };

  const FistaResult plain = fista_minimize(grad, nullptr, RealVec(10, 0.0), 1.0, 500, 1e-12);
  for (size_t i = 0; i < y.size(); ++i) CHECK(plain.x[i] == doctest::Approx(y[i]).epsilon(1e-8));

  const double lam = 0.4;
  auto prox = [&](const RealVec& x, double step) {
    RealVec out(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
      const double t = lam * step;
      out[i] = x[i] > t ? x[i] - t : (x[i] < -t ? x[i] + t : 0.0);
    }
    return out;
  };
  const FistaResult l1 = fista_minimize(grad, prox, RealVec(10, 0.0), 1.0, 500, 1e-12);
  for (size_t i = 0; i < y.size(); ++i) {
    const double expected = y[i] > lam ? y[i] - lam : (y[i] < -lam ? y[i] + lam : 0.0);
    CHECK(l1.x[i] == doctest::Approx(expected).epsilon(1e-8));
  }
}

TEST_CASE("fista: lasso matches a long-run plain ISTA oracle") {
  const Eigen::MatrixXd m = random_matrix(15, 8, 10);
  const Eigen::VectorXd b = random_matrix(15, 1, 11);
  const double lam = 0.15;
  const double lip = (m.transpose() * m).operatorNorm();
  const double step = 1.0 / lip;

  auto grad = [&](const RealVec& x) {
    return to_vec(Eigen::VectorXd(m.transpose() * (m * to_eigen(x) - b)));
  };
  auto prox = [&](const RealVec& x, double s) {
    RealVec out(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
      const double t = lam * s;
      out[i] = x[i] > t ? x[i] - t : (x[i] < -t ? x[i] + t : 0.0);
    }
    return out;
  };
  auto objective = [&](const RealVec& x) {
    double l1 = 0;
    for (double e : x) l1 += std::abs(e);
    return 0.5 * (m * to_eigen(x) - b).squaredNorm() + lam * l1;
  };

  // Independent oracle: plain (non-accelerated) proximal gradient, 100k iters.
  RealVec ista(8, 0.0);
  for (int k = 0; k < 100000; ++k) {
    RealVec g = grad(ista);
    vec::axpy(-step, g, ista);
    ista = prox(ista, step);
  }

  const FistaResult fista = fista_minimize(grad, prox, RealVec(8, 0.0), step, 20000, 1e-14);
  CHECK(objective(fista.x) <= objective(ista) + 1e-5 * std::abs(objective(ista)));
  CHECK(std::abs(objective(fista.x) - objective(ista)) <= 1e-5 * std::abs(objective(ista)));
}

TEST_CASE("fista: objective within the O(1/k^2) envelope on a convex quadratic") {
  const Eigen::MatrixXd m = random_matrix(12, 12, 12);
  const Eigen::MatrixXd q = m * m.transpose() + Eigen::MatrixXd::Identity(12, 12);
  const Eigen::VectorXd b = random_matrix(12, 1, 13);
  const Eigen::VectorXd x_star = q.ldlt().solve(b);
  const double lip = q.operatorNorm();
  const double f_star = 0.5 * x_star.dot(q * x_star) - b.dot(x_star);

  auto value = [&](const RealVec& x) {
    const Eigen::VectorXd e = to_eigen(x);
    return 0.5 * e.dot(q * e) - b.dot(e);
  };
  auto grad = [&](const RealVec& x) { return to_vec(Eigen::VectorXd(q * to_eigen(x) - b)); };

  const RealVec x0(12, 0.0);
  const double r0 = (to_eigen(x0) - x_star).norm();
  for (int k : {5, 10, 20, 40}) {
    const FistaResult res = fista_minimize(grad, nullptr, x0, 1.0 / lip, k, 0.0);
    const double bound = 2.0 * lip * r0 * r0 / double((k + 1) * (k + 1));
    CHECK(value(res.x) - f_star <= bound * (1 + 1e-9));
  }
}

TEST_CASE("condat: lambda = 0 with identity operator returns the data") {
  const Dims3 d{6, 6, 6};
  const ComplexVolume y = oracle::random_volume(d, 14);
  VolumeLinearOp ident;
  ident.forward = [](const ComplexVolume& v) { return to_real_vector(v); };
  ident.adjoint = [d](const RealVec& v) { return from_real_vector(v, d); };

  const CondatResult res =
      condat_tv_reconstruct(ident, to_real_vector(y), 0.0, ComplexVolume(d), 1.0, 1e-10, 2000);
  double err = 0;
  for (size_t i = 0; i < y.data.size(); ++i) err += std::norm(res.x.data[i] - y.data[i]);
  CHECK(std::sqrt(err) <= 1e-6 * norm(y));
}

TEST_CASE("condat: huge lambda flattens to the mean") {
  const Dims3 d{5, 5, 5};
  ComplexVolume y = oracle::random_volume(d, 15);
  VolumeLinearOp ident;
  ident.forward = [](const ComplexVolume& v) { return to_real_vector(v); };
  ident.adjoint = [d](const RealVec& v) { return from_real_vector(v, d); };

  const CondatResult res =
      condat_tv_reconstruct(ident, to_real_vector(y), 1e4, ComplexVolume(d), 1.0, 1e-12, 20000);
  cplx mean = 0;
  for (const cplx& c : y.data) mean += c;
  mean /= double(y.data.size());
  for (const cplx& c : res.x.data) CHECK(std::abs(c - mean) <= 2e-3);
}

TEST_CASE("condat: 1D embedding agrees with the taut-string oracle") {
  const int n = 48;
  // Mirror-symmetric signal: the linear-TV solution then has equal
  // endpoint values, so it is also the optimum of the periodic problem.
  Rng rng(16);
  std::vector<double> y1d(static_cast<size_t>(n));
  for (int i = 0; i < n / 2; ++i) {
    const double v = (i / 12 == 0 ? 0.2 : 1.1) + 0.25 * rng.gaussian();
    y1d[size_t(i)] = v;
    y1d[size_t(n - 1 - i)] = v;
  }
  const double lam = 0.3;
  const std::vector<double> exact = oracle::tv1d_taut_string(y1d, lam);
  REQUIRE(std::abs(exact.front() - exact.back()) < 1e-12);

  const Dims3 d{n, 1, 1};
  ComplexVolume y(d);
  for (int i = 0; i < n; ++i) y.at(i, 0, 0) = {y1d[size_t(i)], 0.0};
  VolumeLinearOp ident;
  ident.forward = [](const ComplexVolume& v) { return to_real_vector(v); };
  ident.adjoint = [d](const RealVec& v) { return from_real_vector(v, d); };

  const CondatResult res =
      condat_tv_reconstruct(ident, to_real_vector(y), lam, ComplexVolume(d), 1.0, 1e-11, 50000);
  double err = 0;
  for (int i = 0; i < n; ++i) err += std::norm(res.x.at(i, 0, 0) - cplx(exact[size_t(i)], 0.0));
  CHECK(std::sqrt(err) <= 1e-3);
}

TEST_CASE("condat: gradient/adjoint pair and dual projection") {
  const Dims3 d{4, 5, 3};
  const ComplexVolume u = oracle::random_volume(d, 17);
  std::array<ComplexVolume, 3> p{oracle::random_volume(d, 18), oracle::random_volume(d, 19),
                                 oracle::random_volume(d, 20)};
  // <grad u, p> == <u, grad^T p>
  const std::array<ComplexVolume, 3> gu = tv_forward_gradient(u);
  cplx lhs = 0;
  for (int dir = 0; dir < 3; ++dir) lhs += inner(gu[size_t(dir)], p[size_t(dir)]);
  const cplx rhs = inner(u, tv_gradient_adjoint(p));
  CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));

  const double lam = 0.7;
  project_tv_dual(p, lam);
  for (size_t i = 0; i < p[0].data.size(); ++i) {
    const double nr = std::sqrt(p[0].data[i].real() * p[0].data[i].real() +
                                p[1].data[i].real() * p[1].data[i].real() +
                                p[2].data[i].real() * p[2].data[i].real());
    const double ni = std::sqrt(p[0].data[i].imag() * p[0].data[i].imag() +
                                p[1].data[i].imag() * p[1].data[i].imag() +
                                p[2].data[i].imag() * p[2].data[i].imag());
    CHECK(nr <= lam * (1 + 1e-12));
    CHECK(ni <= lam * (1 + 1e-12));
  }
}

TEST_SUITE_END();
