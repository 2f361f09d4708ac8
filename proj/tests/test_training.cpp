#include <doctest.h>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "wcrr3d/phantom.hpp"
#include "wcrr3d/training.hpp"

using namespace wcrr;

TEST_SUITE_BEGIN("training");

namespace {

WcrrModel fd_test_model(Dims3 dims, std::uint64_t seed,
                        const std::vector<int>& plan = {2, 2, 2}) {
  WcrrModel m = WcrrModel::create(plan, RotationSet::identity_only(), seed);
  Rng rng(seed + 1);
  for (double& c : m.potentials.knot_values) c = rng.uniform(-0.2, 0.2);
  m.filter_bank = normalize(m.filter_bank, dims);
  return m;
}

double training_loss(WcrrModel model, const ComplexVolume& y, const ComplexVolume& clean,
                     double sigma, Dims3 norm_dims) {
  model.filter_bank = normalize(model.filter_bank, norm_dims);
  SolverConfig cfg;
  cfg.eps = 1e-12;
  cfg.max_iters = 4000;
  const DenoiseResult den = denoise(model, y, sigma, cfg);
  const ComplexVolume diff = axpy(den.x, -1.0, clean);
  const double n = norm(diff);
  return n * n;
}

}  // namespace

TEST_CASE("adabelief: zero gradient from fresh state is the identity") {
  OptimizerState st(4);
  RealVec params{1.0, -2.0, 0.5, 3.0};
  const RealVec before = params;
  adabelief_step(st, params, RealVec(4, 0.0), 0.1);
  CHECK(params == before);
}

TEST_CASE("adabelief: single scalar step hand-computed") {
  OptimizerState st(1);
  RealVec params{2.0};
  adabelief_step(st, params, RealVec{1.0}, 0.1);
  // m = 0.1, mhat = 1; s = 0.001*(0.9)^2 = 8.1e-4, shat = 0.81;
  // update = 0.1 * 1 / (0.9 + 1e-16).
  CHECK(params[0] == doctest::Approx(2.0 - 0.1 / 0.9).epsilon(1e-12));
}

TEST_CASE("adabelief: constant gradients give monotone movement matching the recurrence") {
  OptimizerState st(1);
  RealVec params{0.0};
  const double g = 0.7, lr = 0.01;

  // Independent iteration of the published recurrence.
  double m = 0, s = 0, ref = 0;
  double prev = 0;
  for (int t = 1; t <= 100; ++t) {
    adabelief_step(st, params, RealVec{g}, lr);

    m = 0.9 * m + 0.1 * g;
    const double diff = g - m;
    s = 0.999 * s + 0.001 * diff * diff;
    const double mhat = m / (1.0 - std::pow(0.9, t));
    const double shat = s / (1.0 - std::pow(0.999, t));
    ref -= lr * mhat / (std::sqrt(shat) + 1e-16);

    REQUIRE(params[0] == doctest::Approx(ref).epsilon(1e-14));
    REQUIRE(params[0] < prev);  // monotone movement against the gradient
    prev = params[0];
  }
}

TEST_CASE("corrupt: identity at sigma 0, deterministic, correct statistics") {
  const ComplexVolume x = oracle::random_volume({6, 6, 6}, 80);
  const ComplexVolume same = corrupt(x, 0.0, 5);
  for (size_t i = 0; i < x.data.size(); ++i) REQUIRE(same.data[i] == x.data[i]);

  const ComplexVolume a = corrupt(x, 0.1, 5);
  const ComplexVolume b = corrupt(x, 0.1, 5);
  for (size_t i = 0; i < a.data.size(); ++i) REQUIRE(a.data[i] == b.data[i]);

  const ComplexVolume big(Dims3{40, 40, 40});
  const ComplexVolume noisy = corrupt(big, 0.1, 6);
  double sr = 0, si = 0;
  for (const cplx& c : noisy.data) {
    sr += c.real() * c.real();
    si += c.imag() * c.imag();
  }
  const double n = double(noisy.data.size());
  CHECK(std::sqrt(sr / n) == doctest::Approx(0.1).epsilon(0.02));
  CHECK(std::sqrt(si / n) == doctest::Approx(0.1).epsilon(0.02));
}

TEST_CASE("denoise: zero input and constant input are fixed points") {
  const Dims3 d{6, 6, 6};
  const WcrrModel m = fd_test_model(d, 81);
  SolverConfig cfg;
  cfg.eps = 1e-10;
  cfg.max_iters = 500;

  const DenoiseResult zero = denoise(m, ComplexVolume(d), 0.05, cfg);
  CHECK(norm(zero.x) <= 1e-12);

  ComplexVolume constant(d);
  for (cplx& c : constant.data) c = {0.8, -0.2};
  const DenoiseResult flat = denoise(m, constant, 0.05, cfg);
  double err = 0;
  for (size_t i = 0; i < flat.x.data.size(); ++i)
    err += std::norm(flat.x.data[i] - constant.data[i]);
  CHECK(std::sqrt(err) <= 1e-10 * norm(constant));
}

TEST_CASE("denoise: fixed-point residual below 1e-3 ||y|| at eps = 1e-4") {
  const Dims3 d{8, 8, 8};
  WcrrModel m = WcrrModel::create({2, 4, 8}, RotationSet::axis_quarter_turns(), 82);
  Rng rng(83);
  for (double& c : m.potentials.knot_values) c = rng.uniform(-0.3, 0.3);
  m.filter_bank = normalize(m.filter_bank, d);

  const ComplexVolume clean = generate_phantom(EllipsoidPhantom::default_spec(), d);
  const ComplexVolume y = corrupt(clean, 0.08, 84);
  SolverConfig cfg;
  cfg.eps = 1e-4;
  cfg.max_iters = 2000;
  const DenoiseResult den = denoise(m, y, 0.08, cfg);
  CHECK(den.fixed_point_residual <= 1e-3 * norm(y));
  // Energy decreased relative to the initial point x0 = y.
  REQUIRE(!den.trace.rows.empty());
  const double n0 = norm(axpy(y, -1.0, y));
  const double j0 = 0.5 * n0 * n0 + wcrr_value(m, y, 0.08);
  CHECK(den.trace.rows.back().objective <= j0);
}

TEST_CASE("param_gradient: zero loss gradient gives zero parameter gradient") {
  const Dims3 d{6, 6, 6};
  const WcrrModel m = fd_test_model(d, 85);
  const ComplexVolume x = oracle::random_volume(d, 86);
  const ModelGrad g = param_gradient(m, x, 0.05, x, ComplexVolume(d));
  for (const auto& l : g.filters.layers)
    for (double w : l) REQUIRE(w == 0.0);
  for (double k : g.knots) REQUIRE(k == 0.0);
  CHECK(g.b == 0.0);
}

TEST_CASE("implicit system: (I + H) is symmetric PSD at converged points") {
  const Dims3 d{6, 6, 6};
  const WcrrModel m = fd_test_model(d, 87, {2, 3, 4});
  const ComplexVolume y = corrupt(oracle::random_volume(d, 88), 0.05, 89);
  SolverConfig cfg;
  cfg.eps = 1e-8;
  cfg.max_iters = 1000;
  const DenoiseResult den = denoise(m, y, 0.05, cfg);

  Rng rng(90);
  for (int probe = 0; probe < 10; ++probe) {
    ComplexVolume v(d);
    for (cplx& c : v.data) c = {rng.gaussian(), rng.gaussian()};
    const ComplexVolume hv = wcrr_hvp(m, den.x, 0.05, v);
    const double quad = inner(v, hv).real() + norm(v) * norm(v);
    CHECK(quad >= -1e-8 * norm(v) * norm(v));
  }
}

TEST_CASE("knot-shift reparametrization consistency (chain rule through the spline)") {
  const Dims3 d{6, 6, 6};
  const double sigma = 0.047;
  WcrrModel m = fd_test_model(d, 91);
  const ComplexVolume x = oracle::random_volume(d, 92);
  const ComplexVolume v = oracle::random_volume(d, 93);

  // Shifting all knots of channel j by +ln 2 doubles alpha_j. The sum of
  // the two active knot gradients equals the finite difference of the
  // uniform per-channel shift for both the base and the shifted model.
  for (int variant = 0; variant < 2; ++variant) {
    if (variant == 1) {
      for (double& c : m.potentials.knot_values) c += std::log(2.0);
    }
    const ModelGrad g = wcrr_inner_product_theta_gradient(m, x, v, sigma);
    const int k_knots = m.potentials.knots;
    for (int j = 0; j < m.potentials.channels; ++j) {
      double active_sum = 0;
      for (int k = 0; k < k_knots; ++k) active_sum += g.knots[size_t(j * k_knots + k)];

      const double h = 1e-6;
      auto inner_of = [&](double shift) {
        WcrrModel pert = m;
        for (int k = 0; k < k_knots; ++k) pert.potentials.knot_values[size_t(j * k_knots + k)] += shift;
        const ComplexVolume grad_r = wcrr_grad(pert, x, sigma);
        return inner(grad_r, v).real();
      };
      const double fd = (inner_of(h) - inner_of(-h)) / (2 * h);
      REQUIRE(active_sum == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("param_gradient: end-to-end finite differences on a 6^3 instance") {
  const Dims3 d{6, 6, 6};
  const double sigma = 0.05;
  const WcrrModel m = fd_test_model(d, 94);

  const ComplexVolume clean =
      generate_phantom(EllipsoidPhantom::random_spec(95, 4), d);
  const ComplexVolume y = corrupt(clean, sigma, 96);

  SolverConfig tight;
  tight.eps = 1e-12;
  tight.max_iters = 4000;
  const DenoiseResult den = denoise(m, y, sigma, tight);
  ComplexVolume loss_grad = axpy(den.x, -1.0, clean);
  for (cplx& c : loss_grad.data) c *= 2.0;
  const ModelGrad analytic = param_gradient(m, y, sigma, den.x, loss_grad, 1e-11, 2000);

  const RealVec flat = analytic.flatten();
  RealVec params = get_params(m);
  REQUIRE(flat.size() == params.size());

  // Probe kernel weights in every layer, the two active spline knots of
  // each channel, and b.
  std::vector<size_t> probes;
  Rng pick(97);
  const size_t l0 = m.filter_bank.layers[0].weights.size();
  const size_t l1 = m.filter_bank.layers[1].weights.size();
  for (int i = 0; i < 4; ++i) probes.push_back(size_t(pick.uniform_int(int(l0))));
  for (int i = 0; i < 4; ++i) probes.push_back(l0 + size_t(pick.uniform_int(int(l1))));
  int k0;
  double w0, w1;
  m.potentials.spline_support(m.potentials.clamp_sigma(sigma), &k0, &w0, &w1);
  const size_t knot_base = l0 + l1;
  probes.push_back(knot_base + size_t(k0));          // channel 0 active knots
  probes.push_back(knot_base + size_t(k0) + 1);
  probes.push_back(knot_base + size_t(m.potentials.knots + k0));  // channel 1
  probes.push_back(params.size() - 1);               // b
  REQUIRE(probes.size() >= 10);

  const double h = 1e-4;
  for (size_t pi : probes) {
    WcrrModel plus = m, minus = m;
    RealVec pp = params, pm = params;
    pp[pi] += h;
    pm[pi] -= h;
    set_params(plus, pp);
    set_params(minus, pm);
    const double lp = training_loss(plus, y, clean, sigma, d);
    const double lm = training_loss(minus, y, clean, sigma, d);
    const double fd = (lp - lm) / (2 * h);
    REQUIRE(flat[pi] == doctest::Approx(fd).epsilon(1e-3));
  }

  // Directional-derivative sanity: a small step along -grad decreases
  // the loss.
  const double base_loss = training_loss(m, y, clean, sigma, d);
  double gnorm2 = 0;
  for (double g : flat) gnorm2 += g * g;
  const double tau = 1e-4 / std::sqrt(gnorm2);
  RealVec stepped = params;
  for (size_t i = 0; i < stepped.size(); ++i) stepped[i] -= tau * flat[i];
  WcrrModel moved = m;
  set_params(moved, stepped);
  CHECK(training_loss(moved, y, clean, sigma, d) <= base_loss * (1 + 1e-6));
}

TEST_CASE("hessian_penalty_gradient: zero filters give zero penalty and gradient") {
  WcrrModel m = WcrrModel::create({2, 2}, RotationSet::identity_only(), 98);
  for (double& w : m.filter_bank.layers[0].weights) w = 0.0;
  m.filter_bank.cached_norm = 0;  // unnormalized; the operator itself is zero
  const ComplexVolume x = oracle::random_volume({4, 4, 4}, 99);
  const PenaltyResult pen = hessian_penalty_gradient(m, x, 0.05, 20, 1e-6);
  CHECK(pen.value == 0.0);
  for (const auto& l : pen.grad.filters.layers)
    for (double w : l) REQUIRE(w == 0.0);
  CHECK(pen.grad.b == 0.0);
}

TEST_CASE("hessian_penalty_gradient: matches the dense top eigenvalue on 4^3") {
  const Dims3 d{4, 4, 4};
  const WcrrModel m = fd_test_model(d, 100, {2, 3});
  const ComplexVolume x = oracle::random_volume(d, 101);
  const double sigma = 0.06;

  // Materialize H through HVPs on basis vectors.
  const int n = int(2 * d.count());
  Eigen::MatrixXd hm(n, n);
  for (int col = 0; col < n; ++col) {
    RealVec e(size_t(n), 0.0);
    e[size_t(col)] = 1.0;
    const ComplexVolume hv = wcrr_hvp(m, x, sigma, from_real_vector(e, d));
    const RealVec out = to_real_vector(hv);
    for (int row = 0; row < n; ++row) hm(row, col) = out[size_t(row)];
  }
  const Eigen::VectorXd evals = hm.selfadjointView<Eigen::Lower>().eigenvalues();
  const double top = std::max(std::abs(evals.minCoeff()), std::abs(evals.maxCoeff()));

  const PenaltyResult pen = hessian_penalty_gradient(m, x, sigma, 400, 1.0);
  CHECK(pen.value == doctest::Approx(top).epsilon(1e-3));
}

TEST_CASE("hessian_penalty_gradient: finite differences at loose tolerance") {
  const Dims3 d{5, 5, 5};
  const WcrrModel m = fd_test_model(d, 102);
  const ComplexVolume x = oracle::random_volume(d, 103);
  const double sigma = 0.05;

  const PenaltyResult pen = hessian_penalty_gradient(m, x, sigma, 300, 1.0);
  RealVec params = get_params(m);
  const RealVec flat = pen.grad.flatten();

  Rng pick(104);
  const double h = 1e-5;
  int checked = 0;
  for (int probe = 0; probe < 8; ++probe) {
    const size_t pi = size_t(pick.uniform_int(int(m.filter_bank.layers[0].weights.size() +
                                                  m.filter_bank.layers[1].weights.size())));
    auto value_at = [&](double delta) {
      WcrrModel pert = m;
      RealVec p = params;
      p[pi] += delta;
      set_params(pert, p);
      pert.filter_bank = normalize(pert.filter_bank, d);
      return hessian_penalty_gradient(pert, x, sigma, 300, 1.0).value;
    };
    const double fd = (value_at(h) - value_at(-h)) / (2 * h);
    if (std::abs(fd) < 1e-3) continue;  // skip near-flat directions
    REQUIRE(flat[pi] == doctest::Approx(fd).epsilon(5e-2));
    ++checked;
  }
  CHECK(checked >= 3);
}

TEST_CASE("train: smoke run is deterministic and records history") {
  std::vector<ComplexVolume> dataset;
  for (int i = 0; i < 3; ++i)
    dataset.push_back(generate_phantom(EllipsoidPhantom::random_spec(200 + std::uint64_t(i)), {10, 10, 10}));

  const WcrrModel init = WcrrModel::create({2, 2, 2}, RotationSet::identity_only(), 105);
  TrainingConfig cfg;
  cfg.batch_size = 3;
  cfg.epochs = 2;
  cfg.steps_per_epoch = 2;
  cfg.patch_size = {6, 6, 6};
  cfg.seed = 11;
  cfg.penalty_every = 2;
  cfg.power_iters = 20;
  SolverConfig scfg;
  scfg.eps = 1e-4;
  scfg.max_iters = 300;

  const TrainResult r1 = train(dataset, init, cfg, scfg);
  const TrainResult r2 = train(dataset, init, cfg, scfg);
  REQUIRE(r1.history.size() == 4);
  for (size_t i = 0; i < r1.history.size(); ++i) {
    REQUIRE(r1.history[i].loss == r2.history[i].loss);
    REQUIRE(r1.history[i].penalty == r2.history[i].penalty);
    CHECK(std::isfinite(r1.history[i].loss));
  }
  // Penalty recorded on the scheduled steps only.
  CHECK(r1.history[0].penalty == 0.0);
  CHECK(r1.history[1].penalty != 0.0);

  const RealVec p1 = get_params(r1.model);
  const RealVec p2 = get_params(r2.model);
  for (size_t i = 0; i < p1.size(); ++i) REQUIRE(p1[i] == p2[i]);
}

TEST_CASE("train: clean data off-protocol keeps the loss near zero") {
  std::vector<ComplexVolume> dataset;
  dataset.push_back(generate_phantom(EllipsoidPhantom::default_spec(), {10, 10, 10}));

  const WcrrModel init = WcrrModel::create({2, 2, 2}, RotationSet::identity_only(), 106);
  TrainingConfig cfg;
  cfg.batch_size = 2;
  cfg.epochs = 1;
  cfg.steps_per_epoch = 1;
  cfg.patch_size = {6, 6, 6};
  cfg.seed = 12;
  cfg.force_sigma = 0.0;  // denoise clean data
  cfg.penalty_weight = 0;
  SolverConfig scfg;
  scfg.eps = 1e-6;
  scfg.max_iters = 500;

  const TrainResult r = train(dataset, init, cfg, scfg);
  // Reference scale: the loss of denoising a sigma = 0.05 corruption.
  TrainingConfig noisy = cfg;
  noisy.force_sigma = 0.05;
  const TrainResult rn = train(dataset, init, noisy, scfg);
  CHECK(r.history[0].loss <= 0.05 * rn.history[0].loss);

  // Parameters moved by at most the AdaBelief per-step cap.
  const RealVec before = get_params(init);
  const RealVec after = get_params(r.model);
  double max_move = 0;
  for (size_t i = 0; i < before.size(); ++i)
    max_move = std::max(max_move, std::abs(after[i] - before[i]));
  CHECK(max_move <= 0.01 * 1.2);
}

TEST_SUITE_END();
