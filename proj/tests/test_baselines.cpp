#include <doctest.h>

#include "oracles.hpp"
#include "wcrr3d/baselines.hpp"
#include "wcrr3d/metrics.hpp"
#include "wcrr3d/phantom.hpp"

using namespace wcrr;

TEST_SUITE_BEGIN("baselines");

TEST_CASE("wavelet: perfect reconstruction and isometry on 16^3") {
  const Dims3 d{16, 16, 16};
  const WaveletPlan plan = WaveletPlan::create(d, 4);
  CHECK(plan.levels == 1);  // capped: coarsest band keeps >= 8 samples

  const ComplexVolume v = oracle::random_volume(d, 110);
  const ComplexVolume c = dwt3(v, plan);
  const ComplexVolume r = idwt3(c, plan);
  double err = 0;
  for (size_t i = 0; i < v.data.size(); ++i) err += std::norm(r.data[i] - v.data[i]);
  CHECK(std::sqrt(err) <= 1e-10 * norm(v));
  CHECK(norm(c) == doctest::Approx(norm(v)).epsilon(1e-10));
}

TEST_CASE("wavelet: multi-level on 32^3 and divisibility error") {
  const Dims3 d{32, 32, 32};
  const WaveletPlan plan = WaveletPlan::create(d, 4);
  CHECK(plan.levels == 2);
  const ComplexVolume v = oracle::random_volume(d, 111);
  const ComplexVolume back = idwt3(dwt3(v, plan), plan);
  double err = 0;
  for (size_t i = 0; i < v.data.size(); ++i) err += std::norm(back.data[i] - v.data[i]);
  CHECK(std::sqrt(err) <= 1e-10 * norm(v));

  WaveletPlan bad;
  bad.dims = {18, 18, 18};
  bad.levels = 1;  // 18 not divisible by... it is; force levels 2
  bad.levels = 2;
  CHECK_THROWS(dwt3(ComplexVolume({18, 18, 18}), bad));
}

TEST_CASE("wavelet: constant volume has vanishing detail coefficients") {
  const Dims3 d{16, 16, 16};
  const WaveletPlan plan = WaveletPlan::create(d, 1);
  ComplexVolume v(d);
  for (cplx& c : v.data) c = {0.7, -0.4};
  const ComplexVolume coeffs = dwt3(v, plan);
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x)
        if (plan.is_detail(x, y, z)) REQUIRE(std::abs(coeffs.at(x, y, z)) < 1e-10);
  CHECK(detail_l1(coeffs, plan) < 1e-7);
}

TEST_CASE("wavelet: threshold operator is non-expansive and phase-preserving") {
  const Dims3 d{16, 16, 16};
  const WaveletPlan plan = WaveletPlan::create(d, 1);
  const ComplexVolume u = oracle::random_volume(d, 112);
  const ComplexVolume v = oracle::random_volume(d, 113);
  const double t = 0.8;
  const ComplexVolume pu = soft_threshold_details(u, plan, t);
  const ComplexVolume pv = soft_threshold_details(v, plan, t);
  double dp = 0, duv = 0;
  for (size_t i = 0; i < u.data.size(); ++i) {
    dp += std::norm(pu.data[i] - pv.data[i]);
    duv += std::norm(u.data[i] - v.data[i]);
  }
  CHECK(std::sqrt(dp) <= std::sqrt(duv) * (1 + 1e-12));

  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x) {
        const cplx orig = u.at(x, y, z);
        const cplx shr = pu.at(x, y, z);
        if (!plan.is_detail(x, y, z)) {
          REQUIRE(shr == orig);
        } else if (std::abs(shr) > 0) {
          // Phase preserved: shr is a positive real multiple of orig.
          const cplx ratio = shr / orig;
          REQUIRE(std::abs(ratio.imag()) < 1e-12);
          REQUIRE(ratio.real() > 0);
        }
      }
}

namespace {

ReconContext full_cartesian_context(Dims3 d, int coils, const ComplexVolume& gt, double sigma,
                                    std::uint64_t seed) {
  const KSpaceTrajectory traj = cartesian_trajectory(d);
  const CoilSet cs = synth_coils(d, coils, seed);
  KSpaceData y = simulate_acquisition(gt, cs, traj, {sigma, seed + 1});
  return ReconContext(cs, traj, d, std::move(y), 10, 30);
}

}  // namespace

TEST_CASE("recon_dcp: full Cartesian single-coil equals scaled inverse DFT") {
  const Dims3 d{8, 8, 8};
  ComplexVolume ones(d);
  for (cplx& c : ones.data) c = {1.0, 0.0};
  CoilSet cs;
  cs.maps.push_back(ones);
  const ComplexVolume gt = oracle::random_volume(d, 114);
  const KSpaceTrajectory traj = cartesian_trajectory(d);
  const KSpaceData y = simulate_acquisition(gt, cs, traj, {0.0, 0});
  const ReconContext ctx(cs, traj, d, y, 10, 30);

  const ComplexVolume rec = recon_dcp(ctx);
  double num = 0, den = 0;
  for (size_t i = 0; i < gt.data.size(); ++i) {
    num += std::norm(rec.data[i] - gt.data[i]);
    den += std::norm(gt.data[i]);
  }
  CHECK(std::sqrt(num / den) <= 1e-6);

  // Zero data gives the zero volume; the map is linear in y.
  ReconContext zero_ctx(cs, traj, d, KSpaceData(1, traj.samples()), 10, 5);
  CHECK(norm(recon_dcp(zero_ctx)) == 0.0);
}

TEST_CASE("recon_dcp: dense radial sampling reaches 25 dB masked PSNR on 16^3") {
  const Dims3 d{16, 16, 16};
  // Band-limited ground truth, as an inverse transform of measured data
  // would be; non-Cartesian trajectories never cover the k-space cube
  // corners, so a hard-edged target is unreachable for any method.
  const ComplexVolume gt =
      gaussian_smooth(generate_phantom(EllipsoidPhantom::default_spec(), d), 0.75);
  const KSpaceTrajectory traj = radial3d_trajectory({1024}, 4 * d.count());
  const CoilSet cs = synth_coils(d, 2, 1);
  const KSpaceData y = simulate_acquisition(gt, cs, traj, {0.0, 2});
  const ReconContext ctx(cs, traj, d, y, 10, 30);
  const ComplexVolume rec = recon_dcp(ctx);
  const EvalMask mask = foreground_mask(gt);
  CHECK(masked_psnr(gt, rec, mask) >= 25.0);
}

TEST_CASE("recon_l1_wavelet: lambda 0 recovers the least-squares solution") {
  const Dims3 d{16, 16, 16};
  const ComplexVolume gt = generate_phantom(EllipsoidPhantom::default_spec(), d);
  const ReconContext ctx = full_cartesian_context(d, 2, gt, 0.0, 3);

  // Full Cartesian with SSOS-normalized coils: A^H A = N I, so the
  // least-squares solution is A^H y / N (conjugate-gradient closed form).
  const ComplexVolume ls = ctx.op.adjoint(ctx.y);
  const double n = double(d.count());

  const BaselineResult res = recon_l1_wavelet(ctx, 0.0, 1e-6, 500);
  double num = 0, den = 0;
  for (size_t i = 0; i < ls.data.size(); ++i) {
    num += std::norm(res.x.data[i] - ls.data[i] / n);
    den += std::norm(ls.data[i] / n);
  }
  CHECK(std::sqrt(num / den) <= 1e-4);
}

TEST_CASE("recon_l1_wavelet: identity operator reduces to direct detail thresholding") {
  const Dims3 d{16, 16, 16};
  const WaveletPlan plan = WaveletPlan::create(d, 1);
  const ComplexVolume z = oracle::random_volume(d, 115);
  const double lambda = 0.6;

  // min 1/2||x - z||^2 + lambda ||detail(Psi x)||_1 solved by FISTA with
  // the wavelet prox; the closed form is one thresholding of z.
  auto grad = [&](const RealVec& xv) {
    RealVec g = xv;
    const RealVec zv = to_real_vector(z);
    for (size_t i = 0; i < g.size(); ++i) g[i] -= zv[i];
    return g;
  };
  auto prox = [&](const RealVec& xv, double s) {
    const ComplexVolume x = from_real_vector(xv, d);
    return to_real_vector(idwt3(soft_threshold_details(dwt3(x, plan), plan, lambda * s), plan));
  };
  const FistaResult fista = fista_minimize(grad, prox, to_real_vector(z), 1.0, 200, 1e-12);

  const ComplexVolume expected = idwt3(soft_threshold_details(dwt3(z, plan), plan, lambda), plan);
  const ComplexVolume got = from_real_vector(fista.x, d);
  double num = 0, den = 0;
  for (size_t i = 0; i < got.data.size(); ++i) {
    num += std::norm(got.data[i] - expected.data[i]);
    den += std::norm(expected.data[i]);
  }
  CHECK(std::sqrt(num / den) <= 1e-8);
}

TEST_CASE("recon_l1_wavelet: huge lambda kills the detail bands") {
  const Dims3 d{16, 16, 16};
  const ComplexVolume gt = generate_phantom(EllipsoidPhantom::default_spec(), d);
  const ReconContext ctx = full_cartesian_context(d, 2, gt, 0.0, 4);
  const BaselineResult res = recon_l1_wavelet(ctx, 1e6, 1e-8, 400);
  const WaveletPlan plan = WaveletPlan::create(d, 4);
  const ComplexVolume coeffs = dwt3(res.x, plan);
  double detail_norm = 0;
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x)
        if (plan.is_detail(x, y, z)) detail_norm += std::norm(coeffs.at(x, y, z));
  CHECK(std::sqrt(detail_norm) <= 1e-6);
}

TEST_CASE("recon_tv: lambda 0 recovers the least-squares solution") {
  const Dims3 d{16, 16, 16};
  const ComplexVolume gt = generate_phantom(EllipsoidPhantom::default_spec(), d);
  const ReconContext ctx = full_cartesian_context(d, 2, gt, 0.0, 5);
  const ComplexVolume ls = ctx.op.adjoint(ctx.y);
  const double n = double(d.count());

  const BaselineResult res = recon_tv(ctx, 0.0, 1e-6, 2000);
  double num = 0, den = 0;
  for (size_t i = 0; i < ls.data.size(); ++i) {
    num += std::norm(res.x.data[i] - ls.data[i] / n);
    den += std::norm(ls.data[i] / n);
  }
  CHECK(std::sqrt(num / den) <= 1e-3);
}

TEST_CASE("recon_tv: beats the DCp adjoint on an undersampled phantom") {
  const Dims3 d{16, 16, 16};
  const ComplexVolume gt =
      gaussian_smooth(generate_phantom(EllipsoidPhantom::default_spec(), d), 0.75);
  const KSpaceTrajectory traj = random_vds_trajectory({1.5, 3}, d.count() / 4);
  const CoilSet cs = synth_coils(d, 4, 6);
  const KSpaceData y = simulate_acquisition(gt, cs, traj, {2e-3, 7});
  const ReconContext ctx(cs, traj, d, y, 10, 30);

  const ComplexVolume dcp = recon_dcp(ctx);
  const BaselineResult tv = recon_tv(ctx, 0.05, 5e-4, 300);
  const EvalMask mask = foreground_mask(gt);
  const double psnr_dcp = masked_psnr(gt, dcp, mask);
  const double psnr_tv = masked_psnr(gt, tv.x, mask);
  CHECK(psnr_tv > psnr_dcp);
}

TEST_CASE("baselines: equivariant to a global phase on the data") {
  const Dims3 d{16, 16, 16};
  const ComplexVolume gt = generate_phantom(EllipsoidPhantom::default_spec(), d);
  const KSpaceTrajectory traj = radial3d_trajectory({96}, d.count() / 2);
  const CoilSet cs = synth_coils(d, 2, 8);
  const KSpaceData y = simulate_acquisition(gt, cs, traj, {1e-3, 9});

  const cplx phase = std::polar(1.0, 1.234);
  KSpaceData y_rot = y;
  for (cplx& c : y_rot.samples) c *= phase;

  const ReconContext ctx(cs, traj, d, y, 10, 30);
  const ReconContext ctx_rot(cs, traj, d, y_rot, 10, 30);

  auto rel_phase_err = [&](const ComplexVolume& a, const ComplexVolume& b) {
    double num = 0, den = 0;
    for (size_t i = 0; i < a.data.size(); ++i) {
      num += std::norm(b.data[i] - phase * a.data[i]);
      den += std::norm(a.data[i]);
    }
    return std::sqrt(num / den);
  };

  CHECK(rel_phase_err(recon_dcp(ctx), recon_dcp(ctx_rot)) <= 1e-10);
  const BaselineResult w1 = recon_l1_wavelet(ctx, 0.05, 1e-5, 200);
  const BaselineResult w2 = recon_l1_wavelet(ctx_rot, 0.05, 1e-5, 200);
  CHECK(rel_phase_err(w1.x, w2.x) <= 1e-3);
  const BaselineResult t1 = recon_tv(ctx, 0.5, 1e-4, 200);
  const BaselineResult t2 = recon_tv(ctx_rot, 0.5, 1e-4, 200);
  CHECK(rel_phase_err(t1.x, t2.x) <= 1e-3);
}

TEST_SUITE_END();
