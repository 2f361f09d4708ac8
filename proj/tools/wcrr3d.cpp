#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "wcrr3d/baselines.hpp"
#include "wcrr3d/experiment.hpp"
#include "wcrr3d/metrics.hpp"
#include "wcrr3d/phantom.hpp"
#include "wcrr3d/recon.hpp"
#include "wcrr3d/training.hpp"

using namespace wcrr;

namespace {

Axis parse_axis(const std::string& s) {
  if (s == "x" || s == "X") return Axis::X;
  if (s == "y" || s == "Y") return Axis::Y;
  if (s == "z" || s == "Z") return Axis::Z;
  throw std::invalid_argument("axis must be one of x, y, z");
}

RotationSet parse_rotations(const std::string& s) {
  if (s == "axes") return RotationSet::axis_quarter_turns();
  if (s == "z4") return RotationSet::z_cyclic_group();
  if (s == "identity") return RotationSet::identity_only();
  throw std::invalid_argument("rotations must be one of axes, z4, identity");
}

std::vector<double> parse_grid(const std::string& csv) {
  std::vector<double> out;
  size_t pos = 0;
  while (pos < csv.size()) {
    size_t comma = csv.find(',', pos);
    if (comma == std::string::npos) comma = csv.size();
    out.push_back(std::stod(csv.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument("empty grid");
  return out;
}

struct TrainFileConfig {
  std::vector<int> channel_plan{2, 4, 8, 8};
  std::string rotations = "axes";
  int knots = 12;
  double sigma_min = 0.01, sigma_max = 0.1;
  std::uint64_t init_seed = 7;
  TrainingConfig training;
  double solver_eps = 1e-4;
  int solver_max_iters = 500;
};

TrainFileConfig load_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open training config " + path);
  nlohmann::json j;
  in >> j;
  TrainFileConfig c;
  if (j.contains("channel_plan")) c.channel_plan = j.at("channel_plan").get<std::vector<int>>();
  c.rotations = j.value("rotations", c.rotations);
  c.knots = j.value("knots", c.knots);
  c.sigma_min = j.value("sigma_min", c.sigma_min);
  c.sigma_max = j.value("sigma_max", c.sigma_max);
  c.init_seed = j.value("init_seed", c.init_seed);
  c.training.batch_size = j.value("batch_size", c.training.batch_size);
  c.training.epochs = j.value("epochs", c.training.epochs);
  c.training.learning_rate = j.value("learning_rate", c.training.learning_rate);
  c.training.lr_decay_per_epoch = j.value("lr_decay_per_epoch", c.training.lr_decay_per_epoch);
  c.training.penalty_weight = j.value("penalty_weight", c.training.penalty_weight);
  c.training.penalty_every = j.value("penalty_every", c.training.penalty_every);
  c.training.power_iters = j.value("power_iters", c.training.power_iters);
  if (j.contains("patch_size")) {
    const auto p = j.at("patch_size").get<std::vector<int>>();
    c.training.patch_size = {p.at(0), p.at(1), p.at(2)};
  }
  c.training.seed = j.value("seed", c.training.seed);
  c.training.steps_per_epoch = j.value("steps_per_epoch", c.training.steps_per_epoch);
  c.training.checkpoint_every_epochs =
      j.value("checkpoint_every_epochs", c.training.checkpoint_every_epochs);
  c.solver_eps = j.value("solver_eps", c.solver_eps);
  c.solver_max_iters = j.value("solver_max_iters", c.solver_max_iters);
  return c;
}

ReconContext load_context(const std::string& kspace, const std::string& traj_path,
                          const std::string& coils_prefix, int ncoils, Dims3 dims) {
  KSpaceData y = load_kdat(kspace);
  const KSpaceTrajectory traj = load_ktrj(traj_path);
  CoilSet coils = load_coils(coils_prefix, ncoils);
  if (coils.dims() != dims) throw std::runtime_error("coil map dims do not match --dims");
  return ReconContext(std::move(coils), traj, dims, std::move(y));
}

}  // namespace

int main(int argc, char** argv) {
#ifdef _OPENMP
  if (const char* env = std::getenv("WCRR3D_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) omp_set_num_threads(n);
  }
#endif

  CLI::App app{"Variational 3D non-Cartesian MRI reconstruction with a trainable "
               "rotation-averaged weakly convex ridge regularizer"};
  app.require_subcommand(1);

  // ---- phantom ----
  auto* cmd_phantom = app.add_subcommand("phantom", "Generate synthetic ground-truth volumes");
  std::vector<int> ph_dims{32, 32, 32};
  std::string ph_out, ph_out_dir, ph_kind = "default";
  std::uint64_t ph_seed = 0;
  double ph_smooth = 0.0;
  int ph_count = 1;
  cmd_phantom->add_option("--dims", ph_dims, "Nx Ny Nz")->expected(3);
  cmd_phantom->add_option("--out", ph_out, "output CVOL (single volume)");
  cmd_phantom->add_option("--out-dir", ph_out_dir, "output directory (dataset of volumes)");
  cmd_phantom->add_option("--kind", ph_kind, "default | random");
  cmd_phantom->add_option("--seed", ph_seed, "seed for random phantoms");
  cmd_phantom->add_option("--smooth", ph_smooth, "Gaussian smoothing sigma in voxels");
  cmd_phantom->add_option("--count", ph_count, "number of volumes (with --out-dir)");

  // ---- trajectory ----
  auto* cmd_traj = app.add_subcommand("trajectory", "Generate a k-space trajectory");
  std::string tr_kind = "radial3d", tr_out;
  std::int64_t tr_samples = 4096;
  int tr_spokes = 256;
  double tr_exponent = 1.5;
  std::uint64_t tr_seed = 0;
  cmd_traj->add_option("--kind", tr_kind, "radial3d | random_vds");
  cmd_traj->add_option("--samples", tr_samples, "total sample count")->required();
  cmd_traj->add_option("--spokes", tr_spokes, "spoke count (radial3d)");
  cmd_traj->add_option("--exponent", tr_exponent, "density decay exponent (random_vds)");
  cmd_traj->add_option("--seed", tr_seed, "seed (random_vds)");
  cmd_traj->add_option("--out", tr_out, "output KTRJ")->required();

  // ---- coils ----
  auto* cmd_coils = app.add_subcommand("coils", "Generate synthetic coil sensitivity maps");
  std::vector<int> co_dims{32, 32, 32};
  int co_count = 4;
  std::uint64_t co_seed = 0;
  std::string co_prefix;
  cmd_coils->add_option("--dims", co_dims, "Nx Ny Nz")->expected(3);
  cmd_coils->add_option("--count", co_count, "number of coils");
  cmd_coils->add_option("--seed", co_seed, "seed");
  cmd_coils->add_option("--out-prefix", co_prefix, "output prefix (<prefix>_c<k>.cvol)")
      ->required();

  // ---- simulate ----
  auto* cmd_sim = app.add_subcommand("simulate", "Retrospective acquisition simulation");
  std::string si_gt, si_traj, si_prefix, si_out;
  int si_ncoils = 4;
  double si_sigma = 2e-3;
  std::uint64_t si_seed = 0;
  cmd_sim->add_option("--gt", si_gt, "ground-truth CVOL")->required();
  cmd_sim->add_option("--traj", si_traj, "trajectory KTRJ")->required();
  cmd_sim->add_option("--coils-prefix", si_prefix, "coil map prefix")->required();
  cmd_sim->add_option("--ncoils", si_ncoils, "number of coils")->required();
  cmd_sim->add_option("--sigma", si_sigma, "noise standard deviation");
  cmd_sim->add_option("--seed", si_seed, "noise seed");
  cmd_sim->add_option("--out", si_out, "output KDAT")->required();

  // ---- train ----
  auto* cmd_train = app.add_subcommand("train", "Train the regularizer on a denoising task");
  std::string trn_dataset, trn_config, trn_out, trn_resume;
  cmd_train->add_option("--dataset-dir", trn_dataset, "directory of CVOL volumes")->required();
  cmd_train->add_option("--config", trn_config, "training config JSON")->required();
  cmd_train->add_option("--out-dir", trn_out, "checkpoint output directory")->required();
  cmd_train->add_option("--resume", trn_resume, "checkpoint directory to resume from");

  // ---- denoise ----
  auto* cmd_den = app.add_subcommand("denoise", "Denoise a volume with a trained model");
  std::string de_in, de_ckpt, de_out;
  double de_sigma = 0.05, de_eps = 1e-4;
  cmd_den->add_option("--input", de_in, "noisy CVOL")->required();
  cmd_den->add_option("--sigma", de_sigma, "noise level for conditioning")->required();
  cmd_den->add_option("--checkpoint", de_ckpt, "model checkpoint directory")->required();
  cmd_den->add_option("--eps", de_eps, "solver tolerance");
  cmd_den->add_option("--out", de_out, "output CVOL")->required();

  // ---- reconstruct ----
  auto* cmd_rec = app.add_subcommand("reconstruct", "Reconstruct a volume from k-space data");
  std::string rc_method, rc_kspace, rc_traj, rc_prefix, rc_ckpt, rc_out, rc_trace;
  std::vector<int> rc_dims{32, 32, 32};
  int rc_ncoils = 4, rc_max_iters = 0;
  double rc_lambda = 0, rc_sigma = 0.03, rc_tol = 0;
  cmd_rec->add_option("method", rc_method, "dcp | tv | wavelet | wcrr")->required();
  cmd_rec->add_option("--kspace", rc_kspace, "measurements KDAT")->required();
  cmd_rec->add_option("--traj", rc_traj, "trajectory KTRJ")->required();
  cmd_rec->add_option("--coils-prefix", rc_prefix, "coil map prefix")->required();
  cmd_rec->add_option("--ncoils", rc_ncoils, "number of coils")->required();
  cmd_rec->add_option("--dims", rc_dims, "Nx Ny Nz")->expected(3);
  cmd_rec->add_option("--lambda", rc_lambda, "regularization weight");
  cmd_rec->add_option("--sigma", rc_sigma, "regularizer noise input (wcrr)");
  cmd_rec->add_option("--tol", rc_tol, "relative-change tolerance");
  cmd_rec->add_option("--max-iters", rc_max_iters, "iteration cap");
  cmd_rec->add_option("--checkpoint", rc_ckpt, "model checkpoint (wcrr)");
  cmd_rec->add_option("--out", rc_out, "output CVOL")->required();
  cmd_rec->add_option("--trace", rc_trace, "solver trace CSV");

  // ---- gridsearch ----
  auto* cmd_grid = app.add_subcommand("gridsearch", "Tune lambda/sigma on validation phantoms");
  std::string gs_method, gs_lambdas, gs_sigmas = "0.03", gs_ckpt, gs_out;
  std::vector<int> gs_dims{16, 16, 16};
  int gs_volumes = 2, gs_coils = 4;
  std::int64_t gs_samples = 0;
  double gs_noise = 2e-3, gs_smooth = 0.75, gs_exponent = 1.5;
  std::uint64_t gs_seed = 100;
  cmd_grid->add_option("--method", gs_method, "dcp | tv | wavelet | wcrr")->required();
  cmd_grid->add_option("--lambdas", gs_lambdas, "comma-separated lambda grid")->required();
  cmd_grid->add_option("--sigmas", gs_sigmas, "comma-separated sigma grid (wcrr)");
  cmd_grid->add_option("--volumes", gs_volumes, "validation volume count");
  cmd_grid->add_option("--dims", gs_dims, "Nx Ny Nz")->expected(3);
  cmd_grid->add_option("--coils", gs_coils, "coil count");
  cmd_grid->add_option("--samples", gs_samples, "k-space samples (0: N/8)");
  cmd_grid->add_option("--noise-sigma", gs_noise, "measurement noise sigma");
  cmd_grid->add_option("--smooth", gs_smooth, "phantom smoothing sigma");
  cmd_grid->add_option("--exponent", gs_exponent, "vds density exponent");
  cmd_grid->add_option("--seed", gs_seed, "validation seed");
  cmd_grid->add_option("--checkpoint", gs_ckpt, "model checkpoint (wcrr)");
  cmd_grid->add_option("--out", gs_out, "score table CSV")->required();

  // ---- experiment ----
  auto* cmd_exp = app.add_subcommand("experiment", "Run a full retrospective experiment");
  std::string ex_manifest, ex_out_dir, ex_ckpt;
  bool ex_default = false;
  std::uint64_t ex_seed = 0;
  cmd_exp->add_option("--manifest", ex_manifest, "experiment manifest JSON");
  cmd_exp->add_flag("--default", ex_default, "use the built-in default manifest");
  cmd_exp->add_option("--out-dir", ex_out_dir, "override output directory");
  cmd_exp->add_option("--checkpoint", ex_ckpt, "override model checkpoint");
  cmd_exp->add_option("--seed", ex_seed, "override seed (nonzero)");

  // ---- metrics ----
  auto* cmd_met = app.add_subcommand("metrics", "Masked PSNR/SSIM between two volumes");
  std::string me_gt, me_rec;
  cmd_met->add_option("--gt", me_gt, "ground-truth CVOL")->required();
  cmd_met->add_option("--rec", me_rec, "reconstruction CVOL")->required();

  // ---- export-slice ----
  auto* cmd_slice = app.add_subcommand("export-slice", "Write a magnitude slice as PGM");
  std::string sl_in, sl_axis = "z", sl_out;
  int sl_index = 0;
  cmd_slice->add_option("--input", sl_in, "input CVOL")->required();
  cmd_slice->add_option("--axis", sl_axis, "x | y | z");
  cmd_slice->add_option("--index", sl_index, "slice index")->required();
  cmd_slice->add_option("--out", sl_out, "output PGM")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_phantom) {
      const Dims3 dims{ph_dims[0], ph_dims[1], ph_dims[2]};
      if (!ph_out_dir.empty()) {
        std::filesystem::create_directories(ph_out_dir);
        for (int i = 0; i < ph_count; ++i) {
          const EllipsoidPhantom spec = ph_kind == "random"
                                            ? EllipsoidPhantom::random_spec(ph_seed + i)
                                            : EllipsoidPhantom::default_spec();
          const ComplexVolume v = gaussian_smooth(generate_phantom(spec, dims), ph_smooth);
          char name[64];
          std::snprintf(name, sizeof(name), "/vol_%04d.cvol", i);
          save_cvol(v, ph_out_dir + name);
        }
        std::printf("wrote %d volumes to %s\n", ph_count, ph_out_dir.c_str());
      } else if (!ph_out.empty()) {
        const EllipsoidPhantom spec = ph_kind == "random" ? EllipsoidPhantom::random_spec(ph_seed)
                                                          : EllipsoidPhantom::default_spec();
        save_cvol(gaussian_smooth(generate_phantom(spec, dims), ph_smooth), ph_out);
        std::printf("wrote %s\n", ph_out.c_str());
      } else {
        throw std::runtime_error("phantom: need --out or --out-dir");
      }
    } else if (*cmd_traj) {
      KSpaceTrajectory traj =
          tr_kind == "radial3d"
              ? radial3d_trajectory({tr_spokes}, tr_samples)
              : random_vds_trajectory({tr_exponent, tr_seed}, tr_samples);
      save_ktrj(traj, tr_out);
      std::printf("wrote %lld samples to %s\n", (long long)traj.samples(), tr_out.c_str());
    } else if (*cmd_coils) {
      const Dims3 dims{co_dims[0], co_dims[1], co_dims[2]};
      save_coils(synth_coils(dims, co_count, co_seed), co_prefix);
      std::printf("wrote %d coil maps to %s_c*.cvol\n", co_count, co_prefix.c_str());
    } else if (*cmd_sim) {
      const ComplexVolume gt = load_cvol(si_gt);
      const KSpaceTrajectory traj = load_ktrj(si_traj);
      const CoilSet coils = load_coils(si_prefix, si_ncoils);
      save_kdat(simulate_acquisition(gt, coils, traj, {si_sigma, si_seed}), si_out);
      std::printf("wrote %s\n", si_out.c_str());
    } else if (*cmd_train) {
      const TrainFileConfig cfg = load_train_config(trn_config);
      std::vector<ComplexVolume> dataset;
      std::vector<std::filesystem::path> files;
      for (const auto& entry : std::filesystem::directory_iterator(trn_dataset))
        if (entry.path().extension() == ".cvol") files.push_back(entry.path());
      std::sort(files.begin(), files.end());
      for (const auto& p : files) dataset.push_back(load_cvol(p.string()));
      if (dataset.empty()) throw std::runtime_error("no .cvol volumes in " + trn_dataset);

      WcrrModel model;
      if (!trn_resume.empty()) {
        model = load_checkpoint(trn_resume);
      } else {
        model = WcrrModel::create(cfg.channel_plan, parse_rotations(cfg.rotations), cfg.init_seed,
                                  cfg.knots, cfg.sigma_min, cfg.sigma_max);
      }
      SolverConfig scfg;
      scfg.eps = cfg.solver_eps;
      scfg.max_iters = cfg.solver_max_iters;
      const TrainResult res = train(dataset, model, cfg.training, scfg, trn_out);
      std::printf("trained %d steps; first-epoch loss %.6g, final-epoch loss %.6g\n",
                  int(res.history.size()), res.history.front().loss, res.history.back().loss);
      std::printf("checkpoint: %s/final\n", trn_out.c_str());
    } else if (*cmd_den) {
      const WcrrModel model = load_checkpoint(de_ckpt);
      const ComplexVolume y = load_cvol(de_in);
      SolverConfig scfg;
      scfg.eps = de_eps;
      scfg.max_iters = 2000;
      const DenoiseResult res = denoise(model, y, de_sigma, scfg);
      save_cvol(res.x, de_out);
      std::printf("wrote %s (fixed-point residual %.3e, %d iterations)\n", de_out.c_str(),
                  res.fixed_point_residual, int(res.trace.rows.size()));
    } else if (*cmd_rec) {
      const Dims3 dims{rc_dims[0], rc_dims[1], rc_dims[2]};
      const ReconContext ctx = load_context(rc_kspace, rc_traj, rc_prefix, rc_ncoils, dims);
      ComplexVolume rec;
      SolverTrace trace;
      if (rc_method == "dcp") {
        rec = recon_dcp(ctx);
      } else if (rc_method == "tv") {
        BaselineResult r = recon_tv(ctx, rc_lambda, rc_tol > 0 ? rc_tol : 5e-4,
                                    rc_max_iters > 0 ? rc_max_iters : 500);
        rec = std::move(r.x);
        trace = std::move(r.trace);
      } else if (rc_method == "wavelet") {
        BaselineResult r = recon_l1_wavelet(ctx, rc_lambda, rc_tol > 0 ? rc_tol : 5e-3,
                                            rc_max_iters > 0 ? rc_max_iters : 300);
        rec = std::move(r.x);
        trace = std::move(r.trace);
      } else if (rc_method == "wcrr") {
        if (rc_ckpt.empty()) throw std::runtime_error("reconstruct wcrr needs --checkpoint");
        const WcrrModel model = load_checkpoint(rc_ckpt);
        ReconConfig cfg;
        cfg.lambda = rc_lambda;
        cfg.sigma = rc_sigma;
        cfg.tol = rc_tol > 0 ? rc_tol : 5e-3;
        cfg.max_iters = rc_max_iters > 0 ? rc_max_iters : 300;
        BaselineResult r = recon_wcrr(ctx, model, cfg);
        rec = std::move(r.x);
        trace = std::move(r.trace);
      } else {
        throw std::runtime_error("unknown method " + rc_method);
      }
      save_cvol(rec, rc_out);
      if (!rc_trace.empty() && !trace.rows.empty()) trace.write_csv(rc_trace);
      std::printf("wrote %s (%d iterations)\n", rc_out.c_str(), int(trace.rows.size()));
    } else if (*cmd_grid) {
      const Dims3 dims{gs_dims[0], gs_dims[1], gs_dims[2]};
      const std::int64_t samples = gs_samples > 0 ? gs_samples : dims.count() / 8;
      std::vector<ValidationCase> cases;
      for (int i = 0; i < gs_volumes; ++i) {
        ValidationCase vc;
        vc.gt = gaussian_smooth(
            generate_phantom(EllipsoidPhantom::random_spec(gs_seed + 7 * i), dims), gs_smooth);
        const KSpaceTrajectory traj =
            random_vds_trajectory({gs_exponent, gs_seed + 13 * i}, samples);
        const CoilSet coils = synth_coils(dims, gs_coils, gs_seed + 29 * i);
        KSpaceData y = simulate_acquisition(vc.gt, coils, traj, {gs_noise, gs_seed + 41 * i});
        vc.ctx = std::make_shared<ReconContext>(coils, traj, dims, std::move(y));
        cases.push_back(std::move(vc));
      }

      WcrrModel model;
      if (gs_method == "wcrr") {
        if (gs_ckpt.empty()) throw std::runtime_error("gridsearch wcrr needs --checkpoint");
        model = load_checkpoint(gs_ckpt);
      }
      ReconMethod method;
      if (gs_method == "dcp") {
        method = [](const ReconContext& c, const ReconConfig&) { return recon_dcp(c); };
      } else if (gs_method == "tv") {
        method = [](const ReconContext& c, const ReconConfig& cfg) {
          return recon_tv(c, cfg.lambda, 5e-4, 500).x;
        };
      } else if (gs_method == "wavelet") {
        method = [](const ReconContext& c, const ReconConfig& cfg) {
          return recon_l1_wavelet(c, cfg.lambda, 5e-3, 300).x;
        };
      } else if (gs_method == "wcrr") {
        method = [&model](const ReconContext& c, const ReconConfig& cfg) {
          return recon_wcrr(c, model, cfg).x;
        };
      } else {
        throw std::runtime_error("unknown method " + gs_method);
      }

      const GridSearchResult res =
          grid_search(cases, method, parse_grid(gs_lambdas), parse_grid(gs_sigmas));
      write_grid_csv(res, gs_out);
      std::printf("best: lambda %.10g sigma %.10g; table: %s\n", res.best.lambda, res.best.sigma,
                  gs_out.c_str());
    } else if (*cmd_exp) {
      ExperimentManifest manifest;
      if (!ex_manifest.empty()) {
        manifest = ExperimentManifest::from_json_file(ex_manifest);
      } else if (ex_default) {
        manifest = ExperimentManifest::default_manifest();
      } else {
        throw std::runtime_error("experiment: need --manifest or --default");
      }
      if (!ex_out_dir.empty()) manifest.output_dir = ex_out_dir;
      if (!ex_ckpt.empty()) manifest.model_checkpoint = ex_ckpt;
      if (ex_seed != 0) manifest.seed = ex_seed;
      const ExperimentReport report = run_experiment(manifest);
      std::printf("method,masked_psnr,masked_ssim,iterations,failed\n");
      for (const auto& row : report.rows)
        std::printf("%s,%.4f,%.4f,%d,%d\n", row.method.c_str(), row.masked_psnr, row.masked_ssim,
                    row.iterations, row.failed ? 1 : 0);
      std::printf("outputs in %s\n", manifest.output_dir.c_str());
    } else if (*cmd_met) {
      const ComplexVolume gt = load_cvol(me_gt);
      const ComplexVolume rec = load_cvol(me_rec);
      const EvalMask mask = foreground_mask(gt);
      std::printf("masked_psnr,masked_ssim\n%.10g,%.10g\n", masked_psnr(gt, rec, mask),
                  masked_ssim(gt, rec, mask));
    } else if (*cmd_slice) {
      export_slice(load_cvol(sl_in), parse_axis(sl_axis), sl_index, sl_out);
      std::printf("wrote %s\n", sl_out.c_str());
    }
  } catch (const std::exception& e) {
    nlohmann::json err{{"error", e.what()}};
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return 1;
  }
  return 0;
}
