#pragma once

#include <string>
#include <vector>

#include "wcrr3d/phantom.hpp"
#include "wcrr3d/recon.hpp"
#include "wcrr3d/trajectory.hpp"

namespace wcrr {

struct MethodSpec {
  std::string name;  // dcp | tv | wavelet | wcrr
  double lambda = 0;
  double sigma = 0.03;   // wcrr only
  double tol = 0;        // 0: method default (5e-3; 5e-4 for tv)
  int max_iters = 0;     // 0: method default
};

/// Everything that determines one retrospective experiment. With a fixed
/// seed the outputs are byte-identical across runs.
struct ExperimentManifest {
  Dims3 dims{32, 32, 32};
  int coils = 4;
  double noise_sigma = 2e-3;
  std::uint64_t seed = 1;

  std::string phantom_kind = "default";  // default | random
  double phantom_smooth_sigma = 0.75;    // band-limits the ground truth

  std::string trajectory_kind = "random_vds";  // random_vds | radial3d
  double vds_exponent = 1.5;
  int radial_spokes = 256;
  std::int64_t samples = 0;  // 0: dims.count() / 8 (AF ~ 8)

  std::vector<MethodSpec> methods;
  std::string model_checkpoint;  // wcrr methods load from here
  std::string output_dir = "experiment_out";

  static ExperimentManifest from_json_file(const std::string& path);
  void write_json_file(const std::string& path) const;

  /// 32^3, 4 coils, AF ~ 8 variable-density sampling, noise 2e-3,
  /// methods dcp / wavelet / tv / wcrr with desk-scale tuned weights.
  static ExperimentManifest default_manifest();

  void validate() const;
};

struct ExperimentReport {
  struct Row {
    std::string method;
    double masked_psnr = 0;
    double masked_ssim = 0;
    int iterations = 0;
    double wall_ms = 0;
    bool failed = false;
    std::string error;
  };
  std::vector<Row> rows;
};

/// Generates ground truth, coils and trajectory, simulates the
/// acquisition, runs each method, and writes per-method CVOL volumes,
/// metrics.csv (method, masked_psnr, masked_ssim, iterations),
/// timings.csv (wall times), and center-slice PGM images per axis.
/// Per-method failures are recorded in the report and the run continues.
ExperimentReport run_experiment(const ExperimentManifest& manifest);

/// Magnitude slice normalized to [0, 255], written as a binary PGM.
/// Axis X: rows z, cols y; axis Y: rows z, cols x; axis Z: rows y, cols x.
void export_slice(const ComplexVolume& v, Axis axis, int index, const std::string& path);

}  // namespace wcrr
