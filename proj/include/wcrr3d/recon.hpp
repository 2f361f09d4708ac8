#pragma once

#include <functional>
#include <memory>

#include "wcrr3d/baselines.hpp"
#include "wcrr3d/metrics.hpp"
#include "wcrr3d/wcrr_model.hpp"

namespace wcrr {

struct ReconConfig {
  double lambda = 0.0;
  double sigma = 0.03;      // regularizer noise-level input
  double tol = 5e-3;
  int max_iters = 300;
};

/// nmAPG on 1/2||Ax - y||^2 + lambda R_theta(sigma)(x), initialized at
/// the density-compensated adjoint, with the power-iteration ||A||^2
/// estimate as the initial Lipschitz constant.
BaselineResult recon_wcrr(const ReconContext& ctx, const WcrrModel& model,
                          const ReconConfig& cfg);

/// One simulated acquisition with its ground truth, shared across grid
/// cells.
struct ValidationCase {
  ComplexVolume gt;
  std::shared_ptr<ReconContext> ctx;
};

using ReconMethod = std::function<ComplexVolume(const ReconContext&, const ReconConfig&)>;

struct GridCell {
  double lambda = 0;
  double sigma = 0;
  double mean_psnr = 0;
  bool failed = false;
};

struct GridSearchResult {
  ReconConfig best;
  std::vector<GridCell> table;
};

/// Masked PSNR averaged over the validation cases for every
/// (lambda, sigma) pair; returns the argmax cell. Ties break toward the
/// smaller lambda, then the smaller sigma. Failing cells are recorded
/// and skipped rather than aborting the search.
GridSearchResult grid_search(const std::vector<ValidationCase>& cases, const ReconMethod& method,
                             std::vector<double> lambda_grid, std::vector<double> sigma_grid,
                             const ReconConfig& base = {});

void write_grid_csv(const GridSearchResult& result, const std::string& path);

}  // namespace wcrr
