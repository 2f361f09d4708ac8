#include "wcrr3d/recon.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace wcrr {

namespace {

/// Caches the forward transform of the most recent points so that the
/// value and gradient evaluations at the same iterate share one NDFT.
class ResidualCache {
 public:
  ResidualCache(const ReconContext& ctx) : ctx_(ctx) {}

  /// Returns A x - y for the given flattened x.
  const KSpaceData& residual(const RealVec& xv) {
    for (Entry& e : entries_) {
      if (e.x == xv) return e.residual;
    }
    Entry& e = entries_[next_];
    next_ = (next_ + 1) % 2;
    e.x = xv;
    e.residual = ctx_.op.forward(from_real_vector(xv, ctx_.op.dims()));
    for (size_t i = 0; i < e.residual.samples.size(); ++i)
      e.residual.samples[i] -= ctx_.y.samples[i];
    return e.residual;
  }

 private:
  struct Entry {
    RealVec x;
    KSpaceData residual;
  };
  const ReconContext& ctx_;
  Entry entries_[2];
  int next_ = 0;
};

}  // namespace

BaselineResult recon_wcrr(const ReconContext& ctx, const WcrrModel& model,
                          const ReconConfig& cfg) {
  const Dims3 d = ctx.op.dims();
  ResidualCache cache(ctx);

  Objective obj;
  obj.value = [&](const RealVec& xv) {
    const KSpaceData& r = cache.residual(xv);
    const double n = norm(r);
    const double reg =
        cfg.lambda > 0 ? cfg.lambda * wcrr_value(model, from_real_vector(xv, d), cfg.sigma) : 0.0;
    return 0.5 * n * n + reg;
  };
  obj.gradient = [&](const RealVec& xv) {
    const KSpaceData& r = cache.residual(xv);
    ComplexVolume g = ctx.op.adjoint(r);
    if (cfg.lambda > 0) {
      const ComplexVolume gr = wcrr_grad(model, from_real_vector(xv, d), cfg.sigma);
      for (size_t i = 0; i < g.data.size(); ++i) g.data[i] += cfg.lambda * gr.data[i];
    }
    return to_real_vector(g);
  };

  SolverConfig scfg;
  scfg.eps = cfg.tol;
  scfg.max_iters = cfg.max_iters;
  scfg.initial_lipschitz = std::max(ctx.norm_sq, 1e-12);

  const ComplexVolume x0 = recon_dcp(ctx);
  NmapgResult res = nmapg_minimize(obj, to_real_vector(x0), scfg);

  BaselineResult out;
  out.x = from_real_vector(res.x, d);
  out.trace = std::move(res.trace);
  return out;
}

GridSearchResult grid_search(const std::vector<ValidationCase>& cases, const ReconMethod& method,
                             std::vector<double> lambda_grid, std::vector<double> sigma_grid,
                             const ReconConfig& base) {
  if (cases.empty()) throw std::invalid_argument("grid_search: no validation cases");
  if (lambda_grid.empty() || sigma_grid.empty())
    throw std::invalid_argument("grid_search: empty grid");
  std::sort(lambda_grid.begin(), lambda_grid.end());
  std::sort(sigma_grid.begin(), sigma_grid.end());

  GridSearchResult result;
  bool have_best = false;
  double best_psnr = 0;
  for (double lambda : lambda_grid) {
    for (double sigma : sigma_grid) {
      GridCell cell;
      cell.lambda = lambda;
      cell.sigma = sigma;
      ReconConfig cfg = base;
      cfg.lambda = lambda;
      cfg.sigma = sigma;
      double acc = 0;
      try {
        for (const ValidationCase& vc : cases) {
          const ComplexVolume rec = method(*vc.ctx, cfg);
          acc += masked_psnr(vc.gt, rec, foreground_mask(vc.gt));
        }
        cell.mean_psnr = acc / double(cases.size());
      } catch (const std::exception&) {
        cell.failed = true;
        cell.mean_psnr = 0;
      }
      result.table.push_back(cell);
      // Strict comparison in ascending grid order: ties keep the
      // smaller lambda, then the smaller sigma.
      if (!cell.failed && (!have_best || cell.mean_psnr > best_psnr)) {
        have_best = true;
        best_psnr = cell.mean_psnr;
        result.best = cfg;
      }
    }
  }
  if (!have_best) throw std::runtime_error("grid_search: every cell failed");
  return result;
}

void write_grid_csv(const GridSearchResult& result, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("write_grid_csv: cannot open " + path);
  std::fprintf(f, "lambda,sigma,mean_psnr,failed\n");
  for (const GridCell& c : result.table)
    std::fprintf(f, "%.10g,%.10g,%.10g,%d\n", c.lambda, c.sigma, c.mean_psnr, c.failed ? 1 : 0);
  std::fclose(f);
}

}  // namespace wcrr
