#pragma once

#include <functional>
#include <string>
#include <vector>

namespace wcrr {

using RealVec = std::vector<double>;

namespace vec {
double dot(const RealVec& a, const RealVec& b);
double nrm2(const RealVec& v);
void axpy(double a, const RealVec& x, RealVec& y);  // y += a*x
RealVec lincomb(double a, const RealVec& x, double b, const RealVec& y);
}  // namespace vec

/// Smooth objective with an optional proximal operator for a separable
/// nonsmooth part. `value` must return the full objective (smooth +
/// separable); `gradient` only the smooth part's gradient.
struct Objective {
  std::function<double(const RealVec&)> value;
  std::function<RealVec(const RealVec&)> gradient;
  std::function<RealVec(const RealVec&, double step)> prox;  // optional
};

struct SolverConfig {
  double delta = 0.1;   // sufficient-decrease constant
  double eta = 0.8;     // non-monotone averaging factor
  double rho = 0.9;     // backtracking factor
  int line_search_cap = 20;
  double eps = 1e-4;    // relative-change tolerance
  double initial_lipschitz = 1.0;
  int max_iters = 1000;
};

struct TraceRow {
  int iter = 0;
  double objective = 0;
  double lipschitz = 0;
  double rel_change = 0;
  double wall_ms = 0;
};

struct SolverTrace {
  std::vector<TraceRow> rows;
  bool converged = false;
  bool line_search_capped = false;

  void write_csv(const std::string& path) const;
};

struct NmapgResult {
  RealVec x;
  SolverTrace trace;
};

/// Non-monotone accelerated proximal gradient with Barzilai-Borwein step
/// initialization, backtracking line search, a relaxed acceptance test
/// against max(J(xbar), c_k) and a non-extrapolated fallback candidate.
/// Terminates when the relative change between iterates drops below
/// cfg.eps or max_iters is reached. Throws on non-finite objective
/// values or Lipschitz-estimate overflow.
NmapgResult nmapg_minimize(const Objective& obj, const RealVec& x0, const SolverConfig& cfg);

struct MinresOptions {
  double tol = 1e-10;       // relative residual target
  int max_iters = 0;        // 0: 4 * dim
  bool check_symmetry = false;
};

struct MinresResult {
  RealVec x;
  bool converged = false;
  int iterations = 0;
  std::vector<double> residual_history;  // estimated ||b - A x_k||
};

/// Minimum residual method for symmetric (possibly indefinite) systems.
MinresResult minres_solve(const std::function<RealVec(const RealVec&)>& apply_a, const RealVec& b,
                          const MinresOptions& opts = {});

struct PowerIterResult {
  double value = 0;  // |Rayleigh quotient| of the final vector
  RealVec vector;    // final unit vector
};

/// Power iteration for the spectral norm of a symmetric operator
/// (largest absolute eigenvalue). Deterministic seeded start vector.
PowerIterResult power_iteration_norm(const std::function<RealVec(const RealVec&)>& apply_a,
                                     std::int64_t dim, int iters, std::uint64_t seed = 17);

struct FistaResult {
  RealVec x;
  int iterations = 0;
  SolverTrace trace;
};

/// FISTA with momentum t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2. `prox_g`
/// may be empty (smooth problem). `f_value` is only used for the trace.
FistaResult fista_minimize(const std::function<RealVec(const RealVec&)>& grad_f,
                           const std::function<RealVec(const RealVec&, double)>& prox_g,
                           const RealVec& x0, double step, int max_iters, double tol,
                           const std::function<double(const RealVec&)>& f_value = nullptr);

}  // namespace wcrr
