#include "wcrr3d/potentials.hpp"

#include <algorithm>
#include <stdexcept>

namespace wcrr {

double huber(double t, double beta) {
  const double a = std::abs(t);
  return a <= 1.0 / beta ? 0.5 * beta * t * t : a - 0.5 / beta;
}

double shared_potential(double t, double beta) { return huber(t, beta) - huber(t, 1.0); }

namespace {
double clip1(double v) { return std::min(1.0, std::max(-1.0, v)); }
}  // namespace

double shared_potential_d1(double t, double beta) { return clip1(beta * t) - clip1(t); }

double shared_potential_d2(double t, double beta) {
  const double a = std::abs(t);
  double v = 0;
  if (a < 1.0 / beta) v += beta;
  if (a < 1.0) v -= 1.0;
  return v;
}

void PotentialParams::spline_support(double sigma_clamped, int* k0, double* w0, double* w1) const {
  if (knots < 2) throw std::invalid_argument("PotentialParams: needs at least 2 knots");
  const double pos = (sigma_clamped - sigma_min) / (sigma_max - sigma_min) * double(knots - 1);
  int k = int(std::floor(pos));
  k = std::max(0, std::min(knots - 2, k));
  const double frac = pos - double(k);
  *k0 = k;
  *w0 = 1.0 - frac;
  *w1 = frac;
}

double PotentialParams::spline_value(int j, double sigma_clamped) const {
  int k0;
  double w0, w1;
  spline_support(sigma_clamped, &k0, &w0, &w1);
  const double* c = &knot_values[size_t(j) * knots];
  return w0 * c[k0] + w1 * c[k0 + 1];
}

double PotentialParams::alpha(double sigma, int j) const {
  const double s = clamp_sigma(sigma);
  return std::exp(spline_value(j, s)) / (s + 1e-5);
}

double psi_value(double t, double alpha, double beta) {
  return shared_potential(alpha * t, beta) / (alpha * alpha);
}

double psi_d1(double t, double alpha, double beta) {
  return shared_potential_d1(alpha * t, beta) / alpha;
}

double psi_d2(double t, double alpha, double beta) {
  return shared_potential_d2(alpha * t, beta);
}

}  // namespace wcrr
