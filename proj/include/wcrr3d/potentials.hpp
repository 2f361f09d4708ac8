#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace wcrr {

/// Huber function: (beta/2) t^2 for |t| <= 1/beta, |t| - 1/(2 beta) else.
double huber(double t, double beta);

/// The 1-weakly convex profile phi_beta = huber_beta - huber_1 and its
/// derivatives. The second derivative uses strict inequalities at the
/// breakpoints |t| = 1/beta and |t| = 1 (half-open from the inside).
double shared_potential(double t, double beta);
double shared_potential_d1(double t, double beta);  // clip(beta t,-1,1) - clip(t,-1,1)
double shared_potential_d2(double t, double beta);  // beta*[|t|<1/beta] - [|t|<1]

/// Per-channel scales conditioned on the noise level through learnable
/// linear splines: alpha_j(sigma) = exp(s_{c_j}(sigma)) / (sigma + 1e-5),
/// with K equidistant knots on [sigma_min, sigma_max]. Sigma is clamped
/// to the knot range before any evaluation, including the denominator.
struct PotentialParams {
  double b = std::log(2.0);  // beta = exp(b)
  int channels = 0;          // J
  int knots = 12;            // K
  double sigma_min = 0.01;
  double sigma_max = 0.1;
  std::vector<double> knot_values;  // c[j * knots + k], initialized to 0

  PotentialParams() = default;
  PotentialParams(int j, int k, double smin = 0.01, double smax = 0.1)
      : channels(j), knots(k), sigma_min(smin), sigma_max(smax),
        knot_values(size_t(j) * k, 0.0) {}

  double beta() const { return std::exp(b); }
  double knot_sigma(int k) const {
    return sigma_min + (sigma_max - sigma_min) * double(k) / double(knots - 1);
  }
  double clamp_sigma(double sigma) const {
    return std::min(sigma_max, std::max(sigma_min, sigma));
  }

  /// Interpolation support at a clamped sigma: knot index k0 and the
  /// weights of knots k0, k0+1.
  void spline_support(double sigma_clamped, int* k0, double* w0, double* w1) const;

  double spline_value(int j, double sigma_clamped) const;
  double alpha(double sigma, int j) const;
};

/// psi_j and derivatives for a given channel scale alpha:
///   psi(t)   = phi_beta(alpha t) / alpha^2
///   psi'(t)  = phi_beta'(alpha t) / alpha
///   psi''(t) = phi_beta''(alpha t)
double psi_value(double t, double alpha, double beta);
double psi_d1(double t, double alpha, double beta);
double psi_d2(double t, double alpha, double beta);

}  // namespace wcrr
