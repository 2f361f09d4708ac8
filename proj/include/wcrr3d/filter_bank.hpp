#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "wcrr3d/feature_field.hpp"

namespace wcrr {

/// One 3x3x3 periodic cross-correlation layer, bias-free, unit stride.
/// Weight layout: weights[(o*in_ch + i)*27 + t] with the tap index
/// t = (dz+1)*9 + (dy+1)*3 + (dx+1), offsets in {-1,0,1}.
struct ConvLayer {
  int in_ch = 0;
  int out_ch = 0;
  std::vector<double> weights;

  ConvLayer() = default;
  ConvLayer(int in, int out) : in_ch(in), out_ch(out), weights(size_t(out) * in * 27, 0.0) {}
};

/// Parameter gradients with the same shapes as FilterBank::layers.
struct FilterBankGrad {
  std::vector<std::vector<double>> layers;

  void accumulate(const FilterBankGrad& other, double scale);
};

/// Cascade of 3x3x3 convolutions implementing the feature operator.
/// The raw parameters stay untouched; the first layer's kernels are
/// mean-subtracted at every evaluation and the cached spectral norm is
/// applied as a 1/||U|| output scale, so training gradients flow through
/// both reparametrizations.
struct FilterBank {
  std::vector<ConvLayer> layers;
  bool zero_mean_first = true;
  double cached_norm = 0.0;       // ||U||; <= 0 means "not normalized"
  Dims3 norm_dims{0, 0, 0};       // grid the cached norm was computed on

  int input_channels() const { return layers.empty() ? 0 : layers.front().in_ch; }
  int feature_channels() const { return layers.empty() ? 0 : layers.back().out_ch; }
  double scale() const { return cached_norm > 0 ? 1.0 / cached_norm : 1.0; }

  /// Layer weights with the zero-mean reparametrization applied.
  std::vector<double> effective_weights(int layer) const;

  /// Random Gaussian init with std (fan_in * 27)^(-1/2); plan lists the
  /// channel counts, e.g. {2, 8, 16, 32}.
  static FilterBank create(const std::vector<int>& channel_plan, std::uint64_t seed);

  FilterBankGrad zero_grad() const;
};

/// Unscaled intermediate activations of the cascade (input first).
struct CascadeActivations {
  std::vector<FeatureField> act;
};

/// W applied to a field: scale * U_eff(input). When `acts` is given the
/// unscaled activations are recorded for a later parameter backprop.
FeatureField cascade_forward(const FilterBank& fb, const FeatureField& input,
                             CascadeActivations* acts = nullptr);

/// Exact adjoint W^T of cascade_forward.
FeatureField cascade_adjoint(const FilterBank& fb, const FeatureField& cotangent);

/// Accumulates d<cotangent, U_eff(input)>/d(raw weights) into `grad`,
/// including the zero-mean projection on the first layer. The cotangent
/// must already carry any output scale factor.
void cascade_param_backprop(const FilterBank& fb, const CascadeActivations& acts,
                            const FeatureField& cotangent, FilterBankGrad& grad);

/// Spectral norm of the (unscaled, zero-mean reparametrized) cascade on
/// a periodic grid, evaluated per frequency through the composite
/// transfer matrix; with the singular pair at the lexicographically
/// first maximizing frequency.
struct SpectralNormInfo {
  double norm = 0;
  std::array<int, 3> argmax_freq{0, 0, 0};
  std::vector<cplx> left_vec;   // u, length = feature channels
  std::vector<cplx> right_vec;  // w, length = input channels
};

SpectralNormInfo spectral_norm_fft(const FilterBank& fb, Dims3 dims);

/// d||U||/d(raw weights) from the maximizing frequency's singular pair.
FilterBankGrad spectral_norm_param_gradient(const FilterBank& fb, Dims3 dims,
                                            const SpectralNormInfo& info);

/// Returns the bank with cached_norm set to ||U|| on the given grid.
/// Throws on an all-zero cascade.
FilterBank normalize(const FilterBank& fb, Dims3 dims);

}  // namespace wcrr
