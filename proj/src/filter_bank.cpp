#include "wcrr3d/filter_bank.hpp"

#include <cmath>
#include <stdexcept>

#include "wcrr3d/rng.hpp"

namespace wcrr {

namespace {

/// Channel copied into a (nx+2)(ny+2)(nz+2) buffer with periodic halo.
std::vector<double> pad_periodic(const double* src, Dims3 d) {
  const int px = d.nx + 2, py = d.ny + 2, pz = d.nz + 2;
  std::vector<double> pad(size_t(px) * py * pz);
  for (int z = 0; z < pz; ++z) {
    const int sz = (z - 1 + d.nz) % d.nz;
    for (int y = 0; y < py; ++y) {
      const int sy = (y - 1 + d.ny) % d.ny;
      const double* srow = &src[(size_t(sz) * d.ny + sy) * d.nx];
      double* prow = &pad[(size_t(z) * py + y) * px];
      prow[0] = srow[d.nx - 1];
      for (int x = 0; x < d.nx; ++x) prow[x + 1] = srow[x];
      prow[px - 1] = srow[0];
    }
  }
  return pad;
}

struct Tap {
  int dz, dy, dx;
};

constexpr Tap tap_offset(int t) { return {t / 9 - 1, (t / 3) % 3 - 1, t % 3 - 1}; }

/// out[o](n) += sum_i sum_t w[(o*in+i)*27+t] * in[i](n + t), periodic.
void conv_apply(const std::vector<double>& weights, int in_ch, int out_ch,
                const std::vector<std::vector<double>>& padded, Dims3 d, FeatureField& out) {
  const int px = d.nx + 2, py = d.ny + 2;
#pragma omp parallel for schedule(static)
  for (int o = 0; o < out_ch; ++o) {
    double* oc = out.channel(o);
    for (int i = 0; i < in_ch; ++i) {
      const double* pad = padded[size_t(i)].data();
      for (int t = 0; t < 27; ++t) {
        const double w = weights[(size_t(o) * in_ch + i) * 27 + t];
        if (w == 0.0) continue;
        const Tap tp = tap_offset(t);
        for (int z = 0; z < d.nz; ++z) {
          for (int y = 0; y < d.ny; ++y) {
            const double* prow =
                &pad[(size_t(z + 1 + tp.dz) * py + (y + 1 + tp.dy)) * px + (1 + tp.dx)];
            double* orow = &oc[(size_t(z) * d.ny + y) * d.nx];
            for (int x = 0; x < d.nx; ++x) orow[x] += w * prow[x];
          }
        }
      }
    }
  }
}

FeatureField conv_forward(const std::vector<double>& weights, int in_ch, int out_ch,
                          const FeatureField& in) {
  FeatureField out(in.dims, out_ch);
  std::vector<std::vector<double>> padded(static_cast<size_t>(in_ch));
  for (int i = 0; i < in_ch; ++i) padded[size_t(i)] = pad_periodic(in.channel(i), in.dims);
  conv_apply(weights, in_ch, out_ch, padded, in.dims, out);
  return out;
}

/// gin[i](n) = sum_o sum_t w[(o*in+i)*27+t] * gout[o](n - t): the exact
/// adjoint, realized as a correlation with negated taps.
FeatureField conv_adjoint(const std::vector<double>& weights, int in_ch, int out_ch,
                          const FeatureField& gout) {
  const Dims3 d = gout.dims;
  FeatureField gin(d, in_ch);
  std::vector<std::vector<double>> padded(static_cast<size_t>(out_ch));
  for (int o = 0; o < out_ch; ++o) padded[size_t(o)] = pad_periodic(gout.channel(o), d);
  const int px = d.nx + 2, py = d.ny + 2;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < in_ch; ++i) {
    double* ic = gin.channel(i);
    for (int o = 0; o < out_ch; ++o) {
      const double* pad = padded[size_t(o)].data();
      for (int t = 0; t < 27; ++t) {
        const double w = weights[(size_t(o) * in_ch + i) * 27 + t];
        if (w == 0.0) continue;
        const Tap tp = tap_offset(t);
        for (int z = 0; z < d.nz; ++z) {
          for (int y = 0; y < d.ny; ++y) {
            const double* prow =
                &pad[(size_t(z + 1 - tp.dz) * py + (y + 1 - tp.dy)) * px + (1 - tp.dx)];
            double* irow = &ic[(size_t(z) * d.ny + y) * d.nx];
            for (int x = 0; x < d.nx; ++x) irow[x] += w * prow[x];
          }
        }
      }
    }
  }
  return gin;
}

/// dw[(o*in+i)*27+t] += sum_n gout[o](n) * in[i](n + t).
void conv_param_grad(int in_ch, int out_ch, const FeatureField& gout, const FeatureField& in,
                     std::vector<double>& dw) {
  const Dims3 d = in.dims;
  std::vector<std::vector<double>> padded(static_cast<size_t>(in_ch));
  for (int i = 0; i < in_ch; ++i) padded[size_t(i)] = pad_periodic(in.channel(i), d);
  const int px = d.nx + 2, py = d.ny + 2;
#pragma omp parallel for schedule(static) collapse(2)
  for (int o = 0; o < out_ch; ++o) {
    for (int i = 0; i < in_ch; ++i) {
      const double* oc = gout.channel(o);
      const double* pad = padded[size_t(i)].data();
      for (int t = 0; t < 27; ++t) {
        const Tap tp = tap_offset(t);
        double acc = 0;
        for (int z = 0; z < d.nz; ++z) {
          for (int y = 0; y < d.ny; ++y) {
            const double* prow =
                &pad[(size_t(z + 1 + tp.dz) * py + (y + 1 + tp.dy)) * px + (1 + tp.dx)];
            const double* orow = &oc[(size_t(z) * d.ny + y) * d.nx];
            for (int x = 0; x < d.nx; ++x) acc += orow[x] * prow[x];
          }
        }
        dw[(size_t(o) * in_ch + i) * 27 + t] += acc;
      }
    }
  }
}

/// Per-kernel mean subtraction (the zero-mean reparametrization and its
/// self-adjoint projection).
void project_zero_mean(std::vector<double>& w, int in_ch, int out_ch) {
  for (int o = 0; o < out_ch; ++o) {
    for (int i = 0; i < in_ch; ++i) {
      double* k = &w[(size_t(o) * in_ch + i) * 27];
      double mean = 0;
      for (int t = 0; t < 27; ++t) mean += k[t];
      mean /= 27.0;
      for (int t = 0; t < 27; ++t) k[t] -= mean;
    }
  }
}

}  // namespace

void FilterBankGrad::accumulate(const FilterBankGrad& other, double scale) {
  for (size_t l = 0; l < layers.size(); ++l)
    for (size_t i = 0; i < layers[l].size(); ++i) layers[l][i] += scale * other.layers[l][i];
}

std::vector<double> FilterBank::effective_weights(int layer) const {
  std::vector<double> w = layers[size_t(layer)].weights;
  if (layer == 0 && zero_mean_first)
    project_zero_mean(w, layers[0].in_ch, layers[0].out_ch);
  return w;
}

FilterBank FilterBank::create(const std::vector<int>& channel_plan, std::uint64_t seed) {
  if (channel_plan.size() < 2)
    throw std::invalid_argument("FilterBank: channel plan needs at least two entries");
  Rng rng(seed);
  FilterBank fb;
  for (size_t l = 0; l + 1 < channel_plan.size(); ++l) {
    ConvLayer layer(channel_plan[l], channel_plan[l + 1]);
    const double std_dev = 1.0 / std::sqrt(double(layer.in_ch) * 27.0);
    for (double& w : layer.weights) w = std_dev * rng.gaussian();
    fb.layers.push_back(std::move(layer));
  }
  return fb;
}

FilterBankGrad FilterBank::zero_grad() const {
  FilterBankGrad g;
  for (const ConvLayer& l : layers) g.layers.emplace_back(l.weights.size(), 0.0);
  return g;
}

FeatureField cascade_forward(const FilterBank& fb, const FeatureField& input,
                             CascadeActivations* acts) {
  if (input.channels != fb.input_channels())
    throw std::invalid_argument("cascade_forward: channel mismatch");
  FeatureField cur = input;
  if (acts) {
    acts->act.clear();
    acts->act.push_back(cur);
  }
  for (size_t l = 0; l < fb.layers.size(); ++l) {
    cur = conv_forward(fb.effective_weights(int(l)), fb.layers[l].in_ch, fb.layers[l].out_ch, cur);
    if (acts) acts->act.push_back(cur);
  }
  const double s = fb.scale();
  if (s != 1.0)
    for (double& v : cur.data) v *= s;
  return cur;
}

FeatureField cascade_adjoint(const FilterBank& fb, const FeatureField& cotangent) {
  if (cotangent.channels != fb.feature_channels())
    throw std::invalid_argument("cascade_adjoint: channel mismatch");
  FeatureField cur = cotangent;
  const double s = fb.scale();
  if (s != 1.0)
    for (double& v : cur.data) v *= s;
  for (int l = int(fb.layers.size()) - 1; l >= 0; --l)
    cur = conv_adjoint(fb.effective_weights(l), fb.layers[size_t(l)].in_ch,
                       fb.layers[size_t(l)].out_ch, cur);
  return cur;
}

void cascade_param_backprop(const FilterBank& fb, const CascadeActivations& acts,
                            const FeatureField& cotangent, FilterBankGrad& grad) {
  if (acts.act.size() != fb.layers.size() + 1)
    throw std::invalid_argument("cascade_param_backprop: activation count mismatch");
  FeatureField delta = cotangent;
  for (int l = int(fb.layers.size()) - 1; l >= 0; --l) {
    const ConvLayer& layer = fb.layers[size_t(l)];
    conv_param_grad(layer.in_ch, layer.out_ch, delta, acts.act[size_t(l)], grad.layers[size_t(l)]);
    if (l > 0)
      delta = conv_adjoint(fb.effective_weights(l), layer.in_ch, layer.out_ch, delta);
  }
  if (fb.zero_mean_first)
    project_zero_mean(grad.layers[0], fb.layers[0].in_ch, fb.layers[0].out_ch);
}

namespace {

using CMat = std::vector<cplx>;  // row-major out_ch x in_ch

/// Transfer matrix of one layer at integer frequency (fx, fy, fz):
/// H_oi = sum_t w[(o*in+i)*27+t] exp(+i 2 pi (fx dx/Nx + fy dy/Ny + fz dz/Nz)).
CMat layer_transfer(const std::vector<double>& w, int in_ch, int out_ch, Dims3 d, int fx, int fy,
                    int fz) {
  cplx tw[27];
  for (int t = 0; t < 27; ++t) {
    const Tap tp = tap_offset(t);
    const double ph = 2.0 * M_PI * (double(fx) * tp.dx / d.nx + double(fy) * tp.dy / d.ny +
                                    double(fz) * tp.dz / d.nz);
    tw[t] = {std::cos(ph), std::sin(ph)};
  }
  CMat h(size_t(out_ch) * in_ch, cplx(0, 0));
  for (int o = 0; o < out_ch; ++o)
    for (int i = 0; i < in_ch; ++i) {
      cplx acc = 0;
      const double* k = &w[(size_t(o) * in_ch + i) * 27];
      for (int t = 0; t < 27; ++t) acc += k[t] * tw[t];
      h[size_t(o) * in_ch + i] = acc;
    }
  return h;
}

CMat matmul(const CMat& a, int ar, int ac, const CMat& b, int bc) {
  CMat c(size_t(ar) * bc, cplx(0, 0));
  for (int i = 0; i < ar; ++i)
    for (int k = 0; k < ac; ++k) {
      const cplx aik = a[size_t(i) * ac + k];
      for (int j = 0; j < bc; ++j) c[size_t(i) * bc + j] += aik * b[size_t(k) * bc + j];
    }
  return c;
}

/// Largest singular value of a J x in composite transfer matrix with
/// in <= 2, via the closed-form top eigenvalue of T^H T.
double top_singular_value(const CMat& t, int rows, int cols) {
  if (cols == 1) {
    double s = 0;
    for (int r = 0; r < rows; ++r) s += std::norm(t[size_t(r)]);
    return std::sqrt(s);
  }
  if (cols != 2) throw std::invalid_argument("spectral_norm_fft: input channels must be 1 or 2");
  double g00 = 0, g11 = 0;
  cplx g01 = 0;
  for (int r = 0; r < rows; ++r) {
    const cplx a = t[size_t(r) * 2], b = t[size_t(r) * 2 + 1];
    g00 += std::norm(a);
    g11 += std::norm(b);
    g01 += std::conj(a) * b;
  }
  const double mid = 0.5 * (g00 + g11);
  const double rad = std::sqrt(0.25 * (g00 - g11) * (g00 - g11) + std::norm(g01));
  return std::sqrt(std::max(0.0, mid + rad));
}

/// Unit top right-singular vector of T (cols <= 2).
std::vector<cplx> top_right_vector(const CMat& t, int rows, int cols) {
  if (cols == 1) return {cplx(1, 0)};
  double g00 = 0, g11 = 0;
  cplx g01 = 0;
  for (int r = 0; r < rows; ++r) {
    const cplx a = t[size_t(r) * 2], b = t[size_t(r) * 2 + 1];
    g00 += std::norm(a);
    g11 += std::norm(b);
    g01 += std::conj(a) * b;
  }
  const double mid = 0.5 * (g00 + g11);
  const double rad = std::sqrt(0.25 * (g00 - g11) * (g00 - g11) + std::norm(g01));
  const double lam = mid + rad;
  // Eigenvector of [[g00, g01], [conj(g01), g11]] for eigenvalue lam.
  std::vector<cplx> w(2);
  if (std::abs(g01) > 1e-300) {
    w[0] = g01;
    w[1] = cplx(lam - g00, 0);
  } else {
    // Diagonal Gram matrix: pick the dominant axis.
    if (g00 >= g11) { w[0] = 1; w[1] = 0; }
    else { w[0] = 0; w[1] = 1; }
  }
  double nw = std::sqrt(std::norm(w[0]) + std::norm(w[1]));
  if (nw < 1e-300) { w[0] = 1; w[1] = 0; nw = 1; }
  w[0] /= nw;
  w[1] /= nw;
  return w;
}

std::vector<CMat> all_layer_transfers(const FilterBank& fb, Dims3 d, int fx, int fy, int fz) {
  std::vector<CMat> ts;
  for (size_t l = 0; l < fb.layers.size(); ++l)
    ts.push_back(layer_transfer(fb.effective_weights(int(l)), fb.layers[l].in_ch,
                                fb.layers[l].out_ch, d, fx, fy, fz));
  return ts;
}

CMat composite_transfer(const FilterBank& fb, const std::vector<CMat>& ts) {
  CMat t = ts[0];
  int rows = fb.layers[0].out_ch;
  const int cols = fb.layers[0].in_ch;
  for (size_t l = 1; l < ts.size(); ++l) {
    t = matmul(ts[l], fb.layers[l].out_ch, fb.layers[l].in_ch, t, cols);
    rows = fb.layers[l].out_ch;
  }
  (void)rows;
  return t;
}

}  // namespace

SpectralNormInfo spectral_norm_fft(const FilterBank& fb, Dims3 dims) {
  if (fb.layers.empty()) throw std::invalid_argument("spectral_norm_fft: empty bank");
  const int in0 = fb.layers.front().in_ch;
  const int out_last = fb.layers.back().out_ch;

  std::vector<std::vector<double>> eff;
  for (size_t l = 0; l < fb.layers.size(); ++l) eff.push_back(fb.effective_weights(int(l)));

  SpectralNormInfo info;
  info.norm = -1;
  for (int fx = 0; fx < dims.nx; ++fx)
    for (int fy = 0; fy < dims.ny; ++fy)
      for (int fz = 0; fz < dims.nz; ++fz) {
        std::vector<CMat> ts;
        for (size_t l = 0; l < fb.layers.size(); ++l)
          ts.push_back(layer_transfer(eff[l], fb.layers[l].in_ch, fb.layers[l].out_ch, dims, fx,
                                      fy, fz));
        const CMat t = composite_transfer(fb, ts);
        const double s = top_singular_value(t, out_last, in0);
        if (s > info.norm) {
          info.norm = s;
          info.argmax_freq = {fx, fy, fz};
        }
      }

  // Singular pair at the (lexicographically first) maximizing frequency.
  const auto [fx, fy, fz] = info.argmax_freq;
  const std::vector<CMat> ts = all_layer_transfers(fb, dims, fx, fy, fz);
  const CMat t = composite_transfer(fb, ts);
  info.right_vec = top_right_vector(t, out_last, in0);
  info.left_vec.assign(size_t(out_last), cplx(0, 0));
  if (info.norm > 1e-300) {
    for (int o = 0; o < out_last; ++o) {
      cplx acc = 0;
      for (int i = 0; i < in0; ++i) acc += t[size_t(o) * in0 + i] * info.right_vec[size_t(i)];
      info.left_vec[size_t(o)] = acc / info.norm;
    }
  }
  return info;
}

FilterBankGrad spectral_norm_param_gradient(const FilterBank& fb, Dims3 dims,
                                            const SpectralNormInfo& info) {
  const auto [fx, fy, fz] = info.argmax_freq;
  const std::vector<CMat> ts = all_layer_transfers(fb, dims, fx, fy, fz);
  const int n_layers = int(fb.layers.size());

  // Right partials q_l = T_{l-1} ... T_0 w and left partials
  // p_l = (T_{L-1} ... T_{l+1})^H u; sigma = p_l^H T_l q_l for every l.
  std::vector<std::vector<cplx>> q(static_cast<size_t>(n_layers));
  q[0] = info.right_vec;
  for (int l = 0; l + 1 < n_layers; ++l) {
    const ConvLayer& layer = fb.layers[size_t(l)];
    std::vector<cplx> next(size_t(layer.out_ch), cplx(0, 0));
    for (int o = 0; o < layer.out_ch; ++o)
      for (int i = 0; i < layer.in_ch; ++i)
        next[size_t(o)] += ts[size_t(l)][size_t(o) * layer.in_ch + i] * q[size_t(l)][size_t(i)];
    q[size_t(l) + 1] = std::move(next);
  }
  std::vector<std::vector<cplx>> p(static_cast<size_t>(n_layers));
  p[size_t(n_layers) - 1] = info.left_vec;
  for (int l = n_layers - 1; l > 0; --l) {
    const ConvLayer& layer = fb.layers[size_t(l)];
    std::vector<cplx> prev(size_t(layer.in_ch), cplx(0, 0));
    for (int o = 0; o < layer.out_ch; ++o)
      for (int i = 0; i < layer.in_ch; ++i)
        prev[size_t(i)] +=
            std::conj(ts[size_t(l)][size_t(o) * layer.in_ch + i]) * p[size_t(l)][size_t(o)];
    p[size_t(l) - 1] = std::move(prev);
  }

  FilterBankGrad grad = fb.zero_grad();
  for (int l = 0; l < n_layers; ++l) {
    const ConvLayer& layer = fb.layers[size_t(l)];
    cplx tw[27];
    for (int t = 0; t < 27; ++t) {
      const Tap tp = tap_offset(t);
      const double ph = 2.0 * M_PI * (double(fx) * tp.dx / dims.nx + double(fy) * tp.dy / dims.ny +
                                      double(fz) * tp.dz / dims.nz);
      tw[t] = {std::cos(ph), std::sin(ph)};
    }
    for (int o = 0; o < layer.out_ch; ++o)
      for (int i = 0; i < layer.in_ch; ++i) {
        const cplx pq = std::conj(p[size_t(l)][size_t(o)]) * q[size_t(l)][size_t(i)];
        double* g = &grad.layers[size_t(l)][(size_t(o) * layer.in_ch + i) * 27];
        for (int t = 0; t < 27; ++t) g[t] = (pq * tw[t]).real();
      }
  }
  if (fb.zero_mean_first)
    project_zero_mean(grad.layers[0], fb.layers[0].in_ch, fb.layers[0].out_ch);
  return grad;
}

FilterBank normalize(const FilterBank& fb, Dims3 dims) {
  const SpectralNormInfo info = spectral_norm_fft(fb, dims);
  if (info.norm < 1e-12)
    throw std::runtime_error("normalize: all-zero (degenerate) filter cascade");
  FilterBank out = fb;
  out.cached_norm = info.norm;
  out.norm_dims = dims;
  return out;
}

}  // namespace wcrr
