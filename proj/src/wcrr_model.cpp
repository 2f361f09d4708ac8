#include "wcrr3d/wcrr_model.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <stdexcept>

#include <json.hpp>

namespace wcrr {

WcrrModel WcrrModel::create(const std::vector<int>& channel_plan, RotationSet rots,
                            std::uint64_t seed, int knots, double sigma_min, double sigma_max) {
  WcrrModel m;
  m.filter_bank = FilterBank::create(channel_plan, seed);
  m.potentials = PotentialParams(channel_plan.back(), knots, sigma_min, sigma_max);
  m.rotations = std::move(rots);
  m.init_seed = seed;
  return m;
}

namespace {

std::vector<double> channel_alphas(const WcrrModel& model, double sigma) {
  const int j_channels = model.filter_bank.feature_channels();
  std::vector<double> alphas(static_cast<size_t>(j_channels));
  for (int j = 0; j < j_channels; ++j) alphas[size_t(j)] = model.potentials.alpha(sigma, j);
  return alphas;
}

}  // namespace

double wcrr_value(const WcrrModel& model, const ComplexVolume& x, double sigma) {
  const std::vector<double> alphas = channel_alphas(model, sigma);
  const double beta = model.potentials.beta();
  const FeatureField x2 = to_feature_field(x);
  const std::int64_t n = x.size();

  double acc = 0;
  for (const Rotation& r : model.rotations.elements) {
    const FeatureField xr = rotate_field(x2, r);
    const FeatureField feats = cascade_forward(model.filter_bank, xr);
    for (int j = 0; j < feats.channels; ++j) {
      const double* f = feats.channel(j);
      const double a = alphas[size_t(j)];
      double cacc = 0;
      for (std::int64_t i = 0; i < n; ++i) cacc += shared_potential(a * f[i], beta);
      acc += cacc / (a * a);
    }
  }
  return acc / double(model.rotations.size());
}

ComplexVolume wcrr_grad(const WcrrModel& model, const ComplexVolume& x, double sigma) {
  const std::vector<double> alphas = channel_alphas(model, sigma);
  const double beta = model.potentials.beta();
  const FeatureField x2 = to_feature_field(x);
  const std::int64_t n = x.size();

  FeatureField grad(x.dims, 2);
  for (const Rotation& r : model.rotations.elements) {
    const FeatureField xr = rotate_field(x2, r);
    FeatureField feats = cascade_forward(model.filter_bank, xr);
    for (int j = 0; j < feats.channels; ++j) {
      double* f = feats.channel(j);
      const double a = alphas[size_t(j)];
      for (std::int64_t i = 0; i < n; ++i) f[i] = shared_potential_d1(a * f[i], beta) / a;
    }
    const FeatureField back = cascade_adjoint(model.filter_bank, feats);
    const FeatureField unrot = rotate_field(back, r.inverse());
    for (size_t i = 0; i < grad.data.size(); ++i) grad.data[i] += unrot.data[i];
  }
  const double inv = 1.0 / double(model.rotations.size());
  for (double& v : grad.data) v *= inv;
  return to_complex_volume(grad);
}

ComplexVolume wcrr_hvp(const WcrrModel& model, const ComplexVolume& x, double sigma,
                       const ComplexVolume& v) {
  if (x.dims != v.dims) throw std::invalid_argument("wcrr_hvp: dim mismatch");
  const std::vector<double> alphas = channel_alphas(model, sigma);
  const double beta = model.potentials.beta();
  const FeatureField x2 = to_feature_field(x);
  const FeatureField v2 = to_feature_field(v);
  const std::int64_t n = x.size();

  FeatureField out(x.dims, 2);
  for (const Rotation& r : model.rotations.elements) {
    const FeatureField xr = rotate_field(x2, r);
    const FeatureField vr = rotate_field(v2, r);
    const FeatureField feats = cascade_forward(model.filter_bank, xr);
    FeatureField dirs = cascade_forward(model.filter_bank, vr);
    for (int j = 0; j < feats.channels; ++j) {
      const double* f = feats.channel(j);
      double* d = dirs.channel(j);
      const double a = alphas[size_t(j)];
      for (std::int64_t i = 0; i < n; ++i) d[i] *= shared_potential_d2(a * f[i], beta);
    }
    const FeatureField back = cascade_adjoint(model.filter_bank, dirs);
    const FeatureField unrot = rotate_field(back, r.inverse());
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += unrot.data[i];
  }
  const double inv = 1.0 / double(model.rotations.size());
  for (double& e : out.data) e *= inv;
  return to_complex_volume(out);
}

namespace {

void write_blob_f32(const std::string& path, const std::vector<double>& data) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
  std::vector<float> buf(data.begin(), data.end());
  if (!buf.empty() && std::fwrite(buf.data(), 4, buf.size(), f) != buf.size()) {
    std::fclose(f);
    throw std::runtime_error("checkpoint: short write to " + path);
  }
  std::fclose(f);
}

std::vector<double> read_blob_f32(const std::string& path, size_t count) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
  std::vector<float> buf(count);
  const size_t got = std::fread(buf.data(), 4, count, f);
  std::fclose(f);
  if (got != count) throw std::runtime_error("checkpoint: truncated blob " + path);
  return std::vector<double>(buf.begin(), buf.end());
}

char axis_letter(Axis a) { return a == Axis::X ? 'X' : (a == Axis::Y ? 'Y' : 'Z'); }

Axis axis_from_letter(char c) {
  switch (c) {
    case 'X': return Axis::X;
    case 'Y': return Axis::Y;
    case 'Z': return Axis::Z;
  }
  throw std::runtime_error("checkpoint: bad rotation axis");
}

}  // namespace

void save_checkpoint(const WcrrModel& model, const std::string& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  std::vector<int> plan{model.filter_bank.input_channels()};
  for (const ConvLayer& l : model.filter_bank.layers) plan.push_back(l.out_ch);
  manifest["channel_plan"] = plan;
  manifest["zero_mean_first"] = model.filter_bank.zero_mean_first;
  manifest["norm_estimate"] = model.filter_bank.cached_norm;
  manifest["norm_dims"] = {model.filter_bank.norm_dims.nx, model.filter_bank.norm_dims.ny,
                           model.filter_bank.norm_dims.nz};
  manifest["b"] = model.potentials.b;
  manifest["knots"] = model.potentials.knots;
  manifest["sigma_min"] = model.potentials.sigma_min;
  manifest["sigma_max"] = model.potentials.sigma_max;
  manifest["seed"] = model.init_seed;

  std::vector<std::string> rot;
  for (const Rotation& r : model.rotations.elements)
    rot.push_back(std::string(1, axis_letter(r.axis)) + std::to_string(r.quarter_turns));
  manifest["rotations"] = rot;

  nlohmann::json tensors = nlohmann::json::array();
  for (size_t l = 0; l < model.filter_bank.layers.size(); ++l) {
    const ConvLayer& layer = model.filter_bank.layers[l];
    const std::string name = "conv" + std::to_string(l);
    tensors.push_back({{"name", name},
                       {"shape", {layer.out_ch, layer.in_ch, 3, 3, 3}},
                       {"file", name + ".f32"}});
    write_blob_f32(dir + "/" + name + ".f32", layer.weights);
  }
  tensors.push_back({{"name", "spline_knots"},
                     {"shape", {model.potentials.channels, model.potentials.knots}},
                     {"file", "spline_knots.f32"}});
  write_blob_f32(dir + "/spline_knots.f32", model.potentials.knot_values);
  manifest["tensors"] = tensors;

  std::FILE* f = std::fopen((dir + "/manifest.json").c_str(), "w");
  if (!f) throw std::runtime_error("checkpoint: cannot open manifest in " + dir);
  const std::string text = manifest.dump(2);
  std::fwrite(text.data(), 1, text.size(), f);
  std::fclose(f);
}

WcrrModel load_checkpoint(const std::string& dir) {
  std::ifstream in(dir + "/manifest.json");
  if (!in) throw std::runtime_error("checkpoint: cannot open manifest in " + dir);
  nlohmann::json manifest;
  in >> manifest;

  const std::vector<int> plan = manifest.at("channel_plan").get<std::vector<int>>();
  WcrrModel m;
  m.filter_bank = FilterBank::create(plan, 0);
  m.filter_bank.zero_mean_first = manifest.at("zero_mean_first").get<bool>();
  m.filter_bank.cached_norm = manifest.at("norm_estimate").get<double>();
  const auto nd = manifest.at("norm_dims").get<std::vector<int>>();
  m.filter_bank.norm_dims = {nd[0], nd[1], nd[2]};
  m.potentials = PotentialParams(plan.back(), manifest.at("knots").get<int>(),
                                 manifest.at("sigma_min").get<double>(),
                                 manifest.at("sigma_max").get<double>());
  m.potentials.b = manifest.at("b").get<double>();
  m.init_seed = manifest.at("seed").get<std::uint64_t>();

  std::vector<Rotation> rots;
  for (const auto& s : manifest.at("rotations")) {
    const std::string text = s.get<std::string>();
    rots.push_back({axis_from_letter(text.at(0)), std::stoi(text.substr(1))});
  }
  m.rotations = RotationSet::build(std::move(rots));

  for (const auto& t : manifest.at("tensors")) {
    const std::string name = t.at("name").get<std::string>();
    const std::string file = dir + "/" + t.at("file").get<std::string>();
    if (name == "spline_knots") {
      m.potentials.knot_values = read_blob_f32(file, m.potentials.knot_values.size());
    } else if (name.rfind("conv", 0) == 0) {
      const size_t l = size_t(std::stoi(name.substr(4)));
      if (l >= m.filter_bank.layers.size()) throw std::runtime_error("checkpoint: bad tensor " + name);
      m.filter_bank.layers[l].weights =
          read_blob_f32(file, m.filter_bank.layers[l].weights.size());
    } else {
      throw std::runtime_error("checkpoint: unknown tensor " + name);
    }
  }
  return m;
}

}  // namespace wcrr
