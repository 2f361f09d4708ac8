#include "wcrr3d/volume.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>

namespace wcrr {

bool all_finite(const ComplexVolume& v) {
  for (const cplx& c : v.data) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  }
  return true;
}

double norm(const ComplexVolume& v) {
  double s = 0;
  for (const cplx& c : v.data) s += std::norm(c);
  return std::sqrt(s);
}

cplx inner(const ComplexVolume& a, const ComplexVolume& b) {
  if (a.dims != b.dims) throw std::invalid_argument("inner: dim mismatch");
  cplx s = 0;
  for (size_t i = 0; i < a.data.size(); ++i) s += std::conj(a.data[i]) * b.data[i];
  return s;
}

ComplexVolume axpy(const ComplexVolume& a, cplx s, const ComplexVolume& b) {
  if (a.dims != b.dims) throw std::invalid_argument("axpy: dim mismatch");
  ComplexVolume out = a;
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += s * b.data[i];
  return out;
}

ComplexVolume extract_patch(const ComplexVolume& v, std::array<int, 3> corner, Dims3 size) {
  if (size.nx <= 0 || size.ny <= 0 || size.nz <= 0)
    throw std::out_of_range("extract_patch: nonpositive size");
  if (corner[0] < 0 || corner[1] < 0 || corner[2] < 0 ||
      corner[0] + size.nx > v.dims.nx || corner[1] + size.ny > v.dims.ny ||
      corner[2] + size.nz > v.dims.nz)
    throw std::out_of_range("extract_patch: patch exceeds volume bounds");
  ComplexVolume out(size);
  for (int z = 0; z < size.nz; ++z)
    for (int y = 0; y < size.ny; ++y)
      for (int x = 0; x < size.nx; ++x)
        out.at(x, y, z) = v.at(corner[0] + x, corner[1] + y, corner[2] + z);
  return out;
}

std::vector<double> to_real_vector(const ComplexVolume& v) {
  std::vector<double> r(2 * v.data.size());
  for (size_t i = 0; i < v.data.size(); ++i) {
    r[2 * i] = v.data[i].real();
    r[2 * i + 1] = v.data[i].imag();
  }
  return r;
}

ComplexVolume from_real_vector(const std::vector<double>& r, Dims3 dims) {
  if (std::int64_t(r.size()) != 2 * dims.count())
    throw std::invalid_argument("from_real_vector: length mismatch");
  ComplexVolume v(dims);
  for (size_t i = 0; i < v.data.size(); ++i) v.data[i] = {r[2 * i], r[2 * i + 1]};
  return v;
}

ComplexVolume gaussian_smooth(const ComplexVolume& v, double sigma) {
  if (sigma <= 0) return v;
  const int radius = std::max(1, int(std::ceil(3.0 * sigma)));
  std::vector<double> taps(size_t(2 * radius + 1));
  double sum = 0;
  for (int t = -radius; t <= radius; ++t) {
    taps[size_t(t + radius)] = std::exp(-0.5 * t * t / (sigma * sigma));
    sum += taps[size_t(t + radius)];
  }
  for (double& t : taps) t /= sum;

  const Dims3 d = v.dims;
  ComplexVolume cur = v;
  for (int axis = 0; axis < 3; ++axis) {
    ComplexVolume next(d);
    const int n[3] = {d.nx, d.ny, d.nz};
    const std::int64_t stride[3] = {1, d.nx, std::int64_t(d.nx) * d.ny};
    for (int z = 0; z < d.nz; ++z)
      for (int y = 0; y < d.ny; ++y)
        for (int x = 0; x < d.nx; ++x) {
          const int idx[3] = {x, y, z};
          const std::int64_t base = x + d.nx * (y + std::int64_t(d.ny) * z);
          cplx acc = 0;
          for (int t = -radius; t <= radius; ++t) {
            const int j = ((idx[axis] + t) % n[axis] + n[axis]) % n[axis];
            acc += taps[size_t(t + radius)] * cur.data[size_t(base + (j - idx[axis]) * stride[axis])];
          }
          next.data[size_t(base)] = acc;
        }
    cur = std::move(next);
  }
  return cur;
}

namespace {

constexpr char kCvolMagic[8] = {'C', 'V', 'O', 'L', 0, 0, 0, 1};

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void write_u32(std::FILE* f, std::uint32_t v) {
  unsigned char b[4] = {(unsigned char)(v & 0xff), (unsigned char)((v >> 8) & 0xff),
                        (unsigned char)((v >> 16) & 0xff), (unsigned char)((v >> 24) & 0xff)};
  if (std::fwrite(b, 1, 4, f) != 4) throw std::runtime_error("write failed");
}

std::uint32_t read_u32(std::FILE* f) {
  unsigned char b[4];
  if (std::fread(b, 1, 4, f) != 4) throw std::runtime_error("unexpected end of file");
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
         (std::uint32_t(b[3]) << 24);
}

}  // namespace

void save_cvol(const ComplexVolume& v, const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw std::runtime_error("save_cvol: cannot open " + path);
  if (std::fwrite(kCvolMagic, 1, 8, f.get()) != 8) throw std::runtime_error("write failed");
  write_u32(f.get(), std::uint32_t(v.dims.nx));
  write_u32(f.get(), std::uint32_t(v.dims.ny));
  write_u32(f.get(), std::uint32_t(v.dims.nz));
  std::vector<float> buf(2 * v.data.size());
  for (size_t i = 0; i < v.data.size(); ++i) {
    buf[2 * i] = float(v.data[i].real());
    buf[2 * i + 1] = float(v.data[i].imag());
  }
  if (!buf.empty() && std::fwrite(buf.data(), 4, buf.size(), f.get()) != buf.size())
    throw std::runtime_error("save_cvol: short write to " + path);
}

ComplexVolume load_cvol(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw std::runtime_error("load_cvol: cannot open " + path);
  char magic[8];
  if (std::fread(magic, 1, 8, f.get()) != 8 || std::memcmp(magic, kCvolMagic, 8) != 0)
    throw std::runtime_error("load_cvol: bad magic in " + path);
  Dims3 dims;
  dims.nx = int(read_u32(f.get()));
  dims.ny = int(read_u32(f.get()));
  dims.nz = int(read_u32(f.get()));
  if (dims.nx <= 0 || dims.ny <= 0 || dims.nz <= 0)
    throw std::runtime_error("load_cvol: bad dims in " + path);
  ComplexVolume v(dims);
  std::vector<float> buf(2 * v.data.size());
  if (std::fread(buf.data(), 4, buf.size(), f.get()) != buf.size())
    throw std::runtime_error("load_cvol: truncated file " + path);
  for (size_t i = 0; i < v.data.size(); ++i) v.data[i] = {buf[2 * i], buf[2 * i + 1]};
  return v;
}

}  // namespace wcrr
