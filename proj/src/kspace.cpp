#include "wcrr3d/kspace.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>

namespace wcrr {

double norm(const KSpaceData& y) {
  double s = 0;
  for (const cplx& c : y.samples) s += std::norm(c);
  return std::sqrt(s);
}

cplx inner(const KSpaceData& a, const KSpaceData& b) {
  if (a.coils != b.coils || a.samples_per_coil != b.samples_per_coil)
    throw std::invalid_argument("inner: k-space shape mismatch");
  cplx s = 0;
  for (size_t i = 0; i < a.samples.size(); ++i) s += std::conj(a.samples[i]) * b.samples[i];
  return s;
}

std::vector<double> to_real_vector(const KSpaceData& y) {
  std::vector<double> r(2 * y.samples.size());
  for (size_t i = 0; i < y.samples.size(); ++i) {
    r[2 * i] = y.samples[i].real();
    r[2 * i + 1] = y.samples[i].imag();
  }
  return r;
}

KSpaceData from_real_vector(const std::vector<double>& r, int coils, std::int64_t m) {
  if (std::int64_t(r.size()) != 2 * coils * m)
    throw std::invalid_argument("from_real_vector: length mismatch");
  KSpaceData y(coils, m);
  for (size_t i = 0; i < y.samples.size(); ++i) y.samples[i] = {r[2 * i], r[2 * i + 1]};
  return y;
}

namespace {

constexpr char kKdatMagic[8] = {'K', 'D', 'A', 'T', 0, 0, 0, 1};

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

void save_kdat(const KSpaceData& y, const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw std::runtime_error("save_kdat: cannot open " + path);
  if (std::fwrite(kKdatMagic, 1, 8, f.get()) != 8) throw std::runtime_error("write failed");
  write_u32(f.get(), std::uint32_t(y.coils));
  write_u32(f.get(), std::uint32_t(y.samples_per_coil));
  std::vector<float> buf(2 * y.samples.size());
  for (size_t i = 0; i < y.samples.size(); ++i) {
    buf[2 * i] = float(y.samples[i].real());
    buf[2 * i + 1] = float(y.samples[i].imag());
  }
  if (!buf.empty() && std::fwrite(buf.data(), 4, buf.size(), f.get()) != buf.size())
    throw std::runtime_error("save_kdat: short write to " + path);
}

KSpaceData load_kdat(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw std::runtime_error("load_kdat: cannot open " + path);
  char magic[8];
  if (std::fread(magic, 1, 8, f.get()) != 8 || std::memcmp(magic, kKdatMagic, 8) != 0)
    throw std::runtime_error("load_kdat: bad magic in " + path);
  const int coils = int(read_u32(f.get()));
  const std::int64_t m = std::int64_t(read_u32(f.get()));
  if (coils <= 0 || m <= 0) throw std::runtime_error("load_kdat: bad header in " + path);
  KSpaceData y(coils, m);
  std::vector<float> buf(2 * y.samples.size());
  if (std::fread(buf.data(), 4, buf.size(), f.get()) != buf.size())
    throw std::runtime_error("load_kdat: truncated file " + path);
  for (size_t i = 0; i < y.samples.size(); ++i) y.samples[i] = {buf[2 * i], buf[2 * i + 1]};
  return y;
}

}  // namespace wcrr
