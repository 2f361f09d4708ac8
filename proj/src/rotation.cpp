#include "wcrr3d/rotation.hpp"

#include <stdexcept>

namespace wcrr {

namespace {

using Mat3 = std::array<std::array<int, 3>, 3>;

Mat3 identity_mat() { return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}; }

Mat3 matmul(const Mat3& a, const Mat3& b) {
  Mat3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      int s = 0;
      for (int k = 0; k < 3; ++k) s += a[i][k] * b[k][j];
      c[i][j] = s;
    }
  return c;
}

/// Single quarter turn as a signed permutation of point coordinates.
Mat3 quarter_mat(Axis axis) {
  switch (axis) {
    case Axis::X: return {{{1, 0, 0}, {0, 0, -1}, {0, 1, 0}}};   // (x,y,z)->(x,-z,y)
    case Axis::Y: return {{{0, 0, 1}, {0, 1, 0}, {-1, 0, 0}}};   // (x,y,z)->(z,y,-x)
    case Axis::Z: return {{{0, -1, 0}, {1, 0, 0}, {0, 0, 1}}};   // (x,y,z)->(-y,x,z)
  }
  return identity_mat();
}

int dim_component(Dims3 d, int i) { return i == 0 ? d.nx : (i == 1 ? d.ny : d.nz); }

}  // namespace

Mat3 Rotation::matrix() const {
  Mat3 m = identity_mat();
  for (int q = 0; q < quarter_turns % 4; ++q) m = matmul(quarter_mat(axis), m);
  return m;
}

Dims3 rotated_dims(Dims3 d, const Rotation& r) {
  const Mat3 m = r.matrix();
  // Output extent along axis i is the input extent along the axis that
  // row i of the matrix reads from.
  int out[3];
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (m[i][j] != 0) out[i] = dim_component(d, j);
    }
  }
  return {out[0], out[1], out[2]};
}

ComplexVolume rotate(const ComplexVolume& v, const Rotation& r) {
  if (r.quarter_turns % 4 == 0) return v;
  const Mat3 m = r.matrix();
  const Dims3 od = rotated_dims(v.dims, r);
  ComplexVolume out(od);

  // Invert the index map: for output index n' along axis i, the source
  // index along axis j (the nonzero column of row i) is n' if the sign
  // is +1 and size-1-n' if the sign is -1.
  int src_axis[3], src_sign[3];
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (m[i][j] != 0) {
        src_axis[i] = j;
        src_sign[i] = m[i][j];
      }
    }
  }

  const int in_dim[3] = {v.dims.nx, v.dims.ny, v.dims.nz};
  for (int z = 0; z < od.nz; ++z) {
    for (int y = 0; y < od.ny; ++y) {
      for (int x = 0; x < od.nx; ++x) {
        const int oidx[3] = {x, y, z};
        int s[3];
        for (int i = 0; i < 3; ++i) {
          const int j = src_axis[i];
          s[j] = src_sign[i] > 0 ? oidx[i] : in_dim[j] - 1 - oidx[i];
        }
        out.at(x, y, z) = v.at(s[0], s[1], s[2]);
      }
    }
  }
  return out;
}

void rotate_scalar_field(const double* src, Dims3 src_dims, const Rotation& r, double* dst) {
  const Dims3 od = rotated_dims(src_dims, r);
  const Mat3 m = r.matrix();
  int src_axis[3], src_sign[3];
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (m[i][j] != 0) {
        src_axis[i] = j;
        src_sign[i] = m[i][j];
      }
    }
  }
  const int in_dim[3] = {src_dims.nx, src_dims.ny, src_dims.nz};
  std::int64_t o = 0;
  for (int z = 0; z < od.nz; ++z) {
    for (int y = 0; y < od.ny; ++y) {
      for (int x = 0; x < od.nx; ++x, ++o) {
        const int oidx[3] = {x, y, z};
        int s[3];
        for (int i = 0; i < 3; ++i) {
          const int j = src_axis[i];
          s[j] = src_sign[i] > 0 ? oidx[i] : in_dim[j] - 1 - oidx[i];
        }
        dst[o] = src[s[0] + std::int64_t(src_dims.nx) * (s[1] + std::int64_t(src_dims.ny) * s[2])];
      }
    }
  }
}

RotationSet RotationSet::build(std::vector<Rotation> rotations) {
  if (rotations.empty() || !rotations.front().is_identity())
    throw std::invalid_argument("RotationSet: first element must be the identity");
  std::vector<Mat3> mats;
  for (const Rotation& r : rotations) {
    const Mat3 m = r.matrix();
    for (const Mat3& seen : mats) {
      if (seen == m) throw std::invalid_argument("RotationSet: duplicate element");
    }
    mats.push_back(m);
  }

  bool closed = true;
  for (const Mat3& a : mats) {
    for (const Mat3& b : mats) {
      const Mat3 ab = matmul(a, b);
      bool found = false;
      for (const Mat3& seen : mats) {
        if (seen == ab) { found = true; break; }
      }
      if (!found) { closed = false; break; }
    }
    if (!closed) break;
  }

  RotationSet set;
  set.elements = std::move(rotations);
  set.is_group = closed;
  return set;
}

RotationSet RotationSet::axis_quarter_turns() {
  return build({{Axis::Z, 0}, {Axis::X, 1}, {Axis::Y, 1}, {Axis::Z, 1}});
}

RotationSet RotationSet::z_cyclic_group() {
  return build({{Axis::Z, 0}, {Axis::Z, 1}, {Axis::Z, 2}, {Axis::Z, 3}});
}

RotationSet RotationSet::identity_only() { return build({{Axis::Z, 0}}); }

}  // namespace wcrr
