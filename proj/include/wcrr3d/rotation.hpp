#pragma once

#include <array>
#include <vector>

#include "wcrr3d/volume.hpp"

namespace wcrr {

enum class Axis { X, Y, Z };

/// Quarter-turn rotation about a coordinate axis. Acts on volumes as an
/// axis permutation plus axis reversal and is therefore orthogonal.
///
/// Index convention (right-handed, flipped index n -> size-1-n):
///   Rot_X: out(x', y', z') = in(x', z', Nz-1-y'),  out dims (Nx, Nz, Ny)
///   Rot_Y: out(x', y', z') = in(Nx-1-z', y', x'),  out dims (Nz, Ny, Nx)
///   Rot_Z: out(x', y', z') = in(y', Ny-1-x', z'),  out dims (Ny, Nx, Nz)
struct Rotation {
  Axis axis = Axis::Z;
  int quarter_turns = 0;  // in {0,1,2,3}; 0 is the identity

  Rotation inverse() const { return {axis, (4 - quarter_turns) % 4}; }
  bool is_identity() const { return quarter_turns == 0; }

  /// 3x3 signed permutation matrix of the underlying point map.
  std::array<std::array<int, 3>, 3> matrix() const;
};

ComplexVolume rotate(const ComplexVolume& v, const Rotation& r);
Dims3 rotated_dims(Dims3 d, const Rotation& r);

/// Same index map on a plain scalar field; dst must hold src_dims.count()
/// values laid out x-fastest for the rotated dims.
void rotate_scalar_field(const double* src, Dims3 src_dims, const Rotation& r, double* dst);

/// Ordered set of rotations; the first element is always the identity.
/// `is_group` is true iff the set is closed under composition, which
/// is checked constructively on the underlying signed permutation
/// matrices when the set is built.
struct RotationSet {
  std::vector<Rotation> elements;
  bool is_group = false;

  static RotationSet build(std::vector<Rotation> rotations);

  /// {Id, Rot_X, Rot_Y, Rot_Z} with single quarter turns. Not closed
  /// under composition, so is_group is false.
  static RotationSet axis_quarter_turns();

  /// {Id, Rot_Z, Rot_Z^2, Rot_Z^3}; a cyclic group, is_group is true.
  static RotationSet z_cyclic_group();

  /// {Id} only.
  static RotationSet identity_only();

  size_t size() const { return elements.size(); }
};

}  // namespace wcrr
