#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wcrr3d/volume.hpp"

namespace wcrr {

/// Coil sensitivity maps S_c, sum-of-squares normalized so that
/// sum_c |S_c|^2 = 1 at every voxel.
struct CoilSet {
  std::vector<ComplexVolume> maps;

  int coils() const { return int(maps.size()); }
  Dims3 dims() const { return maps.empty() ? Dims3{} : maps.front().dims; }
};

/// Synthetic analytic maps: Gaussian magnitude profiles centered at
/// points spread on a sphere around the volume, each with a smooth
/// linear phase, then voxelwise SSOS-normalized.
CoilSet synth_coils(Dims3 dims, int n_coils, std::uint64_t seed = 0);

/// Checks sum_c |S_c|^2 = 1 within tol at every voxel.
bool coils_normalized(const CoilSet& coils, double tol = 1e-6);

/// Coil maps are stored as one CVOL per coil: <prefix>_c<k>.cvol.
void save_coils(const CoilSet& coils, const std::string& prefix);
CoilSet load_coils(const std::string& prefix, int n_coils);

}  // namespace wcrr
