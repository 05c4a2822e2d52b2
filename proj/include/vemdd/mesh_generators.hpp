#pragma once

#include "vemdd/mesh.hpp"

#include <cstdint>
#include <vector>

namespace vemdd {

/// Seed points for Voronoi meshes: std::mt19937_64 seeded with `rng_seed`,
/// each coordinate taken as (draw >> 11) * 2^-53, x then y. The conversion is
/// spelled out (rather than using std::uniform_real_distribution, whose
/// algorithm is implementation-defined) so seeds are identical on every platform.
[[nodiscard]] std::vector<Point> uniform_seeds_2d(std::size_t n_seeds, std::uint64_t rng_seed);

/// Voronoi diagram of `seeds` clipped to the unit square, one cell per seed
/// (cell i belongs to seeds[i]). Throws DuplicateSeedError if two seeds lie
/// within 1e-12 of each other.
[[nodiscard]] PolyMesh voronoi_from_seeds(const std::vector<Point>& seeds);

/// Voronoi mesh of `n_seeds` uniformly drawn seeds in the unit square.
[[nodiscard]] PolyMesh generate_voronoi_2d(std::size_t n_seeds, std::uint64_t rng_seed);

/// Uniform quadrilateral (dim=2) or hexahedral (dim=3) grid of the unit box.
[[nodiscard]] PolyMesh generate_structured_box(int dim, int n_per_axis);

} // namespace vemdd
