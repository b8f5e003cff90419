#pragma once

#include <cstdint>
#include <vector>

#include "tslab/exponents.hpp"

namespace tslab {

// Uniform lattice {origin + h * i : 0 <= i < extents} in R^n, n <= 3.
// Each point carries measure h^n.  Distances are Euclidean; all ball
// membership tests reduce to exact integer squared index distances compared
// against (r/h)^2, so the same (y, r) query is answered identically by every
// code path.
struct SpaceGrid {
  int dim = 1;
  std::vector<int> extents;
  double h = 1.0;
  std::vector<double> origin;

  static SpaceGrid make(std::vector<int> extents, double h,
                        std::vector<double> origin = {});

  std::int64_t num_points() const;
  double point_measure() const;          // h^dim
  double length(int axis) const { return extents[axis] * h; }
  double max_length() const;             // largest axis length

  void unflatten(std::int64_t s, int* idx) const;
  std::int64_t flatten(const int* idx) const;
  std::int64_t sq_index_dist(std::int64_t a, std::int64_t b) const;
  double dist(std::int64_t a, std::int64_t b) const;

  // (r/h)^2, the squared-radius threshold in index units.
  double sq_radius(double r) const { return (r / h) * (r / h); }
  // Strict membership d(a, b) < r.
  bool in_ball(std::int64_t a, std::int64_t b, double r) const {
    return static_cast<double>(sq_index_dist(a, b)) < sq_radius(r);
  }
};

// Geometric time levels t_j = t_min * 2^(j / per_octave), j = 0..count-1.
// The log-measure weight of one level is w = ln(2) / per_octave, so sums of
// w over levels in (a, b] reproduce integrals of dt/t exactly on aligned
// ranges.  ratio() = 2^(1/per_octave).
struct TimeLevels {
  double t_min = 1.0;
  int per_octave = 1;
  int count = 1;
  std::vector<double> t;

  static TimeLevels make(double t_min, int per_octave, int count);
  double log_weight() const;
  double ratio() const;
  double t_max() const { return t.back(); }
};

struct Ball {
  std::int64_t center = 0;
  double radius = 0.0;
};

// Largest integer dx >= 0 with dx^2 < u (strict) or dx^2 <= u; -1 if none.
std::int64_t max_axis_offset(double u, bool strict);

double ball_volume(const SpaceGrid& g, std::int64_t x, double r);
std::int64_t ball_count(const SpaceGrid& g, std::int64_t x, double r);
std::vector<std::int64_t> ball_points(const SpaceGrid& g, std::int64_t x, double r);

// Exact Euclidean distance from every grid point to the nearest point of the
// complement of {mask != 0}.  Returns +inf where the complement is empty.
std::vector<double> dist_to_complement(const SpaceGrid& g,
                                       const std::vector<char>& mask);

enum class RegionKind {
  cone,             // Gamma(x) = {(y,t) : d(x,y) < aperture * t}
  translated_cone,  // Gamma(x) + s: {(y,t) : t > s, d(x,y) < t - s}
  tent,             // T(B) = {(y,t) : d(y, c_B) + t <= r_B}
  set_tent,         // T(O) = {(y,t) : d(y, O^c) >= t}
  whitney,          // B(x, c0*t) x (t/c1, c1*t), open in t
  cylinder,         // B(c, r) x (a, b), open in t
};

// An explicit half-space index set. Cells are flat indices s * J + j with s a
// spatial index and j a level index, sorted ascending.
struct Region {
  RegionKind kind;
  std::vector<std::int64_t> cells;
};

Region cone_region(const SpaceGrid& g, const TimeLevels& tl, std::int64_t x,
                   double aperture = 1.0);
Region translated_cone_region(const SpaceGrid& g, const TimeLevels& tl,
                              std::int64_t x, double shift);
Region tent_region(const SpaceGrid& g, const TimeLevels& tl, const Ball& b);
Region set_tent_region(const SpaceGrid& g, const TimeLevels& tl,
                       const std::vector<char>& mask);
Region whitney_region(const SpaceGrid& g, const TimeLevels& tl, std::int64_t x,
                      int j, double c0, double c1);
Region cylinder_region(const SpaceGrid& g, const TimeLevels& tl, const Ball& b,
                       double t_lo, double t_hi);

// Axis-aligned dyadic cube of side ell = 2^k paired with the level band
// (ell, 2*ell].  Spatial extent is the half-open index box [lo, hi); levels
// are [j_lo, j_hi].  Grid points on a cube face belong to the cube whose
// half-open interval contains them, so the cubes partition the grid exactly.
struct DyadicCube {
  int k = 0;
  double ell = 1.0;
  std::vector<int> lo, hi;
  int j_lo = 0, j_hi = -1;
};

// Whitney cubes covering the whole half-space grid.  Requires h to be a power
// of two, origin components to be multiples of h, and the smallest band side
// not to undercut h; anything else is a configuration error.
std::vector<DyadicCube> dyadic_whitney_cover(const SpaceGrid& g,
                                             const TimeLevels& tl);

}  // namespace tslab
